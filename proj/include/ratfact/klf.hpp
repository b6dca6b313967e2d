#pragma once

#include <functional>
#include <sstream>
#include <string>

#include "ratfact/dss.hpp"
#include "ratfact/pencil.hpp"

namespace ratfact {

enum class BadRegion { none, finite_instability, all_finite, custom };

// Disjoint split of the extended complex plane into a good part C_g and a
// bad part C_b.
struct RegionPartition {
  TimeDomain ts = TimeDomain::continuous;
  BadRegion bad = BadRegion::finite_instability;
  bool infinite_is_bad = false;
  // custom: returns true for points of C_b
  std::function<bool(Complex)> custom_bad;

  // Stability: C_b is the open right half-plane (continuous) or the exterior
  // of the closed unit disc (discrete); infinity is bad in discrete time.
  static RegionPartition stability(TimeDomain ts) {
    RegionPartition r;
    r.ts = ts;
    r.bad = BadRegion::finite_instability;
    r.infinite_is_bad = ts == TimeDomain::discrete;
    return r;
  }
  static RegionPartition none(TimeDomain ts) {
    RegionPartition r;
    r.ts = ts;
    r.bad = BadRegion::none;
    r.infinite_is_bad = false;
    return r;
  }
  static RegionPartition all(TimeDomain ts) {
    RegionPartition r;
    r.ts = ts;
    r.bad = BadRegion::all_finite;
    r.infinite_is_bad = true;
    return r;
  }
};

enum class EigenClass { good, bad, boundary };

inline const char* to_string(EigenClass c) {
  switch (c) {
    case EigenClass::good: return "good";
    case EigenClass::bad: return "bad";
    default: return "boundary";
  }
}

// Signed distance of a finite point to the stability boundary; positive on
// the unstable side.
inline double instability_margin(Complex z, TimeDomain ts) {
  return ts == TimeDomain::continuous ? z.real() : std::abs(z) - 1.0;
}

inline EigenClass classify_finite(Complex z, const RegionPartition& region,
                                  const ToleranceConfig& tol) {
  switch (region.bad) {
    case BadRegion::none:
      return EigenClass::good;
    case BadRegion::all_finite:
      return EigenClass::bad;
    case BadRegion::custom: {
      if (!region.custom_bad) throw InputError("custom region without predicate");
      const bool b = region.custom_bad(z);
      if (b != region.custom_bad(std::conj(z)))
        throw InputError("custom region is not symmetric about the real axis");
      return b ? EigenClass::bad : EigenClass::good;
    }
    case BadRegion::finite_instability:
    default: {
      const double d = instability_margin(z, region.ts);
      if (tol.boundary_offset > 0 && std::abs(d) <= tol.boundary_offset)
        return EigenClass::boundary;
      return d > tol.eig_atol ? EigenClass::bad : EigenClass::good;
    }
  }
}

inline EigenClass classify_eigenvalue(Complex alpha, double beta,
                                      const RegionPartition& region,
                                      const ToleranceConfig& tol = {}) {
  if (alpha == Complex(0.0) && beta == 0.0)
    throw InputError("classify_eigenvalue: (alpha, beta) = (0, 0)");
  if (GeneralizedEigenvalue{alpha, beta}.is_infinite())
    return region.infinite_is_bad ? EigenClass::bad : EigenClass::good;
  return classify_finite(alpha / beta, region, tol);
}

// Block structure
//   U·[A − λE, B]·Z = [A_rg − λE_rg, *,             *,    *  ]
//                     [0,            A_bl − λE_bl, B_bl, *  ]
//                     [0,            0,             0,    B_n]
//   [C, D]·Z        = [0,            C_bl,          D_bl, *  ]
// with column widths n_c, n_bl, r, m_n and row heights n_rg, n_bl, m_n.
struct SpecialKlf {
  Matrix U;  // n×n, acts on the state rows
  Matrix Z;  // (n+m)×(n+m)
  Index n = 0, m = 0, p = 0;
  Index n_rg = 0, n_c = 0, n_bl = 0, r = 0, m_n = 0;
  Matrix At, Et, Ct;  // U[A B]Z, U[E 0]Z, [C D]Z
  Matrix A_rg, E_rg, A_bl, E_bl, B_bl, C_bl, D_bl, B_n;
  RegionPartition region;
  bool reciprocal = false;  // reduction done in ω = 1/(λ − shift)
  double shift = 0.0;
  std::vector<Complex> bad_zeros;  // finite C_b zeros moved into the bl block
};

namespace detail {

struct SklfCore {
  Matrix Ub;  // n×n basis (columns = new rows)
  Matrix Z;
  Index n_rg = 0, n_c = 0, m_n = 0;
  std::vector<Complex> bad_zeros;
};

// Reduction of M − λN (n×k) with constant output rows O. The rows where
// [E 0] vanishes are split off first (B_n). In reciprocal mode the remaining
// pencil is handled as (−N1, −(M1 − aN1)) in ω = 1/(λ − a).
inline SklfCore sklf_core(const Matrix& M, const Matrix& N, const Matrix& O,
                          bool reciprocal, double a,
                          const RegionPartition& region,
                          const ToleranceConfig& tol, double atol) {
  const Index n = M.rows(), k = M.cols();
  SklfCore out;
  Matrix UL = null_space(N.transpose(), atol), UR = Matrix::Identity(n, n);
  Matrix Zb(k, 0), Zr = Matrix::Identity(k, k);
  if (UL.cols() > 0) {
    const Matrix A2 = UL.transpose() * M;
    Zb = orth(A2.transpose(), atol);
    if (Zb.cols() != UL.cols())
      throw StructureError("singular system pencil: [A B] loses row rank on N(Eᵀ)");
    Zr = complement(Zb);
    UR = complement(UL);
  }
  const Matrix Ml = UR.transpose() * M * Zr;
  const Matrix Nl = UR.transpose() * N * Zr;
  const Matrix O1 = O * Zr;
  const Index rho = Ml.rows(), k1 = Ml.cols();
  if (numerical_rank(Nl, atol) != rho)
    throw StructureError(
        "not stabilizable at infinity: rank [E B] < n; use an irreducible realization");
  const Matrix M1 = reciprocal ? Matrix(-Nl) : Ml;
  const Matrix N1 = reciprocal ? Matrix(-(Ml - a * Nl)) : Nl;
  const Matrix Irho = Matrix::Identity(rho, rho);

  // Largest output-nulling subspace with M1·W ⊆ N1·W.
  Matrix W = null_space(O1, atol);
  while (W.cols() > 0) {
    const Matrix X = orth(N1 * W, atol);
    const Matrix K = null_space((Irho - X * X.transpose()) * M1 * W, atol);
    if (K.cols() == W.cols()) break;
    W = W * K;
  }
  // Right chains inside W.
  Matrix S(k1, 0);
  Index chains = 0;
  if (W.cols() > 0) {
    const Matrix NW = N1 * W;
    S = W * null_space(NW, atol);
    chains = S.cols();
    for (;;) {
      const Matrix Y = orth(M1 * S, atol);
      const Matrix Snew = W * null_space((Irho - Y * Y.transpose()) * NW, atol);
      if (Snew.cols() <= S.cols()) break;
      S = Snew;
    }
  }
  // Each right chain has one row less than columns, which fixes both image
  // dimensions without a further rank decision.
  const Matrix XW = detail::leading_basis(hcat(M1 * W, N1 * W), W.cols() - chains);
  const Matrix XS = detail::leading_basis(hcat(M1 * S, N1 * S), S.cols() - chains);
  const Matrix Wq = W.cols() > 0 ? Matrix(W * complement(W.transpose() * S))
                                 : Matrix(k1, 0);
  const Matrix Xq = XW.cols() > 0 ? Matrix(XW * complement(XW.transpose() * XS))
                                  : Matrix(rho, 0);
  if (Wq.cols() != Xq.cols())
    throw StructureError("special Kronecker-like form: non-square regular part");
  const Index nq = Wq.cols();

  Matrix Qq = Matrix::Identity(nq, nq), Zq = Matrix::Identity(nq, nq);
  Index ng = 0;
  if (nq > 0) {
    const Matrix Aq = Xq.transpose() * M1 * Wq;
    const Matrix Eq = Xq.transpose() * N1 * Wq;
    Matrix Al = Aq, El = Eq;
    Index ni = 0;
    if (reciprocal) {
      El = -Aq;
      Al = -Eq - a * Aq;
      // infinite zeros are good in this mode and go first
      InfiniteDeflation d = deflate_infinite_top(Al, El, atol);
      ni = d.n_inf;
      Qq = d.Q;
      Zq = d.Z;
      Al = d.Q.transpose() * Al * d.Z;
      El = d.Q.transpose() * El * d.Z;
    }
    const Index nf = nq - ni;
    Index nfg = 0;
    if (nf > 0) {
      std::string boundary;
      auto good = [&](const GeneralizedEigenvalue& e) {
        const EigenClass c = e.is_infinite()
                                 ? (region.infinite_is_bad ? EigenClass::bad
                                                           : EigenClass::good)
                                 : classify_finite(e.value(), region, tol);
        if (c == EigenClass::boundary) {
          std::ostringstream os;
          os << e.value();
          boundary = os.str();
        }
        return c == EigenClass::good;
      };
      OrderedSchurResult qz = ordered_generalized_schur(
          Al.bottomRightCorner(nf, nf), El.bottomRightCorner(nf, nf), good);
      if (!boundary.empty())
        throw BoundaryError("zero " + boundary +
                            " lies within the boundary strip of the region");
      Qq.rightCols(nf) = Qq.rightCols(nf) * qz.Q;
      Zq.rightCols(nf) = Zq.rightCols(nf) * qz.Z;
      nfg = qz.selected;
      for (Index i = nfg; i < nf; ++i)
        out.bad_zeros.push_back(qz.eigenvalues[i].value());
    }
    ng = ni + nfg;
  }
  const Matrix Wg = hcat(S, Wq * Zq.leftCols(ng));
  const Matrix Xg = hcat(XS, Xq * Qq.leftCols(ng));
  const Matrix Zred = hcat(Wg, complement(Wg));
  const Matrix Ured = hcat(Xg, complement(Xg));
  out.n_c = Wg.cols();
  out.n_rg = Xg.cols();
  out.m_n = UL.cols();
  out.Ub = hcat(UR * Ured, UL);
  out.Z = hcat(Zr * Zred, Zb);
  return out;
}

}  // namespace detail

inline SpecialKlf special_klf(const DescriptorSystem& sys,
                              const RegionPartition& region,
                              const ToleranceConfig& tol = {}) {
  tol.validate();
  if (region.ts != sys.ts)
    throw InputError("region and system have different time-domain tags");
  const Index n = sys.n(), m = sys.m(), p = sys.p(), k = n + m;
  if (n > 0 && pencil_is_singular(sys.A, sys.E))
    throw StructureError("special_klf: pencil A − λE is singular");
  const double nrm = detail::system_norm(sys);
  const double atol = tol.structural_threshold(nrm, n + m + p);
  Matrix M(n, k), N = Matrix::Zero(n, k), O(p, k);
  M << sys.A, sys.B;
  N.leftCols(n) = sys.E;
  O << sys.C, sys.D;

  auto [SM, SN] = system_pencil(sys);
  const Index srank = pencil_normal_rank(SM, SN, atol);
  const double scale = std::max(1.0, sys.A.norm()) / std::max(1.0, sys.E.norm());
  const bool reciprocal = !region.infinite_is_bad;
  const std::vector<double> shifts =
      reciprocal ? std::vector<double>{0.6180339887498949, -1.3247179572447460,
                                       2.2360679774997896, -0.4142135623730950,
                                       3.6502815398728847, -5.1961524227066320}
                 : std::vector<double>{0.0};

  std::string last_error = "no admissible shift";
  for (double c : shifts) {
    const double a = c * scale;
    if (reciprocal && n > 0) {
      if (detail::shifted_rcond(sys.A, sys.E, a) < 1e-8) continue;
      if (numerical_rank(SM - a * SN, atol) != srank) continue;
    }
    detail::SklfCore core =
        detail::sklf_core(M, N, O, reciprocal, a, region, tol, atol);
    SpecialKlf s;
    s.n = n;
    s.m = m;
    s.p = p;
    s.region = region;
    s.reciprocal = reciprocal;
    s.shift = a;
    s.bad_zeros = core.bad_zeros;
    s.n_rg = core.n_rg;
    s.n_c = core.n_c;
    s.m_n = core.m_n;
    s.n_bl = n - s.n_rg - s.m_n;
    s.r = k - s.n_c - s.n_bl - s.m_n;
    if (s.n_bl < 0 || s.r < 0)
      throw StructureError("special Kronecker-like form: inconsistent block sizes");
    s.Z = core.Z;
    s.U = core.Ub.transpose();

    // Column compression of the E part of the bl rows: [E_bl 0].
    const Index w = s.n_bl + s.r;
    if (w > 0 && s.n_bl > 0) {
      const Matrix Ebl = s.U.middleRows(s.n_rg, s.n_bl) * N * s.Z.middleCols(s.n_c, w);
      const Matrix Kn = null_space(Ebl, atol);
      if (Kn.cols() != s.r) {
        last_error = "E_bl is singular";
        continue;
      }
      const Matrix Qc = hcat(complement(Kn), Kn);
      s.Z.middleCols(s.n_c, w) = s.Z.middleCols(s.n_c, w) * Qc;
    }
    s.At = s.U * M * s.Z;
    s.Et = s.U * N * s.Z;
    s.Ct = O * s.Z;
    const Index cb = s.n_c, cr = s.n_c + s.n_bl, cn = cr + s.r;
    const Index rb = s.n_rg, rn = s.n_rg + s.n_bl;
    s.A_rg = s.At.topLeftCorner(s.n_rg, s.n_c);
    s.E_rg = s.Et.topLeftCorner(s.n_rg, s.n_c);
    s.A_bl = s.At.block(rb, cb, s.n_bl, s.n_bl);
    s.E_bl = s.Et.block(rb, cb, s.n_bl, s.n_bl);
    s.B_bl = s.At.block(rb, cr, s.n_bl, s.r);
    s.C_bl = s.Ct.block(0, cb, p, s.n_bl);
    s.D_bl = s.Ct.block(0, cr, p, s.r);
    s.B_n = s.At.block(rn, cn, s.m_n, s.m_n);
    if (s.n_bl > 0 && detail::shifted_rcond(s.E_bl, Matrix::Zero(s.n_bl, s.n_bl), 0.0) <
                          1e-12) {
      last_error = "E_bl is ill-conditioned";
      if (reciprocal) continue;
      throw StructureError(last_error);
    }

    // C_b-stabilizability of (A_bl − λE_bl, B_bl).
    if (s.n_bl > 0 && region.bad != BadRegion::none) {
      for (const auto& e : generalized_eigenvalues(s.A_bl, s.E_bl)) {
        const Complex z = e.value();
        if (classify_finite(z, region, tol) != EigenClass::bad) continue;
        CMatrix P(s.n_bl, s.n_bl + s.r);
        P << s.A_bl.cast<Complex>() - z * s.E_bl.cast<Complex>(),
            s.B_bl.cast<Complex>();
        if (complex_rank(P, 1e3 * double(s.n_bl + s.r) * kEps) < s.n_bl) {
          std::ostringstream os;
          os << "not C_b-stabilizable: uncontrollable eigenvalue " << z;
          throw StructureError(os.str());
        }
      }
    }
    return s;
  }
  throw StructureError("special Kronecker-like form failed: " + last_error);
}

}  // namespace ratfact
