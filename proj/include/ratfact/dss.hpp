#pragma once

#include <algorithm>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "ratfact/numkernel.hpp"
#include "ratfact/pencil.hpp"

namespace ratfact {

enum class TimeDomain { continuous, discrete };

inline const char* to_string(TimeDomain ts) {
  return ts == TimeDomain::continuous ? "continuous" : "discrete";
}

// Realization (A − λE, B, C, D) of G(λ) = C(λE − A)⁻¹B + D.
struct DescriptorSystem {
  Matrix A, E, B, C, D;
  bool e_identity = true;
  TimeDomain ts = TimeDomain::continuous;

  Index n() const { return A.rows(); }
  Index m() const { return D.cols(); }
  Index p() const { return D.rows(); }
};

inline DescriptorSystem make_dss(const Matrix& A, std::optional<Matrix> E,
                                 const Matrix& B, const Matrix& C,
                                 const Matrix& D,
                                 TimeDomain ts = TimeDomain::continuous) {
  const Index n = A.rows();
  if (A.cols() != n) throw InputError("A must be square");
  if (E && (E->rows() != n || E->cols() != n))
    throw InputError("E must have the dimensions of A");
  if (B.rows() != n) throw InputError("B row count must equal the order of A");
  if (C.cols() != n)
    throw InputError("C column count must equal the order of A");
  if (D.rows() != C.rows() || D.cols() != B.cols())
    throw InputError("D must be p×m with p = rows(C), m = cols(B)");
  for (const Matrix* M : {&A, &B, &C, &D}) require_finite(*M, "system matrix");
  DescriptorSystem s;
  s.A = A;
  s.B = B;
  s.C = C;
  s.D = D;
  s.ts = ts;
  if (E) {
    require_finite(*E, "E");
    s.E = *E;
    s.e_identity = false;
  } else {
    s.E = Matrix::Identity(n, n);
    s.e_identity = true;
  }
  return s;
}

inline DescriptorSystem static_gain(const Matrix& D,
                                    TimeDomain ts = TimeDomain::continuous) {
  return make_dss(Matrix(0, 0), std::nullopt, Matrix(0, D.cols()),
                  Matrix(D.rows(), 0), D, ts);
}

inline DescriptorSystem identity_system(Index m,
                                        TimeDomain ts = TimeDomain::continuous) {
  return static_gain(Matrix::Identity(m, m), ts);
}

namespace detail {

inline DescriptorSystem raw(Matrix A, Matrix E, Matrix B, Matrix C, Matrix D,
                            TimeDomain ts) {
  DescriptorSystem s;
  s.A = std::move(A);
  s.E = std::move(E);
  s.B = std::move(B);
  s.C = std::move(C);
  s.D = std::move(D);
  s.ts = ts;
  s.e_identity = s.E.isIdentity(0.0);
  return s;
}

inline double system_norm(const DescriptorSystem& s) {
  return std::max({s.A.norm(), s.E.norm(), s.B.norm(), s.C.norm(),
                   s.D.norm(), 1.0});
}

}  // namespace detail

// Real 2k×2l embedding [Re −Im; Im Re] of a complex matrix; keeps all
// decompositions in real arithmetic.
inline Matrix real_embedding(const CMatrix& M) {
  const Index r = M.rows(), c = M.cols();
  Matrix R(2 * r, 2 * c);
  R << M.real(), -M.imag(), M.imag(), M.real();
  return R;
}

inline CMatrix evaluate(const DescriptorSystem& sys, Complex lambda) {
  const Index n = sys.n();
  CMatrix G = sys.D.cast<Complex>();
  if (n == 0) return G;
  if (!std::isfinite(lambda.real()) || !std::isfinite(lambda.imag()))
    throw InputError("evaluation point must be finite");
  const CMatrix P = lambda * sys.E.cast<Complex>() - sys.A.cast<Complex>();
  Eigen::PartialPivLU<Matrix> lu(real_embedding(P));
  const double rc = lu.rcond();
  if (!(rc > 10.0 * n * kEps))
    throw EvaluationError("evaluation point is a pole of the system", rc);
  Matrix rhs = Matrix::Zero(2 * n, sys.m());
  rhs.topRows(n) = sys.B;
  const Matrix x = lu.solve(rhs);
  CMatrix X(n, sys.m());
  X.real() = x.topRows(n);
  X.imag() = x.bottomRows(n);
  G += sys.C.cast<Complex>() * X;
  return G;
}

// System pencil S(λ) = M − λN = [A − λE, B; C, D].
inline std::pair<Matrix, Matrix> system_pencil(const DescriptorSystem& s) {
  const Index n = s.n(), m = s.m(), p = s.p();
  Matrix M(n + p, n + m), N = Matrix::Zero(n + p, n + m);
  M << s.A, s.B, s.C, s.D;
  N.topLeftCorner(n, n) = s.E;
  return {M, N};
}

inline void require_same_ts(const DescriptorSystem& a,
                            const DescriptorSystem& b) {
  if (a.ts != b.ts) throw InputError("time-domain tags differ");
}

inline DescriptorSystem transpose(const DescriptorSystem& s) {
  DescriptorSystem t = detail::raw(s.A.transpose(), s.E.transpose(),
                                   s.C.transpose(), s.B.transpose(),
                                   s.D.transpose(), s.ts);
  t.e_identity = s.e_identity;
  return t;
}

inline DescriptorSystem stack_vertical(const DescriptorSystem& a,
                                       const DescriptorSystem& b) {
  require_same_ts(a, b);
  if (a.m() != b.m()) throw InputError("stack_vertical: input counts differ");
  return detail::raw(blkdiag(a.A, b.A), blkdiag(a.E, b.E), vcat(a.B, b.B),
                     blkdiag(a.C, b.C), vcat(a.D, b.D), a.ts);
}

inline DescriptorSystem stack_horizontal(const DescriptorSystem& a,
                                         const DescriptorSystem& b) {
  require_same_ts(a, b);
  if (a.p() != b.p())
    throw InputError("stack_horizontal: output counts differ");
  return detail::raw(blkdiag(a.A, b.A), blkdiag(a.E, b.E), blkdiag(a.B, b.B),
                     hcat(a.C, b.C), hcat(a.D, b.D), a.ts);
}

// G1·G2
inline DescriptorSystem series(const DescriptorSystem& g1,
                               const DescriptorSystem& g2) {
  require_same_ts(g1, g2);
  if (g1.m() != g2.p()) throw InputError("series: inner dimensions differ");
  const Index n1 = g1.n(), n2 = g2.n();
  Matrix A = Matrix::Zero(n1 + n2, n1 + n2);
  A.topLeftCorner(n1, n1) = g1.A;
  A.topRightCorner(n1, n2) = g1.B * g2.C;
  A.bottomRightCorner(n2, n2) = g2.A;
  return detail::raw(A, blkdiag(g1.E, g2.E), vcat(g1.B * g2.D, g2.B),
                     hcat(g1.C, g1.D * g2.C), g1.D * g2.D, g1.ts);
}

inline DescriptorSystem scale_output(const DescriptorSystem& s, double k) {
  DescriptorSystem t = s;
  t.C *= k;
  t.D *= k;
  return t;
}

// Inverse of a square system, realized with the input as extra state.
inline DescriptorSystem inverse(const DescriptorSystem& s) {
  if (s.p() != s.m()) throw InputError("inverse: system must be square");
  const Index n = s.n(), m = s.m();
  Matrix A(n + m, n + m);
  A << s.A, s.B, s.C, s.D;
  Matrix B = Matrix::Zero(n + m, m);
  B.bottomRows(m) = -Matrix::Identity(m, m);
  Matrix C = Matrix::Zero(m, n + m);
  C.rightCols(m) = Matrix::Identity(m, m);
  return detail::raw(A, blkdiag(s.E, Matrix::Zero(m, m)), B, C,
                     Matrix::Zero(m, m), s.ts);
}

// Eliminates non-dynamic modes (violations of A·N(E) ⊆ R(E)) by a Schur
// complement on the invertible part of A restricted to N(E).
inline DescriptorSystem remove_nondynamic(const DescriptorSystem& s,
                                          const ToleranceConfig& tol = {}) {
  const Index n = s.n();
  if (n == 0 || s.e_identity) return s;
  const double atol = tol.structural_threshold(detail::system_norm(s), n);
  Eigen::JacobiSVD<Matrix> se(s.E, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Index rho = 0;
  for (Index i = 0; i < n; ++i)
    if (se.singularValues()(i) > atol) ++rho;
  if (rho == n) return s;
  Matrix U = se.matrixU(), V = se.matrixV();
  Matrix A = U.transpose() * s.A * V;
  const Index q = n - rho;
  Eigen::JacobiSVD<Matrix> sa(A.bottomRightCorner(q, q),
                              Eigen::ComputeFullU | Eigen::ComputeFullV);
  Index tau = 0;
  for (Index i = 0; i < q; ++i)
    if (sa.singularValues()(i) > atol) ++tau;
  if (tau == 0) return s;
  U.rightCols(q) = U.rightCols(q) * sa.matrixU();
  V.rightCols(q) = V.rightCols(q) * sa.matrixV();
  A = U.transpose() * s.A * V;
  const Matrix E = U.transpose() * s.E * V;
  const Matrix B = U.transpose() * s.B;
  const Matrix C = s.C * V;

  std::vector<Index> keep, drop;
  for (Index i = 0; i < n; ++i)
    (i >= rho && i < rho + tau ? drop : keep).push_back(i);
  auto pick = [](const Matrix& M, const std::vector<Index>& r,
                 const std::vector<Index>& c) {
    Matrix out(r.size(), c.size());
    for (std::size_t i = 0; i < r.size(); ++i)
      for (std::size_t j = 0; j < c.size(); ++j) out(i, j) = M(r[i], c[j]);
    return out;
  };
  std::vector<Index> allB(B.cols()), allC(C.rows());
  for (Index j = 0; j < B.cols(); ++j) allB[j] = j;
  for (Index i = 0; i < C.rows(); ++i) allC[i] = i;
  const Matrix Abb = pick(A, drop, drop);
  const Eigen::PartialPivLU<Matrix> lu(Abb);
  const Matrix Aba = pick(A, drop, keep), Bb = pick(B, drop, allB);
  const Matrix Xa = lu.solve(Aba), Xb = lu.solve(Bb);
  const Matrix Aab = pick(A, keep, drop), Cb = pick(C, allC, drop);
  return detail::raw(pick(A, keep, keep) - Aab * Xa, pick(E, keep, keep),
                     pick(B, keep, allB) - Aab * Xb,
                     pick(C, allC, keep) - Cb * Xa, s.D - Cb * Xb, s.ts);
}

namespace detail {

// Controllable part of a standard pair (A, B) with output C.
inline void standard_controllable(Matrix& A, Matrix& B, Matrix& C,
                                  double atol) {
  const Index n = A.rows();
  if (n == 0) return;
  Matrix V = orth(B, atol);
  while (V.cols() < n) {
    Matrix W = orth(hcat(V, A * V), atol);
    if (W.cols() <= V.cols()) break;
    V = W;
  }
  if (V.cols() == n) return;
  A = V.transpose() * A * V;
  B = V.transpose() * B;
  C = C * V;
}

inline void standard_minimal(Matrix& A, Matrix& B, Matrix& C, double atol) {
  standard_controllable(A, B, C, atol);
  Matrix At = A.transpose(), Bt = C.transpose(), Ct = B.transpose();
  standard_controllable(At, Bt, Ct, atol);
  A = At.transpose();
  B = Ct.transpose();
  C = Bt.transpose();
}

struct WeierstrassSplit {
  // finite part: (Af, Ef, Bf, Cf), Ef invertible
  Matrix Af, Ef, Bf, Cf;
  // infinite part: (Ai, Ei, Bi, Ci), Ai invertible, Ei nilpotent
  Matrix Ai, Ei, Bi, Ci;
  std::vector<Index> inf_levels;
};

inline WeierstrassSplit weierstrass_split(const DescriptorSystem& s,
                                          double atol) {
  const Index n = s.n();
  InfiniteDeflation d = deflate_infinite_bottom(s.A, s.E, atol);
  Matrix A = d.Q.transpose() * s.A * d.Z;
  Matrix E = d.Q.transpose() * s.E * d.Z;
  Matrix B = d.Q.transpose() * s.B;
  Matrix C = s.C * d.Z;
  const Index ni = d.n_inf, nf = n - ni;
  WeierstrassSplit w;
  w.inf_levels = d.levels;
  if (nf > 0 && ni > 0) {
    // Bring both diagonal blocks to generalized Schur form, then decouple
    // with a generalized Sylvester equation.
    auto none = [](const GeneralizedEigenvalue&) { return false; };
    OrderedSchurResult f = ordered_generalized_schur(
        A.topLeftCorner(nf, nf), E.topLeftCorner(nf, nf), none);
    OrderedSchurResult g = ordered_generalized_schur(
        A.bottomRightCorner(ni, ni), E.bottomRightCorner(ni, ni), none);
    Matrix Ql = blkdiag(f.Q, g.Q), Zr = blkdiag(f.Z, g.Z);
    A = Ql.transpose() * A * Zr;
    E = Ql.transpose() * E * Zr;
    B = Ql.transpose() * B;
    C = C * Zr;
    Matrix Rm = -A.topRightCorner(nf, ni);
    Matrix Lm = -E.topRightCorner(nf, ni);
    // dtgsyl reads the subdiagonal to find 2×2 blocks, so the diagonal
    // blocks must be the exact Schur factors without rounding residue.
    Matrix A11 = f.S, E11 = f.T, A22 = g.S, E22 = g.T;
    double scale = 1.0, dif = 0.0;
    lapack_int info = LAPACKE_dtgsyl(
        LAPACK_COL_MAJOR, 'N', 0, lapack_int(nf), lapack_int(ni), A11.data(),
        lapack_int(nf), A22.data(), lapack_int(ni), Rm.data(), lapack_int(nf),
        E11.data(), lapack_int(nf), E22.data(), lapack_int(ni), Lm.data(),
        lapack_int(nf), &scale, &dif);
    if (info < 0 || scale <= 0)
      throw StructureError("generalized Sylvester decoupling failed");
    const Matrix Y = Rm / scale;   // right transformation [I Y; 0 I]
    const Matrix X = -Lm / scale;  // left transformation [I X; 0 I]
    B.topRows(nf) += X * B.bottomRows(ni);
    C.rightCols(ni) += C.leftCols(nf) * Y;
    w.Af = A11;
    w.Ef = E11;
    w.Ai = A22;
    w.Ei = E22;
  } else {
    w.Af = A.topLeftCorner(nf, nf);
    w.Ef = E.topLeftCorner(nf, nf);
    w.Ai = A.bottomRightCorner(ni, ni);
    w.Ei = E.bottomRightCorner(ni, ni);
  }
  w.Bf = B.topRows(nf);
  w.Bi = B.bottomRows(ni);
  w.Cf = C.leftCols(nf);
  w.Ci = C.rightCols(ni);
  return w;
}

}  // namespace detail

// Removes finite and infinite uncontrollable and unobservable structure.
// Non-dynamic modes are kept; see minimal_realization.
inline DescriptorSystem irreducible_realization(const DescriptorSystem& s,
                                                const ToleranceConfig& tol = {}) {
  tol.validate();
  const Index n = s.n();
  if (n == 0) return s;
  const double atol = tol.structural_threshold(detail::system_norm(s), n);
  if (pencil_is_singular(s.A, s.E))
    throw StructureError("irreducible_realization: singular pencil A − λE");
  detail::WeierstrassSplit w = detail::weierstrass_split(s, atol);

  const Index nf = w.Af.rows(), ni = w.Ai.rows();
  Matrix Af, Bf, Cf;
  if (nf > 0) {
    Eigen::PartialPivLU<Matrix> lu(w.Ef);
    Af = lu.solve(w.Af);
    Bf = lu.solve(w.Bf);
    Cf = w.Cf;
    detail::standard_minimal(Af, Bf, Cf, atol);
  } else {
    Af = Matrix(0, 0);
    Bf = Matrix(0, s.m());
    Cf = Matrix(s.p(), 0);
  }
  Matrix Ni, Bi, Ci;
  if (ni > 0) {
    Eigen::PartialPivLU<Matrix> lu(w.Ai);
    Ni = lu.solve(w.Ei);
    Bi = lu.solve(w.Bi);
    Ci = w.Ci;
    detail::standard_minimal(Ni, Bi, Ci, atol);
  } else {
    Ni = Matrix(0, 0);
    Bi = Matrix(0, s.m());
    Ci = Matrix(s.p(), 0);
  }
  const Index kf = Af.rows(), ki = Ni.rows();
  Matrix A = blkdiag(Af, Matrix::Identity(ki, ki));
  Matrix E = blkdiag(Matrix::Identity(kf, kf), Ni);
  DescriptorSystem out =
      detail::raw(A, E, vcat(Bf, Bi), hcat(Cf, Ci), s.D, s.ts);
  if (out.n() > 0) {
    out.B.conservativeResize(out.n(), s.m());
    out.C.conservativeResize(s.p(), out.n());
  }
  return out;
}

inline DescriptorSystem minimal_realization(const DescriptorSystem& s,
                                            const ToleranceConfig& tol = {}) {
  return irreducible_realization(
      remove_nondynamic(irreducible_realization(s, tol), tol), tol);
}

// G∼(s) = Gᵀ(−s), G∼(z) = Gᵀ(1/z).
inline DescriptorSystem conjugate(const DescriptorSystem& s,
                                  const ToleranceConfig& tol = {}) {
  const Index n = s.n();
  if (s.ts == TimeDomain::continuous) {
    DescriptorSystem c =
        detail::raw(-s.A.transpose(), s.E.transpose(), -s.C.transpose(),
                    s.B.transpose(), s.D.transpose(), s.ts);
    c.e_identity = s.e_identity;
    return c;
  }
  if (n == 0) return static_gain(s.D.transpose(), s.ts);
  // States (w, v): z·w = v and 0 = −Eᵀw + Aᵀv + Cᵀu, output Bᵀv + Dᵀu.
  const Index p = s.p();
  Matrix A = Matrix::Zero(2 * n, 2 * n);
  A.topRightCorner(n, n) = Matrix::Identity(n, n);
  A.bottomLeftCorner(n, n) = -s.E.transpose();
  A.bottomRightCorner(n, n) = s.A.transpose();
  Matrix E = Matrix::Zero(2 * n, 2 * n);
  E.topLeftCorner(n, n) = Matrix::Identity(n, n);
  Matrix B = Matrix::Zero(2 * n, p);
  B.bottomRows(n) = s.C.transpose();
  Matrix C = Matrix::Zero(s.m(), 2 * n);
  C.rightCols(n) = s.B.transpose();
  return remove_nondynamic(
      detail::raw(A, E, B, C, s.D.transpose(), s.ts), tol);
}

// ---------------------------------------------------------------------------
// Poles, zeros, ranks.

struct EigenvalueList {
  std::vector<Complex> finite;
  std::vector<Index> infinite_multiplicities;

  Index infinite_count() const {
    Index k = 0;
    for (Index v : infinite_multiplicities) k += v;
    return k;
  }
  Index total() const {
    return static_cast<Index>(finite.size()) + infinite_count();
  }
};

namespace detail {

inline void add_infinite(EigenvalueList& out, const std::vector<Index>& sizes) {
  for (Index k : sizes)
    if (k > 1) out.infinite_multiplicities.push_back(k - 1);
}

inline std::vector<Complex> finite_values(
    const std::vector<GeneralizedEigenvalue>& ev) {
  std::vector<Complex> v;
  for (const auto& e : ev) v.push_back(e.value());
  return v;
}

}  // namespace detail

inline EigenvalueList poles(const DescriptorSystem& sys,
                            const ToleranceConfig& tol = {}) {
  const DescriptorSystem s = minimal_realization(sys, tol);
  EigenvalueList out;
  if (s.n() == 0) return out;
  const double atol = tol.structural_threshold(detail::system_norm(s), s.n());
  InfiniteDeflation d = deflate_infinite_bottom(s.A, s.E, atol);
  detail::add_infinite(out, jordan_sizes(d.levels));
  const Index nf = s.n() - d.n_inf;
  if (nf > 0) {
    const Matrix A = (d.Q.transpose() * s.A * d.Z).topLeftCorner(nf, nf);
    const Matrix E = (d.Q.transpose() * s.E * d.Z).topLeftCorner(nf, nf);
    out.finite = detail::finite_values(generalized_eigenvalues(A, E));
  }
  return out;
}

inline EigenvalueList zeros(const DescriptorSystem& sys,
                            const ToleranceConfig& tol = {}) {
  const DescriptorSystem s = minimal_realization(sys, tol);
  auto [M, N] = system_pencil(s);
  EigenvalueList out;
  if (M.rows() == 0 || M.cols() == 0) return out;
  KlfResult k = kronecker_like_form(M, N, tol);
  out.finite = detail::finite_values(k.finite_eigenvalues);
  detail::add_infinite(out, k.structure.infinite_blocks);
  return out;
}

inline Index mcmillan_degree(const DescriptorSystem& sys,
                             const ToleranceConfig& tol = {}) {
  return poles(sys, tol).total();
}

// Points away from the finite poles of the realization.
inline std::vector<Complex> sample_points(const DescriptorSystem& s,
                                          std::size_t count,
                                          std::uint64_t seed) {
  std::vector<Complex> ev;
  double rho = 1.0;
  if (s.n() > 0) {
    try {
      // The count of finite eigenvalues comes from the rank staircase; the
      // QZ values of infinite ones can look finite and huge.
      const double atol = ToleranceConfig{}.structural_threshold(
          std::max(s.A.norm(), s.E.norm()), s.n());
      const Index nf = s.n() - deflate_infinite_bottom(s.A, s.E, atol).n_inf;
      auto all = generalized_eigenvalues(s.A, s.E);
      std::vector<Complex> vals;
      for (const auto& e : all)
        if (e.beta != 0.0) vals.push_back(e.value());
      std::sort(vals.begin(), vals.end(), [](Complex a, Complex b) {
        return std::abs(a) < std::abs(b);
      });
      for (Index i = 0; i < std::min<Index>(nf, Index(vals.size())); ++i) {
        ev.push_back(vals[i]);
        rho = std::max(rho, std::abs(vals[i]));
      }
    } catch (const StructureError&) {
    }
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double radius = 1.5 * rho, margin = 1e-3 * rho;
  std::vector<Complex> pts;
  while (pts.size() < count) {
    Complex z(radius * u(rng), radius * u(rng));
    bool ok = true;
    for (const Complex& e : ev)
      if (std::abs(z - e) < margin) ok = false;
    if (ok) pts.push_back(z);
  }
  return pts;
}

inline Index complex_rank(const CMatrix& M, double rtol) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(real_embedding(M));
  const auto& s = svd.singularValues();
  Index r = 0;
  for (Index i = 0; i < s.size(); ++i)
    if (s(i) > rtol * std::max(s(0), 1e-300)) ++r;
  return r / 2;
}

inline Index normal_rank(const DescriptorSystem& s, std::uint64_t seed = 0,
                         const ToleranceConfig& tol = {}) {
  const Index n = s.n();
  auto [M, N] = system_pencil(s);
  const double rtol = tol.rank_rtol > 0
                          ? tol.rank_rtol
                          : 1e3 * double(std::max<Index>(M.rows() + M.cols(), 1)) * kEps;
  for (int attempt = 0; attempt < 5; ++attempt) {
    auto pts = sample_points(s, 2, seed + 7919u * attempt);
    Index r[2];
    for (int k = 0; k < 2; ++k) {
      const CMatrix S = M.cast<Complex>() - pts[k] * N.cast<Complex>();
      r[k] = complex_rank(S, rtol) - n;
    }
    if (r[0] == r[1]) return std::max<Index>(r[0], 0);
  }
  throw StructureError("normal rank: random evaluation points disagree");
}

}  // namespace ratfact
