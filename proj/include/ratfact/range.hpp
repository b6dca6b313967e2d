#pragma once

#include <optional>
#include <utility>

#include "ratfact/klf.hpp"
#include "ratfact/riccati.hpp"
#include "ratfact/verify.hpp"

namespace ratfact {

enum class ZerosPolicy { none, bad, all };

struct RangeOptions {
  ZerosPolicy zeros = ZerosPolicy::bad;
  bool stabilize = false;
  bool inner = false;  // implies stabilize
  // Region whose bad poles are reflected when stabilizing; defaults to the
  // stability partition of the system's time domain.
  std::optional<RegionPartition> target;
  // Reduce the input to an irreducible realization first.
  bool make_irreducible = false;
};

struct RangeResult {
  DescriptorSystem R;
  Matrix F;  // r×n_bl
  Matrix W;  // r×r
  SpecialKlf sklf;
  DescriptorSystem realization;  // realization the reduction worked on
  double inner_residual = 0.0;   // grid max of ‖R∼R − I‖ when inner
};

inline RegionPartition zeros_region(ZerosPolicy z, const RegionPartition& region,
                                    TimeDomain ts) {
  switch (z) {
    case ZerosPolicy::none: return RegionPartition::none(ts);
    case ZerosPolicy::all: return RegionPartition::all(ts);
    default: return region;
  }
}

// F and W making (A_bl + B_bl F − λE_bl, B_bl W, C_bl + D_bl F, D_bl W)
// stable with R∼R = I.
inline std::pair<Matrix, Matrix> inner_enforcing_gains(const SpecialKlf& s,
                                                       TimeDomain ts) {
  const Index nb = s.n_bl, r = s.r;
  if (r == 0) return {Matrix(0, nb), Matrix(0, 0)};
  const Matrix Qc = s.C_bl.transpose() * s.C_bl;
  const Matrix Sc = s.C_bl.transpose() * s.D_bl;
  const Matrix Rc = s.D_bl.transpose() * s.D_bl;
  if (nb == 0) return {Matrix(r, 0), inverse_sqrt_spd(Rc)};
  Eigen::PartialPivLU<Matrix> lu(s.E_bl);
  const Matrix As = lu.solve(s.A_bl), Bs = lu.solve(s.B_bl);
  if (ts == TimeDomain::continuous &&
      numerical_rank(Rc, 1e3 * kEps * std::max(1.0, Rc.norm())) < r)
    throw FactorizationError(
        "inner factor does not exist: range block has zeros at infinity");
  RiccatiSolution sol = solve_riccati(As, Bs, Qc, Sc, Rc, ts);
  return {sol.F, inverse_sqrt_spd(sol.H)};
}

// Feedback reflecting the eigenvalues of A_bl − λE_bl that are bad for the
// target region: continuous λ → −conj(λ), discrete λ → 1/conj(λ).
inline Matrix reflecting_feedback(const SpecialKlf& s,
                                  const RegionPartition& target,
                                  const ToleranceConfig& tol) {
  const Index nb = s.n_bl, r = s.r;
  Matrix F = Matrix::Zero(r, nb);
  if (nb == 0 || r == 0) return F;
  auto good = [&](const GeneralizedEigenvalue& e) {
    return classify_finite(e.value(), target, tol) != EigenClass::bad;
  };
  OrderedSchurResult qz = ordered_generalized_schur(s.A_bl, s.E_bl, good);
  const Index n1 = qz.selected, n2 = nb - n1;
  if (n2 == 0) return F;
  const Matrix A22 = qz.S.bottomRightCorner(n2, n2);
  const Matrix E22 = qz.T.bottomRightCorner(n2, n2);
  const Matrix B2 = (qz.Q.transpose() * s.B_bl).bottomRows(n2);
  Eigen::PartialPivLU<Matrix> lu(E22);
  const Matrix As = lu.solve(A22), Bs = lu.solve(B2);
  // Minimum-energy control reflects the unstable eigenvalues.
  RiccatiSolution sol =
      solve_riccati(As, Bs, Matrix::Zero(n2, n2), Matrix::Zero(n2, r),
                    Matrix::Identity(r, r), target.ts);
  F = sol.F * qz.Z.rightCols(n2).transpose();
  return F;
}

inline DescriptorSystem range_realization(const SpecialKlf& s, const Matrix& F,
                                          const Matrix& W, TimeDomain ts) {
  return detail::raw(s.A_bl + s.B_bl * F, s.E_bl, s.B_bl * W,
                     s.C_bl + s.D_bl * F, s.D_bl * W, ts);
}

inline RangeResult range_basis(const DescriptorSystem& sys,
                               const RegionPartition& region,
                               const RangeOptions& opts = {},
                               const ToleranceConfig& tol = {}) {
  if (region.ts != sys.ts)
    throw InputError("region and system have different time-domain tags");
  RangeResult out;
  out.realization =
      opts.make_irreducible ? irreducible_realization(sys, tol) : sys;
  const RegionPartition zr = zeros_region(opts.zeros, region, sys.ts);
  out.sklf = special_klf(out.realization, zr, tol);
  const SpecialKlf& s = out.sklf;
  const RegionPartition target =
      opts.target ? *opts.target : RegionPartition::stability(sys.ts);
  if (opts.inner) {
    std::tie(out.F, out.W) = inner_enforcing_gains(s, sys.ts);
  } else {
    out.F = opts.stabilize ? reflecting_feedback(s, target, tol)
                           : Matrix(Matrix::Zero(s.r, s.n_bl));
    out.W = Matrix::Identity(s.r, s.r);
  }
  out.R = range_realization(s, out.F, out.W, sys.ts);
  if (opts.inner)
    out.inner_residual =
        inner_residual(out.R, frequency_grid(sys.ts, 32)).max_residual;
  return out;
}

// X with G = R·X: realization (A − λE, B, C̃, D̃), [C̃ D̃] = W⁻¹[0 −F I_r 0]Zᵀ.
inline DescriptorSystem cofactor(const DescriptorSystem& sys,
                                 const RangeResult& rr) {
  const SpecialKlf& s = rr.sklf;
  const DescriptorSystem& g = rr.realization;
  if (sys.p() != g.p() || sys.m() != g.m() || sys.ts != g.ts)
    throw InputError("cofactor: range result was computed for another system");
  const Index n = g.n(), m = g.m(), k = n + m;
  Matrix row = Matrix::Zero(s.r, k);
  row.block(0, s.n_c, s.r, s.n_bl) = -rr.F;
  row.block(0, s.n_c + s.n_bl, s.r, s.r) = Matrix::Identity(s.r, s.r);
  const Matrix CD = s.r > 0 ? Matrix(rr.W.partialPivLu().solve(row * s.Z.transpose()))
                            : Matrix(0, k);
  DescriptorSystem x = g;
  x.C = CD.leftCols(n);
  x.D = CD.rightCols(m);
  return x;
}

}  // namespace ratfact
