#pragma once

#include <limits>
#include <stdexcept>

#include "ratfact/range.hpp"

namespace ratfact {

enum class FactorizationKind { full_rank, dual, nrcf, inner_outer };

inline const char* to_string(FactorizationKind k) {
  switch (k) {
    case FactorizationKind::full_rank: return "full-rank";
    case FactorizationKind::dual: return "dual";
    case FactorizationKind::nrcf: return "nrcf";
    default: return "inner-outer";
  }
}

struct FactorCertificate {
  Index normal_rank = 0;
  Index mcmillan_degree = 0;
  Index order = 0;
  EigenvalueList poles;
  EigenvalueList zeros;
};

inline FactorCertificate certify(const DescriptorSystem& s,
                                 const ToleranceConfig& tol = {},
                                 std::uint64_t seed = 0) {
  FactorCertificate c;
  c.order = s.n();
  c.normal_rank = normal_rank(s, seed, tol);
  c.poles = poles(s, tol);
  c.zeros = zeros(s, tol);
  c.mcmillan_degree = c.poles.total();
  return c;
}

struct FactorizationResult {
  DescriptorSystem left;
  DescriptorSystem right;
  FactorizationKind kind = FactorizationKind::full_rank;
  Index rank = 0;
  ResidualStats residual;  // product residual on random points
  FactorCertificate left_cert;
  FactorCertificate right_cert;
  double inner_residual = std::numeric_limits<double>::quiet_NaN();
};

namespace detail {

inline FactorizationResult finish(const DescriptorSystem& g,
                                  DescriptorSystem left,
                                  DescriptorSystem right,
                                  FactorizationKind kind,
                                  const ToleranceConfig& tol,
                                  std::uint64_t seed) {
  FactorizationResult f;
  f.left = std::move(left);
  f.right = std::move(right);
  f.kind = kind;
  f.rank = f.left.m();
  f.residual = product_residual(
      g, f.left, f.right,
      common_sample_points({&g, &f.left, &f.right}, 16, seed));
  f.left_cert = certify(f.left, tol, seed);
  f.right_cert = certify(f.right, tol, seed);
  return f;
}

inline DescriptorSystem select_outputs(const DescriptorSystem& s, Index first,
                                       Index count) {
  DescriptorSystem t = s;
  t.C = s.C.middleRows(first, count);
  t.D = s.D.middleRows(first, count);
  return t;
}

}  // namespace detail

// G = R·X with R proper full column rank, X full row rank.
inline FactorizationResult full_rank_factorize(const DescriptorSystem& sys,
                                               const RegionPartition& region,
                                               const RangeOptions& opts = {},
                                               const ToleranceConfig& tol = {},
                                               std::uint64_t seed = 0) {
  RangeResult rr = range_basis(sys, region, opts, tol);
  DescriptorSystem x = cofactor(sys, rr);
  FactorizationResult f = detail::finish(sys, rr.R, x,
                                         FactorizationKind::full_rank, tol, seed);
  if (opts.inner) f.inner_residual = rr.inner_residual;
  return f;
}

// G = X̃·R̃ with R̃ proper full row rank, obtained from the factorization of Gᵀ.
inline FactorizationResult dual_full_rank_factorize(
    const DescriptorSystem& sys, const RegionPartition& region,
    const RangeOptions& opts = {}, const ToleranceConfig& tol = {},
    std::uint64_t seed = 0) {
  const DescriptorSystem gt = transpose(sys);
  RangeResult rr = range_basis(gt, region, opts, tol);
  DescriptorSystem x = cofactor(gt, rr);
  FactorizationResult f = detail::finish(sys, transpose(x), transpose(rr.R),
                                         FactorizationKind::dual, tol, seed);
  if (opts.inner) f.inner_residual = rr.inner_residual;
  return f;
}

struct CoprimeFactors {
  DescriptorSystem N;
  DescriptorSystem M;
  double normalization_residual = 0.0;  // grid max of ‖N∼N + M∼M − I‖
  ResidualStats residual;               // G = N·M⁻¹ on random points
};

// Normalized right coprime factorization G = N·M⁻¹, [N; M] inner.
inline CoprimeFactors nrcf(const DescriptorSystem& sys,
                           const ToleranceConfig& tol = {},
                           std::uint64_t seed = 0) {
  const Index p = sys.p(), m = sys.m();
  const DescriptorSystem stacked = stack_vertical(sys, identity_system(m, sys.ts));
  RangeOptions o;
  o.zeros = ZerosPolicy::none;
  o.inner = true;
  RangeResult rr =
      range_basis(stacked, RegionPartition::stability(sys.ts), o, tol);
  if (rr.sklf.r != m)
    throw std::logic_error("nrcf: stacked system lost column rank");
  CoprimeFactors out;
  out.N = detail::select_outputs(rr.R, 0, p);
  out.M = detail::select_outputs(rr.R, p, m);
  if (normal_rank(out.M, seed, tol) != m)
    throw std::logic_error("nrcf: denominator factor is singular");
  out.normalization_residual = rr.inner_residual;
  out.residual = product_residual(
      sys, out.N, inverse(out.M),
      common_sample_points({&sys, &out.N, &out.M}, 16, seed));
  return out;
}

// Moore–Penrose pseudo-inverse G# = V∼·G2⁻¹·U∼ from G = U·G2·V with U inner
// and V co-inner.
inline DescriptorSystem pseudo_inverse(const DescriptorSystem& sys,
                                       const ToleranceConfig& tol = {}) {
  RangeOptions o;
  o.zeros = ZerosPolicy::none;
  o.inner = true;
  const RegionPartition none = RegionPartition::none(sys.ts);
  RangeResult r1 = range_basis(sys, none, o, tol);
  if (r1.sklf.r == 0)
    return static_gain(Matrix::Zero(sys.m(), sys.p()), sys.ts);
  const DescriptorSystem U = r1.R;
  const DescriptorSystem G1t = transpose(cofactor(sys, r1));
  RangeResult r2 = range_basis(G1t, none, o, tol);
  const DescriptorSystem V = transpose(r2.R);
  const DescriptorSystem G2 = transpose(cofactor(G1t, r2));
  const DescriptorSystem pinv =
      series(series(conjugate(V, tol), inverse(G2)), conjugate(U, tol));
  try {
    return irreducible_realization(pinv, tol);
  } catch (const StructureError&) {
    return pinv;
  }
}

// Largest of the four Moore–Penrose identity residuals on boundary points,
// where G∼ = Gᴴ. Each identity is scaled by the norms it involves.
inline ResidualStats moore_penrose_residual(const DescriptorSystem& g,
                                            const DescriptorSystem& pinv,
                                            const std::vector<Complex>& grid) {
  ResidualStats st;
  for (const Complex& z : grid) {
    try {
      const CMatrix a = evaluate(g, z), q = evaluate(pinv, z);
      const double s = std::max(1.0, a.norm()), t = std::max(1.0, q.norm());
      const CMatrix aq = a * q, qa = q * a;
      st.max_residual = std::max(
          {st.max_residual, (aq * a - a).norm() / (s * s * t),
           (qa * q - q).norm() / (t * t * s),
           (aq - aq.adjoint()).norm() / (s * t),
           (qa - qa.adjoint()).norm() / (s * t)});
      ++st.points;
    } catch (const EvaluationError&) {
      ++st.skipped;
    }
  }
  return st;
}

// G = Gi·Go with Gi inner and Go quasi-outer (zeros in the closed stability
// region).
inline FactorizationResult inner_outer(const DescriptorSystem& sys,
                                       const ToleranceConfig& tol = {},
                                       std::uint64_t seed = 0) {
  RangeOptions o;
  o.zeros = ZerosPolicy::bad;
  o.inner = true;
  FactorizationResult f = full_rank_factorize(
      sys, RegionPartition::stability(sys.ts), o, tol, seed);
  f.kind = FactorizationKind::inner_outer;
  return f;
}

}  // namespace ratfact
