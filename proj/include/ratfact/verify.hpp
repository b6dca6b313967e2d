#pragma once

// Frequency grids and residual checks shared by the factorizations and CLI.

#include <cmath>
#include <numbers>
#include <vector>

#include "ratfact/dss.hpp"

namespace ratfact {

// Continuous: iω with ω log-spaced in [1e-3, 1e3]. Discrete: points on the
// unit circle, offset by half a step so that z = ±1 are avoided.
inline std::vector<Complex> frequency_grid(TimeDomain ts, std::size_t count = 32) {
  std::vector<Complex> g;
  g.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    if (ts == TimeDomain::continuous) {
      const double t = count > 1 ? double(k) / double(count - 1) : 0.0;
      g.emplace_back(0.0, std::pow(10.0, -3.0 + 6.0 * t));
    } else {
      const double th = 2.0 * std::numbers::pi * (double(k) + 0.5) / double(count);
      g.emplace_back(std::cos(th), std::sin(th));
    }
  }
  return g;
}

// Random points away from the poles of every listed realization.
inline std::vector<Complex> common_sample_points(
    const std::vector<const DescriptorSystem*>& systems, std::size_t count,
    std::uint64_t seed) {
  DescriptorSystem all = *systems.front();
  for (std::size_t i = 1; i < systems.size(); ++i) {
    const DescriptorSystem& s = *systems[i];
    all.A = blkdiag(all.A, s.A);
    all.E = blkdiag(all.E, s.E);
  }
  all.B = Matrix::Zero(all.A.rows(), 0);
  all.C = Matrix::Zero(0, all.A.rows());
  all.D = Matrix::Zero(0, 0);
  return sample_points(all, count, seed);
}

struct ResidualStats {
  double max_residual = 0.0;
  std::size_t points = 0;
  std::size_t skipped = 0;  // grid points that hit a pole
};

// max ‖G(λ) − L(λ)·R(λ)‖_F / max(‖G(λ)‖_F, 1)
inline ResidualStats product_residual(const DescriptorSystem& G,
                                      const DescriptorSystem& L,
                                      const DescriptorSystem& R,
                                      const std::vector<Complex>& pts) {
  ResidualStats st;
  for (const Complex& z : pts) {
    try {
      const CMatrix g = evaluate(G, z);
      const CMatrix lr = evaluate(L, z) * evaluate(R, z);
      const double den = std::max(g.norm(), 1.0);
      st.max_residual = std::max(st.max_residual, (g - lr).norm() / den);
      ++st.points;
    } catch (const EvaluationError&) {
      ++st.skipped;
    }
  }
  return st;
}

// max ‖R(λ)ᴴR(λ) − I‖_F on boundary points (where R∼ = Rᴴ).
inline ResidualStats inner_residual(const DescriptorSystem& R,
                                    const std::vector<Complex>& grid) {
  ResidualStats st;
  for (const Complex& z : grid) {
    try {
      const CMatrix v = evaluate(R, z);
      const CMatrix e = v.adjoint() * v - CMatrix::Identity(v.cols(), v.cols());
      st.max_residual = std::max(st.max_residual, e.norm());
      ++st.points;
    } catch (const EvaluationError&) {
      ++st.skipped;
    }
  }
  return st;
}

}  // namespace ratfact
