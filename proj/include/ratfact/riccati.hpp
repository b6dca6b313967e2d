#pragma once

// Algebraic Riccati equations solved through extended (2n+m) pencils, which
// also cover singular R in discrete time.

#include "ratfact/dss.hpp"

namespace ratfact {

struct RiccatiSolution {
  Matrix X;  // stabilizing solution
  Matrix F;  // optimal feedback u = F·x, A + B·F stable
  Matrix H;  // R (continuous) or R + BᵀXB (discrete)
};

// Minimizes ∫ or Σ of [x; u]ᵀ [Q S; Sᵀ R] [x; u] for x' = Ax + Bu.
inline RiccatiSolution solve_riccati(const Matrix& A, const Matrix& B,
                                     const Matrix& Q, const Matrix& S,
                                     const Matrix& R, TimeDomain ts) {
  const Index n = A.rows(), m = B.cols();
  RiccatiSolution sol;
  if (n == 0) {
    sol.X = Matrix(0, 0);
    sol.F = Matrix(m, 0);
    sol.H = R;
    return sol;
  }
  const Index N = 2 * n + m;
  Matrix M = Matrix::Zero(N, N), E = Matrix::Zero(N, N);
  M.block(0, 0, n, n) = A;
  M.block(0, 2 * n, n, m) = B;
  M.block(n, 0, n, n) = -Q;
  M.block(n, 2 * n, n, m) = -S;
  M.block(2 * n, 0, m, n) = S.transpose();
  M.block(2 * n, 2 * n, m, m) = R;
  E.block(0, 0, n, n) = Matrix::Identity(n, n);
  if (ts == TimeDomain::continuous) {
    M.block(n, n, n, n) = -A.transpose();
    M.block(2 * n, n, m, n) = B.transpose();
    E.block(n, n, n, n) = Matrix::Identity(n, n);
  } else {
    M.block(n, n, n, n) = Matrix::Identity(n, n);
    E.block(n, n, n, n) = A.transpose();
    E.block(2 * n, n, m, n) = -B.transpose();
  }
  // Stable eigenvalues with a small safety margin so that boundary ones are
  // never mistaken for stable.
  const double margin = 1e3 * kEps * std::max(1.0, M.norm());
  auto stable = [&](const GeneralizedEigenvalue& e) {
    if (e.is_infinite()) return false;
    const Complex z = e.value();
    return ts == TimeDomain::continuous ? z.real() < -margin
                                        : std::abs(z) < 1.0 - margin;
  };
  OrderedSchurResult qz;
  try {
    qz = ordered_generalized_schur(M, E, stable);
  } catch (const StructureError& e) {
    throw FactorizationError(std::string("Riccati pencil: ") + e.what());
  }
  if (qz.selected != n)
    throw FactorizationError(
        "no stabilizing Riccati solution (eigenvalues on the stability boundary)");
  const Matrix U1 = qz.Z.block(0, 0, n, n);
  const Matrix U2 = qz.Z.block(n, 0, n, n);
  const Matrix U3 = qz.Z.block(2 * n, 0, m, n);
  Eigen::PartialPivLU<Matrix> lu(U1.transpose());
  if (!(lu.rcond() > 1e3 * kEps))
    throw FactorizationError("Riccati solution does not exist (U1 singular)");
  sol.X = lu.solve(U2.transpose()).transpose();
  sol.X = 0.5 * (sol.X + sol.X.transpose());
  sol.F = lu.solve(U3.transpose()).transpose();
  sol.H = ts == TimeDomain::continuous ? R
                                       : Matrix(R + B.transpose() * sol.X * B);
  return sol;
}

// H^{-1/2} for symmetric positive definite H.
inline Matrix inverse_sqrt_spd(const Matrix& H) {
  if (H.rows() == 0) return Matrix(0, 0);
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (H + H.transpose()));
  const Vector& d = es.eigenvalues();
  if (!(d.minCoeff() > 1e3 * kEps * std::max(1.0, d.maxCoeff())))
    throw FactorizationError("inner factor does not exist: singular weighting");
  return es.eigenvectors() * d.cwiseInverse().cwiseSqrt().asDiagonal() *
         es.eigenvectors().transpose();
}

}  // namespace ratfact
