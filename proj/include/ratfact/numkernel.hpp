#pragma once

#include <lapacke.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "ratfact/error.hpp"

namespace ratfact {

using Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

constexpr double kEps = std::numeric_limits<double>::epsilon();

struct ToleranceConfig {
  // 0 selects the automatic tolerance.
  double rank_rtol = 0.0;
  double eig_atol = 1.4901161193847656e-08;
  double boundary_offset = 0.0;

  void validate() const {
    if (!(rank_rtol >= 0) || !(eig_atol >= 0) || !(boundary_offset >= 0))
      throw InputError("tolerances must be non-negative");
  }

  // Absolute rank threshold for a single matrix.
  double rank_threshold(double sigma_max, Index rows, Index cols) const {
    const double dim = static_cast<double>(std::max<Index>({rows, cols, 1}));
    const double rtol = rank_rtol > 0 ? rank_rtol : dim * kEps;
    return rtol * sigma_max;
  }

  // Absolute threshold for rank decisions inside pencil reductions, relative
  // to the norm of the whole pencil. Rounding accumulates over the staircase
  // steps, so the automatic value is looser than for a single matrix.
  double structural_threshold(double pencil_norm, Index dim) const {
    const double d = static_cast<double>(std::max<Index>(dim, 1));
    const double rtol = rank_rtol > 0 ? rank_rtol : 1e3 * d * kEps;
    return rtol * std::max(pencil_norm, 1.0);
  }
};

inline void require_finite(const Matrix& M, const char* what) {
  if (!M.allFinite())
    throw InputError(std::string(what) + " has non-finite entries");
}

struct SvdResult {
  Matrix U;
  Vector sigma;
  Matrix V;
  Index rank = 0;
};

inline SvdResult rank_revealing_svd(const Matrix& M,
                                    const ToleranceConfig& tol = {}) {
  require_finite(M, "matrix");
  SvdResult out;
  const Index k = std::min(M.rows(), M.cols());
  if (k == 0) {
    out.U = Matrix::Identity(M.rows(), M.rows());
    out.V = Matrix::Identity(M.cols(), M.cols());
    out.sigma = Vector(0);
    return out;
  }
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU | Eigen::ComputeFullV);
  out.U = svd.matrixU();
  out.V = svd.matrixV();
  out.sigma = svd.singularValues();
  const double thr = tol.rank_threshold(out.sigma(0), M.rows(), M.cols());
  for (Index i = 0; i < k; ++i)
    if (out.sigma(i) > thr) ++out.rank;
  return out;
}

struct QrResult {
  Matrix Q;
  Matrix R;
  Eigen::VectorXi perm;  // column j of M·P is column perm(j) of M
  Index rank = 0;
};

inline QrResult pivoted_qr(const Matrix& M, const ToleranceConfig& tol = {}) {
  require_finite(M, "matrix");
  QrResult out;
  if (M.rows() == 0 || M.cols() == 0) {
    out.Q = Matrix::Identity(M.rows(), M.rows());
    out.R = Matrix::Zero(M.rows(), M.cols());
    out.perm = Eigen::VectorXi::LinSpaced(M.cols(), 0, int(M.cols()) - 1);
    return out;
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(M);
  out.Q = qr.householderQ();
  out.R = qr.matrixR().triangularView<Eigen::Upper>();
  out.perm = qr.colsPermutation().indices();
  const double r00 = std::abs(out.R(0, 0));
  const double thr = tol.rank_threshold(r00, M.rows(), M.cols());
  for (Index i = 0; i < std::min(M.rows(), M.cols()); ++i)
    if (std::abs(out.R(i, i)) > thr) ++out.rank;
  return out;
}

struct GeneralizedEigenvalue {
  Complex alpha;
  double beta = 1.0;

  bool is_infinite(double rtol = 1e3 * kEps) const {
    return std::abs(beta) <= rtol * std::abs(alpha);
  }
  Complex value() const {
    if (beta == 0.0)
      return {std::numeric_limits<double>::infinity(), 0.0};
    return alpha / beta;
  }
};

using EigenSelect = std::function<bool(const GeneralizedEigenvalue&)>;

struct OrderedSchurResult {
  Matrix S;
  Matrix T;
  Matrix Q;
  Matrix Z;
  std::vector<GeneralizedEigenvalue> eigenvalues;
  Index selected = 0;
};

namespace detail {

inline std::vector<GeneralizedEigenvalue> collect(const Vector& ar,
                                                  const Vector& ai,
                                                  const Vector& be) {
  std::vector<GeneralizedEigenvalue> ev(ar.size());
  for (Index i = 0; i < ar.size(); ++i) ev[i] = {{ar(i), ai(i)}, be(i)};
  return ev;
}

// Smallest singular value of A − σE relative to its largest.
inline double shifted_rcond(const Matrix& A, const Matrix& E, double sigma) {
  Eigen::JacobiSVD<Matrix> svd(A - sigma * E);
  const Vector& s = svd.singularValues();
  if (s(0) == 0.0) return 0.0;
  return s(s.size() - 1) / s(0);
}

}  // namespace detail

// True when A − λE is numerically singular at every trial shift.
inline bool pencil_is_singular(const Matrix& A, const Matrix& E) {
  const Index n = A.rows();
  if (n == 0) return false;
  const double scale =
      std::max(1.0, A.norm()) / std::max(1.0, E.norm());
  const double thr = 10.0 * n * kEps;
  for (double s : {0.7548776662466927, -1.324717957244746, 2.147899035704787})
    if (detail::shifted_rcond(A, E, s * scale) > thr) return false;
  return true;
}

inline OrderedSchurResult ordered_generalized_schur(const Matrix& A,
                                                    const Matrix& E,
                                                    const EigenSelect& select) {
  require_finite(A, "A");
  require_finite(E, "E");
  const Index n = A.rows();
  if (A.cols() != n || E.rows() != n || E.cols() != n)
    throw InputError("ordered_generalized_schur: A and E must be square of equal order");
  OrderedSchurResult out;
  if (n == 0) {
    out.S = out.T = out.Q = out.Z = Matrix(0, 0);
    return out;
  }
  if (pencil_is_singular(A, E))
    throw StructureError(
        "singular pencil: use the Kronecker-like form instead of QZ");

  out.S = A;
  out.T = E;
  out.Q.resize(n, n);
  out.Z.resize(n, n);
  Vector ar(n), ai(n), be(n);
  lapack_int sdim = 0;
  lapack_int info = LAPACKE_dgges(
      LAPACK_COL_MAJOR, 'V', 'V', 'N', nullptr, lapack_int(n), out.S.data(),
      lapack_int(n), out.T.data(), lapack_int(n), &sdim, ar.data(), ai.data(),
      be.data(), out.Q.data(), lapack_int(n), out.Z.data(), lapack_int(n));
  if (info != 0)
    throw StructureError("QZ iteration failed (dgges info " +
                         std::to_string(info) + ")");

  auto ev = detail::collect(ar, ai, be);
  std::vector<lapack_logical> sel(n, 0);
  for (Index i = 0; i < n; ++i) {
    sel[i] = select(ev[i]) ? 1 : 0;
    // both halves of a conjugate pair must move together
    if (ai(i) != 0.0 && i + 1 < n) {
      sel[i + 1] = sel[i];
      ++i;
    }
  }
  // Fortran entry point with explicit workspace; the LAPACKE wrapper
  // mis-sizes the integer workspace for ijob = 0 on some builds.
  lapack_int m = 0, ijob = 0, wq = 1, wz = 1, nn = lapack_int(n);
  lapack_int lwork = 4 * nn + 16, liwork = 1;
  double pl = 0, pr = 0, dif[2] = {0, 0};
  std::vector<double> work(lwork);
  std::vector<lapack_int> iwork(liwork);
  LAPACK_dtgsen(&ijob, &wq, &wz, sel.data(), &nn, out.S.data(), &nn,
                out.T.data(), &nn, ar.data(), ai.data(), be.data(),
                out.Q.data(), &nn, out.Z.data(), &nn, &m, &pl, &pr, dif,
                work.data(), &lwork, iwork.data(), &liwork, &info);
  if (info != 0)
    throw StructureError("eigenvalue reordering failed (dtgsen info " +
                         std::to_string(info) + ")");
  out.eigenvalues = detail::collect(ar, ai, be);
  out.selected = m;
  return out;
}

inline std::vector<GeneralizedEigenvalue> generalized_eigenvalues(
    const Matrix& A, const Matrix& E) {
  return ordered_generalized_schur(
             A, E, [](const GeneralizedEigenvalue&) { return false; })
      .eigenvalues;
}

// ---------------------------------------------------------------------------
// Orthonormal subspace helpers with an absolute rank threshold.

inline Matrix orth(const Matrix& M, double atol) {
  if (M.rows() == 0 || M.cols() == 0) return Matrix(M.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullU);
  Index r = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > atol) ++r;
  return svd.matrixU().leftCols(r);
}

inline Matrix null_space(const Matrix& M, double atol) {
  if (M.cols() == 0) return Matrix(0, 0);
  if (M.rows() == 0) return Matrix::Identity(M.cols(), M.cols());
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
  Index r = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > atol) ++r;
  return svd.matrixV().rightCols(M.cols() - r);
}

inline Index numerical_rank(const Matrix& M, double atol) {
  if (M.rows() == 0 || M.cols() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(M);
  Index r = 0;
  for (Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()(i) > atol) ++r;
  return r;
}

// Orthonormal basis of the orthogonal complement of span(Q), Q orthonormal.
inline Matrix complement(const Matrix& Q) {
  const Index n = Q.rows();
  if (Q.cols() == 0) return Matrix::Identity(n, n);
  if (Q.cols() >= n) return Matrix(n, 0);
  Eigen::JacobiSVD<Matrix> svd(Q.transpose(), Eigen::ComputeFullV);
  return svd.matrixV().rightCols(n - Q.cols());
}

inline Matrix hcat(const Matrix& a, const Matrix& b) {
  Matrix out(std::max(a.rows(), b.rows()), a.cols() + b.cols());
  if (a.cols() > 0) out.leftCols(a.cols()) = a;
  if (b.cols() > 0) out.rightCols(b.cols()) = b;
  return out;
}

inline Matrix vcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() + b.rows(), std::max(a.cols(), b.cols()));
  if (a.rows() > 0) out.topRows(a.rows()) = a;
  if (b.rows() > 0) out.bottomRows(b.rows()) = b;
  return out;
}

inline Matrix blkdiag(const Matrix& a, const Matrix& b) {
  Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
  out.topLeftCorner(a.rows(), a.cols()) = a;
  out.bottomRightCorner(b.rows(), b.cols()) = b;
  return out;
}

inline double orthogonality_error(const Matrix& Q) {
  return (Q.transpose() * Q - Matrix::Identity(Q.cols(), Q.cols())).norm();
}

}  // namespace ratfact
