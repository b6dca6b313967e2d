#pragma once

// Staircase reductions of general matrix pencils A − λE.

#include <vector>

#include "ratfact/numkernel.hpp"

namespace ratfact {

struct InfiniteDeflation {
  Matrix Q;
  Matrix Z;
  Index n_inf = 0;
  std::vector<Index> levels;  // levels[j] = number of infinite blocks of size > j
};

// Orthogonal Q, Z with Qᵀ(A − λE)Z = [A11 − λE11, *; 0, A22 − λE22], where
// A11 − λE11 carries every infinite eigenvalue (A11 invertible, E11
// nilpotent) and E22 is invertible. Pencil must be square and regular.
inline InfiniteDeflation deflate_infinite_top(const Matrix& A, const Matrix& E,
                                              double atol) {
  const Index n = A.rows();
  InfiniteDeflation out;
  out.Q = Matrix::Identity(n, n);
  out.Z = Matrix::Identity(n, n);
  Matrix Aw = A, Ew = E;
  Index k = 0;
  while (k < n) {
    const Index rest = n - k;
    const Matrix Es = Ew.bottomRightCorner(rest, rest);
    const Matrix As = Aw.bottomRightCorner(rest, rest);
    const Matrix Zn = null_space(Es, atol);
    const Index nu = Zn.cols();
    if (nu == 0) break;
    const Matrix Qn = orth(As * Zn, atol);
    if (Qn.cols() != nu)
      throw StructureError("singular pencil met while deflating infinite eigenvalues");
    const Matrix Zs = hcat(Zn, complement(Zn));
    const Matrix Qs = hcat(Qn, complement(Qn));
    Aw.bottomRows(rest) = Qs.transpose() * Aw.bottomRows(rest);
    Ew.bottomRows(rest) = Qs.transpose() * Ew.bottomRows(rest);
    Aw.rightCols(rest) = Aw.rightCols(rest) * Zs;
    Ew.rightCols(rest) = Ew.rightCols(rest) * Zs;
    out.Q.rightCols(rest) = out.Q.rightCols(rest) * Qs;
    out.Z.rightCols(rest) = out.Z.rightCols(rest) * Zs;
    out.levels.push_back(nu);
    k += nu;
  }
  out.n_inf = k;
  return out;
}

// Same with the infinite part trailing: the finite part (E11 invertible)
// comes first.
inline InfiniteDeflation deflate_infinite_bottom(const Matrix& A,
                                                 const Matrix& E,
                                                 double atol) {
  const Index n = A.rows();
  InfiniteDeflation t =
      deflate_infinite_top(A.transpose(), E.transpose(), atol);
  // Transposing flips the triangle; reversing the order restores it.
  const Matrix J = Matrix::Identity(n, n).rowwise().reverse();
  InfiniteDeflation out;
  out.Q = t.Z * J;
  out.Z = t.Q * J;
  out.n_inf = t.n_inf;
  out.levels = t.levels;
  return out;
}

// Jordan block sizes (descending) from staircase levels.
inline std::vector<Index> jordan_sizes(const std::vector<Index>& levels) {
  std::vector<Index> sizes;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const Index next = j + 1 < levels.size() ? levels[j + 1] : 0;
    for (Index c = 0; c < levels[j] - next; ++c)
      sizes.push_back(static_cast<Index>(j + 1));
  }
  std::sort(sizes.rbegin(), sizes.rend());
  return sizes;
}

inline Index pencil_normal_rank(const Matrix& A, const Matrix& E,
                                double atol) {
  if (A.rows() == 0 || A.cols() == 0) return 0;
  const double scale = std::max(1.0, A.norm()) / std::max(1.0, E.norm());
  Index r = 0;
  for (double s : {0.7548776662466927, -1.324717957244746, 2.147899035704787})
    r = std::max(r, numerical_rank(A - s * scale * E, atol));
  return r;
}

struct KlfStructure {
  std::vector<Index> right_indices;  // ε_i of the L_ε blocks
  Index right_rows = 0, right_cols = 0;
  Index finite_dim = 0;
  std::vector<Index> infinite_blocks;  // Jordan sizes at infinity
  Index infinite_dim = 0;
  std::vector<Index> left_indices;  // η_i of the L_ηᵀ blocks
  Index left_rows = 0, left_cols = 0;
};

struct KlfResult {
  Matrix M;  // Qᵀ A Z
  Matrix N;  // Qᵀ E Z
  Matrix Q;
  Matrix Z;
  KlfStructure structure;
  std::vector<GeneralizedEigenvalue> finite_eigenvalues;
};

namespace detail {

// Minimal right reducing subspace of Mt − μNt when Nt has no regular
// singularity. dims receives the staircase dimensions.
inline Matrix right_chain_space(const Matrix& Mt, const Matrix& Nt,
                                double atol, std::vector<Index>& dims) {
  Matrix S = null_space(Nt, atol);
  dims.clear();
  if (S.cols() == 0) return S;
  dims.push_back(S.cols());
  const Index rows = Nt.rows();
  for (;;) {
    const Matrix Y = orth(Mt * S, atol);
    const Matrix P = Matrix::Identity(rows, rows) - Y * Y.transpose();
    Matrix Snew = null_space(P * Nt, atol);
    if (Snew.cols() <= S.cols()) break;
    S = Snew;
    dims.push_back(S.cols());
  }
  return S;
}

// First k left singular vectors.
inline Matrix leading_basis(const Matrix& M, Index k) {
  if (k <= 0) return Matrix(M.rows(), 0);
  Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeThinU);
  return svd.matrixU().leftCols(k);
}

inline std::vector<Index> chain_indices(const std::vector<Index>& dims) {
  std::vector<Index> d;
  Index prev = 0;
  for (Index k : dims) {
    d.push_back(k - prev);
    prev = k;
  }
  std::vector<Index> idx;
  for (std::size_t j = 0; j < d.size(); ++j) {
    const Index next = j + 1 < d.size() ? d[j + 1] : 0;
    for (Index c = 0; c < d[j] - next; ++c) idx.push_back(static_cast<Index>(j));
  }
  return idx;
}

}  // namespace detail

inline KlfResult kronecker_like_form(const Matrix& A, const Matrix& E,
                                     const ToleranceConfig& tol = {}) {
  require_finite(A, "A");
  require_finite(E, "E");
  if (A.rows() != E.rows() || A.cols() != E.cols())
    throw InputError("kronecker_like_form: A and E must have equal dimensions");
  tol.validate();
  const Index r = A.rows(), c = A.cols();
  const double nrm = std::max(A.norm(), E.norm());
  const double atol = tol.structural_threshold(nrm, std::max(r, c));
  const Index nrank = pencil_normal_rank(A, E, atol);

  // Shifted reciprocal variable μ = 1/(λ − σ): infinite eigenvalues become
  // finite, so the kernel recursion only picks up right chains.
  // A shift close to an eigenvalue makes μ large and the kernel recursion
  // drifts into that eigenvector, so take the best conditioned candidate.
  const double scale = std::max(1.0, A.norm()) / std::max(1.0, E.norm());
  double sigma = 0.0, best = -1.0;
  for (double s : {0.6180339887498949, -1.1892071150027210, 1.7320508075688772,
                   -2.6457513110645907, 3.3166247903554}) {
    const Matrix S = A - s * scale * E;
    if (nrank == 0 || S.size() == 0) {
      sigma = s * scale;
      best = 1.0;
      break;
    }
    Eigen::JacobiSVD<Matrix> svd(S);
    const Vector& sv = svd.singularValues();
    const double gap =
        sv(nrank - 1) / (A.norm() + std::abs(s * scale) * E.norm());
    if (sv(nrank - 1) > atol && (nrank == sv.size() || sv(nrank) <= atol) &&
        gap > best) {
      best = gap;
      sigma = s * scale;
    }
  }
  if (best < 0) throw StructureError("no admissible shift for the staircase");
  const Matrix Mt = -E;
  const Matrix Nt = -(A - sigma * E);

  KlfResult out;
  std::vector<Index> rdims, ldims;
  const Matrix Vr = detail::right_chain_space(Mt, Nt, atol, rdims);
  const Matrix Ul0 =
      detail::right_chain_space(Mt.transpose(), Nt.transpose(), atol, ldims);
  // Each L_ε block has one column more than rows, so the image dimensions
  // follow from the staircase; no second rank decision is needed.
  const Index nr_blocks = rdims.empty() ? 0 : rdims.front();
  const Index nl_blocks = ldims.empty() ? 0 : ldims.front();
  const Matrix Yr =
      detail::leading_basis(hcat(A * Vr, E * Vr), Vr.cols() - nr_blocks);
  const Matrix Ul = detail::leading_basis(
      (Matrix::Identity(r, r) - Yr * Yr.transpose()) * Ul0, Ul0.cols());
  const Matrix Xl = detail::leading_basis(
      (Matrix::Identity(c, c) - Vr * Vr.transpose()) *
          hcat(A.transpose() * Ul, E.transpose() * Ul),
      Ul.cols() - nl_blocks);

  const Matrix Rreg = complement(hcat(Yr, Ul));
  const Matrix Creg = complement(hcat(Vr, Xl));
  if (Rreg.cols() != Creg.cols())
    throw StructureError("staircase produced a non-square regular part");

  KlfStructure& st = out.structure;
  st.right_indices = detail::chain_indices(rdims);
  st.right_rows = Yr.cols();
  st.right_cols = Vr.cols();
  st.left_indices = detail::chain_indices(ldims);
  st.left_rows = Ul.cols();
  st.left_cols = Xl.cols();

  const Index nreg = Rreg.cols();
  Matrix Qreg = Rreg, Zreg = Creg;
  if (nreg > 0) {
    const Matrix Ar = Rreg.transpose() * A * Creg;
    const Matrix Er = Rreg.transpose() * E * Creg;
    InfiniteDeflation inf = deflate_infinite_bottom(Ar, Er, atol);
    st.infinite_dim = inf.n_inf;
    st.infinite_blocks = jordan_sizes(inf.levels);
    st.finite_dim = nreg - inf.n_inf;
    Qreg = Rreg * inf.Q;
    Zreg = Creg * inf.Z;
    if (st.finite_dim > 0) {
      const Index nf = st.finite_dim;
      const Matrix Af = (Qreg.transpose() * A * Zreg).topLeftCorner(nf, nf);
      const Matrix Ef = (Qreg.transpose() * E * Zreg).topLeftCorner(nf, nf);
      OrderedSchurResult qz = ordered_generalized_schur(
          Af, Ef, [](const GeneralizedEigenvalue&) { return false; });
      Qreg.leftCols(nf) = Qreg.leftCols(nf) * qz.Q;
      Zreg.leftCols(nf) = Zreg.leftCols(nf) * qz.Z;
      out.finite_eigenvalues = qz.eigenvalues;
    }
  }
  out.Q = hcat(hcat(Yr, Qreg), Ul);
  out.Z = hcat(hcat(Vr, Zreg), Xl);
  out.M = out.Q.transpose() * A * out.Z;
  out.N = out.Q.transpose() * E * out.Z;
  return out;
}

}  // namespace ratfact
