#pragma once

#include <cstddef>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace sheaf {

using Matrix = Eigen::MatrixXd;
using SparseMatrix = Eigen::SparseMatrix<double>;

/// Relative rank tolerance: 1e-9 * (largest |entry|) * max(rows, cols).
double rank_tolerance(double max_abs, std::size_t rows, std::size_t cols);

/// Gaussian elimination with full pivoting on a copy of `a`.
std::size_t rank(const Matrix& a);
/// Row-by-row sparse elimination with largest-entry pivots; same tolerance rule.
std::size_t rank(const SparseMatrix& a);

/// Orthonormal basis (as columns) of the null space of `a`, with the kernel
/// dimension decided by the same elimination and tolerance as rank().
Matrix nullspace(const Matrix& a);
/// Orthonormal basis of the column span of `a` (columns assumed independent).
Matrix orthonormal_columns(const Matrix& a);
double spectral_norm(const Matrix& a);

SparseMatrix to_sparse(const Matrix& a);
double max_abs(const SparseMatrix& a);

}  // namespace sheaf
