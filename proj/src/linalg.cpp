#include "sheaf/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <queue>
#include <unordered_map>
#include <vector>

#include <Eigen/QR>
#include <Eigen/SVD>

namespace sheaf {

double rank_tolerance(double max_abs, std::size_t rows, std::size_t cols) {
  return 1e-9 * max_abs * static_cast<double>(std::max(rows, cols));
}

namespace {

struct Reduced {
  Matrix r;                       // row echelon form, rows permuted
  std::vector<Eigen::Index> cols; // column permutation: position k holds original column
  std::size_t rank = 0;
};

// Gauss-Jordan with full pivoting. When `jordan` is set the pivot block is
// reduced to the identity so the null space can be read off directly.
Reduced eliminate(const Matrix& a, bool jordan) {
  Reduced out;
  out.r = a;
  Matrix& m = out.r;
  const Eigen::Index rows = m.rows(), cols = m.cols();
  out.cols.resize(static_cast<std::size_t>(cols));
  for (Eigen::Index j = 0; j < cols; ++j) out.cols[static_cast<std::size_t>(j)] = j;
  if (rows == 0 || cols == 0) return out;
  const double tol = rank_tolerance(m.cwiseAbs().maxCoeff(), static_cast<std::size_t>(rows),
                                    static_cast<std::size_t>(cols));
  Eigen::Index k = 0;
  for (; k < std::min(rows, cols); ++k) {
    Eigen::Index pi = 0, pj = 0;
    double best = m.bottomRightCorner(rows - k, cols - k).cwiseAbs().maxCoeff(&pi, &pj);
    if (!(best > tol)) break;
    pi += k;
    pj += k;
    m.row(k).swap(m.row(pi));
    m.col(k).swap(m.col(pj));
    std::swap(out.cols[static_cast<std::size_t>(k)], out.cols[static_cast<std::size_t>(pj)]);
    m.row(k) /= m(k, k);
    for (Eigen::Index i = jordan ? 0 : k + 1; i < rows; ++i) {
      if (i == k) continue;
      double f = m(i, k);
      if (f != 0.0) m.row(i) -= f * m.row(k);
    }
  }
  out.rank = static_cast<std::size_t>(k);
  return out;
}

}  // namespace

std::size_t rank(const Matrix& a) { return eliminate(a, false).rank; }

std::size_t rank(const SparseMatrix& input) {
  const std::size_t rows = static_cast<std::size_t>(input.rows());
  const std::size_t cols = static_cast<std::size_t>(input.cols());
  if (rows == 0 || cols == 0 || input.nonZeros() == 0) return 0;
  const double tol = rank_tolerance(max_abs(input), rows, cols);

  // Row-major copy so each row can be fed to the reducer in turn.
  Eigen::SparseMatrix<double, Eigen::RowMajor> a = input;
  using Row = std::unordered_map<Eigen::Index, double>;
  std::vector<Row> pivot_rows;             // normalized so the pivot entry is 1
  std::vector<Eigen::Index> pivot_col;
  std::unordered_map<Eigen::Index, std::size_t> pivot_of;  // column -> creation index

  for (Eigen::Index i = 0; i < a.outerSize(); ++i) {
    Row r;
    std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> todo;
    for (Eigen::SparseMatrix<double, Eigen::RowMajor>::InnerIterator it(a, i); it; ++it) {
      if (it.value() == 0.0) continue;
      r[it.col()] = it.value();
      if (auto p = pivot_of.find(it.col()); p != pivot_of.end()) todo.push(p->second);
    }
    // A pivot row only has entries in columns pivoted after it, so reducing in
    // creation order never reintroduces an eliminated column.
    std::size_t last = static_cast<std::size_t>(-1);
    while (!todo.empty()) {
      std::size_t k = todo.top();
      todo.pop();
      if (k == last) continue;
      last = k;
      const Row& p = pivot_rows[k];
      const Eigen::Index pc = pivot_col[k];
      auto f_it = r.find(pc);
      if (f_it == r.end()) continue;
      double f = f_it->second;
      for (const auto& [c, v] : p) {
        double nv = (r.count(c) ? r[c] : 0.0) - f * v;
        if (std::fabs(nv) <= tol * 1e-3 || c == pc) {
          r.erase(c);
        } else {
          bool fresh = !r.count(c);
          r[c] = nv;
          if (fresh)
            if (auto q = pivot_of.find(c); q != pivot_of.end() && q->second > k) todo.push(q->second);
        }
      }
    }
    // Pick the largest remaining entry as the new pivot.
    Eigen::Index best_c = -1;
    double best = tol;
    for (const auto& [c, v] : r)
      if (std::fabs(v) > best || (std::fabs(v) == best && c < best_c)) {
        best = std::fabs(v);
        best_c = c;
      }
    if (best_c < 0) continue;
    double pv = r[best_c];
    Row p;
    for (const auto& [c, v] : r)
      if (std::fabs(v) > tol * 1e-3) p[c] = v / pv;
    p[best_c] = 1.0;
    pivot_of[best_c] = pivot_rows.size();
    pivot_col.push_back(best_c);
    pivot_rows.push_back(std::move(p));
  }
  return pivot_rows.size();
}

Matrix nullspace(const Matrix& a) {
  const Eigen::Index n = a.cols();
  if (a.rows() == 0) return Matrix::Identity(n, n);
  Reduced red = eliminate(a, true);
  const Eigen::Index r = static_cast<Eigen::Index>(red.rank);
  Matrix basis = Matrix::Zero(n, n - r);
  for (Eigen::Index f = 0; f < n - r; ++f) {
    // Free column r+f: set it to 1 and solve for the pivot variables.
    Eigen::Index free_col = red.cols[static_cast<std::size_t>(r + f)];
    basis(free_col, f) = 1.0;
    for (Eigen::Index k = 0; k < r; ++k) basis(red.cols[static_cast<std::size_t>(k)], f) = -red.r(k, r + f);
  }
  return orthonormal_columns(basis);
}

Matrix orthonormal_columns(const Matrix& a) {
  if (a.cols() == 0) return Matrix(a.rows(), 0);
  Eigen::HouseholderQR<Matrix> qr(a);
  Matrix q = qr.householderQ() * Matrix::Identity(a.rows(), a.cols());
  return q;
}

double spectral_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(a);
  return svd.singularValues()(0);
}

SparseMatrix to_sparse(const Matrix& a) {
  SparseMatrix s = a.sparseView();
  s.makeCompressed();
  return s;
}

double max_abs(const SparseMatrix& a) {
  double m = 0;
  for (Eigen::Index k = 0; k < a.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(a, k); it; ++it) m = std::max(m, std::fabs(it.value()));
  return m;
}

}  // namespace sheaf
