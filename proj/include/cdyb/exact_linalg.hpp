#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "cdyb/scalar.hpp"

// Small dense exact linear algebra over Q. Sizes here never exceed a few
// hundred rows, so plain Gauss-Jordan elimination is adequate.

namespace cdyb::exact {

using Matrix = std::vector<RVec>;

inline Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, RVec(cols, Rational(0))); }

inline Matrix identity(std::size_t n) {
  Matrix m = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i) m[i][i] = 1;
  return m;
}

struct Rref {
  Matrix reduced;
  std::vector<std::size_t> pivot_cols;
};

inline Rref rref(Matrix m) {
  Rref out;
  if (m.empty()) return out;
  const std::size_t rows = m.size();
  const std::size_t cols = m[0].size();
  std::size_t r = 0;
  for (std::size_t c = 0; c < cols && r < rows; ++c) {
    std::size_t p = r;
    while (p < rows && m[p][c] == 0) ++p;
    if (p == rows) continue;
    std::swap(m[p], m[r]);
    const Rational inv = 1 / m[r][c];
    for (std::size_t k = c; k < cols; ++k) m[r][k] *= inv;
    for (std::size_t i = 0; i < rows; ++i) {
      if (i == r || m[i][c] == 0) continue;
      const Rational f = m[i][c];
      for (std::size_t k = c; k < cols; ++k) m[i][k] -= f * m[r][k];
    }
    out.pivot_cols.push_back(c);
    ++r;
  }
  out.reduced = std::move(m);
  return out;
}

inline std::size_t rank(const Matrix& m) { return rref(m).pivot_cols.size(); }

inline Rational determinant(Matrix m) {
  const std::size_t n = m.size();
  Rational det = 1;
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t p = c;
    while (p < n && m[p][c] == 0) ++p;
    if (p == n) return Rational(0);
    if (p != c) {
      std::swap(m[p], m[c]);
      det = -det;
    }
    det *= m[c][c];
    for (std::size_t i = c + 1; i < n; ++i) {
      if (m[i][c] == 0) continue;
      const Rational f = m[i][c] / m[c][c];
      for (std::size_t k = c; k < n; ++k) m[i][k] -= f * m[c][k];
    }
  }
  return det;
}

/// Basis of {x : m x = 0}, one vector per free column.
inline std::vector<RVec> nullspace(const Matrix& m, std::size_t cols) {
  std::vector<RVec> basis;
  if (m.empty()) {
    for (std::size_t j = 0; j < cols; ++j) {
      RVec v(cols, Rational(0));
      v[j] = 1;
      basis.push_back(std::move(v));
    }
    return basis;
  }
  const Rref rr = rref(m);
  std::vector<bool> is_pivot(cols, false);
  for (auto c : rr.pivot_cols) is_pivot[c] = true;
  for (std::size_t free = 0; free < cols; ++free) {
    if (is_pivot[free]) continue;
    RVec v(cols, Rational(0));
    v[free] = 1;
    for (std::size_t i = 0; i < rr.pivot_cols.size(); ++i) v[rr.pivot_cols[i]] = -rr.reduced[i][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

inline std::optional<Matrix> inverse(const Matrix& m) {
  const std::size_t n = m.size();
  Matrix aug = zeros(n, 2 * n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) aug[i][j] = m[i][j];
    aug[i][n + i] = 1;
  }
  Rref rr = rref(std::move(aug));
  if (rr.pivot_cols.size() < n || rr.pivot_cols[n - 1] != n - 1) return std::nullopt;
  Matrix inv = zeros(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) inv[i][j] = rr.reduced[i][n + j];
  return inv;
}

inline RVec multiply(const Matrix& m, const RVec& v) {
  RVec out(m.size(), Rational(0));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < v.size(); ++j)
      if (m[i][j] != 0 && v[j] != 0) out[i] += m[i][j] * v[j];
  return out;
}

/// Expresses vectors in the span of a fixed family of column vectors. The
/// family must be linearly independent; membership is verified exactly.
class SpanSolver {
 public:
  explicit SpanSolver(const std::vector<RVec>& columns) : columns_(columns) {
    if (columns.empty()) return;
    const std::size_t len = columns[0].size();
    // Rows of the transposed system give the pivot coordinates.
    Matrix t = zeros(columns.size(), len);
    for (std::size_t k = 0; k < columns.size(); ++k) t[k] = columns[k];
    const Rref rr = rref(t);
    if (rr.pivot_cols.size() != columns.size())
      throw Error(ErrorKind::InvalidInput, "SpanSolver: columns are linearly dependent");
    pivots_ = rr.pivot_cols;
    Matrix sub = zeros(columns.size(), columns.size());
    for (std::size_t i = 0; i < pivots_.size(); ++i)
      for (std::size_t k = 0; k < columns.size(); ++k) sub[i][k] = columns[k][pivots_[i]];
    inverse_ = *inverse(sub);
  }

  /// Coordinates of v, or nullopt when v is outside the span.
  std::optional<RVec> solve(const RVec& v) const {
    RVec rhs(pivots_.size());
    for (std::size_t i = 0; i < pivots_.size(); ++i) rhs[i] = v[pivots_[i]];
    RVec coeffs = multiply(inverse_, rhs);
    RVec back(v.size(), Rational(0));
    for (std::size_t k = 0; k < columns_.size(); ++k) {
      if (coeffs[k] == 0) continue;
      for (std::size_t j = 0; j < v.size(); ++j)
        if (columns_[k][j] != 0) back[j] += coeffs[k] * columns_[k][j];
    }
    if (back != v) return std::nullopt;
    return coeffs;
  }

 private:
  std::vector<RVec> columns_;
  std::vector<std::size_t> pivots_;
  Matrix inverse_;
};

}  // namespace cdyb::exact
