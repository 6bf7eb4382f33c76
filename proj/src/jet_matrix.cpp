#include "morsefield/jet_matrix.hpp"

#include <cmath>
#include <stdexcept>

#include "morsefield/error.hpp"
#include "morsefield/patch.hpp"

namespace morsefield {

JetMatrix::JetMatrix(int rows, int cols, const Jet& like)
    : rows_(rows), cols_(cols), a_(static_cast<std::size_t>(rows) * cols, Jet::constant_like(like, 0.0)) {}

Eigen::MatrixXd JetMatrix::values() const {
  Eigen::MatrixXd m(rows_, cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) m(i, j) = (*this)(i, j).value();
  }
  return m;
}

JetMatrix JetMatrix::operator*(const JetMatrix& o) const {
  if (cols_ != o.rows_) throw std::invalid_argument("jet matrix shape mismatch");
  JetMatrix out(rows_, o.cols_, a_.front());
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < o.cols_; ++j) {
      Jet s = Jet::constant_like(a_.front(), 0.0);
      for (int k = 0; k < cols_; ++k) s += (*this)(i, k) * o(k, j);
      out(i, j) = s;
    }
  }
  return out;
}

JetMatrix JetMatrix::transpose() const {
  JetMatrix out(cols_, rows_, a_.front());
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) out(j, i) = (*this)(i, j);
  }
  return out;
}

JetMatrix JetMatrix::inverse() const {
  if (rows_ != cols_) throw std::invalid_argument("inverse of a non-square jet matrix");
  const int n = rows_;
  JetMatrix m = *this;
  JetMatrix inv(n, n, a_.front());
  for (int i = 0; i < n; ++i) inv(i, i) = Jet::constant_like(a_.front(), 1.0);
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(m(r, c).value()) > std::abs(m(piv, c).value())) piv = r;
    }
    if (!(std::abs(m(piv, c).value()) >= 1e-14)) throw SingularMatrixError("matrix is singular (pivot below 1e-14)");
    if (piv != c) {
      for (int j = 0; j < n; ++j) {
        std::swap(m(c, j), m(piv, j));
        std::swap(inv(c, j), inv(piv, j));
      }
    }
    const Jet rp = reciprocal(m(c, c));
    for (int j = 0; j < n; ++j) {
      m(c, j) = m(c, j) * rp;
      inv(c, j) = inv(c, j) * rp;
    }
    for (int r = 0; r < n; ++r) {
      if (r == c) continue;
      const Jet f = m(r, c);
      for (int j = 0; j < n; ++j) {
        m(r, j) -= f * m(c, j);
        inv(r, j) -= f * inv(c, j);
      }
    }
  }
  return inv;
}

Jet JetMatrix::trace() const {
  Jet s = Jet::constant_like(a_.front(), 0.0);
  for (int i = 0; i < std::min(rows_, cols_); ++i) s += (*this)(i, i);
  return s;
}

JetMatrix symmetric_from_packed(const std::vector<Jet>& packed, int n, int size) {
  JetMatrix m(size, size, packed.front());
  for (int i = 0; i < size; ++i) {
    for (int j = i; j < size; ++j) m(i, j) = m(j, i) = packed[packed_index(n, i, j)];
  }
  return m;
}

Jet contract(const JetMatrix& a, const JetMatrix& b) {
  Jet s = Jet::constant_like(a(0, 0), 0.0);
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) s += a(i, j) * b(i, j);
  }
  return s;
}

}  // namespace morsefield
