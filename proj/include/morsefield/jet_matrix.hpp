#pragma once

// Small dense matrices of jets, used to carry derivatives through inverses.

#include <Eigen/Dense>
#include <vector>

#include "morsefield/jet.hpp"

namespace morsefield {

class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int rows, int cols, const Jet& like);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Jet& operator()(int i, int j) { return a_[i * cols_ + j]; }
  const Jet& operator()(int i, int j) const { return a_[i * cols_ + j]; }

  Eigen::MatrixXd values() const;
  JetMatrix operator*(const JetMatrix& o) const;
  JetMatrix transpose() const;
  /// Gauss-Jordan with partial pivoting on the values; SingularMatrixError on tiny pivots.
  JetMatrix inverse() const;
  Jet trace() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Jet> a_;
};

/// Builds the n x n (or leading `size` x `size`) block from packed symmetric jets.
JetMatrix symmetric_from_packed(const std::vector<Jet>& packed, int n, int size);

/// Frobenius-type contraction sum_ij a_ij b_ij.
Jet contract(const JetMatrix& a, const JetMatrix& b);

}  // namespace morsefield
