#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace qswitch {

/// Small dense row-major real matrix.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols, 0.0) {}

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::vector<double> column(std::size_t c) const;
  std::vector<double> apply(std::span<const double> x) const;
  Matrix transpose() const;
  Matrix operator*(const Matrix& rhs) const;

  double frobenius_norm() const;
  /// max |A(i,j) - A(j,i)|
  double asymmetry() const;

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

struct SymmetricEigensystem {
  std::vector<double> values;  // ascending
  Matrix vectors;              // column k pairs with values[k]
  int sweeps = 0;
};

/// Cyclic Jacobi diagonalization of a real symmetric matrix. Rows are swept
/// in fixed (p, q) order; stops when the off-diagonal Frobenius norm drops to
/// rel_tol * ||A||_F. Each eigenvector's sign is fixed so its largest
/// magnitude component (first one on ties) is positive.
SymmetricEigensystem jacobi_eigensystem(const Matrix& a, double rel_tol = 1e-13,
                                        int max_sweeps = 100);

double dot(std::span<const double> a, std::span<const double> b);

}  // namespace qswitch
