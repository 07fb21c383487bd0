#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gsp {

// Square row-major matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  explicit DenseMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}
  DenseMatrix(std::size_t n, std::vector<double> data);

  static DenseMatrix identity(std::size_t n);

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t r, std::size_t c) { return data_[r * n_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * n_ + c]; }
  std::span<const double> data() const noexcept { return data_; }

  std::vector<double> column(std::size_t c) const;
  std::vector<double> multiply(std::span<const double> x) const;
  DenseMatrix multiply(const DenseMatrix& b) const;
  DenseMatrix transpose() const;
  double max_asymmetry() const;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct SymmetricEigen {
  std::vector<double> values;  // ascending
  DenseMatrix vectors;         // column k pairs with values[k]
};

// Householder reduction to tridiagonal form followed by the implicit-shift
// QL iteration. Input must be symmetric; only the lower triangle is read.
SymmetricEigen symmetric_eigen(const DenseMatrix& a);

}  // namespace gsp
