#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gsp/dense.hpp"
#include "gsp/graph.hpp"

namespace gsp {

inline constexpr std::size_t kMaxDenseSpectrum = 4096;

// Ascending eigenvalues with an orthonormal eigenvector basis (the GFT).
//
// Basis conventions, applied in this order so results are reproducible:
//  * combinatorial operators: the null space is spanned by normalized
//    connected-component indicators, ordered by each component's smallest node;
//  * other degenerate eigenspaces: columns ordered by the index of their
//    dominant entry;
//  * every column's first entry above 1e-12 in magnitude is positive.
class GraphSpectrum {
 public:
  GraphSpectrum() = default;
  GraphSpectrum(std::vector<double> eigenvalues, DenseMatrix eigenvectors,
                OperatorKind kind);

  std::size_t size() const noexcept { return eigenvalues_.size(); }
  const std::vector<double>& eigenvalues() const noexcept { return eigenvalues_; }
  const DenseMatrix& eigenvectors() const noexcept { return eigenvectors_; }
  std::vector<double> eigenvector(std::size_t k) const { return eigenvectors_.column(k); }
  OperatorKind kind() const noexcept { return kind_; }

 private:
  std::vector<double> eigenvalues_;
  DenseMatrix eigenvectors_;
  OperatorKind kind_ = OperatorKind::General;
};

GraphSpectrum eigendecompose(const SparseSymOperator& op);

// alpha_k = <u_k, x>
std::vector<double> gft(const GraphSpectrum& spec, std::span<const double> x);
std::vector<double> igft(const GraphSpectrum& spec, std::span<const double> alpha);

// Orthonormal DCT-II, basis vectors as columns.
DenseMatrix dct_basis(std::size_t n);

// Combinatorial Laplacian of the unit-weight path on n nodes.
SparseSymOperator path_laplacian(std::size_t n);

struct PowerIterationResult {
  double radius = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
};

// Estimate of the spectral radius |lambda|_max of a symmetric operator.
PowerIterationResult spectral_radius(const SparseSymOperator& op, double tol = 1e-10,
                                     std::size_t max_iters = 10000);

// Sum over edges of w_ij (x_i - x_j)^2, read from the off-diagonal entries.
double laplacian_quadratic(const SparseSymOperator& op, std::span<const double> x);
// x . (op x)
double quadratic_form(const SparseSymOperator& op, std::span<const double> x);
// || x - W x / |lambda_max| ||_p^p, p >= 1.
double shift_tv(const SparseSymOperator& w, std::span<const double> x, double p);
// 1/2 || x - W x ||_2^2
double quadratic_shift(const SparseSymOperator& w, std::span<const double> x);
// sum_i sqrt( sum_j (x_j - x_i)^2 W_ij^2 )
double local_graph_tv(const SparseSymOperator& w, std::span<const double> x);

}  // namespace gsp
