#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "gsp/image.hpp"

namespace gsp {

struct GridWeightParams {
  double sigma_l = 1.0;  // geometric bandwidth
  double sigma_x = 0.1;  // photometric bandwidth
  int connectivity = 4;  // 4 or 8
  bool self_loops = false;

  void validate() const;
};

struct Edge {
  std::size_t i = 0;
  std::size_t j = 0;
  double w = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

// Undirected weighted graph. Edges are stored once with i < j, sorted by (i, j).
class PixelGraph {
 public:
  PixelGraph() = default;
  // Validates and sorts; throws on i >= j, out-of-range nodes, non-positive
  // weights or duplicate pairs.
  PixelGraph(std::size_t node_count, std::vector<Edge> edges,
             std::vector<double> self_loops = {});

  std::size_t node_count() const noexcept { return node_count_; }
  const std::vector<Edge>& edges() const noexcept { return edges_; }
  bool has_self_loops() const noexcept { return !self_loops_.empty(); }
  // Empty when the graph has no self-loops.
  const std::vector<double>& self_loops() const noexcept { return self_loops_; }
  double self_loop(std::size_t i) const {
    return self_loops_.empty() ? 0.0 : self_loops_[i];
  }

  // Induced subgraph on `nodes` (renumbered 0..nodes.size()-1 in given order).
  PixelGraph induced(std::span<const std::size_t> nodes) const;

 private:
  std::size_t node_count_ = 0;
  std::vector<Edge> edges_;
  std::vector<double> self_loops_;
};

// Gaussian kernel weight for a pixel pair at squared grid distance `geo_sq`.
double kernel_weight(double geo_sq, double photo_sq, double sigma_l,
                     double sigma_x);

PixelGraph build_grid_graph(const ImagePlane& img, const GridWeightParams& params);

// Every pair inside a (2r+1)^2 square window is connected; connectivity in
// `params` is ignored. Used for the graph form of the bilateral filter.
PixelGraph build_window_graph(const ImagePlane& img,
                              const GridWeightParams& params, int radius);

struct NonlocalParams {
  int patch_radius = 1;
  int search_radius = 3;
  std::size_t k = 4;
  double sigma_x = 0.1;
};

// k most similar patches (mean squared patch difference) inside the search
// window; symmetrized by keeping the larger weight of the two directions.
PixelGraph build_nonlocal_graph(const ImagePlane& img, const NonlocalParams& params);

std::vector<double> degree_vector(const PixelGraph& g);

// Component label per node, labels numbered by smallest member node.
std::vector<std::size_t> connected_components(const PixelGraph& g);

enum class OperatorKind {
  Adjacency,
  Combinatorial,
  SymmetricNormalized,
  RandomWalk,
  Generalized,
  BiLaplacian,
  Doubly,  // Sinkhorn-scaled adjacency
  General,
};

const char* to_string(OperatorKind kind);

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

// CSR matrix; rows sorted by column. `symmetric()` is a structural flag that
// the constructor verifies when set.
class SparseSymOperator {
 public:
  SparseSymOperator() = default;
  SparseSymOperator(std::size_t dim, std::vector<Triplet> triplets,
                    OperatorKind kind, bool symmetric);

  std::size_t dimension() const noexcept { return dim_; }
  OperatorKind kind() const noexcept { return kind_; }
  bool symmetric() const noexcept { return symmetric_; }

  std::span<const std::size_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::size_t> cols() const noexcept { return cols_; }
  std::span<const double> values() const noexcept { return values_; }
  std::size_t nonzeros() const noexcept { return values_.size(); }

  double entry(std::size_t r, std::size_t c) const;
  std::vector<Triplet> triplets() const;
  // Dense row-major copy.
  std::vector<double> to_dense() const;
  std::vector<double> row_sums() const;

  std::vector<double> apply(std::span<const double> x) const;

 private:
  std::size_t dim_ = 0;
  OperatorKind kind_ = OperatorKind::General;
  bool symmetric_ = false;
  std::vector<std::size_t> row_ptr_{0};
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

// Adjacency W with self-loop weights on the diagonal.
SparseSymOperator adjacency_operator(const PixelGraph& g);

// Combinatorial: D - W. SymmetricNormalized: D^-1/2 L D^-1/2.
// RandomWalk: D^-1 L. Generalized: L + diag(self-loops). BiLaplacian: L*L.
// Degrees include self-loop weights.
SparseSymOperator variation_operator(const PixelGraph& g, OperatorKind kind);

// Sparse product a*b.
SparseSymOperator multiply(const SparseSymOperator& a, const SparseSymOperator& b,
                           OperatorKind kind, bool symmetric);

struct SinkhornResult {
  std::vector<double> scaling;  // diagonal of C, K = C^-1/2 W C^-1/2
  SparseSymOperator doubly_stochastic;
  double residual = 0.0;  // max |row sum - 1| of K
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<double> residual_history;
};

// Symmetric Sinkhorn-Knopp scaling of a nonnegative symmetric matrix.
SinkhornResult sinkhorn_scale(const SparseSymOperator& w, std::size_t max_iters,
                              double tol);

}  // namespace gsp
