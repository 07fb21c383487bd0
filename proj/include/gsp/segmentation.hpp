#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gsp/graph.hpp"
#include "gsp/image.hpp"

namespace gsp {

inline constexpr double kCapacityScale = 65536.0;  // fixed point for real capacities

std::int64_t to_capacity(double value);

struct Arc {
  std::size_t from = 0;
  std::size_t to = 0;
  std::int64_t capacity = 0;
};

// Directed network; the source has no in-arcs and the sink no out-arcs.
class FlowNetwork {
 public:
  FlowNetwork(std::size_t nodes, std::size_t source, std::size_t sink);

  void add_arc(std::size_t from, std::size_t to, std::int64_t capacity);

  std::size_t node_count() const noexcept { return nodes_; }
  std::size_t source() const noexcept { return source_; }
  std::size_t sink() const noexcept { return sink_; }
  const std::vector<Arc>& arcs() const noexcept { return arcs_; }

 private:
  std::size_t nodes_;
  std::size_t source_;
  std::size_t sink_;
  std::vector<Arc> arcs_;
};

struct CutResult {
  std::int64_t flow = 0;
  std::vector<bool> source_side;       // reachable from s in the residual network
  std::vector<std::size_t> cut_arcs;  // indices into arcs(), source side -> sink side
};

// Shortest augmenting paths (Edmonds-Karp), exact integer arithmetic.
CutResult max_flow(const FlowNetwork& net);

// Capacity of arcs leaving the source side.
std::int64_t cut_cost(const FlowNetwork& net, const std::vector<bool>& source_side);

struct Bipartition {
  std::vector<bool> in_first;  // first side always holds node 0
  double cost = 0.0;           // cut/assoc(A) + cut/assoc(B)
};

// cut(A,B)/assoc(A,V) + cut(A,B)/assoc(B,V); self-loops count toward assoc.
double normalized_cut_cost(const PixelGraph& g, const std::vector<bool>& in_first);

// Fiedler vector of the symmetric normalized Laplacian mapped back by
// D^-1/2, swept over all N-1 sorted split points. A disconnected graph splits
// off the component of node 0 at cost 0.
Bipartition normalized_cut(const PixelGraph& g);

// Repeatedly splits the region whose best split is cheapest, while that cost is
// <= cost_threshold and fewer than max_regions exist. Labels 0.. are ordered by
// each region's smallest node.
std::vector<std::size_t> recursive_ncut(const PixelGraph& g, std::size_t max_regions,
                                        double cost_threshold);

struct MumfordShahState {
  std::vector<std::uint8_t> labels;  // 1 or 2 per pixel
  double c1 = 0.0;
  double c2 = 0.0;
  double energy = 0.0;
  double nu = 0.0;
  int connectivity = 4;
  int iterations = 0;
  std::vector<double> energy_history;  // initial state, then after each iteration
};

// Grid pairs with weight 1 / (k * distance), k = connectivity.
std::vector<Edge> mumford_shah_edges(std::size_t width, std::size_t height, int connectivity);

// sum_i (c_{label_i} - f_i)^2 + nu * sum over cut pairs of w_ij
double mumford_shah_energy(const ImagePlane& f, const std::vector<std::uint8_t>& labels,
                           double c1, double c2, double nu, int connectivity);

MumfordShahState mumford_shah_two_region(const ImagePlane& f, double nu, int connectivity,
                                         int max_outer_iters);

}  // namespace gsp
