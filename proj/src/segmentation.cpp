#include "gsp/segmentation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <numeric>
#include <string>

#include "gsp/error.hpp"
#include "gsp/spectral.hpp"

namespace gsp {

std::int64_t to_capacity(double value) {
  require(std::isfinite(value) && value >= 0.0, ErrorCode::InvalidArgument,
          "capacity must be finite and >= 0");
  return static_cast<std::int64_t>(std::llround(value * kCapacityScale));
}

FlowNetwork::FlowNetwork(std::size_t nodes, std::size_t source, std::size_t sink)
    : nodes_(nodes), source_(source), sink_(sink) {
  require(source < nodes && sink < nodes && source != sink, ErrorCode::InvalidArgument,
          "flow network: source and sink must be distinct nodes");
}

void FlowNetwork::add_arc(std::size_t from, std::size_t to, std::int64_t capacity) {
  require(from < nodes_ && to < nodes_ && from != to, ErrorCode::InvalidArgument,
          "flow network: bad arc " + std::to_string(from) + " -> " + std::to_string(to));
  require(capacity >= 0, ErrorCode::InvalidArgument, "flow network: negative capacity");
  require(to != source_, ErrorCode::InvalidArgument, "flow network: arc into the source");
  require(from != sink_, ErrorCode::InvalidArgument, "flow network: arc out of the sink");
  arcs_.push_back({from, to, capacity});
}

CutResult max_flow(const FlowNetwork& net) {
  const std::size_t n = net.node_count();
  // Residual arcs: 2k forward, 2k+1 reverse.
  std::vector<std::size_t> head;
  std::vector<std::int64_t> residual;
  std::vector<std::vector<std::size_t>> out(n);
  for (const Arc& a : net.arcs()) {
    out[a.from].push_back(head.size());
    head.push_back(a.to);
    residual.push_back(a.capacity);
    out[a.to].push_back(head.size());
    head.push_back(a.from);
    residual.push_back(0);
  }

  CutResult res;
  const std::size_t none = std::numeric_limits<std::size_t>::max();
  std::vector<std::size_t> via(n);
  auto bfs = [&]() {
    std::fill(via.begin(), via.end(), none);
    std::vector<bool> seen(n, false);
    std::deque<std::size_t> queue{net.source()};
    seen[net.source()] = true;
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      for (std::size_t e : out[u]) {
        const std::size_t v = head[e];
        if (residual[e] > 0 && !seen[v]) {
          seen[v] = true;
          via[v] = e;
          queue.push_back(v);
        }
      }
    }
    return seen;
  };

  while (true) {
    std::vector<bool> seen = bfs();
    if (!seen[net.sink()]) {
      res.source_side = std::move(seen);
      break;
    }
    std::int64_t push = std::numeric_limits<std::int64_t>::max();
    for (std::size_t v = net.sink(); v != net.source(); v = head[via[v] ^ 1]) {
      push = std::min(push, residual[via[v]]);
    }
    for (std::size_t v = net.sink(); v != net.source(); v = head[via[v] ^ 1]) {
      residual[via[v]] -= push;
      residual[via[v] ^ 1] += push;
    }
    res.flow += push;
  }
  for (std::size_t k = 0; k < net.arcs().size(); ++k) {
    const Arc& a = net.arcs()[k];
    if (res.source_side[a.from] && !res.source_side[a.to]) res.cut_arcs.push_back(k);
  }
  return res;
}

std::int64_t cut_cost(const FlowNetwork& net, const std::vector<bool>& source_side) {
  require(source_side.size() == net.node_count(), ErrorCode::DimensionMismatch,
          "cut_cost: partition size mismatch");
  require(source_side[net.source()] && !source_side[net.sink()], ErrorCode::InvalidArgument,
          "cut_cost: partition must put the source and sink on different sides");
  std::int64_t acc = 0;
  for (const Arc& a : net.arcs()) {
    if (source_side[a.from] && !source_side[a.to]) acc += a.capacity;
  }
  return acc;
}

double normalized_cut_cost(const PixelGraph& g, const std::vector<bool>& in_first) {
  require(in_first.size() == g.node_count(), ErrorCode::DimensionMismatch,
          "normalized_cut_cost: partition size mismatch");
  const auto first = std::count(in_first.begin(), in_first.end(), true);
  require(first > 0 && static_cast<std::size_t>(first) < in_first.size(),
          ErrorCode::InvalidArgument, "normalized_cut_cost: both sides must be non-empty");
  const std::vector<double> d = degree_vector(g);
  double assoc_a = 0.0;
  double assoc_b = 0.0;
  for (std::size_t i = 0; i < d.size(); ++i) (in_first[i] ? assoc_a : assoc_b) += d[i];
  double cut = 0.0;
  for (const Edge& e : g.edges()) {
    if (in_first[e.i] != in_first[e.j]) cut += e.w;
  }
  if (cut == 0.0) return 0.0;
  return cut / assoc_a + cut / assoc_b;
}

namespace {

std::vector<std::size_t> members(const std::vector<bool>& in_first) {
  std::vector<std::size_t> m;
  for (std::size_t i = 0; i < in_first.size(); ++i)
    if (in_first[i]) m.push_back(i);
  return m;
}

}  // namespace

Bipartition normalized_cut(const PixelGraph& g) {
  const std::size_t n = g.node_count();
  require(n >= 2, ErrorCode::InvalidArgument, "normalized_cut: need at least 2 nodes");
  require(n <= kMaxDenseSpectrum, ErrorCode::SizeLimit,
          "normalized_cut: N = " + std::to_string(n) + " exceeds " +
              std::to_string(kMaxDenseSpectrum));

  const std::vector<std::size_t> comp = connected_components(g);
  if (*std::max_element(comp.begin(), comp.end()) > 0) {
    Bipartition out;
    out.in_first.resize(n);
    for (std::size_t i = 0; i < n; ++i) out.in_first[i] = comp[i] == comp[0];
    out.cost = 0.0;
    return out;
  }

  const std::vector<double> d = degree_vector(g);
  const GraphSpectrum spec =
      eigendecompose(variation_operator(g, OperatorKind::SymmetricNormalized));
  std::vector<double> y = spec.eigenvector(1);
  for (std::size_t i = 0; i < n; ++i) y[i] /= std::sqrt(d[i]);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return y[a] < y[b]; });

  Bipartition best;
  std::vector<std::size_t> best_members;
  bool have = false;
  std::vector<bool> prefix(n, false);
  for (std::size_t s = 0; s + 1 < n; ++s) {
    prefix[order[s]] = true;
    std::vector<bool> cand = prefix;
    if (!cand[0]) cand.flip();
    const double cost = normalized_cut_cost(g, cand);
    const std::vector<std::size_t> m = members(cand);
    const double tol = 1e-12 * std::max(1.0, best.cost);
    if (!have || cost < best.cost - tol ||
        (std::abs(cost - best.cost) <= tol &&
         std::lexicographical_compare(m.begin(), m.end(), best_members.begin(),
                                      best_members.end()))) {
      best.in_first = std::move(cand);
      best.cost = cost;
      best_members = m;
      have = true;
    }
  }
  return best;
}

std::vector<std::size_t> recursive_ncut(const PixelGraph& g, std::size_t max_regions,
                                        double cost_threshold) {
  require(max_regions >= 1, ErrorCode::InvalidArgument, "recursive_ncut: max_regions >= 1");
  struct Region {
    std::vector<std::size_t> nodes;
    bool splittable = false;
    Bipartition split;
  };
  auto analyse = [&](std::vector<std::size_t> nodes) {
    Region r{std::move(nodes), false, {}};
    if (r.nodes.size() >= 2) {
      r.split = normalized_cut(g.induced(r.nodes));
      r.splittable = true;
    }
    return r;
  };

  std::vector<std::size_t> all(g.node_count());
  std::iota(all.begin(), all.end(), 0);
  std::vector<Region> regions;
  regions.push_back(analyse(std::move(all)));
  while (regions.size() < max_regions) {
    std::size_t pick = regions.size();
    for (std::size_t r = 0; r < regions.size(); ++r) {
      if (!regions[r].splittable || regions[r].split.cost > cost_threshold) continue;
      if (pick == regions.size() || regions[r].split.cost < regions[pick].split.cost) pick = r;
    }
    if (pick == regions.size()) break;
    std::vector<std::size_t> a;
    std::vector<std::size_t> b;
    for (std::size_t k = 0; k < regions[pick].nodes.size(); ++k) {
      (regions[pick].split.in_first[k] ? a : b).push_back(regions[pick].nodes[k]);
    }
    regions[pick] = analyse(std::move(a));
    regions.push_back(analyse(std::move(b)));
  }

  std::sort(regions.begin(), regions.end(), [](const Region& x, const Region& y) {
    return x.nodes.front() < y.nodes.front();
  });
  std::vector<std::size_t> labels(g.node_count(), 0);
  for (std::size_t r = 0; r < regions.size(); ++r)
    for (std::size_t v : regions[r].nodes) labels[v] = r;
  return labels;
}

std::vector<Edge> mumford_shah_edges(std::size_t width, std::size_t height, int connectivity) {
  require(connectivity == 4 || connectivity == 8, ErrorCode::InvalidArgument,
          "mumford-shah: connectivity must be 4 or 8");
  const double k = connectivity;
  std::vector<Edge> edges;
  for (std::size_t y = 0; y < height; ++y) {
    for (std::size_t x = 0; x < width; ++x) {
      const std::size_t i = y * width + x;
      if (x + 1 < width) edges.push_back({i, i + 1, 1.0 / k});
      if (y + 1 < height) {
        if (connectivity == 8 && x > 0) edges.push_back({i, i + width - 1, 1.0 / (k * std::sqrt(2.0))});
        edges.push_back({i, i + width, 1.0 / k});
        if (connectivity == 8 && x + 1 < width)
          edges.push_back({i, i + width + 1, 1.0 / (k * std::sqrt(2.0))});
      }
    }
  }
  return edges;
}

namespace {

double energy_with(const std::vector<double>& f, const std::vector<Edge>& edges,
                   const std::vector<std::uint8_t>& labels, double c1, double c2, double nu) {
  double data = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double d = (labels[i] == 1 ? c1 : c2) - f[i];
    data += d * d;
  }
  double boundary = 0.0;
  for (const Edge& e : edges) {
    if (labels[e.i] != labels[e.j]) boundary += e.w;
  }
  return data + nu * boundary;
}

}  // namespace

double mumford_shah_energy(const ImagePlane& f, const std::vector<std::uint8_t>& labels,
                           double c1, double c2, double nu, int connectivity) {
  require(f.channels() == 1, ErrorCode::InvalidArgument, "mumford-shah: grayscale required");
  require(labels.size() == f.pixel_count(), ErrorCode::DimensionMismatch,
          "mumford-shah: label count mismatch");
  return energy_with(f.channel(0), mumford_shah_edges(f.width(), f.height(), connectivity),
                     labels, c1, c2, nu);
}

MumfordShahState mumford_shah_two_region(const ImagePlane& f, double nu, int connectivity,
                                         int max_outer_iters) {
  require(!f.empty(), ErrorCode::EmptyInput, "mumford-shah: empty image");
  require(f.channels() == 1, ErrorCode::InvalidArgument,
          "mumford-shah: grayscale required, got " + std::to_string(f.channels()) + " channels");
  require(nu >= 0.0 && std::isfinite(nu), ErrorCode::InvalidArgument, "mumford-shah: nu >= 0");
  require(max_outer_iters >= 1, ErrorCode::InvalidArgument,
          "mumford-shah: max_outer_iters >= 1");
  const std::vector<double> v = f.channel(0);
  const std::size_t n = v.size();
  const std::vector<Edge> edges = mumford_shah_edges(f.width(), f.height(), connectivity);

  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(n);
  double var = 0.0;
  for (double x : v) var += (x - mean) * (x - mean);
  const double sd = std::sqrt(var / static_cast<double>(n));

  MumfordShahState st;
  st.nu = nu;
  st.connectivity = connectivity;
  st.c1 = std::clamp(mean - sd, 0.0, 1.0);
  st.c2 = std::clamp(mean + sd, 0.0, 1.0);
  st.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    st.labels[i] = std::abs(v[i] - st.c2) < std::abs(v[i] - st.c1) ? 2 : 1;
  }
  st.energy = energy_with(v, edges, st.labels, st.c1, st.c2, nu);
  st.energy_history.push_back(st.energy);

  const std::size_t s = n;
  const std::size_t t = n + 1;
  for (int it = 0; it < max_outer_iters; ++it) {
    FlowNetwork net(n + 2, s, t);
    for (std::size_t i = 0; i < n; ++i) {
      net.add_arc(s, i, to_capacity((st.c2 - v[i]) * (st.c2 - v[i])));
      net.add_arc(i, t, to_capacity((st.c1 - v[i]) * (st.c1 - v[i])));
    }
    for (const Edge& e : edges) {
      const std::int64_t cap = to_capacity(nu * e.w);
      net.add_arc(e.i, e.j, cap);
      net.add_arc(e.j, e.i, cap);
    }
    const CutResult cut = max_flow(net);
    std::vector<std::uint8_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = cut.source_side[i] ? 1 : 2;

    // Fixed-point capacities can pick a labelling marginally worse than the
    // current one; keep the current one then.
    const double old_e = energy_with(v, edges, st.labels, st.c1, st.c2, nu);
    const double new_e = energy_with(v, edges, labels, st.c1, st.c2, nu);
    const bool changed = labels != st.labels && new_e < old_e;
    if (changed) st.labels = std::move(labels);

    const double prev_c1 = st.c1;
    const double prev_c2 = st.c2;
    double sum1 = 0.0, sum2 = 0.0, cnt1 = 0.0, cnt2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      if (st.labels[i] == 1) {
        sum1 += v[i];
        cnt1 += 1.0;
      } else {
        sum2 += v[i];
        cnt2 += 1.0;
      }
    }
    if (cnt1 > 0.0) st.c1 = sum1 / cnt1;
    if (cnt2 > 0.0) st.c2 = sum2 / cnt2;
    st.energy = energy_with(v, edges, st.labels, st.c1, st.c2, nu);
    st.energy_history.push_back(st.energy);
    st.iterations = it + 1;
    // Fixed point: the cut kept the labels and the means did not move.
    if (!changed && st.c1 == prev_c1 && st.c2 == prev_c2) break;
  }
  return st;
}

}  // namespace gsp
