#include "gsp/graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <string>

#include "gsp/error.hpp"
#include "gsp/kernels.hpp"

namespace gsp {

void GridWeightParams::validate() const {
  require(sigma_l > 0.0 && sigma_x > 0.0, ErrorCode::InvalidArgument,
          "sigma_l and sigma_x must be > 0");
  require(connectivity == 4 || connectivity == 8, ErrorCode::InvalidArgument,
          "connectivity must be 4 or 8");
}

PixelGraph::PixelGraph(std::size_t node_count, std::vector<Edge> edges,
                       std::vector<double> self_loops)
    : node_count_(node_count), edges_(std::move(edges)),
      self_loops_(std::move(self_loops)) {
  require(self_loops_.empty() || self_loops_.size() == node_count_,
          ErrorCode::DimensionMismatch, "self-loop vector length mismatch");
  for (double s : self_loops_) {
    require(std::isfinite(s) && s >= 0.0, ErrorCode::InvalidArgument,
            "self-loop weights must be >= 0");
  }
  for (const Edge& e : edges_) {
    require(e.i < e.j && e.j < node_count_, ErrorCode::InvalidArgument,
            "edge (" + std::to_string(e.i) + "," + std::to_string(e.j) +
                ") violates 0 <= i < j < N");
    require(std::isfinite(e.w) && e.w > 0.0, ErrorCode::InvalidArgument,
            "edge weights must be positive");
  }
  std::sort(edges_.begin(), edges_.end(), [](const Edge& a, const Edge& b) {
    return a.i != b.i ? a.i < b.i : a.j < b.j;
  });
  for (std::size_t k = 1; k < edges_.size(); ++k) {
    require(edges_[k].i != edges_[k - 1].i || edges_[k].j != edges_[k - 1].j,
            ErrorCode::InvalidArgument,
            "duplicate edge (" + std::to_string(edges_[k].i) + "," +
                std::to_string(edges_[k].j) + ")");
  }
}

PixelGraph PixelGraph::induced(std::span<const std::size_t> nodes) const {
  std::vector<std::size_t> remap(node_count_, node_count_);
  for (std::size_t k = 0; k < nodes.size(); ++k) remap[nodes[k]] = k;
  std::vector<Edge> sub;
  for (const Edge& e : edges_) {
    const std::size_t a = remap[e.i];
    const std::size_t b = remap[e.j];
    if (a == node_count_ || b == node_count_) continue;
    sub.push_back({std::min(a, b), std::max(a, b), e.w});
  }
  std::vector<double> loops;
  if (has_self_loops()) {
    loops.reserve(nodes.size());
    for (std::size_t n : nodes) loops.push_back(self_loops_[n]);
  }
  return PixelGraph(nodes.size(), std::move(sub), std::move(loops));
}

double kernel_weight(double geo_sq, double photo_sq, double sigma_l,
                     double sigma_x) {
  return std::exp(-geo_sq / (sigma_l * sigma_l)) *
         std::exp(-photo_sq / (sigma_x * sigma_x));
}

namespace {

std::vector<double> unit_loops(const GridWeightParams& params, std::size_t n) {
  return params.self_loops ? std::vector<double>(n, 1.0) : std::vector<double>{};
}

// Weights that underflow to zero carry no coupling; such pairs are left out.
std::vector<Edge> drop_zero_weights(std::vector<Edge> edges) {
  std::erase_if(edges, [](const Edge& e) { return !(e.w > 0.0); });
  return edges;
}

}  // namespace

PixelGraph build_grid_graph(const ImagePlane& img, const GridWeightParams& params) {
  require(!img.empty(), ErrorCode::EmptyInput, "build_grid_graph: empty image");
  params.validate();
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  std::vector<Edge> edges;
  edges.reserve(w * h * (params.connectivity == 8 ? 4 : 2));
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const std::size_t i = y * w + x;
      if (x + 1 < w) edges.push_back({i, i + 1, 0.0});
      if (y + 1 < h) {
        if (params.connectivity == 8 && x > 0) edges.push_back({i, i + w - 1, 0.0});
        edges.push_back({i, i + w, 0.0});
        if (params.connectivity == 8 && x + 1 < w) edges.push_back({i, i + w + 1, 0.0});
      }
    }
  }
  kernels::grid_edge_weights(img, params, edges);
  return PixelGraph(img.pixel_count(), drop_zero_weights(std::move(edges)),
                    unit_loops(params, img.pixel_count()));
}

PixelGraph build_window_graph(const ImagePlane& img, const GridWeightParams& params,
                              int radius) {
  require(!img.empty(), ErrorCode::EmptyInput, "build_window_graph: empty image");
  require(radius >= 1, ErrorCode::InvalidArgument, "window radius must be >= 1");
  params.validate();
  const long w = static_cast<long>(img.width());
  const long h = static_cast<long>(img.height());
  std::vector<Edge> edges;
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      const auto i = static_cast<std::size_t>(y * w + x);
      for (long yy = y; yy <= std::min(h - 1, y + radius); ++yy) {
        for (long xx = std::max(0L, x - radius); xx <= std::min(w - 1, x + radius); ++xx) {
          const auto j = static_cast<std::size_t>(yy * w + xx);
          if (j > i) edges.push_back({i, j, 0.0});
        }
      }
    }
  }
  kernels::grid_edge_weights(img, params, edges);
  return PixelGraph(img.pixel_count(), drop_zero_weights(std::move(edges)),
                    unit_loops(params, img.pixel_count()));
}

PixelGraph build_nonlocal_graph(const ImagePlane& img, const NonlocalParams& params) {
  require(!img.empty(), ErrorCode::EmptyInput, "build_nonlocal_graph: empty image");
  require(params.patch_radius >= 0 && params.search_radius >= 0,
          ErrorCode::InvalidArgument, "radii must be >= 0");
  require(params.sigma_x > 0.0, ErrorCode::InvalidArgument, "sigma_x must be > 0");
  const long w = static_cast<long>(img.width());
  const long h = static_cast<long>(img.height());
  const long pr = params.patch_radius;
  const long sr = params.search_radius;
  const std::size_t n = img.pixel_count();
  const double patch_elems =
      static_cast<double>((2 * pr + 1) * (2 * pr + 1) * static_cast<long>(img.channels()));

  auto patch_distance = [&](long x0, long y0, long x1, long y1) {
    double acc = 0.0;
    for (long dy = -pr; dy <= pr; ++dy) {
      for (long dx = -pr; dx <= pr; ++dx) {
        const auto a = img.pixel(static_cast<std::size_t>(
            std::clamp(y0 + dy, 0L, h - 1) * w + std::clamp(x0 + dx, 0L, w - 1)));
        const auto b = img.pixel(static_cast<std::size_t>(
            std::clamp(y1 + dy, 0L, h - 1) * w + std::clamp(x1 + dx, 0L, w - 1)));
        acc += photometric_sq_distance(a, b);
      }
    }
    return acc / patch_elems;
  };

  std::vector<std::vector<Edge>> proposals(n);
#pragma omp parallel for schedule(dynamic, 16)
  for (long p = 0; p < static_cast<long>(n); ++p) {
    const long x = p % w;
    const long y = p / w;
    std::vector<std::pair<double, std::size_t>> cand;
    for (long yy = std::max(0L, y - sr); yy <= std::min(h - 1, y + sr); ++yy) {
      for (long xx = std::max(0L, x - sr); xx <= std::min(w - 1, x + sr); ++xx) {
        if (xx == x && yy == y) continue;
        cand.emplace_back(patch_distance(x, y, xx, yy),
                          static_cast<std::size_t>(yy * w + xx));
      }
    }
    const std::size_t k = std::min(params.k, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(k), cand.end());
    auto& out = proposals[static_cast<std::size_t>(p)];
    for (std::size_t m = 0; m < k; ++m) {
      const double wgt = std::exp(-cand[m].first / (params.sigma_x * params.sigma_x));
      const auto q = cand[m].second;
      const auto pp = static_cast<std::size_t>(p);
      out.push_back({std::min(pp, q), std::max(pp, q), wgt});
    }
  }

  std::map<std::pair<std::size_t, std::size_t>, double> merged;
  for (const auto& list : proposals) {
    for (const Edge& e : list) {
      auto [it, inserted] = merged.try_emplace({e.i, e.j}, e.w);
      if (!inserted) it->second = std::max(it->second, e.w);
    }
  }
  std::vector<Edge> edges;
  edges.reserve(merged.size());
  for (const auto& [key, wgt] : merged) edges.push_back({key.first, key.second, wgt});
  return PixelGraph(n, drop_zero_weights(std::move(edges)));
}

std::vector<double> degree_vector(const PixelGraph& g) {
  std::vector<double> d(g.node_count(), 0.0);
  for (const Edge& e : g.edges()) {
    d[e.i] += e.w;
    d[e.j] += e.w;
  }
  if (g.has_self_loops()) {
    for (std::size_t i = 0; i < d.size(); ++i) d[i] += g.self_loop(i);
  }
  return d;
}

std::vector<std::size_t> connected_components(const PixelGraph& g) {
  const std::size_t n = g.node_count();
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), std::size_t{0});
  auto find = [&](std::size_t a) {
    while (parent[a] != a) {
      parent[a] = parent[parent[a]];
      a = parent[a];
    }
    return a;
  };
  for (const Edge& e : g.edges()) {
    const std::size_t a = find(e.i);
    const std::size_t b = find(e.j);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  std::vector<std::size_t> label(n, n);
  std::vector<std::size_t> root_label(n, n);
  std::size_t next = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t r = find(i);
    if (root_label[r] == n) root_label[r] = next++;
    label[i] = root_label[r];
  }
  return label;
}

const char* to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::Adjacency: return "adjacency";
    case OperatorKind::Combinatorial: return "combinatorial";
    case OperatorKind::SymmetricNormalized: return "symmetric-normalized";
    case OperatorKind::RandomWalk: return "random-walk";
    case OperatorKind::Generalized: return "generalized";
    case OperatorKind::BiLaplacian: return "bilaplacian";
    case OperatorKind::Doubly: return "doubly-stochastic";
    case OperatorKind::General: return "general";
  }
  return "unknown";
}

SparseSymOperator::SparseSymOperator(std::size_t dim, std::vector<Triplet> triplets,
                                     OperatorKind kind, bool symmetric)
    : dim_(dim), kind_(kind), symmetric_(symmetric) {
  for (const Triplet& t : triplets) {
    require(t.row < dim && t.col < dim, ErrorCode::DimensionMismatch,
            "triplet index out of range");
    require(std::isfinite(t.value), ErrorCode::InvalidArgument,
            "operator entries must be finite");
  }
  std::stable_sort(triplets.begin(), triplets.end(),
                   [](const Triplet& a, const Triplet& b) {
                     return a.row != b.row ? a.row < b.row : a.col < b.col;
                   });
  row_ptr_.assign(dim + 1, 0);
  for (std::size_t k = 0; k < triplets.size();) {
    const std::size_t r = triplets[k].row;
    const std::size_t c = triplets[k].col;
    double v = 0.0;
    while (k < triplets.size() && triplets[k].row == r && triplets[k].col == c) {
      v += triplets[k].value;
      ++k;
    }
    if (v == 0.0) continue;
    cols_.push_back(c);
    values_.push_back(v);
    ++row_ptr_[r + 1];
  }
  for (std::size_t r = 0; r < dim; ++r) row_ptr_[r + 1] += row_ptr_[r];

  if (symmetric_) {
    for (std::size_t r = 0; r < dim_; ++r) {
      for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
        require(entry(cols_[k], r) == values_[k], ErrorCode::NotSymmetric,
                "operator flagged symmetric has A(" + std::to_string(r) + "," +
                    std::to_string(cols_[k]) + ") != A(" + std::to_string(cols_[k]) +
                    "," + std::to_string(r) + ")");
      }
    }
  }
}

double SparseSymOperator::entry(std::size_t r, std::size_t c) const {
  const auto first = cols_.begin() + static_cast<long>(row_ptr_[r]);
  const auto last = cols_.begin() + static_cast<long>(row_ptr_[r + 1]);
  const auto it = std::lower_bound(first, last, c);
  if (it == last || *it != c) return 0.0;
  return values_[static_cast<std::size_t>(it - cols_.begin())];
}

std::vector<Triplet> SparseSymOperator::triplets() const {
  std::vector<Triplet> out;
  out.reserve(values_.size());
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      out.push_back({r, cols_[k], values_[k]});
    }
  }
  return out;
}

std::vector<double> SparseSymOperator::to_dense() const {
  std::vector<double> out(dim_ * dim_, 0.0);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) {
      out[r * dim_ + cols_[k]] = values_[k];
    }
  }
  return out;
}

std::vector<double> SparseSymOperator::row_sums() const {
  std::vector<double> out(dim_, 0.0);
  for (std::size_t r = 0; r < dim_; ++r) {
    for (std::size_t k = row_ptr_[r]; k < row_ptr_[r + 1]; ++k) out[r] += values_[k];
  }
  return out;
}

std::vector<double> SparseSymOperator::apply(std::span<const double> x) const {
  require(x.size() == dim_, ErrorCode::DimensionMismatch,
          "operator dimension " + std::to_string(dim_) + " vs signal length " +
              std::to_string(x.size()));
  std::vector<double> y(dim_);
  kernels::spmv(*this, x, y);
  return y;
}

SparseSymOperator adjacency_operator(const PixelGraph& g) {
  std::vector<Triplet> t;
  t.reserve(2 * g.edges().size() + g.node_count());
  for (const Edge& e : g.edges()) {
    t.push_back({e.i, e.j, e.w});
    t.push_back({e.j, e.i, e.w});
  }
  if (g.has_self_loops()) {
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      if (g.self_loop(i) > 0.0) t.push_back({i, i, g.self_loop(i)});
    }
  }
  return SparseSymOperator(g.node_count(), std::move(t), OperatorKind::Adjacency, true);
}

SparseSymOperator multiply(const SparseSymOperator& a, const SparseSymOperator& b,
                           OperatorKind kind, bool symmetric) {
  require(a.dimension() == b.dimension(), ErrorCode::DimensionMismatch,
          "multiply: dimension mismatch");
  const std::size_t n = a.dimension();
  std::vector<Triplet> t;
  std::vector<double> acc(n, 0.0);
  std::vector<char> used(n, 0);
  std::vector<std::size_t> touched;
  const auto arp = a.row_ptr();
  const auto brp = b.row_ptr();
  for (std::size_t r = 0; r < n; ++r) {
    touched.clear();
    for (std::size_t ka = arp[r]; ka < arp[r + 1]; ++ka) {
      const std::size_t mid = a.cols()[ka];
      const double av = a.values()[ka];
      for (std::size_t kb = brp[mid]; kb < brp[mid + 1]; ++kb) {
        const std::size_t c = b.cols()[kb];
        if (!used[c]) {
          used[c] = 1;
          touched.push_back(c);
        }
        acc[c] += av * b.values()[kb];
      }
    }
    std::sort(touched.begin(), touched.end());
    for (std::size_t c : touched) {
      // Mirror the upper triangle so a symmetric product is exactly symmetric.
      if (!symmetric || c >= r) t.push_back({r, c, acc[c]});
      if (symmetric && c > r) t.push_back({c, r, acc[c]});
      acc[c] = 0.0;
      used[c] = 0;
    }
  }
  return SparseSymOperator(n, std::move(t), kind, symmetric);
}

SparseSymOperator variation_operator(const PixelGraph& g, OperatorKind kind) {
  const std::size_t n = g.node_count();
  const std::vector<double> d = degree_vector(g);
  const bool normalized =
      kind == OperatorKind::SymmetricNormalized || kind == OperatorKind::RandomWalk;
  if (normalized) {
    for (std::size_t i = 0; i < n; ++i) {
      require(d[i] > 0.0, ErrorCode::DegenerateDegree,
              "node " + std::to_string(i) + " has zero degree; " + to_string(kind) +
                  " operator undefined");
    }
  }

  std::vector<Triplet> t;
  t.reserve(2 * g.edges().size() + n);
  switch (kind) {
    case OperatorKind::Combinatorial:
    case OperatorKind::Generalized:
    case OperatorKind::BiLaplacian: {
      for (std::size_t i = 0; i < n; ++i) {
        // Self-loops add to D and W alike and cancel in D - W.
        const double diag = d[i] - g.self_loop(i) +
                            (kind == OperatorKind::Generalized ? g.self_loop(i) : 0.0);
        t.push_back({i, i, diag});
      }
      for (const Edge& e : g.edges()) {
        t.push_back({e.i, e.j, -e.w});
        t.push_back({e.j, e.i, -e.w});
      }
      if (kind == OperatorKind::BiLaplacian) {
        const SparseSymOperator lap(n, std::move(t), OperatorKind::Combinatorial, true);
        return multiply(lap, lap, OperatorKind::BiLaplacian, true);
      }
      return SparseSymOperator(n, std::move(t), kind, true);
    }
    case OperatorKind::SymmetricNormalized: {
      for (std::size_t i = 0; i < n; ++i) {
        t.push_back({i, i, (d[i] - g.self_loop(i)) / d[i]});
      }
      for (const Edge& e : g.edges()) {
        const double v = -e.w / std::sqrt(d[e.i] * d[e.j]);
        t.push_back({e.i, e.j, v});
        t.push_back({e.j, e.i, v});
      }
      return SparseSymOperator(n, std::move(t), kind, true);
    }
    case OperatorKind::RandomWalk: {
      for (std::size_t i = 0; i < n; ++i) {
        t.push_back({i, i, (d[i] - g.self_loop(i)) / d[i]});
      }
      for (const Edge& e : g.edges()) {
        t.push_back({e.i, e.j, -e.w / d[e.i]});
        t.push_back({e.j, e.i, -e.w / d[e.j]});
      }
      return SparseSymOperator(n, std::move(t), kind, false);
    }
    case OperatorKind::Adjacency:
      return adjacency_operator(g);
    case OperatorKind::Doubly:
    case OperatorKind::General:
      break;
  }
  fail(ErrorCode::InvalidArgument,
       std::string("variation_operator: unsupported kind ") + to_string(kind));
}

SinkhornResult sinkhorn_scale(const SparseSymOperator& w, std::size_t max_iters,
                              double tol) {
  require(w.symmetric(), ErrorCode::NotSymmetric, "sinkhorn_scale: W must be symmetric");
  const std::size_t n = w.dimension();
  for (double v : w.values()) {
    require(v >= 0.0, ErrorCode::InvalidArgument, "sinkhorn_scale: W must be nonnegative");
  }
  const std::vector<double> rs = w.row_sums();
  for (std::size_t i = 0; i < n; ++i) {
    require(rs[i] > 0.0, ErrorCode::NonScalable,
            "sinkhorn_scale: row " + std::to_string(i) + " is zero");
  }

  // K = diag(v) W diag(v); fixed point of v <- sqrt(v / (W v)).
  std::vector<double> v(n, 1.0);
  std::vector<double> wv(n);
  auto residual_of = [&]() {
    kernels::spmv(w, v, wv);
    double r = 0.0;
    for (std::size_t i = 0; i < n; ++i) r = std::max(r, std::abs(v[i] * wv[i] - 1.0));
    return r;
  };

  SinkhornResult out;
  double r = residual_of();
  out.residual_history.push_back(r);
  while (r > tol && out.iterations < max_iters) {
    for (std::size_t i = 0; i < n; ++i) v[i] = std::sqrt(v[i] / wv[i]);
    ++out.iterations;
    r = residual_of();
    out.residual_history.push_back(r);
  }
  out.residual = r;
  out.converged = r <= tol;

  out.scaling.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.scaling[i] = 1.0 / (v[i] * v[i]);
  std::vector<Triplet> t = w.triplets();
  for (Triplet& e : t) {
    e.value *= v[std::min(e.row, e.col)] * v[std::max(e.row, e.col)];
  }
  out.doubly_stochastic = SparseSymOperator(n, std::move(t), OperatorKind::Doubly, true);
  return out;
}

}  // namespace gsp
