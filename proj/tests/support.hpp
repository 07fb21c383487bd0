#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <vector>

#include "gsp/graph.hpp"
#include "gsp/image.hpp"

namespace testing {

inline gsp::ImagePlane random_image(std::size_t w, std::size_t h, std::uint64_t seed,
                                    std::size_t channels = 1) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> s(w * h * channels);
  for (double& v : s) v = u(rng);
  return gsp::ImagePlane(w, h, channels, std::move(s));
}

inline std::vector<double> random_vector(std::size_t n, std::uint64_t seed, double lo = -1.0,
                                         double hi = 1.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> v(n);
  for (double& x : v) x = u(rng);
  return v;
}

// Random connected graph: a random spanning tree plus extra edges.
inline gsp::PixelGraph random_connected_graph(std::size_t n, double extra_prob,
                                              std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<std::vector<bool>> used(n, std::vector<bool>(n, false));
  std::vector<gsp::Edge> edges;
  for (std::size_t v = 1; v < n; ++v) {
    const std::size_t p = std::uniform_int_distribution<std::size_t>(0, v - 1)(rng);
    edges.push_back({p, v, 0.1 + u(rng)});
    used[p][v] = true;
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (!used[i][j] && u(rng) < extra_prob) edges.push_back({i, j, 0.1 + u(rng)});
  return gsp::PixelGraph(n, std::move(edges));
}

inline double max_abs_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

inline double norm2(const std::vector<double>& a) {
  double s = 0.0;
  for (double v : a) s += v * v;
  return std::sqrt(s);
}

// Dense row-major n x n solve by Gaussian elimination with partial pivoting.
inline std::vector<double> dense_solve(std::vector<double> a, std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t c = 0; c < n; ++c) {
    std::size_t piv = c;
    for (std::size_t r = c + 1; r < n; ++r)
      if (std::abs(a[r * n + c]) > std::abs(a[piv * n + c])) piv = r;
    for (std::size_t k = 0; k < n; ++k) std::swap(a[c * n + k], a[piv * n + k]);
    std::swap(b[c], b[piv]);
    for (std::size_t r = c + 1; r < n; ++r) {
      const double f = a[r * n + c] / a[c * n + c];
      for (std::size_t k = c; k < n; ++k) a[r * n + k] -= f * a[c * n + k];
      b[r] -= f * b[c];
    }
  }
  std::vector<double> x(n);
  for (std::size_t r = n; r-- > 0;) {
    double s = b[r];
    for (std::size_t k = r + 1; k < n; ++k) s -= a[r * n + k] * x[k];
    x[r] = s / a[r * n + r];
  }
  return x;
}

inline std::vector<double> dense_matmul(const std::vector<double>& a, const std::vector<double>& b,
                                        std::size_t n) {
  std::vector<double> c(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < n; ++k)
      for (std::size_t j = 0; j < n; ++j) c[i * n + j] += a[i * n + k] * b[k * n + j];
  return c;
}

}  // namespace testing
