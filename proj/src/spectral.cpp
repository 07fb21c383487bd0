#include "gsp/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <string>

#include "gsp/error.hpp"
#include "gsp/kernels.hpp"

namespace gsp {

GraphSpectrum::GraphSpectrum(std::vector<double> eigenvalues, DenseMatrix eigenvectors,
                             OperatorKind kind)
    : eigenvalues_(std::move(eigenvalues)), eigenvectors_(std::move(eigenvectors)),
      kind_(kind) {
  require(eigenvectors_.size() == eigenvalues_.size(), ErrorCode::DimensionMismatch,
          "spectrum: eigenvector matrix size mismatch");
}

namespace {

// Components of the off-diagonal sparsity pattern, labelled by smallest node.
std::vector<std::size_t> operator_components(const SparseSymOperator& op) {
  std::vector<Edge> edges;
  const auto rp = op.row_ptr();
  for (std::size_t r = 0; r < op.dimension(); ++r) {
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
      const std::size_t c = op.cols()[k];
      if (c > r) edges.push_back({r, c, 1.0});
    }
  }
  return connected_components(PixelGraph(op.dimension(), std::move(edges)));
}

std::size_t dominant_index(const DenseMatrix& v, std::size_t col) {
  double best = -1.0;
  std::size_t idx = 0;
  for (std::size_t r = 0; r < v.size(); ++r) {
    const double a = std::abs(v(r, col));
    if (a > best + 1e-9) {
      best = a;
      idx = r;
    }
  }
  return idx;
}

void fix_sign(DenseMatrix& v, std::size_t col) {
  for (std::size_t r = 0; r < v.size(); ++r) {
    const double a = v(r, col);
    if (std::abs(a) > 1e-12) {
      if (a < 0) {
        for (std::size_t q = 0; q < v.size(); ++q) v(q, col) = -v(q, col);
      }
      return;
    }
  }
}

}  // namespace

GraphSpectrum eigendecompose(const SparseSymOperator& op) {
  const std::size_t n = op.dimension();
  require(n <= kMaxDenseSpectrum, ErrorCode::SizeLimit,
          "eigendecompose: N = " + std::to_string(n) + " exceeds " +
              std::to_string(kMaxDenseSpectrum) +
              "; use polynomial (Chebyshev) filtering instead");
  require(op.symmetric(), ErrorCode::NotSymmetric,
          std::string("eigendecompose: ") + to_string(op.kind()) +
              " operator is not symmetric");
  if (n == 0) return {};

  const DenseMatrix dense(n, op.to_dense());
  SymmetricEigen eig = symmetric_eigen(dense);
  std::vector<double>& lambda = eig.values;
  DenseMatrix& u = eig.vectors;

  std::size_t first_free = 0;
  if (op.kind() == OperatorKind::Combinatorial) {
    const std::vector<std::size_t> comp = operator_components(op);
    const std::size_t count = *std::max_element(comp.begin(), comp.end()) + 1;
    std::vector<double> size(count, 0.0);
    for (std::size_t c : comp) size[c] += 1.0;
    for (std::size_t k = 0; k < count; ++k) {
      lambda[k] = 0.0;
      for (std::size_t r = 0; r < n; ++r) {
        u(r, k) = comp[r] == k ? 1.0 / std::sqrt(size[k]) : 0.0;
      }
    }
    first_free = count;
  }

  const double scale = std::max(1.0, std::abs(lambda.back()));
  const double group_tol = 1e-9 * scale;
  for (std::size_t start = first_free; start < n;) {
    std::size_t end = start + 1;
    while (end < n && lambda[end] - lambda[end - 1] <= group_tol) ++end;
    if (end - start > 1) {
      std::vector<std::size_t> cols(end - start);
      std::iota(cols.begin(), cols.end(), start);
      std::vector<std::size_t> key(n);
      for (std::size_t c : cols) key[c] = dominant_index(u, c);
      std::stable_sort(cols.begin(), cols.end(),
                       [&](std::size_t a, std::size_t b) { return key[a] < key[b]; });
      DenseMatrix copy = u;
      std::vector<double> lcopy = lambda;
      for (std::size_t k = 0; k < cols.size(); ++k) {
        lambda[start + k] = lcopy[cols[k]];
        for (std::size_t r = 0; r < n; ++r) u(r, start + k) = copy(r, cols[k]);
      }
    }
    start = end;
  }
  for (std::size_t k = 0; k < n; ++k) fix_sign(u, k);
  return GraphSpectrum(std::move(lambda), std::move(u), op.kind());
}

std::vector<double> gft(const GraphSpectrum& spec, std::span<const double> x) {
  const std::size_t n = spec.size();
  require(x.size() == n, ErrorCode::DimensionMismatch,
          "gft: signal length " + std::to_string(x.size()) + " vs spectrum size " +
              std::to_string(n));
  const DenseMatrix& u = spec.eigenvectors();
  std::vector<double> alpha(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    const double xr = x[r];
    for (std::size_t k = 0; k < n; ++k) alpha[k] += u(r, k) * xr;
  }
  return alpha;
}

std::vector<double> igft(const GraphSpectrum& spec, std::span<const double> alpha) {
  const std::size_t n = spec.size();
  require(alpha.size() == n, ErrorCode::DimensionMismatch,
          "igft: coefficient length " + std::to_string(alpha.size()) +
              " vs spectrum size " + std::to_string(n));
  const DenseMatrix& u = spec.eigenvectors();
  std::vector<double> x(n, 0.0);
  for (std::size_t r = 0; r < n; ++r) {
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += u(r, k) * alpha[k];
    x[r] = acc;
  }
  return x;
}

DenseMatrix dct_basis(std::size_t n) {
  require(n >= 1, ErrorCode::InvalidArgument, "dct_basis: n must be >= 1");
  DenseMatrix m(n);
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double c = k == 0 ? std::sqrt(1.0 / nn) : std::sqrt(2.0 / nn);
    for (std::size_t i = 0; i < n; ++i) {
      m(i, k) = c * std::cos(std::numbers::pi * (static_cast<double>(i) + 0.5) *
                             static_cast<double>(k) / nn);
    }
  }
  return m;
}

SparseSymOperator path_laplacian(std::size_t n) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1, 1.0});
  return variation_operator(PixelGraph(n, std::move(edges)), OperatorKind::Combinatorial);
}

PowerIterationResult spectral_radius(const SparseSymOperator& op, double tol,
                                     std::size_t max_iters) {
  const std::size_t n = op.dimension();
  PowerIterationResult out;
  if (n == 0) return out;
  std::vector<double> v(n);
  // Fixed, generic start vector.
  std::uint64_t state = 0x9E3779B97F4A7C15ull;
  double norm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    v[i] = 0.5 + static_cast<double>(state >> 11) * 0x1.0p-53;
    norm += v[i] * v[i];
  }
  norm = std::sqrt(norm);
  for (double& a : v) a /= norm;

  std::vector<double> av(n);
  double prev = 0.0;
  for (std::size_t it = 1; it <= max_iters; ++it) {
    kernels::spmv(op, v, av);
    double est = 0.0;
    for (double a : av) est += a * a;
    est = std::sqrt(est);
    out.iterations = it;
    out.radius = est;
    if (est == 0.0) {
      out.converged = true;
      return out;
    }
    for (std::size_t i = 0; i < n; ++i) v[i] = av[i] / est;
    if (it > 1 && std::abs(est - prev) <= tol * std::max(1.0, est)) {
      out.converged = true;
      return out;
    }
    prev = est;
  }
  return out;
}

double laplacian_quadratic(const SparseSymOperator& op, std::span<const double> x) {
  require(x.size() == op.dimension(), ErrorCode::DimensionMismatch,
          "laplacian_quadratic: length mismatch");
  double acc = 0.0;
  const auto rp = op.row_ptr();
  for (std::size_t r = 0; r < op.dimension(); ++r) {
    for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) {
      const std::size_t c = op.cols()[k];
      if (c <= r) continue;
      const double d = x[r] - x[c];
      acc += -op.values()[k] * d * d;
    }
  }
  return acc;
}

double quadratic_form(const SparseSymOperator& op, std::span<const double> x) {
  const std::vector<double> ax = op.apply(x);
  return std::inner_product(x.begin(), x.end(), ax.begin(), 0.0);
}

double shift_tv(const SparseSymOperator& w, std::span<const double> x, double p) {
  require(p >= 1.0, ErrorCode::InvalidArgument, "shift_tv: p must be >= 1");
  const std::vector<double> wx = w.apply(x);
  const double radius = spectral_radius(w).radius;
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double shifted = radius > 0.0 ? wx[i] / radius : 0.0;
    acc += std::pow(std::abs(x[i] - shifted), p);
  }
  return acc;
}

double quadratic_shift(const SparseSymOperator& w, std::span<const double> x) {
  const std::vector<double> wx = w.apply(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double d = x[i] - wx[i];
    acc += d * d;
  }
  return 0.5 * acc;
}

double local_graph_tv(const SparseSymOperator& w, std::span<const double> x) {
  require(x.size() == w.dimension(), ErrorCode::DimensionMismatch,
          "local_graph_tv: length mismatch");
  double total = 0.0;
  const auto rp = w.row_ptr();
  for (std::size_t i = 0; i < w.dimension(); ++i) {
    double acc = 0.0;
    for (std::size_t k = rp[i]; k < rp[i + 1]; ++k) {
      const double d = x[w.cols()[k]] - x[i];
      const double wij = w.values()[k];
      acc += d * d * wij * wij;
    }
    total += std::sqrt(acc);
  }
  return total;
}

}  // namespace gsp
