#include "gsp/kernels.hpp"

#include <algorithm>
#include <string>
#include <vector>

#include "gsp/domain_transform.hpp"
#include "gsp/error.hpp"

namespace gsp::kernels {

namespace {

void check_spmv(const SparseSymOperator& a, std::span<const double> x,
                std::span<double> y) {
  require(x.size() == a.dimension() && y.size() == a.dimension(),
          ErrorCode::DimensionMismatch,
          "spmv: operator dimension " + std::to_string(a.dimension()) +
              " vs vectors " + std::to_string(x.size()) + "/" + std::to_string(y.size()));
}

inline double row_dot(const SparseSymOperator& a, std::span<const double> x,
                      std::size_t r) {
  const auto rp = a.row_ptr();
  const auto cols = a.cols();
  const auto vals = a.values();
  double acc = 0.0;
  for (std::size_t k = rp[r]; k < rp[r + 1]; ++k) acc += vals[k] * x[cols[k]];
  return acc;
}

inline double edge_weight(const ImagePlane& img, const GridWeightParams& params,
                          std::size_t i, std::size_t j) {
  const std::size_t w = img.width();
  const double dx = static_cast<double>(i % w) - static_cast<double>(j % w);
  const double dy = static_cast<double>(i / w) - static_cast<double>(j / w);
  return kernel_weight(dx * dx + dy * dy,
                       photometric_sq_distance(img.pixel(i), img.pixel(j)),
                       params.sigma_l, params.sigma_x);
}

inline void bilateral_pixel(const ImagePlane& img, const GridWeightParams& params,
                            long radius, long x, long y, ImagePlane& out,
                            std::vector<double>& acc) {
  const long w = static_cast<long>(img.width());
  const long h = static_cast<long>(img.height());
  const std::size_t ch = img.channels();
  const auto i = static_cast<std::size_t>(y * w + x);
  std::fill(acc.begin(), acc.end(), 0.0);
  double norm = 0.0;
  for (long yy = std::max(0L, y - radius); yy <= std::min(h - 1, y + radius); ++yy) {
    for (long xx = std::max(0L, x - radius); xx <= std::min(w - 1, x + radius); ++xx) {
      const auto j = static_cast<std::size_t>(yy * w + xx);
      const double wij = j == i ? 1.0 : edge_weight(img, params, i, j);
      norm += wij;
      const auto pj = img.pixel(j);
      for (std::size_t c = 0; c < ch; ++c) acc[c] += wij * pj[c];
    }
  }
  for (std::size_t c = 0; c < ch; ++c) out.at(x, y, c) = acc[c] / norm;
}

void check_bilateral(const ImagePlane& img, const GridWeightParams& params, int radius,
                     ImagePlane& out) {
  params.validate();
  require(radius >= 1, ErrorCode::InvalidArgument, "bilateral: window radius must be >= 1");
  if (out.width() != img.width() || out.height() != img.height() ||
      out.channels() != img.channels()) {
    out = ImagePlane(img.width(), img.height(), img.channels());
  }
}

inline void dt_one_row(const RowBatch& b, std::size_t r, double alpha_g, double alpha_p,
                       double sigma_s, std::vector<double>& buf) {
  double* base = b.data + r * b.stride_row;
  for (std::size_t i = 0; i < b.length; ++i)
    for (std::size_t c = 0; c < b.channels; ++c)
      buf[i * b.channels + c] = base[i * b.stride_elem + c];
  const WarpParams params{alpha_g, alpha_p, sigma_s};
  const WarpedAxis axis = warp_positions(buf, b.channels, params);
  const std::vector<double> smoothed = dt_smooth_row(buf, b.channels, axis, sigma_s);
  for (std::size_t i = 0; i < b.length; ++i)
    for (std::size_t c = 0; c < b.channels; ++c)
      base[i * b.stride_elem + c] = smoothed[i * b.channels + c];
}

}  // namespace

void spmv(const SparseSymOperator& a, std::span<const double> x, std::span<double> y) {
  check_spmv(a, x, y);
  const long n = static_cast<long>(a.dimension());
#pragma omp parallel for schedule(static) if (n > 4096)
  for (long r = 0; r < n; ++r) {
    y[static_cast<std::size_t>(r)] = row_dot(a, x, static_cast<std::size_t>(r));
  }
}

void grid_edge_weights(const ImagePlane& img, const GridWeightParams& params,
                       std::span<Edge> edges) {
  const long m = static_cast<long>(edges.size());
#pragma omp parallel for schedule(static) if (m > 4096)
  for (long e = 0; e < m; ++e) {
    Edge& ed = edges[static_cast<std::size_t>(e)];
    ed.w = edge_weight(img, params, ed.i, ed.j);
  }
}

void bilateral(const ImagePlane& img, const GridWeightParams& params, int radius,
               ImagePlane& out) {
  check_bilateral(img, params, radius, out);
  const long h = static_cast<long>(img.height());
  const long w = static_cast<long>(img.width());
#pragma omp parallel
  {
    std::vector<double> acc(img.channels());
#pragma omp for schedule(static)
    for (long y = 0; y < h; ++y) {
      for (long x = 0; x < w; ++x) bilateral_pixel(img, params, radius, x, y, out, acc);
    }
  }
}

void dt_rows(RowBatch batch, double alpha_g, double alpha_p, double sigma_s) {
  const long rows = static_cast<long>(batch.rows);
#pragma omp parallel
  {
    std::vector<double> buf(batch.length * batch.channels);
#pragma omp for schedule(static)
    for (long r = 0; r < rows; ++r) {
      dt_one_row(batch, static_cast<std::size_t>(r), alpha_g, alpha_p, sigma_s, buf);
    }
  }
}

namespace serial {

void spmv(const SparseSymOperator& a, std::span<const double> x, std::span<double> y) {
  check_spmv(a, x, y);
  for (std::size_t r = 0; r < a.dimension(); ++r) y[r] = row_dot(a, x, r);
}

void grid_edge_weights(const ImagePlane& img, const GridWeightParams& params,
                       std::span<Edge> edges) {
  for (Edge& e : edges) e.w = edge_weight(img, params, e.i, e.j);
}

void bilateral(const ImagePlane& img, const GridWeightParams& params, int radius,
               ImagePlane& out) {
  check_bilateral(img, params, radius, out);
  std::vector<double> acc(img.channels());
  for (long y = 0; y < static_cast<long>(img.height()); ++y)
    for (long x = 0; x < static_cast<long>(img.width()); ++x)
      bilateral_pixel(img, params, radius, x, y, out, acc);
}

void dt_rows(RowBatch batch, double alpha_g, double alpha_p, double sigma_s) {
  std::vector<double> buf(batch.length * batch.channels);
  for (std::size_t r = 0; r < batch.rows; ++r) {
    dt_one_row(batch, r, alpha_g, alpha_p, sigma_s, buf);
  }
}

}  // namespace serial

}  // namespace gsp::kernels
