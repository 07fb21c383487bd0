#include "gsp/domain_transform.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "gsp/error.hpp"
#include "gsp/kernels.hpp"

namespace gsp {

void WarpParams::validate() const {
  require(alpha_g > 0.0, ErrorCode::InvalidArgument, "alpha_g must be > 0");
  require(alpha_p >= 0.0, ErrorCode::InvalidArgument, "alpha_p must be >= 0");
  require(sigma_s > 0.0, ErrorCode::InvalidArgument, "sigma_s must be > 0");
}

WarpedAxis::WarpedAxis(std::vector<double> positions) : t_(std::move(positions)) {
  for (std::size_t i = 1; i < t_.size(); ++i) {
    require(t_[i] > t_[i - 1], ErrorCode::InvalidArgument,
            "warped axis must be strictly increasing at " + std::to_string(i));
  }
}

namespace {

std::size_t row_length(std::span<const double> row, std::size_t channels) {
  require(channels >= 1 && row.size() % channels == 0, ErrorCode::DimensionMismatch,
          "row length is not a multiple of the channel count");
  return row.size() / channels;
}

// sum over channels of |x_i - x_{i-1}|
double abs_increment(std::span<const double> row, std::size_t channels, std::size_t i) {
  double acc = 0.0;
  for (std::size_t c = 0; c < channels; ++c) {
    acc += std::abs(row[i * channels + c] - row[(i - 1) * channels + c]);
  }
  return acc;
}

}  // namespace

WarpedAxis warp_positions(std::span<const double> row, std::size_t channels,
                          const WarpParams& params) {
  params.validate();
  const std::size_t n = row_length(row, channels);
  require(n >= 1, ErrorCode::EmptyInput, "warp_positions: empty row");
  std::vector<double> t(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    t[i] = t[i - 1] + params.alpha_g + params.alpha_p * abs_increment(row, channels, i);
  }
  return WarpedAxis(std::move(t));
}

WarpSystem build_warp_system(std::span<const double> row, std::size_t channels,
                             const WarpParams& params) {
  params.validate();
  const std::size_t n = row_length(row, channels);
  require(n >= 1, ErrorCode::EmptyInput, "build_warp_system: empty row");
  WarpSystem sys;
  sys.tau.assign(n, 0.0);
  for (std::size_t i = 1; i < n; ++i) {
    sys.tau[i] = params.alpha_g + params.alpha_p * abs_increment(row, channels, i);
  }
  sys.tau_prime.assign(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    sys.tau_prime[i] = params.alpha_p * (abs_increment(row, channels, i + 1) -
                                         abs_increment(row, channels, i));
  }
  std::vector<Triplet> t;
  for (std::size_t i = 0; i < n; ++i) {
    t.push_back({i, i, 1.0});
    if (i > 0) t.push_back({i, i - 1, -1.0});
  }
  sys.psi = SparseSymOperator(n, std::move(t), OperatorKind::General, false);
  return sys;
}

WarpIdentityReport verify_warp_identities(std::span<const double> row,
                                          std::size_t channels,
                                          const WarpParams& params) {
  const std::size_t n = row_length(row, channels);
  require(n >= 3, ErrorCode::InvalidArgument, "verify_warp_identities: need N >= 3");
  const WarpedAxis axis = warp_positions(row, channels, params);
  const WarpSystem sys = build_warp_system(row, channels, params);
  const std::vector<double>& t = axis.positions();

  WarpIdentityReport rep;
  const std::vector<double> psi_t = sys.psi.apply(t);
  double cumsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    rep.psi_residual = std::max(rep.psi_residual, std::abs(psi_t[i] - sys.tau[i]));
    cumsum += sys.tau[i];
    rep.inverse_residual = std::max(rep.inverse_residual, std::abs(cumsum - t[i]));
  }
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double lt = 2.0 * t[i] - t[i - 1] - t[i + 1];
    rep.path_residual =
        std::max(rep.path_residual, std::abs(lt - (sys.tau[i] - sys.tau[i + 1])));
    rep.path_tau_prime_residual =
        std::max(rep.path_tau_prime_residual, std::abs(lt + sys.tau_prime[i]));
  }
  return rep;
}

std::vector<double> dt_smooth_row(std::span<const double> row, std::size_t channels,
                                  const WarpedAxis& axis, double sigma_s) {
  require(sigma_s > 0.0, ErrorCode::InvalidArgument, "sigma_s must be > 0");
  const std::size_t n = row_length(row, channels);
  require(axis.size() == n, ErrorCode::DimensionMismatch,
          "dt_smooth_row: axis length differs from row length");
  const double reach = 4.0 * sigma_s;
  std::vector<double> out(row.size(), 0.0);
  std::vector<double> acc(channels);
  std::size_t lo = 0;
  for (std::size_t i = 0; i < n; ++i) {
    while (axis[i] - axis[lo] > reach) ++lo;
    std::fill(acc.begin(), acc.end(), 0.0);
    double norm = 0.0;
    for (std::size_t j = lo; j < n && axis[j] - axis[i] <= reach; ++j) {
      const double z = (axis[j] - axis[i]) / sigma_s;
      const double g = std::exp(-0.5 * z * z);
      norm += g;
      for (std::size_t c = 0; c < channels; ++c) acc[c] += g * row[j * channels + c];
    }
    for (std::size_t c = 0; c < channels; ++c) out[i * channels + c] = acc[c] / norm;
  }
  return out;
}

std::vector<double> dt_filter_row(std::span<const double> row, std::size_t channels,
                                  const WarpParams& params, int passes) {
  require(passes >= 1, ErrorCode::InvalidArgument, "passes must be >= 1");
  std::vector<double> cur(row.begin(), row.end());
  for (int p = 0; p < passes; ++p) {
    const WarpedAxis axis = warp_positions(cur, channels, params);
    cur = dt_smooth_row(cur, channels, axis, params.sigma_s);
  }
  return cur;
}

ImagePlane dt_smooth_image(const ImagePlane& img, const WarpParams& params, int passes) {
  params.validate();
  require(passes >= 1, ErrorCode::InvalidArgument, "passes must be >= 1");
  ImagePlane out = img;
  if (out.empty()) return out;
  const std::size_t ch = img.channels();
  for (int p = 0; p < passes; ++p) {
    kernels::dt_rows({out.samples().data(), img.height(), img.width(), ch,
                      img.width() * ch, ch},
                     params.alpha_g, params.alpha_p, params.sigma_s);
    kernels::dt_rows({out.samples().data(), img.width(), img.height(), ch, ch,
                      img.width() * ch},
                     params.alpha_g, params.alpha_p, params.sigma_s);
  }
  return out;
}

std::vector<double> retarget_row(std::span<const double> row, std::size_t channels,
                                 const WarpedAxis& axis, std::size_t target) {
  const std::size_t n = row_length(row, channels);
  require(n >= 2, ErrorCode::InvalidArgument, "retarget_row: need N >= 2");
  require(target >= 2, ErrorCode::InvalidArgument, "retarget_row: need M >= 2");
  require(axis.size() == n, ErrorCode::DimensionMismatch,
          "retarget_row: axis length differs from row length");
  std::vector<double> out(target * channels);
  const double total = axis.length();
  std::size_t seg = 0;
  for (std::size_t m = 0; m < target; ++m) {
    if (m == 0 || m + 1 == target) {
      const std::size_t src = m == 0 ? 0 : n - 1;
      for (std::size_t c = 0; c < channels; ++c) out[m * channels + c] = row[src * channels + c];
      continue;
    }
    const double s = static_cast<double>(m) * total / static_cast<double>(target - 1);
    while (seg + 2 < n && axis[seg + 1] < s) ++seg;
    const double f = (s - axis[seg]) / (axis[seg + 1] - axis[seg]);
    for (std::size_t c = 0; c < channels; ++c) {
      const double a = row[seg * channels + c];
      const double b = row[(seg + 1) * channels + c];
      out[m * channels + c] = a + f * (b - a);
    }
  }
  return out;
}

ImagePlane retarget_image(const ImagePlane& img, const WarpParams& params,
                          std::size_t target_width) {
  params.validate();
  require(!img.empty(), ErrorCode::EmptyInput, "retarget_image: empty image");
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  const std::size_t ch = img.channels();
  require(w >= 2, ErrorCode::InvalidArgument, "retarget_image: width must be >= 2");
  std::vector<double> t(w, 0.0);
  for (std::size_t x = 1; x < w; ++x) {
    double inc = 0.0;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t c = 0; c < ch; ++c) inc += std::abs(img.at(x, y, c) - img.at(x - 1, y, c));
    }
    t[x] = t[x - 1] + params.alpha_g + params.alpha_p * inc / static_cast<double>(h);
  }
  const WarpedAxis axis(std::move(t));
  ImagePlane out(target_width, h, ch);
  for (std::size_t y = 0; y < h; ++y) {
    const auto src = img.samples().subspan(y * w * ch, w * ch);
    const std::vector<double> row = retarget_row(src, ch, axis, target_width);
    std::copy(row.begin(), row.end(), out.samples().begin() + static_cast<long>(y * target_width * ch));
  }
  return out;
}

}  // namespace gsp
