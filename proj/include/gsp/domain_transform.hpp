#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "gsp/graph.hpp"
#include "gsp/image.hpp"

namespace gsp {

struct WarpParams {
  double alpha_g = 1.0;  // geometric weight
  double alpha_p = 0.0;  // photometric weight
  double sigma_s = 1.0;  // smoothing bandwidth, warped units

  void validate() const;
};

// Strictly increasing warped coordinates, t_0 = 0.
class WarpedAxis {
 public:
  WarpedAxis() = default;
  explicit WarpedAxis(std::vector<double> positions);

  std::size_t size() const noexcept { return t_.size(); }
  const std::vector<double>& positions() const noexcept { return t_; }
  double operator[](std::size_t i) const { return t_[i]; }
  double length() const { return t_.empty() ? 0.0 : t_.back(); }

 private:
  std::vector<double> t_;
};

// Rows are `channels`-interleaved samples; N = row.size() / channels.
WarpedAxis warp_positions(std::span<const double> row, std::size_t channels,
                          const WarpParams& params);

// Psi t = tau with Psi the lower bidiagonal first-difference matrix
// (1 on the diagonal, -1 below), tau_0 = 0 so that t_0 = 0.
struct WarpSystem {
  SparseSymOperator psi;
  std::vector<double> tau;
  // Interior second differences: alpha_p * sum_c(|x_{i+1}-x_i| - |x_i-x_{i-1}|),
  // zero at both ends.
  std::vector<double> tau_prime;
};

WarpSystem build_warp_system(std::span<const double> row, std::size_t channels,
                             const WarpParams& params);

struct WarpIdentityReport {
  double psi_residual = 0.0;       // max |Psi t - tau|
  double inverse_residual = 0.0;   // max |cumsum(tau) - t|
  double path_residual = 0.0;      // max interior |(L_path t)_i - (tau_i - tau_{i+1})|
  double path_tau_prime_residual = 0.0;  // max interior |(L_path t)_i + tau'_i|
};

WarpIdentityReport verify_warp_identities(std::span<const double> row,
                                          std::size_t channels,
                                          const WarpParams& params);

// Normalized Gaussian smoothing over warped positions, evaluated back at the
// original samples; contributions beyond 4 sigma_s are dropped.
std::vector<double> dt_smooth_row(std::span<const double> row, std::size_t channels,
                                  const WarpedAxis& axis, double sigma_s);

// `passes` rounds of warp + smooth, each warp computed from the current row.
std::vector<double> dt_filter_row(std::span<const double> row, std::size_t channels,
                                  const WarpParams& params, int passes);

// Each pass smooths all rows, then all columns; warps come from the current image.
ImagePlane dt_smooth_image(const ImagePlane& img, const WarpParams& params, int passes);

// Uniform resampling of the warped axis: M samples, linear interpolation.
std::vector<double> retarget_row(std::span<const double> row, std::size_t channels,
                                 const WarpedAxis& axis, std::size_t target);

// Resizes width using one axis shared by all rows, built from the row-averaged
// photometric increments so that columns stay aligned.
ImagePlane retarget_image(const ImagePlane& img, const WarpParams& params,
                          std::size_t target_width);

}  // namespace gsp
