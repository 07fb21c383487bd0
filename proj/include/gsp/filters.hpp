#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "gsp/graph.hpp"
#include "gsp/image.hpp"
#include "gsp/spectral.hpp"

namespace gsp {

using Response = std::function<double(double)>;

namespace filter {

// Passes the `pass_count` lowest graph frequencies, selected by index. If the
// cut falls inside a degenerate eigenvalue group the whole group passes.
struct IdealLowPass {
  std::size_t pass_count = 0;
};
// e^{-t lambda}
struct Heat {
  double t = 1.0;
};
// 1 / (1 + rho h_r(lambda)); h_r defaults to lambda.
struct TikhonovInverse {
  double rho = 1.0;
  Response highpass = [](double lambda) { return lambda; };
};
// 1 - lambda on the normalized spectrum.
struct BilateralResponse {};
// 1 / (1 + mu (1 - lambda)^2)
struct ChenMAP {
  double mu = 1.0;
};
// Piecewise-linear table of (lambda, gain), clamped outside its range.
struct Sampled {
  std::vector<std::pair<double, double>> table;
};

}  // namespace filter

using FilterSpec = std::variant<filter::IdealLowPass, filter::Heat, filter::TikhonovInverse,
                                filter::BilateralResponse, filter::ChenMAP, filter::Sampled>;

// Gain at lambda >= 0. IdealLowPass is index-based and rejected here; use
// spectral_gains for it.
double eval(const FilterSpec& spec, double lambda);

// Gain per eigenvalue of an ascending spectrum.
std::vector<double> spectral_gains(const FilterSpec& spec, std::span<const double> eigenvalues);

// x_hat = sum_k h(lambda_k) alpha_k u_k
std::vector<double> apply_exact(const GraphSpectrum& spec, const FilterSpec& filter,
                                std::span<const double> x);
std::vector<double> apply_response(const GraphSpectrum& spec, const Response& response,
                                   std::span<const double> x);

// sum_k a_k lambda^k
struct PolynomialFilter {
  std::vector<double> coeffs;

  std::size_t order() const { return coeffs.empty() ? 0 : coeffs.size() - 1; }
  double eval(double lambda) const;
};

// Partial Taylor sum of e^{-t lambda}: a_k = (-t)^k / k!.
PolynomialFilter taylor_heat(double t, std::size_t order);

// c_0/2 + sum_{k>=1} c_k T_k(y), y = 2 lambda / lambda_max - 1.
struct ChebyshevFilter {
  std::size_t order = 0;
  double lambda_max = 2.0;
  std::vector<double> coeffs;

  // Three-term recurrence.
  double eval(double lambda) const;
  // cos(k arccos y), for cross-checking the recurrence.
  double eval_direct(double lambda) const;
};

// Gauss-Chebyshev quadrature on K+1 nodes of [0, lambda_max].
ChebyshevFilter chebyshev_fit(const Response& target, std::size_t order, double lambda_max);

// K operator-vector products, no spectrum needed.
std::vector<double> apply_polynomial(const SparseSymOperator& op, const PolynomialFilter& poly,
                                     std::span<const double> x);
std::vector<double> apply_chebyshev(const SparseSymOperator& op, const ChebyshevFilter& cheb,
                                    std::span<const double> x);

// 2 for normalized operators, otherwise 1.01 x a power-iteration estimate.
double default_lambda_max(const SparseSymOperator& op);

struct ErrorRow {
  double lambda = 0.0;
  std::vector<double> sq_error;  // one per approximant
};

// E(lambda) = (target(lambda) - approx(lambda))^2 on each grid point, in grid order.
std::vector<ErrorRow> approximation_error_table(const Response& target,
                                                std::span<const Response> approximants,
                                                std::span<const double> grid);

// Evenly spaced grid of `count` points covering [lo, hi].
std::vector<double> linspace(double lo, double hi, std::size_t count);

// Windowed bilateral filter (direct per-pixel evaluation). Requires
// params.self_loops: the centre pixel carries weight 1.
ImagePlane bilateral_apply(const ImagePlane& img, const GridWeightParams& params,
                           int window_radius);

// The same filter as D^-1 W x on the window graph.
ImagePlane bilateral_graph_form(const ImagePlane& img, const GridWeightParams& params,
                                int window_radius);

}  // namespace gsp
