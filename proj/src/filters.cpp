#include "gsp/filters.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "gsp/error.hpp"
#include "gsp/kernels.hpp"

namespace gsp {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

double sampled_gain(const filter::Sampled& s, double lambda) {
  const auto& t = s.table;
  require(!t.empty(), ErrorCode::InvalidArgument, "sampled response needs a table");
  if (lambda <= t.front().first) return t.front().second;
  if (lambda >= t.back().first) return t.back().second;
  const auto it = std::upper_bound(t.begin(), t.end(), lambda,
                                   [](double l, const auto& p) { return l < p.first; });
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double f = (lambda - lo.first) / (hi.first - lo.first);
  return lo.second + f * (hi.second - lo.second);
}

void validate(const FilterSpec& spec) {
  std::visit(overloaded{
                 [](const filter::Heat& h) {
                   require(h.t > 0.0, ErrorCode::InvalidArgument, "heat filter needs t > 0");
                 },
                 [](const filter::TikhonovInverse& f) {
                   require(f.rho > 0.0 && static_cast<bool>(f.highpass),
                           ErrorCode::InvalidArgument, "Tikhonov filter needs rho > 0 and a high-pass response");
                 },
                 [](const filter::ChenMAP& f) {
                   require(f.mu > 0.0, ErrorCode::InvalidArgument, "ChenMAP needs mu > 0");
                 },
                 [](const filter::Sampled& s) {
                   require(!s.table.empty(), ErrorCode::InvalidArgument,
                           "sampled response needs a table");
                   for (std::size_t k = 1; k < s.table.size(); ++k) {
                     require(s.table[k].first > s.table[k - 1].first,
                             ErrorCode::InvalidArgument,
                             "sampled response table must be strictly increasing in lambda");
                   }
                 },
                 [](const auto&) {},
             },
             spec);
}

}  // namespace

double eval(const FilterSpec& spec, double lambda) {
  validate(spec);
  return std::visit(
      overloaded{
          [](const filter::IdealLowPass&) -> double {
            fail(ErrorCode::InvalidArgument,
                 "ideal low-pass selects by eigenvalue index; use spectral_gains");
          },
          [&](const filter::Heat& h) { return std::exp(-h.t * lambda); },
          [&](const filter::TikhonovInverse& f) {
            return 1.0 / (1.0 + f.rho * f.highpass(lambda));
          },
          [&](const filter::BilateralResponse&) { return 1.0 - lambda; },
          [&](const filter::ChenMAP& f) {
            const double d = 1.0 - lambda;
            return 1.0 / (1.0 + f.mu * d * d);
          },
          [&](const filter::Sampled& s) { return sampled_gain(s, lambda); },
      },
      spec);
}

std::vector<double> spectral_gains(const FilterSpec& spec,
                                   std::span<const double> eigenvalues) {
  const std::size_t n = eigenvalues.size();
  if (const auto* ideal = std::get_if<filter::IdealLowPass>(&spec)) {
    require(ideal->pass_count <= n, ErrorCode::InvalidArgument,
            "ideal low-pass: pass count " + std::to_string(ideal->pass_count) +
                " exceeds N = " + std::to_string(n));
    std::size_t pass = ideal->pass_count;
    if (pass > 0) {
      const double tol = 1e-9 * std::max(1.0, std::abs(eigenvalues[n - 1]));
      while (pass < n && eigenvalues[pass] - eigenvalues[pass - 1] <= tol) ++pass;
    }
    std::vector<double> g(n, 0.0);
    std::fill(g.begin(), g.begin() + static_cast<long>(pass), 1.0);
    return g;
  }
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = eval(spec, eigenvalues[k]);
  return g;
}

std::vector<double> apply_exact(const GraphSpectrum& spec, const FilterSpec& filter,
                                std::span<const double> x) {
  std::vector<double> alpha = gft(spec, x);
  const std::vector<double> g = spectral_gains(filter, spec.eigenvalues());
  for (std::size_t k = 0; k < alpha.size(); ++k) alpha[k] *= g[k];
  return igft(spec, alpha);
}

std::vector<double> apply_response(const GraphSpectrum& spec, const Response& response,
                                   std::span<const double> x) {
  std::vector<double> alpha = gft(spec, x);
  for (std::size_t k = 0; k < alpha.size(); ++k) alpha[k] *= response(spec.eigenvalues()[k]);
  return igft(spec, alpha);
}

double PolynomialFilter::eval(double lambda) const {
  double acc = 0.0;
  for (std::size_t k = coeffs.size(); k-- > 0;) acc = acc * lambda + coeffs[k];
  return acc;
}

PolynomialFilter taylor_heat(double t, std::size_t order) {
  require(t > 0.0, ErrorCode::InvalidArgument, "taylor_heat needs t > 0");
  PolynomialFilter p;
  p.coeffs.resize(order + 1);
  double term = 1.0;
  for (std::size_t k = 0; k <= order; ++k) {
    if (k > 0) term *= -t / static_cast<double>(k);
    p.coeffs[k] = term;
  }
  return p;
}

double ChebyshevFilter::eval(double lambda) const {
  const double y = 2.0 * lambda / lambda_max - 1.0;
  double prev = 1.0;
  double cur = y;
  double acc = 0.5 * coeffs[0];
  if (order >= 1) acc += coeffs[1] * cur;
  for (std::size_t k = 2; k <= order; ++k) {
    const double next = 2.0 * y * cur - prev;
    prev = cur;
    cur = next;
    acc += coeffs[k] * cur;
  }
  return acc;
}

double ChebyshevFilter::eval_direct(double lambda) const {
  const double y = std::clamp(2.0 * lambda / lambda_max - 1.0, -1.0, 1.0);
  const double theta = std::acos(y);
  double acc = 0.5 * coeffs[0];
  for (std::size_t k = 1; k <= order; ++k) {
    acc += coeffs[k] * std::cos(static_cast<double>(k) * theta);
  }
  return acc;
}

ChebyshevFilter chebyshev_fit(const Response& target, std::size_t order, double lambda_max) {
  require(lambda_max > 0.0, ErrorCode::InvalidArgument, "chebyshev_fit needs lambda_max > 0");
  ChebyshevFilter cheb;
  cheb.order = order;
  cheb.lambda_max = lambda_max;
  cheb.coeffs.assign(order + 1, 0.0);
  const std::size_t nodes = order + 1;
  std::vector<double> theta(nodes);
  std::vector<double> f(nodes);
  for (std::size_t j = 0; j < nodes; ++j) {
    theta[j] = std::numbers::pi * (static_cast<double>(j) + 0.5) / static_cast<double>(nodes);
    f[j] = target(0.5 * lambda_max * (std::cos(theta[j]) + 1.0));
  }
  for (std::size_t k = 0; k <= order; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j < nodes; ++j) {
      acc += f[j] * std::cos(static_cast<double>(k) * theta[j]);
    }
    cheb.coeffs[k] = 2.0 * acc / static_cast<double>(nodes);
  }
  return cheb;
}

std::vector<double> apply_polynomial(const SparseSymOperator& op, const PolynomialFilter& poly,
                                     std::span<const double> x) {
  require(x.size() == op.dimension(), ErrorCode::DimensionMismatch,
          "apply_polynomial: signal length " + std::to_string(x.size()) +
              " vs operator dimension " + std::to_string(op.dimension()));
  const std::size_t n = x.size();
  std::vector<double> out(n, 0.0);
  if (poly.coeffs.empty()) return out;
  std::vector<double> power(x.begin(), x.end());
  std::vector<double> next(n);
  for (std::size_t k = 0; k < poly.coeffs.size(); ++k) {
    if (k > 0) {
      kernels::spmv(op, power, next);
      power.swap(next);
    }
    const double a = poly.coeffs[k];
    for (std::size_t i = 0; i < n; ++i) out[i] += a * power[i];
  }
  return out;
}

std::vector<double> apply_chebyshev(const SparseSymOperator& op, const ChebyshevFilter& cheb,
                                    std::span<const double> x) {
  require(cheb.lambda_max > 0.0, ErrorCode::InvalidArgument,
          "apply_chebyshev needs lambda_max > 0");
  require(x.size() == op.dimension(), ErrorCode::DimensionMismatch,
          "apply_chebyshev: signal length " + std::to_string(x.size()) +
              " vs operator dimension " + std::to_string(op.dimension()));
  require(cheb.coeffs.size() == cheb.order + 1, ErrorCode::InvalidArgument,
          "apply_chebyshev: coefficient count must be order + 1");
  const std::size_t n = x.size();
  const double scale = 2.0 / cheb.lambda_max;

  std::vector<double> prev(x.begin(), x.end());
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * cheb.coeffs[0] * prev[i];
  if (cheb.order == 0) return out;

  // T_1 = (2/lmax) L x - x
  std::vector<double> cur(n);
  std::vector<double> tmp(n);
  kernels::spmv(op, prev, tmp);
  for (std::size_t i = 0; i < n; ++i) {
    cur[i] = scale * tmp[i] - prev[i];
    out[i] += cheb.coeffs[1] * cur[i];
  }
  for (std::size_t k = 2; k <= cheb.order; ++k) {
    kernels::spmv(op, cur, tmp);
    for (std::size_t i = 0; i < n; ++i) {
      const double next = 2.0 * (scale * tmp[i] - cur[i]) - prev[i];
      prev[i] = cur[i];
      cur[i] = next;
      out[i] += cheb.coeffs[k] * next;
    }
  }
  return out;
}

double default_lambda_max(const SparseSymOperator& op) {
  if (op.kind() == OperatorKind::SymmetricNormalized || op.kind() == OperatorKind::RandomWalk) {
    return 2.0;
  }
  const double r = spectral_radius(op).radius;
  return r > 0.0 ? 1.01 * r : 1.0;
}

std::vector<ErrorRow> approximation_error_table(const Response& target,
                                                std::span<const Response> approximants,
                                                std::span<const double> grid) {
  require(!grid.empty(), ErrorCode::EmptyInput, "approximation_error_table: empty grid");
  std::vector<ErrorRow> rows;
  rows.reserve(grid.size());
  for (double lambda : grid) {
    ErrorRow row{lambda, {}};
    const double h = target(lambda);
    for (const Response& a : approximants) {
      const double d = h - a(lambda);
      row.sq_error.push_back(d * d);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  for (std::size_t i = 0; i < count; ++i) {
    g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  }
  if (count > 1) g.back() = hi;
  return g;
}

ImagePlane bilateral_apply(const ImagePlane& img, const GridWeightParams& params,
                           int window_radius) {
  require(params.self_loops, ErrorCode::InvalidArgument,
          "bilateral filter requires self_loops (centre weight 1)");
  ImagePlane out;
  kernels::bilateral(img, params, window_radius, out);
  return out;
}

ImagePlane bilateral_graph_form(const ImagePlane& img, const GridWeightParams& params,
                                int window_radius) {
  require(params.self_loops, ErrorCode::InvalidArgument,
          "bilateral filter requires self_loops (centre weight 1)");
  const PixelGraph g = build_window_graph(img, params, window_radius);
  const SparseSymOperator w = adjacency_operator(g);
  const std::vector<double> d = degree_vector(g);
  ImagePlane out(img.width(), img.height(), img.channels());
  for (std::size_t c = 0; c < img.channels(); ++c) {
    std::vector<double> wx = w.apply(img.channel(c));
    for (std::size_t i = 0; i < wx.size(); ++i) wx[i] /= d[i];
    out.set_channel(c, wx);
  }
  return out;
}

}  // namespace gsp
