#include "gsp/restoration.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gsp/error.hpp"
#include "gsp/kernels.hpp"

namespace gsp {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

}  // namespace

CgResult conjugate_gradient(const LinearMap& a, std::span<const double> b,
                            std::span<const double> x0, double tol, std::size_t max_iters) {
  const std::size_t n = b.size();
  require(x0.size() == n, ErrorCode::DimensionMismatch, "conjugate_gradient: x0 length");
  CgResult out;
  out.x.assign(x0.begin(), x0.end());
  std::vector<double> r(n);
  std::vector<double> ap(n);
  a(out.x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  auto objective = [&]() { return -0.5 * (dot(out.x, r) + dot(b, out.x)); };
  out.objective.push_back(objective());

  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(out.x.begin(), out.x.end(), 0.0);
    out.converged = true;
    out.objective.push_back(0.0);
    return out;
  }
  std::vector<double> p = r;
  double rr = dot(r, r);
  out.residual = std::sqrt(rr) / bnorm;
  while (out.residual > tol) {
    if (out.iterations >= max_iters) {
      fail(ErrorCode::NotConverged,
           "conjugate gradient stopped after " + std::to_string(max_iters) +
               " iterations with relative residual " + std::to_string(out.residual));
    }
    a(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) break;  // direction in the null space: nothing left to reduce
    const double step = rr / pap;
    for (std::size_t i = 0; i < n; ++i) {
      out.x[i] += step * p[i];
      r[i] -= step * ap[i];
    }
    const double rr_new = dot(r, r);
    for (std::size_t i = 0; i < n; ++i) p[i] = r[i] + (rr_new / rr) * p[i];
    rr = rr_new;
    ++out.iterations;
    out.residual = std::sqrt(rr) / bnorm;
    out.objective.push_back(objective());
  }
  out.converged = out.residual <= tol;
  return out;
}

std::vector<double> denoise_tikhonov(const PixelGraph& g, std::span<const double> y, double mu,
                                     TikhonovPath path) {
  require(mu >= 0.0, ErrorCode::InvalidArgument, "denoise_tikhonov: mu must be >= 0");
  require(y.size() == g.node_count(), ErrorCode::DimensionMismatch,
          "denoise_tikhonov: signal length " + std::to_string(y.size()) + " vs N = " +
              std::to_string(g.node_count()));
  const SparseSymOperator lap = variation_operator(g, OperatorKind::Combinatorial);
  if (mu == 0.0) return {y.begin(), y.end()};
  if (path == TikhonovPath::Spectral) {
    const GraphSpectrum spec = eigendecompose(lap);
    std::vector<double> alpha = gft(spec, y);
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      alpha[k] /= 1.0 + mu * spec.eigenvalues()[k];
    }
    return igft(spec, alpha);
  }
  const LinearMap a = [&](std::span<const double> v, std::span<double> out) {
    kernels::spmv(lap, v, out);
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] + mu * out[i];
  };
  return conjugate_gradient(a, y, y, 1e-10, 10 * y.size()).x;
}

ImagePlane denoise_tikhonov_image(const ImagePlane& noisy, const TikhonovImageParams& params) {
  require(!noisy.empty(), ErrorCode::EmptyInput, "denoise_tikhonov_image: empty image");
  const ImagePlane guide = params.prefilter ? mean_filter3(noisy) : noisy;
  const PixelGraph g = build_grid_graph(guide, params.weights);
  ImagePlane out(noisy.width(), noisy.height(), noisy.channels());
  for (std::size_t c = 0; c < noisy.channels(); ++c) {
    out.set_channel(c, denoise_tikhonov(g, noisy.channel(c), params.mu, TikhonovPath::Linear));
  }
  out.clamp();
  return out;
}

void threshold_coefficients(const GraphSpectrum& spec, std::span<double> alpha, double tau,
                            ThresholdMode mode) {
  require(tau >= 0.0, ErrorCode::InvalidArgument, "threshold: tau must be >= 0");
  require(alpha.size() == spec.size(), ErrorCode::DimensionMismatch,
          "threshold: coefficient count mismatch");
  const double hard = std::sqrt(2.0 * tau);
  const double shrink = 0.5 * tau;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (spec.eigenvalues()[k] <= 1e-10) continue;
    if (mode == ThresholdMode::Hard) {
      if (std::abs(alpha[k]) < hard) alpha[k] = 0.0;
    } else {
      const double mag = std::max(0.0, std::abs(alpha[k]) - shrink);
      alpha[k] = std::copysign(mag, alpha[k]);
    }
  }
}

std::vector<std::vector<double>> threshold_patch_group(
    const GraphSpectrum& spec, const std::vector<std::vector<double>>& patches, double tau,
    ThresholdMode mode) {
  std::vector<std::vector<double>> out;
  out.reserve(patches.size());
  for (const auto& patch : patches) {
    std::vector<double> alpha = gft(spec, patch);
    threshold_coefficients(spec, alpha, tau, mode);
    out.push_back(igft(spec, alpha));
  }
  return out;
}

PixelGraph patch_graph(std::span<const double> patch, std::size_t p, double sigma_l,
                       double sigma_x, double cut_weight) {
  require(patch.size() == p * p, ErrorCode::DimensionMismatch, "patch_graph: size mismatch");
  std::vector<Edge> edges;
  auto add = [&](std::size_t i, std::size_t j) {
    const double d = patch[i] - patch[j];
    const double w = kernel_weight(1.0, d * d, sigma_l, sigma_x);
    if (w >= cut_weight && w > 0.0) edges.push_back({i, j, w});
  };
  for (std::size_t y = 0; y < p; ++y) {
    for (std::size_t x = 0; x < p; ++x) {
      const std::size_t i = y * p + x;
      if (x + 1 < p) add(i, i + 1);
      if (y + 1 < p) add(i, i + p);
    }
  }
  return PixelGraph(p * p, std::move(edges));
}

namespace {

struct PatchResult {
  std::vector<std::size_t> origins;  // top-left pixel index of each member
  std::vector<std::vector<double>> patches;
};

std::vector<std::size_t> target_positions(std::size_t extent, std::size_t p,
                                          std::size_t stride) {
  std::vector<std::size_t> pos;
  for (std::size_t v = 0; v + p <= extent; v += stride) pos.push_back(v);
  if (pos.back() != extent - p) pos.push_back(extent - p);
  return pos;
}

std::vector<double> denoise_channel(const std::vector<double>& img, std::size_t w,
                                    std::size_t h, const GftDenoiseParams& prm) {
  const std::size_t p = prm.patch_size;
  const auto xs = target_positions(w, p, prm.stride);
  const auto ys = target_positions(h, p, prm.stride);

  auto extract = [&](std::size_t x0, std::size_t y0) {
    std::vector<double> patch(p * p);
    for (std::size_t y = 0; y < p; ++y)
      for (std::size_t x = 0; x < p; ++x) patch[y * p + x] = img[(y0 + y) * w + x0 + x];
    return patch;
  };

  const long targets = static_cast<long>(xs.size() * ys.size());
  std::vector<PatchResult> results(static_cast<std::size_t>(targets));
#pragma omp parallel for schedule(dynamic)
  for (long t = 0; t < targets; ++t) {
    const std::size_t tx = xs[static_cast<std::size_t>(t) % xs.size()];
    const std::size_t ty = ys[static_cast<std::size_t>(t) / xs.size()];
    const std::vector<double> ref = extract(tx, ty);

    std::vector<std::pair<double, std::size_t>> cand;
    const std::size_t x_lo = tx > prm.search_radius ? tx - prm.search_radius : 0;
    const std::size_t y_lo = ty > prm.search_radius ? ty - prm.search_radius : 0;
    const std::size_t x_hi = std::min(w - p, tx + prm.search_radius);
    const std::size_t y_hi = std::min(h - p, ty + prm.search_radius);
    for (std::size_t cy = y_lo; cy <= y_hi; ++cy) {
      for (std::size_t cx = x_lo; cx <= x_hi; ++cx) {
        double ssd = 0.0;
        for (std::size_t y = 0; y < p; ++y) {
          for (std::size_t x = 0; x < p; ++x) {
            const double d = img[(cy + y) * w + cx + x] - ref[y * p + x];
            ssd += d * d;
          }
        }
        // The target itself always ranks first.
        const bool self = cx == tx && cy == ty;
        cand.emplace_back(self ? -1.0 : ssd, cy * w + cx);
      }
    }
    const std::size_t take = std::min(prm.cluster_size, cand.size());
    std::partial_sort(cand.begin(), cand.begin() + static_cast<long>(take), cand.end());

    PatchResult& res = results[static_cast<std::size_t>(t)];
    std::vector<double> mean(p * p, 0.0);
    for (std::size_t m = 0; m < take; ++m) {
      const std::size_t o = cand[m].second;
      res.origins.push_back(o);
      res.patches.push_back(extract(o % w, o / w));
      for (std::size_t k = 0; k < p * p; ++k) mean[k] += res.patches.back()[k];
    }
    for (double& v : mean) v /= static_cast<double>(take);

    const PixelGraph g = patch_graph(mean, p, prm.sigma_l, prm.sigma_x, prm.cut_weight);
    const GraphSpectrum spec = eigendecompose(variation_operator(g, OperatorKind::Combinatorial));
    res.patches = threshold_patch_group(spec, res.patches, prm.tau, prm.mode);
  }

  std::vector<double> acc(w * h, 0.0);
  std::vector<double> count(w * h, 0.0);
  for (const PatchResult& res : results) {
    for (std::size_t m = 0; m < res.origins.size(); ++m) {
      const std::size_t ox = res.origins[m] % w;
      const std::size_t oy = res.origins[m] / w;
      for (std::size_t y = 0; y < p; ++y) {
        for (std::size_t x = 0; x < p; ++x) {
          const std::size_t idx = (oy + y) * w + ox + x;
          acc[idx] += res.patches[m][y * p + x];
          count[idx] += 1.0;
        }
      }
    }
  }
  for (std::size_t i = 0; i < acc.size(); ++i) acc[i] /= count[i];
  return acc;
}

}  // namespace

ImagePlane denoise_gft_threshold(const ImagePlane& img, const GftDenoiseParams& params) {
  require(!img.empty(), ErrorCode::EmptyInput, "denoise_gft_threshold: empty image");
  require(params.patch_size >= 1 && params.patch_size <= 16, ErrorCode::InvalidArgument,
          "patch size must be in [1, 16]");
  require(params.patch_size <= img.width() && params.patch_size <= img.height(),
          ErrorCode::InvalidArgument,
          "patch size " + std::to_string(params.patch_size) + " exceeds image " +
              std::to_string(img.width()) + "x" + std::to_string(img.height()));
  require(params.cluster_size >= 1 && params.stride >= 1 && params.iterations >= 1,
          ErrorCode::InvalidArgument, "cluster size, stride and iterations must be >= 1");
  require(params.tau >= 0.0, ErrorCode::InvalidArgument, "tau must be >= 0");
  require(params.sigma_l > 0.0 && params.sigma_x > 0.0, ErrorCode::InvalidArgument,
          "sigma_l and sigma_x must be > 0");

  ImagePlane cur = img;
  for (int it = 0; it < params.iterations; ++it) {
    ImagePlane next(img.width(), img.height(), img.channels());
    for (std::size_t c = 0; c < img.channels(); ++c) {
      next.set_channel(c, denoise_channel(cur.channel(c), img.width(), img.height(), params));
    }
    cur = std::move(next);
  }
  return cur;
}

double lerag_prior(const PixelGraph& g, std::span<const double> x) {
  require(x.size() == g.node_count(), ErrorCode::DimensionMismatch,
          "lerag_prior: signal length mismatch");
  const std::vector<double> d = degree_vector(g);
  for (std::size_t i = 0; i < d.size(); ++i) {
    require(d[i] > 0.0, ErrorCode::DegenerateDegree,
            "lerag_prior: node " + std::to_string(i) + " is isolated");
  }
  const SparseSymOperator lap = variation_operator(g, OperatorKind::Combinatorial);
  const std::vector<double> lx = lap.apply(x);
  double acc = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) acc += lx[i] * lx[i] / d[i];
  return acc / *std::min_element(d.begin(), d.end());
}

BlurOperator BlurOperator::box(std::size_t length) {
  require(length % 2 == 1, ErrorCode::InvalidArgument, "blur length must be odd");
  return {std::vector<double>(length, 1.0 / static_cast<double>(length))};
}

SparseSymOperator BlurOperator::matrix(std::size_t width, std::size_t height) const {
  const std::size_t n = width * height;
  if (taps.empty()) {
    std::vector<Triplet> t;
    for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
    return SparseSymOperator(n, std::move(t), OperatorKind::General, true);
  }
  require(taps.size() % 2 == 1, ErrorCode::InvalidArgument, "blur taps must have odd length");
  for (double v : taps) require(std::isfinite(v), ErrorCode::InvalidArgument, "blur taps must be finite");
  const long half = static_cast<long>(taps.size() / 2);
  const long w = static_cast<long>(width);
  const long h = static_cast<long>(height);

  std::vector<Triplet> th;
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      for (long k = -half; k <= half; ++k) {
        const long xx = std::clamp(x + k, 0L, w - 1);
        th.push_back({static_cast<std::size_t>(y * w + x), static_cast<std::size_t>(y * w + xx),
                      taps[static_cast<std::size_t>(k + half)]});
      }
    }
  }
  const SparseSymOperator horiz(n, std::move(th), OperatorKind::General, false);
  if (h == 1) return horiz;
  std::vector<Triplet> tv;
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      for (long k = -half; k <= half; ++k) {
        const long yy = std::clamp(y + k, 0L, h - 1);
        tv.push_back({static_cast<std::size_t>(y * w + x), static_cast<std::size_t>(yy * w + x),
                      taps[static_cast<std::size_t>(k + half)]});
      }
    }
  }
  const SparseSymOperator vert(n, std::move(tv), OperatorKind::General, false);
  return multiply(vert, horiz, OperatorKind::General, false);
}

std::vector<double> BlurOperator::apply(std::span<const double> x, std::size_t width,
                                        std::size_t height) const {
  return matrix(width, height).apply(x);
}

SparseSymOperator transpose(const SparseSymOperator& a) {
  std::vector<Triplet> t = a.triplets();
  for (Triplet& e : t) std::swap(e.row, e.col);
  return SparseSymOperator(a.dimension(), std::move(t), a.kind(), a.symmetric());
}

void DeblurParams::validate() const {
  require(beta >= -1.0, ErrorCode::InvalidArgument, "deblur: beta must be >= -1");
  require(eta > 0.0, ErrorCode::InvalidArgument, "deblur: eta must be > 0");
  require(outer_iterations >= 1, ErrorCode::InvalidArgument,
          "deblur: outer iterations must be >= 1");
  require(cg_tol > 0.0, ErrorCode::InvalidArgument, "deblur: cg tolerance must be > 0");
  weights.validate();
}

namespace {

// v - K v
std::vector<double> minus_k(const SparseSymOperator& k, std::span<const double> v) {
  std::vector<double> out(v.size());
  kernels::spmv(k, v, out);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] - out[i];
  return out;
}

// (I + beta(I - K)) v
std::vector<double> fidelity_metric(const SparseSymOperator& k, std::span<const double> v,
                                    double beta) {
  std::vector<double> out = minus_k(k, v);
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] + beta * out[i];
  return out;
}

}  // namespace

double deblur_objective(const SparseSymOperator& h, const SparseSymOperator& k,
                        std::span<const double> y, std::span<const double> x, double beta,
                        double eta) {
  std::vector<double> res = h.apply(x);
  for (std::size_t i = 0; i < res.size(); ++i) res[i] = y[i] - res[i];
  const std::vector<double> mres = fidelity_metric(k, res, beta);
  const std::vector<double> lx = minus_k(k, x);
  return dot(res, mres) + eta * dot(x, lx);
}

DeblurResult deblur(const ImagePlane& observed, const BlurOperator& blur,
                    const DeblurParams& params) {
  params.validate();
  require(!observed.empty(), ErrorCode::EmptyInput, "deblur: empty image");
  const std::size_t w = observed.width();
  const std::size_t hgt = observed.height();
  const std::size_t n = w * hgt;
  const SparseSymOperator h = blur.matrix(w, hgt);
  const SparseSymOperator ht = transpose(h);
  GridWeightParams weights = params.weights;
  weights.self_loops = true;

  DeblurResult out;
  ImagePlane cur = observed;
  for (int outer = 0; outer < params.outer_iterations; ++outer) {
    ImagePlane guide = cur;
    guide.clamp();
    const PixelGraph g = build_grid_graph(guide, weights);
    const SinkhornResult sk =
        sinkhorn_scale(adjacency_operator(g), params.sinkhorn_iters, params.sinkhorn_tol);
    const SparseSymOperator& k = sk.doubly_stochastic;

    const LinearMap a = [&](std::span<const double> v, std::span<double> res) {
      const std::vector<double> hv = h.apply(v);
      const std::vector<double> mhv = fidelity_metric(k, hv, params.beta);
      kernels::spmv(ht, mhv, res);
      const std::vector<double> lv = minus_k(k, v);
      for (std::size_t i = 0; i < n; ++i) res[i] += params.eta * lv[i];
    };

    ImagePlane next(w, hgt, observed.channels());
    std::vector<double> trace;
    for (std::size_t c = 0; c < observed.channels(); ++c) {
      const std::vector<double> y = observed.channel(c);
      const std::vector<double> my = fidelity_metric(k, y, params.beta);
      const std::vector<double> b = ht.apply(my);
      const double constant = dot(y, my);
      const CgResult cg = conjugate_gradient(a, b, cur.channel(c), params.cg_tol, 10 * n);
      for (double f : cg.objective) trace.push_back(2.0 * f + constant);
      next.set_channel(c, cg.x);
    }
    out.objective.push_back(std::move(trace));
    cur = std::move(next);
  }
  out.image = std::move(cur);
  return out;
}

}  // namespace gsp
