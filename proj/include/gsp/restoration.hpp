#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "gsp/graph.hpp"
#include "gsp/image.hpp"
#include "gsp/spectral.hpp"

namespace gsp {

using LinearMap = std::function<void(std::span<const double>, std::span<double>)>;

struct CgResult {
  std::vector<double> x;
  std::size_t iterations = 0;
  double residual = 0.0;  // ||b - A x|| / ||b||
  bool converged = false;
  // 1/2 x'Ax - b'x after each iteration, starting with the initial guess.
  std::vector<double> objective;
};

// Conjugate gradient for symmetric positive (semi)definite A. Stops when the
// relative residual drops to `tol`; throws NotConverged after `max_iters`.
CgResult conjugate_gradient(const LinearMap& a, std::span<const double> b,
                            std::span<const double> x0, double tol, std::size_t max_iters);

enum class TikhonovPath { Spectral, Linear };

// argmin ||y - x||^2 + mu x'Lx on the combinatorial Laplacian of g.
// Spectral: gains 1/(1 + mu lambda_k). Linear: CG on (I + mu L) x = y.
std::vector<double> denoise_tikhonov(const PixelGraph& g, std::span<const double> y, double mu,
                                     TikhonovPath path);

struct TikhonovImageParams {
  double mu = 1.0;
  GridWeightParams weights{1.0, 0.1, 4, false};
  bool prefilter = true;  // weights from the 3x3-mean image
};

// Per-channel Tikhonov denoising with a grid graph built from the image.
ImagePlane denoise_tikhonov_image(const ImagePlane& noisy, const TikhonovImageParams& params);

enum class ThresholdMode { Hard, Soft };

struct GftDenoiseParams {
  std::size_t patch_size = 8;    // <= 16
  std::size_t cluster_size = 8;  // patches averaged per group
  std::size_t search_radius = 8;
  std::size_t stride = 4;
  double tau = 0.0;
  ThresholdMode mode = ThresholdMode::Hard;
  int iterations = 1;
  double sigma_l = 1.0;
  double sigma_x = 0.1;
  // Edges lighter than this are treated as cut.
  double cut_weight = 1e-6;
};

// Hard: zero |alpha| < sqrt(2 tau). Soft: shrink by tau/2. Coefficients of
// zero eigenvalues are left alone.
void threshold_coefficients(const GraphSpectrum& spec, std::span<double> alpha, double tau,
                            ThresholdMode mode);

// Thresholds each patch in the GFT of `spec` and resynthesizes it.
std::vector<std::vector<double>> threshold_patch_group(
    const GraphSpectrum& spec, const std::vector<std::vector<double>>& patches, double tau,
    ThresholdMode mode);

// Graph built on a p x p patch: 4-connected, Gaussian weights, light edges cut.
PixelGraph patch_graph(std::span<const double> patch, std::size_t p, double sigma_l,
                       double sigma_x, double cut_weight);

ImagePlane denoise_gft_threshold(const ImagePlane& img, const GftDenoiseParams& params);

// d_min^-1 x' L D^-1 L x
double lerag_prior(const PixelGraph& g, std::span<const double> x);

// Separable convolution with edge replication. Empty taps = identity.
struct BlurOperator {
  std::vector<double> taps;  // odd length, centred

  static BlurOperator identity() { return {}; }
  static BlurOperator box(std::size_t length);

  // H for a width x height raster; horizontal then vertical pass. A height of
  // 1 gives the 1-D operator.
  SparseSymOperator matrix(std::size_t width, std::size_t height) const;
  std::vector<double> apply(std::span<const double> x, std::size_t width,
                            std::size_t height) const;
};

SparseSymOperator transpose(const SparseSymOperator& a);

struct DeblurParams {
  double beta = 0.0;  // >= -1
  double eta = 0.01;  // > 0
  int outer_iterations = 1;
  double cg_tol = 1e-10;
  GridWeightParams weights{1.0, 0.1, 8, true};
  std::size_t sinkhorn_iters = 1000;
  double sinkhorn_tol = 1e-10;

  void validate() const;
};

struct DeblurResult {
  ImagePlane image;
  // Objective trace of every CG solve (one vector per outer iteration).
  std::vector<std::vector<double>> objective;
};

// (y - Hx)'(I + beta(I-K))(y - Hx) + eta x'(I-K)x
double deblur_objective(const SparseSymOperator& h, const SparseSymOperator& k,
                        std::span<const double> y, std::span<const double> x, double beta,
                        double eta);

// Each outer iteration: grid graph with unit self-loops from the current
// estimate, Sinkhorn scaling to K, then CG on
// (H'(I + beta(I-K))H + eta(I-K)) x = H'(I + beta(I-K)) y.
DeblurResult deblur(const ImagePlane& observed, const BlurOperator& blur,
                    const DeblurParams& params);

}  // namespace gsp
