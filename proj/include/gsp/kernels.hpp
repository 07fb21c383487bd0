#pragma once

// Data-parallel inner loops. Each kernel has an OpenMP version (the default
// entry point) and a serial reference in `kernels::serial` that the tests
// compare against bit-for-bit; every output element is computed by the same
// arithmetic in the same order in both, so results never depend on the
// thread count.

#include <cstddef>
#include <span>

#include "gsp/graph.hpp"
#include "gsp/image.hpp"

namespace gsp::kernels {

// y = A x.
void spmv(const SparseSymOperator& a, std::span<const double> x, std::span<double> y);

// Fills edges[e].w from the Gaussian kernel for pixel pairs (i, j).
void grid_edge_weights(const ImagePlane& img, const GridWeightParams& params,
                       std::span<Edge> edges);

// Direct windowed bilateral filter, self weight 1.
void bilateral(const ImagePlane& img, const GridWeightParams& params, int radius,
               ImagePlane& out);

// Normalized Gaussian smoothing of `count` independent rows over warped
// positions. Row r occupies samples [r*stride_row, ...) with consecutive
// elements `stride_elem` apart, `channels` interleaved values per element.
struct RowBatch {
  double* data = nullptr;
  std::size_t rows = 0;
  std::size_t length = 0;
  std::size_t channels = 1;
  std::size_t stride_row = 0;
  std::size_t stride_elem = 0;
};
void dt_rows(RowBatch batch, double alpha_g, double alpha_p, double sigma_s);

namespace serial {
void spmv(const SparseSymOperator& a, std::span<const double> x, std::span<double> y);
void grid_edge_weights(const ImagePlane& img, const GridWeightParams& params,
                       std::span<Edge> edges);
void bilateral(const ImagePlane& img, const GridWeightParams& params, int radius,
               ImagePlane& out);
void dt_rows(RowBatch batch, double alpha_g, double alpha_p, double sigma_s);
}  // namespace serial

}  // namespace gsp::kernels
