#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "gsp/dense.hpp"
#include "gsp/image.hpp"
#include "gsp/spectral.hpp"

namespace gsp::codec {

enum class Mode : std::uint8_t { Gft = 0, Steerable = 1 };

// Angles are restricted to multiples of pi/16 so a block's angle travels as
// the byte k of theta = k pi / 16.
std::vector<double> default_angles();

struct CodecParams {
  std::size_t block_size = 8;  // <= 32
  double edge_threshold = 0.1;  // (0, 1]
  double q = 1.0 / 64.0;        // k/256 for an integer k in [1, 65535]
  Mode mode = Mode::Gft;
  // Unset: 0.1 Q^2, which keeps the angle choice rate-aware at every step.
  std::optional<double> lambda_rd;
  std::vector<double> angles = default_angles();

  double rd_weight() const { return lambda_rd.value_or(0.1 * q * q); }
  void validate() const;
};

struct Header {
  std::uint16_t width = 0;
  std::uint16_t height = 0;
  std::uint8_t block_size = 0;
  std::uint16_t q256 = 0;  // Q * 256
  Mode mode = Mode::Gft;

  double q() const { return q256 / 256.0; }
};

inline constexpr std::size_t kHeaderBytes = 13;

void write_header(const Header& h, std::vector<std::uint8_t>& out);
Header read_header(std::span<const std::uint8_t> bytes);

// 2 b (b-1) bits: b(b-1) horizontal edges row-major, then b(b-1) vertical
// edges row-major. true = weight 1, false = cut.
using EdgeMap = std::vector<bool>;

EdgeMap edge_map_from_block(std::span<const double> block, std::size_t b, double threshold);
std::vector<std::uint8_t> pack_edge_map(const EdgeMap& map);
EdgeMap unpack_edge_map(std::span<const std::uint8_t> bytes, std::size_t b);

// 4-connected b x b grid with 0/1 weights from the edge map.
PixelGraph block_graph(const EdgeMap& map, std::size_t b);
GraphSpectrum block_spectrum(const EdgeMap& map, std::size_t b);

// Half away from zero.
std::vector<std::int64_t> quantize(std::span<const double> coeffs, double q);
std::vector<double> dequantize(std::span<const std::int64_t> indices, double q);

// Zigzag-signed LEB128 varints; a run of zeros is the byte 0x00 followed by
// the run length as a varint.
void encode_tokens(std::span<const std::int64_t> indices, std::vector<std::uint8_t>& out);
// Reads exactly `count` indices starting at `pos`, advancing it.
std::vector<std::int64_t> decode_tokens(std::span<const std::uint8_t> bytes, std::size_t& pos,
                                        std::size_t count);
std::size_t token_bytes(std::span<const std::int64_t> indices);

// JPEG zigzag scan of an n x n frequency grid: entry j is (k, l) packed as
// k * n + l, k the vertical frequency.
std::vector<std::size_t> zigzag_order(std::size_t n);

// Unordered frequency pairs (k, l), k < l, whose grid-Laplacian eigenvalue
// has multiplicity exactly 2. Packed as k * n + l.
std::vector<std::size_t> rotatable_pairs(std::size_t n);

// Separable 2-D DCT on an n x n block with each rotatable pair rotated:
//   u'_kl =  cos t u_kl + sin t u_lk,   u'_lk = -sin t u_kl + cos t u_lk.
// `angles` has n*n entries indexed k * n + l; only rotatable pairs are read.
// Columns follow zigzag_order(n); pixel index is y * n + x.
DenseMatrix steerable_basis(std::size_t n, std::span<const double> angles);
DenseMatrix steerable_basis(std::size_t n, double theta);

// Grid-Laplacian eigenvalue of the DCT atom (k, l).
double grid_eigenvalue(std::size_t n, std::size_t k, std::size_t l);

struct AngleChoice {
  std::size_t index = 0;  // into params.angles
  double theta = 0.0;
  std::vector<std::int64_t> indices;  // zigzag order
  double cost = 0.0;
  double distortion = 0.0;  // squared error
  double bits = 0.0;
};

// argmin D + lambda_rd R over the candidate angles; R counts token bits plus
// ceil(log2 #candidates). Ties go to the smaller angle.
AngleChoice choose_angle_rd(std::span<const double> block, const CodecParams& params);

std::vector<std::uint8_t> encode(const ImagePlane& img, const CodecParams& params);
ImagePlane decode(std::span<const std::uint8_t> bytes);

}  // namespace gsp::codec
