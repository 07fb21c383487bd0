#include "gsp/codec.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>

#include "gsp/error.hpp"

namespace gsp::codec {

namespace {

constexpr std::uint8_t kVersion = 1;
constexpr double kAngleStep = std::numbers::pi / 16.0;

[[noreturn]] void corrupt(const std::string& what, std::size_t offset) {
  fail(ErrorCode::CorruptBitstream, what + " at byte " + std::to_string(offset));
}

std::size_t angle_code(double theta) {
  const double k = std::round(theta / kAngleStep);
  require(k >= 0.0 && k <= 255.0 && std::abs(theta - k * kAngleStep) <= 1e-12,
          ErrorCode::InvalidArgument,
          "codec: angle " + std::to_string(theta) + " is not a multiple of pi/16 in [0, 255 pi/16]");
  return static_cast<std::size_t>(k);
}

void put_varint(std::uint64_t v, std::vector<std::uint8_t>& out) {
  while (v >= 0x80) {
    out.push_back(static_cast<std::uint8_t>(v | 0x80));
    v >>= 7;
  }
  out.push_back(static_cast<std::uint8_t>(v));
}

std::uint64_t get_varint(std::span<const std::uint8_t> bytes, std::size_t& pos) {
  std::uint64_t v = 0;
  for (int shift = 0; shift < 64; shift += 7) {
    if (pos >= bytes.size()) corrupt("truncated varint", pos);
    const std::uint8_t byte = bytes[pos++];
    v |= static_cast<std::uint64_t>(byte & 0x7f) << shift;
    if ((byte & 0x80) == 0) return v;
  }
  corrupt("overlong varint", pos);
}

std::uint64_t zigzag(std::int64_t q) {
  return (static_cast<std::uint64_t>(q) << 1) ^ static_cast<std::uint64_t>(q >> 63);
}

std::int64_t unzigzag(std::uint64_t z) {
  return static_cast<std::int64_t>(z >> 1) ^ -static_cast<std::int64_t>(z & 1);
}

std::vector<double> extract_block(const ImagePlane& img, std::size_t bx, std::size_t by,
                                  std::size_t b) {
  std::vector<double> block(b * b);
  for (std::size_t y = 0; y < b; ++y) {
    const std::size_t sy = std::min(by * b + y, img.height() - 1);
    for (std::size_t x = 0; x < b; ++x) {
      const std::size_t sx = std::min(bx * b + x, img.width() - 1);
      block[y * b + x] = img.at(sx, sy);
    }
  }
  return block;
}

double squared_error(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += (a[i] - b[i]) * (a[i] - b[i]);
  return acc;
}

}  // namespace

std::vector<double> default_angles() {
  std::vector<double> a;
  for (int k = 0; k <= 8; ++k) a.push_back(k * kAngleStep);
  return a;
}

void CodecParams::validate() const {
  require(block_size >= 1 && block_size <= 32, ErrorCode::InvalidArgument,
          "codec: block size must be in [1, 32], got " + std::to_string(block_size));
  require(edge_threshold > 0.0 && edge_threshold <= 1.0, ErrorCode::InvalidArgument,
          "codec: edge threshold must be in (0, 1]");
  require(q > 0.0, ErrorCode::InvalidArgument, "codec: Q must be > 0");
  const double q256 = q * 256.0;
  require(q256 == std::round(q256) && q256 <= 65535.0, ErrorCode::InvalidArgument,
          "codec: Q = " + std::to_string(q) +
              " is not representable in the header (needs k/256, 1 <= k <= 65535)");
  require(rd_weight() >= 0.0, ErrorCode::InvalidArgument, "codec: lambda_rd must be >= 0");
  require(!angles.empty(), ErrorCode::InvalidArgument, "codec: empty candidate angle set");
  for (double t : angles) angle_code(t);
}

void write_header(const Header& h, std::vector<std::uint8_t>& out) {
  out.insert(out.end(), {'G', 'S', 'P', 'C', kVersion});
  out.push_back(static_cast<std::uint8_t>(h.width >> 8));
  out.push_back(static_cast<std::uint8_t>(h.width & 0xff));
  out.push_back(static_cast<std::uint8_t>(h.height >> 8));
  out.push_back(static_cast<std::uint8_t>(h.height & 0xff));
  out.push_back(h.block_size);
  out.push_back(static_cast<std::uint8_t>(h.q256 >> 8));
  out.push_back(static_cast<std::uint8_t>(h.q256 & 0xff));
  out.push_back(static_cast<std::uint8_t>(h.mode));
}

Header read_header(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kHeaderBytes) corrupt("header truncated", bytes.size());
  if (!std::equal(bytes.begin(), bytes.begin() + 4, "GSPC")) corrupt("bad magic", 0);
  if (bytes[4] != kVersion) corrupt("unsupported version " + std::to_string(bytes[4]), 4);
  Header h;
  h.width = static_cast<std::uint16_t>(bytes[5] << 8 | bytes[6]);
  h.height = static_cast<std::uint16_t>(bytes[7] << 8 | bytes[8]);
  h.block_size = bytes[9];
  h.q256 = static_cast<std::uint16_t>(bytes[10] << 8 | bytes[11]);
  if (h.width == 0 || h.height == 0) corrupt("zero image dimension", 5);
  if (h.block_size == 0 || h.block_size > 32) corrupt("invalid block size", 9);
  if (h.q256 == 0) corrupt("zero quantization step", 10);
  if (bytes[12] > 1) corrupt("unknown mode", 12);
  h.mode = static_cast<Mode>(bytes[12]);
  return h;
}

EdgeMap edge_map_from_block(std::span<const double> block, std::size_t b, double threshold) {
  require(block.size() == b * b, ErrorCode::DimensionMismatch, "edge map: block is not b x b");
  EdgeMap map;
  map.reserve(2 * b * (b - 1));
  for (std::size_t y = 0; y < b; ++y)
    for (std::size_t x = 0; x + 1 < b; ++x)
      map.push_back(std::abs(block[y * b + x] - block[y * b + x + 1]) <= threshold);
  for (std::size_t y = 0; y + 1 < b; ++y)
    for (std::size_t x = 0; x < b; ++x)
      map.push_back(std::abs(block[y * b + x] - block[(y + 1) * b + x]) <= threshold);
  return map;
}

std::vector<std::uint8_t> pack_edge_map(const EdgeMap& map) {
  std::vector<std::uint8_t> out((map.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < map.size(); ++i) {
    if (map[i]) out[i / 8] |= static_cast<std::uint8_t>(0x80u >> (i % 8));
  }
  return out;
}

EdgeMap unpack_edge_map(std::span<const std::uint8_t> bytes, std::size_t b) {
  const std::size_t bits = 2 * b * (b - 1);
  require(bytes.size() == (bits + 7) / 8, ErrorCode::CorruptBitstream,
          "edge map: expected " + std::to_string((bits + 7) / 8) + " bytes");
  EdgeMap map(bits);
  for (std::size_t i = 0; i < bits; ++i) map[i] = (bytes[i / 8] >> (7 - i % 8)) & 1u;
  return map;
}

PixelGraph block_graph(const EdgeMap& map, std::size_t b) {
  require(map.size() == 2 * b * (b - 1), ErrorCode::DimensionMismatch,
          "block graph: edge map has the wrong bit count");
  std::vector<Edge> edges;
  std::size_t bit = 0;
  for (std::size_t y = 0; y < b; ++y)
    for (std::size_t x = 0; x + 1 < b; ++x, ++bit)
      if (map[bit]) edges.push_back({y * b + x, y * b + x + 1, 1.0});
  for (std::size_t y = 0; y + 1 < b; ++y)
    for (std::size_t x = 0; x < b; ++x, ++bit)
      if (map[bit]) edges.push_back({y * b + x, (y + 1) * b + x, 1.0});
  return PixelGraph(b * b, std::move(edges));
}

GraphSpectrum block_spectrum(const EdgeMap& map, std::size_t b) {
  return eigendecompose(variation_operator(block_graph(map, b), OperatorKind::Combinatorial));
}

std::vector<std::int64_t> quantize(std::span<const double> coeffs, double q) {
  require(q > 0.0, ErrorCode::InvalidArgument, "quantize: Q must be > 0");
  std::vector<std::int64_t> out(coeffs.size());
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    out[i] = static_cast<std::int64_t>(std::round(coeffs[i] / q));  // round() is half-away
  }
  return out;
}

std::vector<double> dequantize(std::span<const std::int64_t> indices, double q) {
  std::vector<double> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out[i] = static_cast<double>(indices[i]) * q;
  return out;
}

void encode_tokens(std::span<const std::int64_t> indices, std::vector<std::uint8_t>& out) {
  for (std::size_t i = 0; i < indices.size();) {
    if (indices[i] != 0) {
      put_varint(zigzag(indices[i]), out);
      ++i;
      continue;
    }
    std::size_t run = 0;
    while (i < indices.size() && indices[i] == 0) {
      ++run;
      ++i;
    }
    out.push_back(0x00);
    put_varint(run, out);
  }
}

std::vector<std::int64_t> decode_tokens(std::span<const std::uint8_t> bytes, std::size_t& pos,
                                        std::size_t count) {
  std::vector<std::int64_t> out;
  out.reserve(count);
  while (out.size() < count) {
    if (pos >= bytes.size()) corrupt("coefficient stream underflow", pos);
    if (bytes[pos] == 0x00) {
      const std::size_t at = pos++;
      const std::uint64_t run = get_varint(bytes, pos);
      if (run == 0 || run > count - out.size()) corrupt("invalid zero run", at);
      out.insert(out.end(), run, 0);
    } else {
      out.push_back(unzigzag(get_varint(bytes, pos)));
    }
  }
  return out;
}

std::size_t token_bytes(std::span<const std::int64_t> indices) {
  std::vector<std::uint8_t> tmp;
  encode_tokens(indices, tmp);
  return tmp.size();
}

std::vector<std::size_t> zigzag_order(std::size_t n) {
  std::vector<std::size_t> order;
  order.reserve(n * n);
  for (std::size_t s = 0; s + 1 < 2 * n; ++s) {
    const std::size_t lo = s >= n ? s - n + 1 : 0;
    const std::size_t hi = std::min(s, n - 1);
    if (s % 2 == 0) {
      for (std::size_t k = hi + 1; k-- > lo;) order.push_back(k * n + (s - k));
    } else {
      for (std::size_t k = lo; k <= hi; ++k) order.push_back(k * n + (s - k));
    }
  }
  return order;
}

double grid_eigenvalue(std::size_t n, std::size_t k, std::size_t l) {
  const double nn = static_cast<double>(n);
  return 4.0 - 2.0 * std::cos(std::numbers::pi * static_cast<double>(k) / nn) -
         2.0 * std::cos(std::numbers::pi * static_cast<double>(l) / nn);
}

std::vector<std::size_t> rotatable_pairs(std::size_t n) {
  std::vector<std::size_t> pairs;
  for (std::size_t k = 0; k < n; ++k) {
    for (std::size_t l = k + 1; l < n; ++l) {
      const double mu = grid_eigenvalue(n, k, l);
      std::size_t mult = 0;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t c = 0; c < n; ++c)
          if (std::abs(grid_eigenvalue(n, a, c) - mu) <= 1e-9) ++mult;
      if (mult == 2) pairs.push_back(k * n + l);
    }
  }
  return pairs;
}

DenseMatrix steerable_basis(std::size_t n, std::span<const double> angles) {
  require(n >= 1, ErrorCode::InvalidArgument, "steerable_basis: n must be >= 1");
  require(angles.size() == n * n, ErrorCode::DimensionMismatch,
          "steerable_basis: expected n*n angles");
  const DenseMatrix c = dct_basis(n);
  const std::size_t nn = n * n;
  // Atoms indexed by frequency k * n + l.
  std::vector<std::vector<double>> atom(nn, std::vector<double>(nn));
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = 0; l < n; ++l)
      for (std::size_t y = 0; y < n; ++y)
        for (std::size_t x = 0; x < n; ++x) atom[k * n + l][y * n + x] = c(y, k) * c(x, l);

  for (std::size_t p : rotatable_pairs(n)) {
    const std::size_t k = p / n;
    const std::size_t l = p % n;
    const double t = angles[p];
    const double cs = std::cos(t);
    const double sn = std::sin(t);
    std::vector<double>& a = atom[k * n + l];
    std::vector<double>& b = atom[l * n + k];
    for (std::size_t i = 0; i < nn; ++i) {
      const double u = a[i];
      const double v = b[i];
      a[i] = cs * u + sn * v;
      b[i] = -sn * u + cs * v;
    }
  }
  const std::vector<std::size_t> order = zigzag_order(n);
  DenseMatrix basis(nn);
  for (std::size_t j = 0; j < nn; ++j)
    for (std::size_t i = 0; i < nn; ++i) basis(i, j) = atom[order[j]][i];
  return basis;
}

DenseMatrix steerable_basis(std::size_t n, double theta) {
  return steerable_basis(n, std::vector<double>(n * n, theta));
}

namespace {

std::vector<double> project(const DenseMatrix& basis, std::span<const double> x) {
  const std::size_t n = basis.size();
  std::vector<double> out(n, 0.0);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < n; ++k) out[k] += basis(r, k) * x[r];
  return out;
}

std::vector<double> synthesize(const DenseMatrix& basis, std::span<const double> a) {
  return basis.multiply(a);
}

AngleChoice choose_with_bases(std::span<const double> block, const CodecParams& params,
                              const std::vector<DenseMatrix>& bases) {
  const double rate_overhead = std::ceil(std::log2(static_cast<double>(params.angles.size())));
  std::vector<std::size_t> by_angle(params.angles.size());
  for (std::size_t i = 0; i < by_angle.size(); ++i) by_angle[i] = i;
  std::stable_sort(by_angle.begin(), by_angle.end(), [&](std::size_t a, std::size_t b) {
    return params.angles[a] < params.angles[b];
  });
  AngleChoice best;
  bool have = false;
  for (std::size_t idx : by_angle) {
    const std::vector<double> coeffs = project(bases[idx], block);
    std::vector<std::int64_t> q = quantize(coeffs, params.q);
    const std::vector<double> dq = dequantize(q, params.q);
    const double dist = squared_error(coeffs, dq);
    const double bits = 8.0 * static_cast<double>(token_bytes(q)) + rate_overhead;
    const double cost = dist + params.rd_weight() * bits;
    if (!have || cost < best.cost - 1e-12 * std::max(1.0, std::abs(best.cost))) {
      best = {idx, params.angles[idx], std::move(q), cost, dist, bits};
      have = true;
    }
  }
  return best;
}

std::vector<DenseMatrix> candidate_bases(const CodecParams& params) {
  std::vector<DenseMatrix> bases;
  for (double t : params.angles) bases.push_back(steerable_basis(params.block_size, t));
  return bases;
}

}  // namespace

AngleChoice choose_angle_rd(std::span<const double> block, const CodecParams& params) {
  params.validate();
  require(block.size() == params.block_size * params.block_size, ErrorCode::DimensionMismatch,
          "choose_angle_rd: block is not b x b");
  return choose_with_bases(block, params, candidate_bases(params));
}

std::vector<std::uint8_t> encode(const ImagePlane& img, const CodecParams& params) {
  params.validate();
  require(!img.empty(), ErrorCode::EmptyInput, "encode: empty image");
  require(img.channels() == 1, ErrorCode::InvalidArgument,
          "encode: grayscale input required, got " + std::to_string(img.channels()) +
              " channels");
  require(img.width() <= 65535 && img.height() <= 65535, ErrorCode::InvalidArgument,
          "encode: dimensions exceed 65535");
  const std::size_t b = params.block_size;
  const std::size_t bw = (img.width() + b - 1) / b;
  const std::size_t bh = (img.height() + b - 1) / b;

  std::vector<DenseMatrix> bases;
  if (params.mode == Mode::Steerable) bases = candidate_bases(params);

  const long count = static_cast<long>(bw * bh);
  std::vector<std::vector<std::uint8_t>> coded(static_cast<std::size_t>(count));
#pragma omp parallel for schedule(dynamic)
  for (long t = 0; t < count; ++t) {
    const std::size_t bx = static_cast<std::size_t>(t) % bw;
    const std::size_t by = static_cast<std::size_t>(t) / bw;
    const std::vector<double> block = extract_block(img, bx, by, b);
    std::vector<std::uint8_t>& out = coded[static_cast<std::size_t>(t)];
    out.push_back(static_cast<std::uint8_t>(params.mode));
    if (params.mode == Mode::Gft) {
      const EdgeMap map = edge_map_from_block(block, b, params.edge_threshold);
      const std::vector<std::uint8_t> packed = pack_edge_map(map);
      out.insert(out.end(), packed.begin(), packed.end());
      const GraphSpectrum spec = block_spectrum(map, b);
      encode_tokens(quantize(gft(spec, block), params.q), out);
    } else {
      const AngleChoice choice = choose_with_bases(block, params, bases);
      out.push_back(static_cast<std::uint8_t>(angle_code(choice.theta)));
      encode_tokens(choice.indices, out);
    }
  }

  std::vector<std::uint8_t> bytes;
  write_header({static_cast<std::uint16_t>(img.width()), static_cast<std::uint16_t>(img.height()),
                static_cast<std::uint8_t>(b), static_cast<std::uint16_t>(params.q * 256.0),
                params.mode},
               bytes);
  for (const auto& c : coded) bytes.insert(bytes.end(), c.begin(), c.end());
  return bytes;
}

ImagePlane decode(std::span<const std::uint8_t> bytes) {
  const Header h = read_header(bytes);
  const std::size_t b = h.block_size;
  const std::size_t bw = (h.width + b - 1) / b;
  const std::size_t bh = (h.height + b - 1) / b;
  const double q = h.q();
  const std::size_t edge_bytes = (2 * b * (b - 1) + 7) / 8;

  ImagePlane out(h.width, h.height, 1);
  std::map<std::uint8_t, DenseMatrix> bases;
  std::size_t pos = kHeaderBytes;
  for (std::size_t by = 0; by < bh; ++by) {
    for (std::size_t bx = 0; bx < bw; ++bx) {
      if (pos >= bytes.size()) corrupt("missing block", pos);
      const std::uint8_t flag = bytes[pos++];
      std::vector<double> block;
      if (flag == static_cast<std::uint8_t>(Mode::Gft)) {
        if (pos + edge_bytes > bytes.size()) corrupt("edge map truncated", pos);
        const EdgeMap map = unpack_edge_map(bytes.subspan(pos, edge_bytes), b);
        pos += edge_bytes;
        const GraphSpectrum spec = block_spectrum(map, b);
        block = igft(spec, dequantize(decode_tokens(bytes, pos, b * b), q));
      } else if (flag == static_cast<std::uint8_t>(Mode::Steerable)) {
        if (pos >= bytes.size()) corrupt("angle truncated", pos);
        const std::uint8_t code = bytes[pos++];
        auto it = bases.find(code);
        if (it == bases.end()) it = bases.emplace(code, steerable_basis(b, code * kAngleStep)).first;
        block = synthesize(it->second, dequantize(decode_tokens(bytes, pos, b * b), q));
      } else {
        corrupt("unknown block mode " + std::to_string(flag), pos - 1);
      }
      for (std::size_t y = 0; y < b && by * b + y < h.height; ++y)
        for (std::size_t x = 0; x < b && bx * b + x < h.width; ++x)
          out.at(bx * b + x, by * b + y) = block[y * b + x];
    }
  }
  if (pos != bytes.size()) corrupt("trailing data", pos);
  out.clamp();
  return out;
}

}  // namespace gsp::codec
