#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

#include "gsp/codec.hpp"
#include "gsp/error.hpp"
#include "support.hpp"

using namespace gsp;
using namespace gsp::codec;

namespace {

ErrorCode code_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

ImagePlane smooth_image(std::size_t w, std::size_t h, double phase) {
  ImagePlane img(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      img.at(x, y) = 0.5 + 0.3 * std::sin(0.21 * x + phase) * std::cos(0.17 * y - phase);
  return img;
}

ImagePlane blocky_image(std::size_t w, std::size_t h) {
  ImagePlane img(w, h);
  for (std::size_t y = 0; y < h; ++y)
    for (std::size_t x = 0; x < w; ++x)
      img.at(x, y) = (x + y < w) ? 0.25 : (x > 3 * w / 4 ? 0.9 : 0.6);
  return img;
}

std::size_t zigzag_pos(std::size_t n, std::size_t packed) {
  const std::vector<std::size_t> z = zigzag_order(n);
  return static_cast<std::size_t>(std::find(z.begin(), z.end(), packed) - z.begin());
}

std::vector<double> column(const DenseMatrix& m, std::size_t c) {
  std::vector<double> v(m.size());
  for (std::size_t r = 0; r < m.size(); ++r) v[r] = m(r, c);
  return v;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

}  // namespace

TEST_CASE("edge map of a two-level block") {
  const std::vector<double> block{0.0, 0.0, 1.0, 1.0};
  const EdgeMap map = edge_map_from_block(block, 2, 0.1);
  CHECK(map == EdgeMap{true, true, false, false});
  const std::vector<std::uint8_t> packed = pack_edge_map(map);
  CHECK(packed == std::vector<std::uint8_t>{0xC0});
  CHECK(unpack_edge_map(packed, 2) == map);

  const EdgeMap all = edge_map_from_block(std::vector<double>(64, 0.3), 8, 0.1);
  CHECK(all.size() == 112);
  CHECK(std::all_of(all.begin(), all.end(), [](bool b) { return b; }));
  CHECK(pack_edge_map(all).size() == 14);
  CHECK(unpack_edge_map(pack_edge_map(all), 8) == all);
}

TEST_CASE("block GFT of constant and two-region blocks") {
  const std::size_t b = 8;
  const std::vector<double> flat(b * b, 0.4);
  const GraphSpectrum s = block_spectrum(edge_map_from_block(flat, b, 0.1), b);
  const std::vector<double> a = gft(s, flat);
  CHECK(a[0] == doctest::Approx(0.4 * 8.0).epsilon(1e-12));
  for (std::size_t k = 1; k < a.size(); ++k) CHECK(std::abs(a[k]) <= 1e-12);

  std::vector<double> two(b * b, 0.2);
  for (std::size_t y = 0; y < b; ++y)
    for (std::size_t x = 0; x < b; ++x)
      if (x > y) two[y * b + x] = 0.9;
  const EdgeMap map = edge_map_from_block(two, b, 0.1);
  const GraphSpectrum s2 = block_spectrum(map, b);
  const std::vector<double> a2 = gft(s2, two);
  std::size_t nonzero = 0;
  for (double v : a2) nonzero += std::abs(v) > 1e-10;
  CHECK(nonzero == 2);
  CHECK(std::abs(s2.eigenvalues()[1]) <= 1e-12);
  const std::vector<std::int64_t> q = quantize(a2, 1.0 / 64.0);
  const std::vector<double> rec = igft(s2, dequantize(q, 1.0 / 64.0));
  CHECK(testing::max_abs_diff(rec, two) <= 1.0 / 128.0);
}

TEST_CASE("quantization") {
  const std::vector<double> c{0.5, -0.5, 0.49, 1.5, -2.51, 0.0};
  CHECK(quantize(c, 1.0) == std::vector<std::int64_t>{1, -1, 0, 2, -3, 0});
  CHECK(quantize(std::vector<double>{0.3}, 0.25) == std::vector<std::int64_t>{1});
  CHECK(dequantize(std::vector<std::int64_t>{-3, 4}, 0.25) == std::vector<double>{-0.75, 1.0});
}

TEST_CASE("token stream") {
  const std::vector<std::int64_t> idx{0, 0, 0, 5, -1, 0, 300, -70000, 0, 0};
  std::vector<std::uint8_t> out;
  encode_tokens(idx, out);
  CHECK(out.size() == token_bytes(idx));
  // Zero run of 3 is 0x00 0x03; 5 is zigzag 10.
  CHECK(out[0] == 0x00);
  CHECK(out[1] == 0x03);
  CHECK(out[2] == 10);
  CHECK(out[3] == 1);
  std::size_t pos = 0;
  CHECK(decode_tokens(out, pos, idx.size()) == idx);
  CHECK(pos == out.size());

  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const std::vector<double> r = testing::random_vector(64, seed, -3.0, 3.0);
    std::vector<std::int64_t> v(64);
    for (std::size_t i = 0; i < 64; ++i) v[i] = std::abs(r[i]) < 1.5 ? 0 : std::llround(r[i] * 50);
    std::vector<std::uint8_t> bytes;
    encode_tokens(v, bytes);
    std::size_t p = 0;
    CHECK(decode_tokens(bytes, p, 64) == v);
  }

  std::vector<std::uint8_t> cut(out.begin(), out.end() - 1);
  std::size_t p0 = 0;
  CHECK(code_of([&] { decode_tokens(cut, p0, idx.size()); }) == ErrorCode::CorruptBitstream);
  const std::vector<std::uint8_t> overrun{0x00, 0x05};
  std::size_t p1 = 0;
  CHECK(code_of([&] { decode_tokens(overrun, p1, 3); }) == ErrorCode::CorruptBitstream);
  const std::vector<std::uint8_t> dangling{0x80};
  std::size_t p2 = 0;
  CHECK(code_of([&] { decode_tokens(dangling, p2, 1); }) == ErrorCode::CorruptBitstream);
}

TEST_CASE("header round trip") {
  const Header h{640, 480, 8, 4, Mode::Steerable};
  std::vector<std::uint8_t> bytes;
  write_header(h, bytes);
  CHECK(bytes.size() == kHeaderBytes);
  const Header r = read_header(bytes);
  CHECK(r.width == 640);
  CHECK(r.height == 480);
  CHECK(r.block_size == 8);
  CHECK(r.q() == 1.0 / 64.0);
  CHECK(r.mode == Mode::Steerable);
  bytes[0] = 'X';
  CHECK(code_of([&] { read_header(bytes); }) == ErrorCode::CorruptBitstream);
  CHECK(code_of([&] { read_header(std::span(bytes).first(5)); }) == ErrorCode::CorruptBitstream);
}

TEST_CASE("parameter validation") {
  CodecParams p;
  p.q = 1.0 / 1024.0;
  CHECK(code_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { encode(ImagePlane(8, 8, 1, 0.5), p); }) == ErrorCode::InvalidArgument);
  p = CodecParams{};
  p.block_size = 33;
  CHECK(code_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
  p = CodecParams{};
  p.angles = {0.1};
  CHECK(code_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
  p = CodecParams{};
  CHECK(code_of([&] { encode(ImagePlane(8, 8, 3, 0.5), p); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("constant image reconstructs within half a step") {
  for (Mode m : {Mode::Gft, Mode::Steerable}) {
    CodecParams p;
    p.mode = m;
    p.q = 1.0 / 16.0;
    const ImagePlane img(20, 13, 1, 0.437);
    const ImagePlane out = decode(encode(img, p));
    CHECK(out.width() == 20);
    CHECK(out.height() == 13);
    for (double v : out.samples()) CHECK(std::abs(v - 0.437) <= p.q / 2.0);
  }
}

TEST_CASE("fine quantization PSNR") {
  const ImagePlane img = testing::random_image(48, 40, 11);
  CodecParams p;
  p.q = 1.0 / 256.0;
  for (Mode m : {Mode::Gft, Mode::Steerable}) {
    p.mode = m;
    CHECK(psnr(decode(encode(img, p)), img) >= 58.0);
  }
}

TEST_CASE("steerable basis at zero angle is the 2-D DCT") {
  const std::size_t n = 8;
  const DenseMatrix s = steerable_basis(n, 0.0);
  const DenseMatrix d = dct_basis(n);
  const std::vector<std::size_t> z = zigzag_order(n);
  CHECK(z[0] == 0);
  CHECK(z[1] == 1);
  CHECK(z[2] == 8);
  CHECK(z[3] == 16);
  double worst = 0.0;
  for (std::size_t j = 0; j < n * n; ++j) {
    const std::size_t k = z[j] / n;
    const std::size_t l = z[j] % n;
    for (std::size_t y = 0; y < n; ++y)
      for (std::size_t x = 0; x < n; ++x)
        worst = std::max(worst, std::abs(s(y * n + x, j) - d(y, k) * d(x, l)));
  }
  CHECK(worst <= 1e-12);
}

TEST_CASE("steerable basis is an orthonormal grid eigenbasis") {
  const std::size_t n = 8;
  const SparseSymOperator lap = variation_operator(
      block_graph(EdgeMap(2 * n * (n - 1), true), n), OperatorKind::Combinatorial);
  const std::vector<std::size_t> z = zigzag_order(n);
  for (double theta : {0.0, std::numbers::pi / 16.0, std::numbers::pi / 4.0, 0.5}) {
    const DenseMatrix s = steerable_basis(n, theta);
    double ortho = 0.0;
    double res = 0.0;
    for (std::size_t a = 0; a < n * n; ++a) {
      const std::vector<double> ua = column(s, a);
      for (std::size_t b = a; b < n * n; ++b)
        ortho = std::max(ortho, std::abs(dot(ua, column(s, b)) - (a == b ? 1.0 : 0.0)));
      const double lambda = grid_eigenvalue(n, z[a] / n, z[a] % n);
      const std::vector<double> lu = lap.apply(ua);
      for (std::size_t i = 0; i < ua.size(); ++i) res = std::max(res, std::abs(lu[i] - lambda * ua[i]));
    }
    CHECK(ortho <= 1e-12);
    CHECK(res <= 1e-12);
  }
}

TEST_CASE("rotatable pairs") {
  const std::vector<std::size_t> pairs = rotatable_pairs(4);
  // (k,l) with k<l and eigenvalue multiplicity exactly 2: all off-diagonal
  // pairs on a 4x4 grid except those tied with another pair.
  for (std::size_t p : pairs) CHECK(p / 4 < p % 4);
  CHECK(std::find(pairs.begin(), pairs.end(), 1u) != pairs.end());
  CHECK(grid_eigenvalue(4, 0, 0) == 0.0);
  CHECK(grid_eigenvalue(4, 1, 2) == doctest::Approx(grid_eigenvalue(4, 2, 1)));
  // Multiplicity on an 8x8 grid, counted by brute force.
  const std::size_t n = 8;
  const std::vector<std::size_t> p8 = rotatable_pairs(n);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t l = k + 1; l < n; ++l) {
      std::size_t mult = 0;
      for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b)
          mult += std::abs(grid_eigenvalue(n, a, b) - grid_eigenvalue(n, k, l)) < 1e-9;
      const bool listed = std::find(p8.begin(), p8.end(), k * n + l) != p8.end();
      CHECK(listed == (mult == 2));
    }
}

TEST_CASE("rotation preserves pair energy and projectors") {
  const std::size_t n = 8;
  const DenseMatrix d0 = steerable_basis(n, 0.0);
  const DenseMatrix d4 = steerable_basis(n, std::numbers::pi / 4.0);
  const std::vector<double> block = testing::random_vector(n * n, 3);
  for (std::size_t p : rotatable_pairs(n)) {
    const std::size_t k = p / n;
    const std::size_t l = p % n;
    const std::size_t i = zigzag_pos(n, k * n + l);
    const std::size_t j = zigzag_pos(n, l * n + k);
    const double e0 = std::pow(dot(column(d0, i), block), 2) + std::pow(dot(column(d0, j), block), 2);
    const double e4 = std::pow(dot(column(d4, i), block), 2) + std::pow(dot(column(d4, j), block), 2);
    CHECK(e0 == doctest::Approx(e4).epsilon(1e-10));
    // At pi/4 the atoms are (u_kl +- u_lk)/sqrt 2.
    const std::vector<double> a = column(d0, i);
    const std::vector<double> b = column(d0, j);
    const std::vector<double> r = column(d4, i);
    for (std::size_t t = 0; t < n * n; ++t)
      CHECK(r[t] == doctest::Approx((a[t] + b[t]) / std::sqrt(2.0)).epsilon(1e-12));
  }
}

TEST_CASE("rate-distortion angle choice") {
  const std::size_t n = 8;
  CodecParams p;
  p.mode = Mode::Steerable;
  p.lambda_rd = 1e-3;
  const AngleChoice flat = choose_angle_rd(std::vector<double>(n * n, 0.5), p);
  CHECK(flat.theta == 0.0);
  CHECK(flat.index == 0);
  CHECK(flat.distortion <= (p.q / 2) * (p.q / 2));

  const DenseMatrix d4 = steerable_basis(n, std::numbers::pi / 4.0);
  const std::size_t col = zigzag_pos(n, 1);
  std::vector<double> atom = column(d4, col);
  for (double& v : atom) v = 0.5 + 0.4 * v;
  const AngleChoice c = choose_angle_rd(atom, p);
  CHECK(c.theta == doctest::Approx(std::numbers::pi / 4.0));
  CHECK(c.index == 4);
  std::size_t significant = 0;
  for (std::size_t j = 1; j < c.indices.size(); ++j) significant += c.indices[j] != 0;
  CHECK(significant == 1);
  CHECK(c.cost == doctest::Approx(c.distortion + p.rd_weight() * c.bits));
}

TEST_CASE("rate-distortion weight") {
  CodecParams p;
  p.q = 1.0 / 16.0;
  CHECK(p.rd_weight() == doctest::Approx(0.1 / 256.0));
  p.lambda_rd = 0.0;
  CHECK(p.rd_weight() == 0.0);
  p.lambda_rd = -1.0;
  CHECK(code_of([&] { p.validate(); }) == ErrorCode::InvalidArgument);
  // Pure distortion: the chosen angle has the smallest distortion of all.
  p = CodecParams{};
  p.mode = Mode::Steerable;
  p.lambda_rd = 0.0;
  const std::vector<double> block = testing::random_vector(64, 21, 0.0, 1.0);
  const AngleChoice best = choose_angle_rd(block, p);
  for (double theta : p.angles) {
    CodecParams one = p;
    one.angles = {theta};
    CHECK(best.distortion <= choose_angle_rd(block, one).distortion + 1e-15);
  }
}

TEST_CASE("encoding is deterministic and decodes to the same size") {
  const ImagePlane img = smooth_image(37, 29, 0.3);
  for (Mode m : {Mode::Gft, Mode::Steerable}) {
    CodecParams p;
    p.mode = m;
    const std::vector<std::uint8_t> a = encode(img, p);
    const std::vector<std::uint8_t> b = encode(img, p);
    CHECK(a == b);
    const ImagePlane out = decode(a);
    CHECK(out.width() == 37);
    CHECK(out.height() == 29);
    CHECK(psnr(out, img) > 30.0);
  }
}

TEST_CASE("rate falls as the step doubles") {
  ImagePlane ramp(32, 32);
  for (std::size_t y = 0; y < 32; ++y)
    for (std::size_t x = 0; x < 32; ++x) ramp.at(x, y) = (x * 7 + y * 3) / 320.0 + (x > 20 ? 0.2 : 0.0);
  const std::vector<ImagePlane> images{smooth_image(32, 32, 0.0), smooth_image(40, 24, 1.0),
                                       blocky_image(32, 32), blocky_image(48, 16), ramp};
  for (const ImagePlane& img : images) {
    for (Mode m : {Mode::Gft, Mode::Steerable}) {
      std::size_t prev = SIZE_MAX;
      for (double q = 1.0 / 256.0; q <= 1.0 / 8.0; q *= 2.0) {
        CodecParams p;
        p.mode = m;
        p.q = q;
        const std::size_t bytes = encode(img, p).size();
        CHECK(bytes <= prev);
        prev = bytes;
      }
    }
  }
}

TEST_CASE("distortion-only angle choice can raise the rate on white noise") {
  // A lone zero index takes two bytes (marker + run length), a small nonzero
  // one, so sparse noise coefficients can grow the stream as Q increases when
  // the angle is chosen on distortion alone.
  const ImagePlane noise = testing::random_image(24, 24, 5);
  CodecParams p;
  p.mode = Mode::Steerable;
  p.lambda_rd = 0.0;
  p.q = 1.0 / 64.0;
  const std::size_t fine = encode(noise, p).size();
  p.q = 1.0 / 8.0;
  CHECK(encode(noise, p).size() > fine);
}

TEST_CASE("per-block reconstruction error is bounded by the step") {
  const ImagePlane img = blocky_image(32, 32);
  for (Mode m : {Mode::Gft, Mode::Steerable}) {
    CodecParams p;
    p.mode = m;
    p.q = 1.0 / 32.0;
    const ImagePlane out = decode(encode(img, p));
    for (std::size_t by = 0; by < 4; ++by)
      for (std::size_t bx = 0; bx < 4; ++bx) {
        double sq = 0.0;
        for (std::size_t y = 0; y < 8; ++y)
          for (std::size_t x = 0; x < 8; ++x) {
            const double e = out.at(bx * 8 + x, by * 8 + y) - img.at(bx * 8 + x, by * 8 + y);
            sq += e * e;
          }
        CHECK(std::sqrt(sq) <= p.q / 2.0 * 8.0 + 1e-12);
      }
  }
}

TEST_CASE("decoder rejects damaged streams") {
  const ImagePlane img = smooth_image(16, 16, 0.0);
  const std::vector<std::uint8_t> bytes = encode(img, CodecParams{});
  std::vector<std::uint8_t> shorter(bytes.begin(), bytes.end() - 1);
  CHECK(code_of([&] { decode(shorter); }) == ErrorCode::CorruptBitstream);
  std::vector<std::uint8_t> longer = bytes;
  longer.push_back(0);
  CHECK(code_of([&] { decode(longer); }) == ErrorCode::CorruptBitstream);
  std::vector<std::uint8_t> bad_mode = bytes;
  bad_mode[kHeaderBytes] = 7;
  CHECK(code_of([&] { decode(bad_mode); }) == ErrorCode::CorruptBitstream);
}

TEST_CASE("per-pair angles preserve energy") {
  const std::size_t n = 8;
  std::vector<double> angles(n * n, 0.0);
  const std::vector<double> r = testing::random_vector(n * n, 17, 0.0, 3.14);
  for (std::size_t p : rotatable_pairs(n)) angles[p] = r[p];
  const DenseMatrix s = steerable_basis(n, angles);
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const std::vector<double> block = testing::random_vector(n * n, seed);
    double coeff_energy = 0.0;
    for (std::size_t j = 0; j < n * n; ++j) coeff_energy += std::pow(dot(column(s, j), block), 2);
    CHECK(std::abs(std::sqrt(coeff_energy) - testing::norm2(block)) <= 1e-9);
  }
}
