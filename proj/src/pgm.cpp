#include "gsp/pgm.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>

#include "gsp/error.hpp"

namespace gsp {

namespace {

[[noreturn]] void bad(const std::string& what, std::size_t offset) {
  fail(ErrorCode::ParseError, "pgm: " + what + " at byte " + std::to_string(offset));
}

void skip_space(std::span<const std::uint8_t> b, std::size_t& pos) {
  while (pos < b.size()) {
    if (b[pos] == '#') {
      while (pos < b.size() && b[pos] != '\n') ++pos;
    } else if (std::isspace(b[pos])) {
      ++pos;
    } else {
      return;
    }
  }
}

std::size_t read_number(std::span<const std::uint8_t> b, std::size_t& pos, const char* field) {
  skip_space(b, pos);
  const std::size_t start = pos;
  std::size_t v = 0;
  while (pos < b.size() && std::isdigit(b[pos])) {
    v = v * 10 + static_cast<std::size_t>(b[pos] - '0');
    if (v > 1'000'000) bad(std::string(field) + " too large", start);
    ++pos;
  }
  if (pos == start) bad(std::string("expected ") + field, start);
  return v;
}

}  // namespace

ImagePlane parse_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') bad("missing P5 magic", 0);
  std::size_t pos = 2;
  const std::size_t w = read_number(bytes, pos, "width");
  const std::size_t h = read_number(bytes, pos, "height");
  const std::size_t maxval_at = pos;
  const std::size_t maxval = read_number(bytes, pos, "maxval");
  if (w == 0 || h == 0) bad("zero dimension", 2);
  if (maxval != 255) bad("maxval " + std::to_string(maxval) + " (only 255 supported)", maxval_at);
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) bad("expected whitespace after maxval", pos);
  ++pos;
  const std::size_t need = w * h;
  if (bytes.size() - pos < need) {
    bad("truncated payload (" + std::to_string(need) + " bytes expected)", bytes.size());
  }
  std::vector<double> samples(need);
  for (std::size_t i = 0; i < need; ++i) samples[i] = bytes[pos + i] / 255.0;
  return ImagePlane(w, h, 1, std::move(samples));
}

std::vector<std::uint8_t> format_pgm(const ImagePlane& img) {
  require(img.channels() == 1, ErrorCode::InvalidArgument,
          "pgm: grayscale required, got " + std::to_string(img.channels()) + " channels");
  const std::string head =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(head.begin(), head.end());
  for (double s : img.samples()) {
    out.push_back(static_cast<std::uint8_t>(std::clamp(std::round(s * 255.0), 0.0, 255.0)));
  }
  return out;
}

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open '" + path + "' for reading");
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::Io, "write to '" + path + "' failed");
}

ImagePlane load_pgm(const std::string& path) { return parse_pgm(read_file(path)); }

void save_pgm(const ImagePlane& img, const std::string& path) {
  write_file(path, format_pgm(img));
}

}  // namespace gsp
