#include "gsp/image.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gsp/error.hpp"

namespace gsp {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "empty input";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::DegenerateDegree: return "degenerate degree";
    case ErrorCode::NotSymmetric: return "not symmetric";
    case ErrorCode::SizeLimit: return "size limit";
    case ErrorCode::NonScalable: return "not scalable";
    case ErrorCode::NotConverged: return "not converged";
    case ErrorCode::CorruptBitstream: return "corrupt bitstream";
    case ErrorCode::ParseError: return "parse error";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown";
}

ImagePlane::ImagePlane(std::size_t width, std::size_t height,
                       std::size_t channels, double fill)
    : width_(width), height_(height), channels_(channels),
      samples_(width * height * channels, fill) {
  require(channels >= 1, ErrorCode::InvalidArgument, "channels must be >= 1");
}

ImagePlane::ImagePlane(std::size_t width, std::size_t height,
                       std::size_t channels, std::vector<double> samples)
    : width_(width), height_(height), channels_(channels),
      samples_(std::move(samples)) {
  require(channels >= 1, ErrorCode::InvalidArgument, "channels must be >= 1");
  require(samples_.size() == width * height * channels,
          ErrorCode::DimensionMismatch,
          "sample count " + std::to_string(samples_.size()) +
              " does not match " + std::to_string(width) + "x" +
              std::to_string(height) + "x" + std::to_string(channels));
  for (double s : samples_) {
    require(std::isfinite(s) && s >= 0.0 && s <= 1.0,
            ErrorCode::InvalidArgument, "samples must be finite and in [0,1]");
  }
}

std::vector<double> ImagePlane::channel(std::size_t c) const {
  std::vector<double> out(pixel_count());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = samples_[i * channels_ + c];
  return out;
}

void ImagePlane::set_channel(std::size_t c, std::span<const double> values) {
  require(values.size() == pixel_count(), ErrorCode::DimensionMismatch,
          "channel length mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) samples_[i * channels_ + c] = values[i];
}

void ImagePlane::clamp() {
  for (double& s : samples_) s = std::clamp(s, 0.0, 1.0);
}

double photometric_sq_distance(std::span<const double> a,
                               std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t c = 0; c < a.size(); ++c) {
    const double d = a[c] - b[c];
    acc += d * d;
  }
  return acc;
}

double psnr(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size() && !a.empty(), ErrorCode::DimensionMismatch,
          "psnr: size mismatch");
  double mse = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = a[i] - b[i];
    mse += d * d;
  }
  mse /= static_cast<double>(a.size());
  if (mse == 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(1.0 / mse);
}

double psnr(const ImagePlane& a, const ImagePlane& b) {
  return psnr(a.samples(), b.samples());
}

ImagePlane mean_filter3(const ImagePlane& img) {
  ImagePlane out(img.width(), img.height(), img.channels());
  const auto w = static_cast<long>(img.width());
  const auto h = static_cast<long>(img.height());
  for (long y = 0; y < h; ++y) {
    for (long x = 0; x < w; ++x) {
      for (std::size_t c = 0; c < img.channels(); ++c) {
        double acc = 0.0;
        for (long dy = -1; dy <= 1; ++dy) {
          for (long dx = -1; dx <= 1; ++dx) {
            const long xx = std::clamp(x + dx, 0L, w - 1);
            const long yy = std::clamp(y + dy, 0L, h - 1);
            acc += img.at(xx, yy, c);
          }
        }
        out.at(x, y, c) = acc / 9.0;
      }
    }
  }
  return out;
}

}  // namespace gsp
