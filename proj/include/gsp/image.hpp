#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gsp {

// Row-major, channel-interleaved raster with samples in [0,1].
class ImagePlane {
 public:
  ImagePlane() = default;
  ImagePlane(std::size_t width, std::size_t height, std::size_t channels = 1,
             double fill = 0.0);
  ImagePlane(std::size_t width, std::size_t height, std::size_t channels,
             std::vector<double> samples);

  std::size_t width() const noexcept { return width_; }
  std::size_t height() const noexcept { return height_; }
  std::size_t channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept { return width_ * height_; }
  bool empty() const noexcept { return pixel_count() == 0 || channels_ == 0; }

  double& at(std::size_t x, std::size_t y, std::size_t c = 0) {
    return samples_[(y * width_ + x) * channels_ + c];
  }
  double at(std::size_t x, std::size_t y, std::size_t c = 0) const {
    return samples_[(y * width_ + x) * channels_ + c];
  }

  // Samples of pixel `index` (row-major pixel index).
  std::span<const double> pixel(std::size_t index) const {
    return {samples_.data() + index * channels_, channels_};
  }

  std::span<double> samples() noexcept { return samples_; }
  std::span<const double> samples() const noexcept { return samples_; }

  // One channel as a graph signal of length width*height.
  std::vector<double> channel(std::size_t c) const;
  void set_channel(std::size_t c, std::span<const double> values);

  // Clamp every sample to [0,1].
  void clamp();

 private:
  std::size_t width_ = 0;
  std::size_t height_ = 0;
  std::size_t channels_ = 1;
  std::vector<double> samples_;
};

// Squared photometric distance: sum over channels of squared differences.
double photometric_sq_distance(std::span<const double> a,
                               std::span<const double> b);

// 10*log10(1/MSE) on [0,1] samples; +inf for identical inputs.
double psnr(const ImagePlane& a, const ImagePlane& b);
double psnr(std::span<const double> a, std::span<const double> b);

// 3x3 box mean with edge replication.
ImagePlane mean_filter3(const ImagePlane& img);

}  // namespace gsp
