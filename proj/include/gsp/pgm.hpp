#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "gsp/image.hpp"

namespace gsp {

// Binary PGM ("P5", maxval 255). Samples are byte / 255.
ImagePlane parse_pgm(std::span<const std::uint8_t> bytes);
// round(sample * 255), clamped to [0, 255]. Grayscale only.
std::vector<std::uint8_t> format_pgm(const ImagePlane& img);

ImagePlane load_pgm(const std::string& path);
void save_pgm(const ImagePlane& img, const std::string& path);

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

}  // namespace gsp
