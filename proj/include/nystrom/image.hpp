#pragma once

#include "nystrom/types.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace nystrom::image {

/// 8-bit grayscale image, row-major.
struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  GrayImage() = default;
  GrayImage(int w, int h, std::uint8_t fill = 0);

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  bool operator==(const GrayImage&) const = default;
};

/// Real-valued working copy, row-major.
struct RealImage {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;

  RealImage() = default;
  RealImage(int w, int h, double fill = 0.0);
  explicit RealImage(const GrayImage& g);

  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  double& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

/// Rounds to nearest and clamps to [0, 255].
GrayImage quantize(const RealImage& img);

/// Malformed PGM data; `offset` is the byte position where parsing failed.
class PgmParseError : public std::runtime_error {
 public:
  PgmParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Binary PGM (P5), maxval 255. Comments in the header are skipped.
GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes);
std::vector<std::uint8_t> encode_pgm(const GrayImage& img);
GrayImage read_pgm(const std::filesystem::path& path);
void write_pgm(const std::filesystem::path& path, const GrayImage& img);

/// z + N(0, sigma^2) per pixel, before any clamping. Deterministic in `seed`.
RealImage add_noise_real(const GrayImage& z, double sigma, std::uint64_t seed);

/// add_noise_real followed by quantize.
GrayImage add_noise(const GrayImage& z, double sigma, std::uint64_t seed);

struct Psnr {
  double db = 0.0;
  bool infinite = false;
};

/// 10 log10(255^2 / mean squared pixel error).
Psnr psnr(const GrayImage& reference, const GrayImage& estimate);

/// Smooth diagonal gradient overlaid with bands of sinusoidal stripes at
/// alternating orientations. Used by tests and the demo pipeline.
GrayImage synthetic_test_image(int width, int height);

}  // namespace nystrom::image
