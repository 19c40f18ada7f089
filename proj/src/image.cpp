#include "nystrom/image.hpp"

#include "nystrom/random.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <numbers>

namespace nystrom::image {

GrayImage::GrayImage(int w, int h, std::uint8_t fill) : width(w), height(h) {
  if (w < 1 || h < 1) throw InputError("image dimensions must be positive");
  pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
}

RealImage::RealImage(int w, int h, double fill) : width(w), height(h) {
  if (w < 1 || h < 1) throw InputError("image dimensions must be positive");
  pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
}

RealImage::RealImage(const GrayImage& g) : width(g.width), height(g.height), pixels(g.pixels.begin(), g.pixels.end()) {}

GrayImage quantize(const RealImage& img) {
  GrayImage out(img.width, img.height);
  std::transform(img.pixels.begin(), img.pixels.end(), out.pixels.begin(), [](double v) {
    return static_cast<std::uint8_t>(std::clamp(std::nearbyint(v), 0.0, 255.0));
  });
  return out;
}

PgmParseError::PgmParseError(const std::string& what, std::size_t offset)
    : std::runtime_error("PGM parse error at byte " + std::to_string(offset) + ": " + what), offset_(offset) {}

namespace {

class HeaderReader {
 public:
  explicit HeaderReader(const std::vector<std::uint8_t>& b) : bytes_(b) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      if (bytes_[pos_] == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n') ++pos_;
      } else if (std::isspace(bytes_[pos_])) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  long number(const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos_;
    long v = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      v = v * 10 + (bytes_[pos_] - '0');
      if (v > 1'000'000'000L) throw PgmParseError(std::string(what) + " too large", start);
      ++pos_;
    }
    if (pos_ == start) throw PgmParseError(std::string("expected ") + what, pos_);
    return v;
  }

  std::size_t pos_ = 0;

 private:
  const std::vector<std::uint8_t>& bytes_;
};

}  // namespace

GrayImage decode_pgm(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') throw PgmParseError("missing P5 magic number", 0);
  HeaderReader rd(bytes);
  rd.pos_ = 2;
  rd.skip_space_and_comments();
  const std::size_t width_at = rd.pos_;
  const long w = rd.number("width");
  const long h = rd.number("height");
  rd.skip_space_and_comments();
  const std::size_t maxval_at = rd.pos_;
  const long maxval = rd.number("maxval");
  if (w < 1 || h < 1) throw PgmParseError("image dimensions must be positive", width_at);
  if (maxval != 255) throw PgmParseError("only maxval 255 is supported", maxval_at);
  if (rd.pos_ >= bytes.size() || !std::isspace(bytes[rd.pos_]))
    throw PgmParseError("expected single whitespace after maxval", rd.pos_);
  ++rd.pos_;
  const std::size_t need = static_cast<std::size_t>(w) * static_cast<std::size_t>(h);
  if (bytes.size() - rd.pos_ < need) throw PgmParseError("truncated pixel data", bytes.size());
  GrayImage img(static_cast<int>(w), static_cast<int>(h));
  std::copy_n(bytes.begin() + static_cast<std::ptrdiff_t>(rd.pos_), need, img.pixels.begin());
  return img;
}

std::vector<std::uint8_t> encode_pgm(const GrayImage& img) {
  const std::string header = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels.begin(), img.pixels.end());
  return out;
}

GrayImage read_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return decode_pgm(bytes);
}

void write_pgm(const std::filesystem::path& path, const GrayImage& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  const auto bytes = encode_pgm(img);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

RealImage add_noise_real(const GrayImage& z, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw InputError("noise sigma must be >= 0");
  RealImage out(z);
  if (sigma == 0.0) return out;
  auto rng = make_stream(seed, {0x1a6eULL});
  std::normal_distribution<double> normal(0.0, sigma);
  for (double& v : out.pixels) v += normal(rng);
  return out;
}

GrayImage add_noise(const GrayImage& z, double sigma, std::uint64_t seed) {
  return quantize(add_noise_real(z, sigma, seed));
}

Psnr psnr(const GrayImage& reference, const GrayImage& estimate) {
  if (reference.width != estimate.width || reference.height != estimate.height)
    throw InputError("psnr: image dimensions differ");
  double sse = 0.0;
  for (std::size_t i = 0; i < reference.pixels.size(); ++i) {
    const double d = static_cast<double>(reference.pixels[i]) - static_cast<double>(estimate.pixels[i]);
    sse += d * d;
  }
  if (sse == 0.0) return {std::numeric_limits<double>::infinity(), true};
  const double mse = sse / static_cast<double>(reference.pixels.size());
  return {10.0 * std::log10(255.0 * 255.0 / mse), false};
}

GrayImage synthetic_test_image(int width, int height) {
  RealImage img(width, height);
  constexpr double two_pi = 2.0 * std::numbers::pi;
  const int band = std::max(1, height / 8);
  for (int y = 0; y < height; ++y) {
    const int kind = (y / band) % 4;
    for (int x = 0; x < width; ++x) {
      const double gradient = 40.0 + 150.0 * (static_cast<double>(x) + y) / (width + height);
      double texture = 0.0;
      switch (kind) {
        case 0: texture = 0.0; break;
        case 1: texture = 35.0 * std::sin(two_pi * x / 16.0); break;
        case 2: texture = 35.0 * std::sin(two_pi * y / 12.0); break;
        case 3: texture = 30.0 * std::sin(two_pi * (x + y) / 20.0); break;
      }
      img.at(x, y) = gradient + texture;
    }
  }
  return quantize(img);
}

}  // namespace nystrom::image
