#include "nystrom/denoise.hpp"
#include "nystrom/estimators.hpp"
#include "nystrom/image.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <random>

using namespace nystrom;
using namespace nystrom::image;
using namespace nystrom::denoise;

namespace {

std::vector<std::uint8_t> bytes_of(const std::string& s) { return {s.begin(), s.end()}; }

GrayImage random_image(int w, int h, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(0, 255);
  GrayImage img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(d(rng));
  return img;
}

}  // namespace

// ---- PGM -------------------------------------------------------------------

TEST(Pgm, RoundTrip) {
  const GrayImage img = random_image(7, 5, 1);
  EXPECT_EQ(decode_pgm(encode_pgm(img)), img);
  const auto path = std::filesystem::temp_directory_path() / "nystrom_roundtrip.pgm";
  write_pgm(path, img);
  EXPECT_EQ(read_pgm(path), img);
  std::filesystem::remove(path);
}

TEST(Pgm, SkipsComments) {
  auto b = bytes_of("P5\n# made by hand\n2 # width\n1\n255\n");
  b.push_back(10);
  b.push_back(200);
  const GrayImage img = decode_pgm(b);
  EXPECT_EQ(img.width, 2);
  EXPECT_EQ(img.height, 1);
  EXPECT_EQ(img.at(1, 0), 200);
}

TEST(Pgm, ParseErrorsReportOffset) {
  try {
    decode_pgm(bytes_of("P2\n1 1\n255\n0"));
    FAIL();
  } catch (const PgmParseError& e) {
    EXPECT_EQ(e.offset(), 0u);
  }
  try {
    decode_pgm(bytes_of("P5\n4 x\n255\n"));
    FAIL();
  } catch (const PgmParseError& e) {
    EXPECT_EQ(e.offset(), 5u);
    EXPECT_NE(std::string(e.what()).find("byte 5"), std::string::npos);
  }
  try {
    decode_pgm(bytes_of("P5\n2 2\n65535\n"));
    FAIL();
  } catch (const PgmParseError& e) {
    EXPECT_EQ(e.offset(), 7u);
  }
  const auto truncated = bytes_of("P5\n2 2\n255\nabc");
  try {
    decode_pgm(truncated);
    FAIL();
  } catch (const PgmParseError& e) {
    EXPECT_EQ(e.offset(), truncated.size());
  }
}

TEST(Pgm, MissingFile) { EXPECT_THROW(read_pgm("/nonexistent/nope.pgm"), std::runtime_error); }

// ---- noise and PSNR --------------------------------------------------------

TEST(Noise, ZeroSigmaIsIdentity) {
  const GrayImage img = random_image(16, 16, 2);
  EXPECT_EQ(add_noise(img, 0.0, 5), img);
}

TEST(Noise, StandardDeviation) {
  const GrayImage flat(256, 256, 128);
  const RealImage noisy = add_noise_real(flat, 20.0, 3);
  double sum = 0.0, sumsq = 0.0;
  for (double v : noisy.pixels) {
    sum += v - 128.0;
    sumsq += (v - 128.0) * (v - 128.0);
  }
  const double n = static_cast<double>(noisy.pixels.size());
  const double sd = std::sqrt(sumsq / n - (sum / n) * (sum / n));
  EXPECT_GE(sd, 19.0);
  EXPECT_LE(sd, 21.0);
}

TEST(Noise, SeedsDiffer) {
  const GrayImage flat(32, 32, 128);
  EXPECT_NE(add_noise(flat, 10.0, 1), add_noise(flat, 10.0, 2));
  EXPECT_EQ(add_noise(flat, 10.0, 1), add_noise(flat, 10.0, 1));
}

TEST(Psnr, Identities) {
  const GrayImage black(4, 4, 0), white(4, 4, 255);
  EXPECT_NEAR(psnr(black, white).db, 0.0, 1e-12);
  EXPECT_TRUE(psnr(black, black).infinite);
  GrayImage a(10, 1, 0), b(10, 1, 0);
  b.at(3, 0) = 255;  // MSE = 255^2 / 10
  EXPECT_NEAR(psnr(a, b).db, 10.0, 1e-12);
  EXPECT_THROW(psnr(a, black), InputError);
}

TEST(Psnr, NoisyImageNearReference) {
  const GrayImage img = synthetic_test_image(512, 512);
  EXPECT_NEAR(psnr(img, add_noise(img, 20.0, 1)).db, 22.11, 0.2);
}

// ---- grid ------------------------------------------------------------------

TEST(PatchGrid, DefaultGeometry) {
  const PatchGrid g(32, 32);
  EXPECT_EQ(g.regions().size(), 1u);
  EXPECT_EQ(g.patch_dim(), 64);
  EXPECT_EQ(g.patches_per_region(), 49);
  const PatchGrid big(512, 512);
  EXPECT_EQ(big.regions().size(), 31u * 31u);
}

TEST(PatchGrid, CoversEveryPixel) {
  for (auto [w, h] : {std::pair{50, 37}, std::pair{33, 33}, std::pair{100, 64}}) {
    const PatchGrid g(w, h, 8, 32, 0.5);
    std::vector<int> cover(static_cast<std::size_t>(w * h), 0);
    for (const auto& r : g.regions()) {
      ASSERT_LE(r.x0 + r.width, w);
      ASSERT_LE(r.y0 + r.height, h);
      for (const auto& [px, py] : g.patch_offsets()) {
        ASSERT_LE(px + g.patch_width(), r.width);
        ASSERT_LE(py + g.patch_height(), r.height);
        for (int c = 0; c < g.patch_width(); ++c)
          for (int rr = 0; rr < g.patch_height(); ++rr) ++cover[(r.y0 + py + rr) * w + r.x0 + px + c];
      }
    }
    for (int v : cover) EXPECT_GE(v, 1);
  }
}

TEST(PatchGrid, SmallImageFallback) {
  const PatchGrid g(20, 12);
  ASSERT_EQ(g.regions().size(), 1u);
  EXPECT_EQ(g.regions()[0].width, 20);
  EXPECT_EQ(g.regions()[0].height, 12);
  EXPECT_EQ(g.patch_dim(), 64);
}

TEST(PatchGrid, Validation) {
  EXPECT_THROW(PatchGrid(32, 32, 8, 32, 1.0), InputError);
  EXPECT_THROW(PatchGrid(32, 32, 40, 32, 0.5), InputError);
  EXPECT_THROW(PatchGrid(0, 32), InputError);
  EXPECT_EQ(tile_offsets(32, 8, 4), (std::vector<int>{0, 4, 8, 12, 16, 20, 24}));
  EXPECT_EQ(tile_offsets(10, 4, 4), (std::vector<int>{0, 4, 6}));
}

// ---- patches and projectors ------------------------------------------------

TEST(Patches, ColumnMajorExtraction) {
  GrayImage img(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) img.at(x, y) = static_cast<std::uint8_t>(x + 2 * y);
  const PatchGrid g(32, 32);
  const RealMatrix p = extract_region_patches(RealImage(img), g, 0);
  ASSERT_EQ(p.rows(), 64);
  ASSERT_EQ(p.cols(), 49);
  const auto [px, py] = g.patch_offsets()[10];
  for (int c = 0; c < 8; ++c)
    for (int r = 0; r < 8; ++r) EXPECT_EQ(p(r + 8 * c, 10), px + c + 2 * (py + r));
  EXPECT_THROW(extract_region_patches(RealImage(img), g, 1), InputError);
}

TEST(Patches, ConstantImageColumnsIdentical) {
  const PatchGrid g(32, 32);
  const RealMatrix p = extract_region_patches(RealImage(GrayImage(32, 32, 77)), g, 0);
  EXPECT_EQ((p.array() - 77.0).abs().maxCoeff(), 0.0);
}

TEST(Projector, ExactAffineSubspace) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  RealMatrix basis(64, 3), coeff(3, 49);
  for (auto* m : {&basis, &coeff})
    for (Eigen::Index i = 0; i < m->size(); ++i) m->data()[i] = nd(rng);
  const RealVector offset = RealVector::Constant(64, 100.0);
  const RealMatrix patches = (basis * coeff).colwise() + offset;
  for (Method m : {Method::pca, Method::nystrom}) {
    DenoiseConfig cfg;
    cfg.rank = 3;
    cfg.method = m;
    const auto proj = region_projector(patches, cfg, 11);
    EXPECT_LT((proj.apply(patches) - patches).norm(), 1e-9 * patches.norm()) << method_name(m);
  }
}

TEST(Projector, ConstantPatchesGiveMean) {
  const RealMatrix patches = RealMatrix::Constant(64, 49, 42.0);
  for (Method m : {Method::pca, Method::nystrom}) {
    DenoiseConfig cfg;
    cfg.method = m;
    const auto proj = region_projector(patches, cfg, 1);
    EXPECT_EQ(proj.basis.cols(), 0);
    EXPECT_TRUE(proj.rank_reduced);
    EXPECT_LT((proj.apply(patches) - patches).norm(), 1e-12);
  }
}

TEST(Projector, FullCoordinateSubsetMatchesPca) {
  const GrayImage noisy = add_noise(synthetic_test_image(64, 64), 20.0, 3);
  const PatchGrid g(64, 64);
  for (std::size_t id : {0u, 5u}) {
    const RealMatrix patches = extract_region_patches(RealImage(noisy), g, id);
    DenoiseConfig cfg;
    cfg.method = Method::pca;
    const RealMatrix pca = region_projector(patches, cfg, 0).dense();
    const RealMatrix nys = region_projector(patches, 4, IndexSubset::all(64)).dense();
    EXPECT_LT((pca - nys).norm(), 1e-8);
  }
}

TEST(Projector, ProjectionLaws) {
  const GrayImage noisy = add_noise(synthetic_test_image(96, 96), 20.0, 4);
  const PatchGrid g(96, 96);
  const RealImage x(noisy);
  for (std::size_t id = 0; id < g.regions().size(); id += 3) {
    const RealMatrix patches = extract_region_patches(x, g, id);
    for (SubsetMode mode : {SubsetMode::coordinates, SubsetMode::patches}) {
      DenoiseConfig cfg;
      cfg.subset_mode = mode;
      cfg.subset_size = 8;
      const auto proj = region_projector(patches, cfg, id);
      const RealMatrix p = proj.dense();
      EXPECT_LT((p * p - p).norm(), 1e-10);
      EXPECT_LT((p - p.transpose()).norm(), 1e-10);
      EXPECT_LE(proj.basis.cols(), 4);
      const RealMatrix centered = patches.colwise() - proj.mean;
      const RealMatrix projected = p * centered;
      for (Eigen::Index c = 0; c < centered.cols(); ++c)
        EXPECT_LE(projected.col(c).norm(), centered.col(c).norm() * (1 + 1e-12));
    }
  }
}

TEST(Projector, RankValidation) {
  DenoiseConfig cfg;
  cfg.rank = 65;
  EXPECT_THROW(region_projector(RealMatrix::Ones(64, 49), cfg, 0), InputError);
  cfg.rank = 0;
  EXPECT_THROW(region_projector(RealMatrix::Ones(64, 49), cfg, 0), InputError);
}

// ---- whole-image pipeline --------------------------------------------------

TEST(DenoiseImage, FullRankIsIdentity) {
  const GrayImage img = random_image(48, 40, 6);
  const PatchGrid g(48, 40);
  DenoiseConfig cfg;
  cfg.rank = 64;
  cfg.method = Method::pca;
  const auto res = denoise_image(img, g, cfg);
  EXPECT_EQ(res.image, img);
  for (std::size_t i = 0; i < img.pixels.size(); ++i) EXPECT_NEAR(res.estimate.pixels[i], img.pixels[i], 1e-9);
}

TEST(DenoiseImage, PureNoiseVarianceDrops) {
  const GrayImage noisy = add_noise(GrayImage(96, 96, 128), 20.0, 7);
  const PatchGrid g(96, 96);
  auto variance = [](const std::vector<double>& v) {
    double s = 0, s2 = 0;
    for (double x : v) {
      s += x;
      s2 += x * x;
    }
    const double n = static_cast<double>(v.size());
    return s2 / n - (s / n) * (s / n);
  };
  const double before = variance(RealImage(noisy).pixels);
  for (Method m : {Method::pca, Method::nystrom}) {
    DenoiseConfig cfg;
    cfg.method = m;
    const auto res = denoise_image(noisy, g, cfg);
    EXPECT_LT(variance(res.estimate.pixels), before);
  }
}

TEST(DenoiseImage, ImprovesPsnr) {
  const GrayImage clean = synthetic_test_image(128, 128);
  const GrayImage noisy = add_noise(clean, 20.0, 8);
  const PatchGrid g(128, 128);
  for (Method m : {Method::pca, Method::nystrom}) {
    DenoiseConfig cfg;
    cfg.method = m;
    const auto res = denoise_image(noisy, g, cfg);
    EXPECT_GT(psnr(clean, res.image).db, psnr(clean, noisy).db + 3.0) << method_name(m);
  }
}

TEST(DenoiseImage, FullSubsetReproducesPca) {
  const GrayImage noisy = add_noise(synthetic_test_image(64, 64), 20.0, 9);
  const PatchGrid g(64, 64);
  DenoiseConfig pca;
  pca.method = Method::pca;
  DenoiseConfig nys;
  nys.subset_size = 64;
  const auto a = denoise_image(noisy, g, pca);
  const auto b = denoise_image(noisy, g, nys);
  for (std::size_t i = 0; i < a.estimate.pixels.size(); ++i)
    EXPECT_NEAR(a.estimate.pixels[i], b.estimate.pixels[i], 1e-8);
}

TEST(DenoiseImage, DeterministicAndFlagsFlatRegions) {
  GrayImage img = synthetic_test_image(64, 64);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) img.at(x, y) = 90;
  const PatchGrid g(64, 64);
  DenoiseConfig cfg;
  const auto a = denoise_image(img, g, cfg);
  const auto b = denoise_image(img, g, cfg);
  EXPECT_EQ(a.image, b.image);
  ASSERT_FALSE(a.flagged_regions.empty());
  EXPECT_EQ(a.flagged_regions.front(), 0u);
  EXPECT_GE(a.runtime_s, 0.0);
}

TEST(DenoiseImage, SizeMismatch) {
  EXPECT_THROW(denoise_image(GrayImage(10, 10), PatchGrid(12, 10), DenoiseConfig{}), InputError);
}
