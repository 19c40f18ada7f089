#pragma once

#include "nystrom/image.hpp"
#include "nystrom/types.hpp"

#include <cstdint>
#include <string_view>
#include <vector>

namespace nystrom::denoise {

/// Square regions tiled with square patches. Offsets advance by
/// round(side * (1 - overlap)); the last offset on each axis is clamped to the
/// border so every pixel is covered.
class PatchGrid {
 public:
  PatchGrid(int width, int height, int patch_side = 8, int region_side = 32, double overlap = 0.5);

  struct Region {
    int x0, y0;          // top-left corner
    int width, height;   // region extent (smaller than region_side only for small images)
  };

  int width() const { return width_; }
  int height() const { return height_; }
  int patch_width() const { return patch_w_; }
  int patch_height() const { return patch_h_; }
  Eigen::Index patch_dim() const { return static_cast<Eigen::Index>(patch_w_) * patch_h_; }
  double overlap() const { return overlap_; }

  const std::vector<Region>& regions() const { return regions_; }
  /// Patch corners relative to the region corner; identical for every region.
  const std::vector<std::pair<int, int>>& patch_offsets() const { return patch_offsets_; }
  Eigen::Index patches_per_region() const { return static_cast<Eigen::Index>(patch_offsets_.size()); }

 private:
  int width_, height_, patch_w_, patch_h_;
  double overlap_;
  std::vector<Region> regions_;
  std::vector<std::pair<int, int>> patch_offsets_;
};

/// Offsets 0, stride, 2*stride, ... with the last one clamped to length - block.
std::vector<int> tile_offsets(int length, int block, int stride);

enum class Method { pca, nystrom };
std::string_view method_name(Method m);

/// Which index set the Nystrom estimate conditions on: pixel coordinates (rows of the
/// patch matrix) or whole patch vectors (columns).
enum class SubsetMode { coordinates, patches };

struct DenoiseConfig {
  double sigma = 20.0;
  Eigen::Index rank = 4;
  Method method = Method::nystrom;
  std::uint64_t seed = 0;
  /// Size of the Nystrom index subset; 0 means `rank`.
  Eigen::Index subset_size = 0;
  SubsetMode subset_mode = SubsetMode::coordinates;
};

/// p x n matrix whose columns are the region's patches, each vectorized column-major
/// (pixel (r, c) of the patch at index r + c * patch_height).
RealMatrix extract_region_patches(const image::RealImage& img, const PatchGrid& grid, std::size_t region_id);

/// Mean patch plus an orthonormal basis of the estimated signal subspace.
struct RegionProjector {
  RealVector mean;
  RealMatrix basis;  // p x r, r <= rank
  bool rank_reduced = false;

  /// mean + B B^T (patches - mean), column by column.
  RealMatrix apply(const RealMatrix& patches) const;
  /// Dense projector B B^T.
  RealMatrix dense() const { return basis * basis.transpose(); }
};

/// Centers the patches and projects onto the top-`rank` components of either the
/// sample covariance (pca) or a Nystrom estimate drawn with `subset_seed` (nystrom).
RegionProjector region_projector(const RealMatrix& patches, const DenoiseConfig& cfg, std::uint64_t subset_seed);

/// Nystrom projector with an explicit coordinate subset.
RegionProjector region_projector(const RealMatrix& patches, Eigen::Index rank, const IndexSubset& coordinates);

struct DenoiseResult {
  image::GrayImage image;
  image::RealImage estimate;  // before clamping and rounding
  std::vector<std::size_t> flagged_regions;  // regions whose rank was reduced
  double runtime_s = 0.0;
};

/// Projects every patch of every region, averages overlapping patch estimates within
/// a region and then overlapping region estimates, and clamps to [0, 255]. Region r
/// uses the Nystrom subset stream keyed by (cfg.seed, r).
DenoiseResult denoise_image(const image::GrayImage& noisy, const PatchGrid& grid, const DenoiseConfig& cfg,
                            Execution exec = Execution::parallel);

}  // namespace nystrom::denoise
