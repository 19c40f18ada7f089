#include "nystrom/denoise.hpp"

#include "nystrom/estimators.hpp"
#include "nystrom/linalg.hpp"
#include "nystrom/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace nystrom::denoise {

std::vector<int> tile_offsets(int length, int block, int stride) {
  std::vector<int> out;
  if (block >= length) {
    out.push_back(0);
    return out;
  }
  for (int o = 0; o + block < length; o += stride) out.push_back(o);
  if (out.back() != length - block) out.push_back(length - block);
  return out;
}

PatchGrid::PatchGrid(int width, int height, int patch_side, int region_side, double overlap)
    : width_(width), height_(height), overlap_(overlap) {
  if (width < 1 || height < 1) throw InputError("grid: image dimensions must be positive");
  if (patch_side < 1 || region_side < 1) throw InputError("grid: patch and region sides must be positive");
  if (patch_side > region_side) throw InputError("grid: patch side exceeds region side");
  if (!(overlap >= 0.0 && overlap < 1.0)) throw InputError("grid: overlap must lie in [0, 1)");

  // Images smaller than one region fall back to a single region covering the image.
  const int region_w = std::min(region_side, width);
  const int region_h = std::min(region_side, height);
  patch_w_ = std::min(patch_side, region_w);
  patch_h_ = std::min(patch_side, region_h);

  auto stride = [&](int side) { return std::max(1, static_cast<int>(std::lround(side * (1.0 - overlap)))); };
  for (int y0 : tile_offsets(height, region_h, stride(region_side)))
    for (int x0 : tile_offsets(width, region_w, stride(region_side))) regions_.push_back({x0, y0, region_w, region_h});
  for (int py : tile_offsets(region_h, patch_h_, stride(patch_side)))
    for (int px : tile_offsets(region_w, patch_w_, stride(patch_side))) patch_offsets_.emplace_back(px, py);
}

std::string_view method_name(Method m) { return m == Method::pca ? "pca" : "nystrom"; }

RealMatrix extract_region_patches(const image::RealImage& img, const PatchGrid& grid, std::size_t region_id) {
  if (region_id >= grid.regions().size()) throw InputError("region id out of range");
  if (img.width != grid.width() || img.height != grid.height()) throw InputError("image does not match grid");
  const auto& reg = grid.regions()[region_id];
  const int pw = grid.patch_width();
  const int ph = grid.patch_height();
  RealMatrix out(grid.patch_dim(), grid.patches_per_region());
  for (std::size_t j = 0; j < grid.patch_offsets().size(); ++j) {
    const auto [px, py] = grid.patch_offsets()[j];
    for (int c = 0; c < pw; ++c)
      for (int r = 0; r < ph; ++r)
        out(r + c * ph, static_cast<Eigen::Index>(j)) = img.at(reg.x0 + px + c, reg.y0 + py + r);
  }
  return out;
}

RealMatrix RegionProjector::apply(const RealMatrix& patches) const {
  RealMatrix centered = patches.colwise() - mean;
  RealMatrix out = basis * (basis.transpose() * centered);
  out.colwise() += mean;
  return out;
}

namespace {

RealMatrix centered_patches(const RealMatrix& patches, RealVector& mean) {
  if (patches.cols() < 1 || patches.rows() < 1) throw InputError("region has no patches");
  mean = patches.rowwise().mean();
  return patches.colwise() - mean;
}

void check_rank(Eigen::Index rank, Eigen::Index p) {
  if (rank < 1 || rank > p) throw InputError("subspace rank must lie in [1, patch dimension]");
}

RegionProjector pca_projector(const RealMatrix& patches, Eigen::Index rank) {
  RegionProjector proj;
  const RealMatrix xc = centered_patches(patches, proj.mean);
  const Eigen::Index p = xc.rows();
  RealMatrix s = RealMatrix::Zero(p, p);
  s.selfadjointView<Eigen::Lower>().rankUpdate(xc, 1.0 / static_cast<double>(xc.cols()));
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(s);
  const RealVector& ev = es.eigenvalues();  // ascending
  const double cut = RankTolerance{}.threshold(std::max(ev(p - 1), 0.0), p, p);
  Eigen::Index used = 0;
  while (used < rank && ev(p - 1 - used) > cut && ev(p - 1 - used) > 0.0) ++used;
  proj.basis = es.eigenvectors().rightCols(used).rowwise().reverse();
  proj.rank_reduced = used < rank;
  return proj;
}

RegionProjector nystrom_projector(const RealMatrix& patches, Eigen::Index rank, const IndexSubset& coords) {
  RegionProjector proj;
  const RealMatrix xc = centered_patches(patches, proj.mean);
  const auto est = nystrom_eig(RealData(xc), coords);
  const Eigen::Index used = std::min(rank, est.rank());
  proj.basis = est.eigenvectors.leftCols(used);
  proj.rank_reduced = used < rank;
  return proj;
}

RegionProjector patch_subset_projector(const RealMatrix& patches, Eigen::Index rank, Eigen::Index subset_size,
                                       std::uint64_t seed) {
  RegionProjector proj;
  const RealMatrix xc = centered_patches(patches, proj.mean);
  if (subset_size > xc.cols()) throw InputError("patch subset larger than the number of patches");
  const IndexSubset cols = uniform_subset(xc.cols(), subset_size, seed);
  RealMatrix chosen(xc.rows(), cols.size());
  for (Eigen::Index j = 0; j < cols.size(); ++j) chosen.col(j) = xc.col(cols.indices()[static_cast<std::size_t>(j)]);
  const auto svd = linalg::thin_svd(chosen, RankTolerance{});
  const Eigen::Index used = std::min(rank, svd.rank());
  proj.basis = svd.u.leftCols(used);
  proj.rank_reduced = used < rank;
  return proj;
}

}  // namespace

RegionProjector region_projector(const RealMatrix& patches, Eigen::Index rank, const IndexSubset& coordinates) {
  check_rank(rank, patches.rows());
  return nystrom_projector(patches, rank, coordinates);
}

RegionProjector region_projector(const RealMatrix& patches, const DenoiseConfig& cfg, std::uint64_t subset_seed) {
  check_rank(cfg.rank, patches.rows());
  if (cfg.method == Method::pca) return pca_projector(patches, cfg.rank);
  const Eigen::Index m = cfg.subset_size > 0 ? cfg.subset_size : cfg.rank;
  if (cfg.subset_mode == SubsetMode::patches) return patch_subset_projector(patches, cfg.rank, m, subset_seed);
  if (m > patches.rows()) throw InputError("coordinate subset larger than the patch dimension");
  return nystrom_projector(patches, cfg.rank, uniform_subset(patches.rows(), m, subset_seed));
}

DenoiseResult denoise_image(const image::GrayImage& noisy, const PatchGrid& grid, const DenoiseConfig& cfg,
                            Execution exec) {
  if (noisy.width != grid.width() || noisy.height != grid.height()) throw InputError("image does not match grid");
  check_rank(cfg.rank, grid.patch_dim());
  const auto t0 = std::chrono::steady_clock::now();

  const image::RealImage x(noisy);
  const auto& regions = grid.regions();
  const std::size_t nreg = regions.size();
  std::vector<RealMatrix> region_estimates(nreg);
  std::vector<char> flagged(nreg, 0);
  const int pw = grid.patch_width();
  const int ph = grid.patch_height();

  auto process = [&](std::size_t id) {
    const auto& reg = regions[id];
    const RealMatrix patches = extract_region_patches(x, grid, id);
    const RegionProjector proj = region_projector(patches, cfg, derive_seed(cfg.seed, {id}));
    flagged[id] = proj.rank_reduced ? 1 : 0;
    const RealMatrix est = proj.apply(patches);

    RealMatrix sum = RealMatrix::Zero(reg.height, reg.width);
    RealMatrix count = RealMatrix::Zero(reg.height, reg.width);
    for (std::size_t j = 0; j < grid.patch_offsets().size(); ++j) {
      const auto [px, py] = grid.patch_offsets()[j];
      for (int c = 0; c < pw; ++c)
        for (int r = 0; r < ph; ++r) {
          sum(py + r, px + c) += est(r + c * ph, static_cast<Eigen::Index>(j));
          count(py + r, px + c) += 1.0;
        }
    }
    region_estimates[id] = sum.cwiseQuotient(count);
  };

  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t id = 0; id < static_cast<std::ptrdiff_t>(nreg); ++id) process(static_cast<std::size_t>(id));
  } else {
    for (std::size_t id = 0; id < nreg; ++id) process(id);
  }

  image::RealImage acc(noisy.width, noisy.height);
  image::RealImage weight(noisy.width, noisy.height);
  for (std::size_t id = 0; id < nreg; ++id) {
    const auto& reg = regions[id];
    const RealMatrix& est = region_estimates[id];
    for (int c = 0; c < reg.width; ++c)
      for (int r = 0; r < reg.height; ++r) {
        acc.at(reg.x0 + c, reg.y0 + r) += est(r, c);
        weight.at(reg.x0 + c, reg.y0 + r) += 1.0;
      }
  }
  for (std::size_t i = 0; i < acc.pixels.size(); ++i) acc.pixels[i] /= weight.pixels[i];

  DenoiseResult res;
  res.image = image::quantize(acc);
  res.estimate = std::move(acc);
  for (std::size_t id = 0; id < nreg; ++id)
    if (flagged[id]) res.flagged_regions.push_back(id);
  res.runtime_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

}  // namespace nystrom::denoise
