#include "nystrom/error_analytics.hpp"

#include "nystrom/estimators.hpp"
#include "nystrom/linalg.hpp"
#include "nystrom/random.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace nystrom::analytics {

GroundTruthModel::GroundTruthModel(RealMatrix sigma, Eigen::Index samples) : sigma_(std::move(sigma)), n_(samples) {
  if (sigma_.rows() < 1 || sigma_.rows() != sigma_.cols()) throw InputError("sigma must be a nonempty square matrix");
  if (n_ < 1) throw InputError("sample count must be positive");
  if (!sigma_.allFinite()) throw InputError("sigma contains non-finite entries");
  const double scale = sigma_.cwiseAbs().maxCoeff();
  if ((sigma_ - sigma_.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) throw InputError("sigma is not symmetric");
  sigma_ = (sigma_ + sigma_.transpose()) / 2.0;
  Eigen::LLT<RealMatrix> llt(sigma_);
  if (llt.info() != Eigen::Success || llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 0.0)
    throw InputError("sigma is not positive definite");
  chol_ = llt.matrixL();
}

namespace {

struct Blocks {
  RealMatrix sigma_i, sigma_ij, sigma_j;
  std::vector<Eigen::Index> i, j;
};

Blocks split(const GroundTruthModel& model, const IndexSubset& subset) {
  if (subset.dim() != model.dim()) throw InputError("subset dimension does not match model dimension");
  if (subset.size() > model.samples())
    throw PreconditionError("closed forms require k <= n (k = " + std::to_string(subset.size()) +
                            ", n = " + std::to_string(model.samples()) + ")");
  Blocks b;
  b.i = subset.indices();
  b.j = subset.complement();
  b.sigma_i = linalg::select_block(model.sigma(), std::span(b.i), std::span(b.i));
  b.sigma_ij = linalg::select_block(model.sigma(), std::span(b.i), std::span(b.j));
  b.sigma_j = linalg::select_block(model.sigma(), std::span(b.j), std::span(b.j));
  return b;
}

/// Sigma_IJ^T Sigma_I^{-1} Sigma_IJ.
RealMatrix conditional_term(const Blocks& b) {
  Eigen::LLT<RealMatrix> llt(b.sigma_i);
  if (llt.info() != Eigen::Success) throw PreconditionError("sigma_I is singular");
  RealMatrix out = b.sigma_ij.transpose() * llt.solve(b.sigma_ij);
  return (out + out.transpose()) / 2.0;
}

RealMatrix schur_of(const Blocks& b) { return b.sigma_j - conditional_term(b); }

double mse_s(const RealMatrix& sigma, double n) {
  const double tr = sigma.trace();
  return (sigma.squaredNorm() + tr * tr) / n;
}

/// Running mean and sum of squared deviations, mergeable (Chan et al.).
struct Moments {
  double count = 0.0;
  RealMatrix mean;
  RealMatrix m2;

  void init(Eigen::Index rows, Eigen::Index cols) {
    mean = RealMatrix::Zero(rows, cols);
    m2 = RealMatrix::Zero(rows, cols);
  }
  void add(const RealMatrix& x) {
    count += 1.0;
    RealMatrix delta = x - mean;
    mean += delta / count;
    m2.array() += delta.array() * (x - mean).array();
  }
  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    RealMatrix delta = o.mean - mean;
    mean += delta * (o.count / total);
    m2 += o.m2 + (delta.array().square() * (count * o.count / total)).matrix();
    count = total;
  }
  /// Standard error of the mean; for a sample mean this equals the jackknife estimate.
  RealMatrix standard_error() const {
    if (count < 2.0) return RealMatrix::Zero(mean.rows(), mean.cols());
    return (m2.array() / (count - 1.0) / count).sqrt().matrix();
  }
};

constexpr std::int64_t kBlockSize = 512;

}  // namespace

RealMatrix expected_nystrom(const GroundTruthModel& model, const IndexSubset& subset) {
  const Blocks b = split(model, subset);
  const double n = static_cast<double>(model.samples());
  const double k = static_cast<double>(subset.size());
  RealMatrix out = model.sigma();
  if (b.j.empty()) return out;
  const RealMatrix block_j = (k / n) * b.sigma_j + ((n - k) / n) * conditional_term(b);
  for (std::size_t c = 0; c < b.j.size(); ++c)
    for (std::size_t r = 0; r < b.j.size(); ++r)
      out(b.j[r], b.j[c]) = block_j(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return out;
}

RealMatrix nystrom_bias(const GroundTruthModel& model, const IndexSubset& subset) {
  const Blocks b = split(model, subset);
  const double n = static_cast<double>(model.samples());
  const double k = static_cast<double>(subset.size());
  RealMatrix out = RealMatrix::Zero(model.dim(), model.dim());
  if (b.j.empty()) return out;
  const RealMatrix block_j = ((n - k) / n) * schur_of(b);
  for (std::size_t c = 0; c < b.j.size(); ++c)
    for (std::size_t r = 0; r < b.j.size(); ++r)
      out(b.j[r], b.j[c]) = block_j(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  return out;
}

double sample_mse(const GroundTruthModel& model) {
  return mse_s(model.sigma(), static_cast<double>(model.samples()));
}

MseForms nystrom_mse_forms(const GroundTruthModel& model, const IndexSubset& subset) {
  const Blocks b = split(model, subset);
  const double n = static_cast<double>(model.samples());
  const double k = static_cast<double>(subset.size());
  const double base = sample_mse(model);
  if (b.j.empty()) return {base, base};
  const RealMatrix a = schur_of(b);
  const double tr = a.trace();
  const double tr_sq = a.squaredNorm();  // tr(A^2) for symmetric A
  MseForms f;
  f.trace_form = base + (n - k) / (n * n) * ((n - k - 1.0) * tr_sq - tr * tr);
  if (n - k > 0.0) {
    const double mse_schur = (tr_sq + tr * tr) / (n - k);
    f.frobenius_form = base + (n - k) * (n - k) / (n * n) * (tr_sq - mse_schur);
  } else {
    f.frobenius_form = base;
  }
  return f;
}

double nystrom_mse(const GroundTruthModel& model, const IndexSubset& subset) {
  const MseForms f = nystrom_mse_forms(model, subset);
  const double scale = std::max({std::abs(f.trace_form), sample_mse(model), 1e-300});
  if (std::abs(f.trace_form - f.frobenius_form) > 1e-9 * scale)
    throw std::logic_error("nystrom_mse: algebraic forms disagree");
  return f.trace_form;
}

double mse_lower_bound(const GroundTruthModel& model, const IndexSubset& subset) {
  const Blocks b = split(model, subset);
  const double n = static_cast<double>(model.samples());
  const double k = static_cast<double>(subset.size());
  const double p = static_cast<double>(model.dim());
  const double base = sample_mse(model);
  if (b.j.empty()) return base;
  const RealMatrix a = schur_of(b);
  return base + (n - k) * (n - p - 1.0) / (n * n) * a.squaredNorm();
}

double ErrorReport::mse_zscore() const {
  const double diff = std::abs(empirical_mse - analytic_mse);
  if (standard_error > 0.0) return diff / standard_error;
  return diff <= 1e-12 * std::max(1.0, std::abs(analytic_mse)) ? 0.0 : std::numeric_limits<double>::infinity();
}

double ErrorReport::max_bias_zscore() const {
  double worst = 0.0;
  const double scale = std::max(1.0, analytic_bias.cwiseAbs().maxCoeff());
  for (Eigen::Index c = 0; c < analytic_bias.cols(); ++c)
    for (Eigen::Index r = 0; r < analytic_bias.rows(); ++r) {
      const double diff = std::abs(empirical_bias(r, c) - analytic_bias(r, c));
      const double se = bias_standard_error(r, c);
      double z = 0.0;
      if (se > 0.0)
        z = diff / se;
      else if (diff > 1e-12 * scale)
        z = std::numeric_limits<double>::infinity();
      worst = std::max(worst, z);
    }
  return worst;
}

ErrorReport monte_carlo_verify(const GroundTruthModel& model, const IndexSubset& subset, std::int64_t trials,
                               std::uint64_t seed, Execution exec) {
  if (trials < 100) throw InputError("monte_carlo_verify: need at least 100 trials");
  if (subset.dim() != model.dim()) throw InputError("subset dimension does not match model dimension");
  const Eigen::Index p = model.dim();
  const Eigen::Index n = model.samples();
  const std::int64_t nblocks = (trials + kBlockSize - 1) / kBlockSize;

  std::vector<Moments> est_blocks(static_cast<std::size_t>(nblocks));
  std::vector<Moments> err_blocks(static_cast<std::size_t>(nblocks));

  auto run_block = [&](std::int64_t blk) {
    Moments& est = est_blocks[static_cast<std::size_t>(blk)];
    Moments& err = err_blocks[static_cast<std::size_t>(blk)];
    est.init(p, p);
    err.init(1, 1);
    RealMatrix g(p, n);
    RealMatrix e(1, 1);
    const std::int64_t end = std::min(trials, (blk + 1) * kBlockSize);
    for (std::int64_t t = blk * kBlockSize; t < end; ++t) {
      auto rng = make_stream(seed, {static_cast<std::uint64_t>(t)});
      std::normal_distribution<double> normal;
      for (Eigen::Index c = 0; c < n; ++c)
        for (Eigen::Index r = 0; r < p; ++r) g(r, c) = normal(rng);
      const RealData x(model.cholesky() * g);
      const RealMatrix dense = nystrom_estimate(x, subset).densify();
      est.add(dense);
      e(0, 0) = (model.sigma() - dense).squaredNorm();
      err.add(e);
    }
  };

  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::int64_t blk = 0; blk < nblocks; ++blk) run_block(blk);
  } else {
    for (std::int64_t blk = 0; blk < nblocks; ++blk) run_block(blk);
  }

  Moments est_total, err_total;
  est_total.init(p, p);
  err_total.init(1, 1);
  for (std::int64_t blk = 0; blk < nblocks; ++blk) {
    est_total.merge(est_blocks[static_cast<std::size_t>(blk)]);
    err_total.merge(err_blocks[static_cast<std::size_t>(blk)]);
  }

  ErrorReport rep;
  rep.trials = trials;
  rep.analytic_bias = nystrom_bias(model, subset);
  rep.analytic_mse = nystrom_mse(model, subset);
  rep.empirical_bias = model.sigma() - est_total.mean;
  rep.bias_standard_error = est_total.standard_error();
  rep.empirical_mse = err_total.mean(0, 0);
  rep.standard_error = err_total.standard_error()(0, 0);
  return rep;
}

RealMatrix random_spd(Eigen::Index p, std::uint64_t seed) {
  auto rng = make_stream(seed, {0x5bdULL});
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> unif(0.5, 3.0);
  RealMatrix g(p, p);
  for (Eigen::Index c = 0; c < p; ++c)
    for (Eigen::Index r = 0; r < p; ++r) g(r, c) = normal(rng);
  Eigen::HouseholderQR<RealMatrix> qr(g);
  const RealMatrix q = qr.householderQ();
  RealVector d(p);
  for (Eigen::Index i = 0; i < p; ++i) d(i) = unif(rng);
  RealMatrix s = q * d.asDiagonal() * q.transpose();
  return (s + s.transpose()) / 2.0;
}

}  // namespace nystrom::analytics
