#include "nystrom/beamforming.hpp"

#include "nystrom/estimators.hpp"
#include "nystrom/random.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <random>

namespace nystrom::beam {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

ComplexVector target_response(const ArrayScenario& s) {
  return steering_vector(s.desired().angle_deg, s.elements) * Complex(s.desired().power);
}

Sinr to_db(double num, double den) {
  if (!(den > 0.0)) return {std::numeric_limits<double>::infinity(), true};
  return {10.0 * std::log10(num / den), false};
}

/// Top-`rank` eigenpairs of a Hermitian PSD matrix with eigenvalue above the rank cutoff.
Beamformer low_rank_inverse(const ComplexMatrix& cov, const ArrayScenario& s, Eigen::Index rank, Method method) {
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(cov);
  const RealVector& ev = es.eigenvalues();  // ascending
  const Eigen::Index p = ev.size();
  const double cut = RankTolerance{}.threshold(std::max(ev(p - 1), 0.0), p, p);
  Eigen::Index used = 0;
  while (used < rank && used < p && ev(p - 1 - used) > cut && ev(p - 1 - used) > 0.0) ++used;

  const ComplexVector a = target_response(s);
  ComplexVector w = ComplexVector::Zero(p);
  for (Eigen::Index c = 0; c < used; ++c) {
    const auto u = es.eigenvectors().col(p - 1 - c);
    w += u * (u.dot(a) / ev(p - 1 - c));
  }
  Beamformer bf{std::move(w), method, used < rank, used};
  return bf;
}

}  // namespace

void ArrayScenario::validate() const {
  if (elements < 1) throw InputError("array must have at least one element");
  if (signals.empty()) throw InputError("scenario needs at least one signal");
  for (const auto& src : signals) {
    if (!(src.angle_deg >= -90.0 && src.angle_deg <= 90.0)) throw InputError("signal angle outside [-90, 90]");
    if (!(src.power >= 0.0) || !std::isfinite(src.power)) throw InputError("signal power must be finite and >= 0");
  }
  if (!(noise_power >= 0.0) || !std::isfinite(noise_power)) throw InputError("noise power must be finite and >= 0");
}

ArrayScenario reference_scenario(double snr_db, double inr_db, Eigen::Index elements) {
  ArrayScenario s;
  s.elements = elements;
  s.noise_power = 1.0;
  s.signals.push_back({10.0, db_to_linear(snr_db)});
  for (double angle : {-65.0, -30.0, -25.0, 30.0, 45.0, 60.0}) s.signals.push_back({angle, db_to_linear(inr_db)});
  return s;
}

std::string_view method_name(Method m) {
  switch (m) {
    case Method::optimal: return "optimal_theoretical";
    case Method::sample: return "sample";
    case Method::ledoit_wolf: return "ledoit_wolf";
    case Method::projection: return "projection";
    case Method::nystrom: return "nystrom";
  }
  return "unknown";
}

ComplexVector steering_vector(double theta_deg, Eigen::Index elements) {
  if (!(std::abs(theta_deg) <= 90.0)) throw InputError("steering angle outside [-90, 90]");
  const double phase = std::numbers::pi * std::sin(theta_deg * std::numbers::pi / 180.0);
  ComplexVector a(elements);
  for (Eigen::Index l = 0; l < elements; ++l) a(l) = std::polar(1.0, -phase * static_cast<double>(l));
  return a;
}

ComplexMatrix interference_covariance(const ArrayScenario& s) {
  s.validate();
  ComplexMatrix cov = ComplexMatrix::Identity(s.elements, s.elements) * Complex(s.noise_power);
  for (std::size_t i = 1; i < s.signals.size(); ++i) {
    const ComplexVector a = steering_vector(s.signals[i].angle_deg, s.elements);
    cov += s.signals[i].power * a * a.adjoint();
  }
  return cov;
}

ComplexMatrix true_covariance(const ArrayScenario& s) {
  ComplexMatrix cov = interference_covariance(s);
  const ComplexVector a = steering_vector(s.desired().angle_deg, s.elements);
  cov += s.desired().power * a * a.adjoint();
  return cov;
}

SnapshotSet simulate_snapshots(const ArrayScenario& s, Eigen::Index n, std::uint64_t seed) {
  s.validate();
  if (n < 1) throw InputError("need at least one snapshot");
  const Eigen::Index p = s.elements;
  auto rng = make_stream(seed, {0xbea3ULL});
  std::normal_distribution<double> normal;
  auto draw = [&](double power) {
    const double sd = std::sqrt(power / 2.0);
    const double re = normal(rng);
    const double im = normal(rng);
    return Complex(sd * re, sd * im);
  };

  SnapshotSet out;
  out.desired.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) out.desired(t) = draw(s.desired().power);

  out.interference_plus_noise.resize(p, n);
  for (Eigen::Index t = 0; t < n; ++t)
    for (Eigen::Index l = 0; l < p; ++l) out.interference_plus_noise(l, t) = draw(s.noise_power);

  ComplexVector env(n);
  for (std::size_t i = 1; i < s.signals.size(); ++i) {
    for (Eigen::Index t = 0; t < n; ++t) env(t) = draw(s.signals[i].power);
    out.interference_plus_noise.noalias() += steering_vector(s.signals[i].angle_deg, p) * env.transpose();
  }
  out.x = out.interference_plus_noise;
  out.x.noalias() += steering_vector(s.desired().angle_deg, p) * out.desired.transpose();
  return out;
}

Beamformer optimal_beamformer(const ArrayScenario& s) {
  if (!(s.noise_power > 0.0)) throw PreconditionError("optimal beamformer needs positive noise power");
  Eigen::LLT<ComplexMatrix> llt(true_covariance(s));
  Beamformer bf{llt.solve(target_response(s)), Method::optimal, false, s.elements};
  return bf;
}

std::optional<Beamformer> sample_beamformer(const ComplexMatrix& sample_cov, const ArrayScenario& s) {
  Eigen::LLT<ComplexMatrix> llt(sample_cov);
  if (llt.info() != Eigen::Success) return std::nullopt;
  ComplexVector w = llt.solve(target_response(s));
  if (!w.allFinite()) return std::nullopt;
  return Beamformer{std::move(w), Method::sample, false, s.elements};
}

std::optional<Beamformer> sample_beamformer(const ComplexData& x, const ArrayScenario& s) {
  if (x.samples() < x.dim()) return std::nullopt;
  return sample_beamformer(sample_covariance(x), s);
}

std::optional<Beamformer> ledoit_wolf_beamformer(const ComplexData& x, const ComplexMatrix& sample_cov,
                                                 const ArrayScenario& s) {
  if (x.samples() < 2) return std::nullopt;
  Eigen::LLT<ComplexMatrix> llt(ledoit_wolf_estimate(x, sample_cov));
  if (llt.info() != Eigen::Success) return std::nullopt;
  ComplexVector w = llt.solve(target_response(s));
  if (!w.allFinite()) return std::nullopt;
  return Beamformer{std::move(w), Method::ledoit_wolf, false, s.elements};
}

std::optional<Beamformer> ledoit_wolf_beamformer(const ComplexData& x, const ArrayScenario& s) {
  return ledoit_wolf_beamformer(x, sample_covariance(x), s);
}

Beamformer projection_beamformer(const ComplexMatrix& sample_cov, const ArrayScenario& s, Eigen::Index rank) {
  if (rank < 1 || rank > s.elements) throw InputError("projection rank must lie in [1, p]");
  return low_rank_inverse(sample_cov, s, rank, Method::projection);
}

Beamformer projection_beamformer(const ComplexData& x, const ArrayScenario& s, Eigen::Index rank) {
  return projection_beamformer(sample_covariance(x), s, rank);
}

Beamformer nystrom_beamformer(const ComplexData& x, const ArrayScenario& s, const IndexSubset& subset,
                              Eigen::Index rank) {
  if (rank < 0) throw InputError("Nystrom beamformer rank must be nonnegative");
  const auto est = nystrom_eig(x, subset);
  if (est.rank() == 0) throw PreconditionError("Nystrom estimate is zero; beamformer undefined");
  const Eigen::Index want = rank == 0 ? subset.size() : rank;
  const Eigen::Index r = std::min(want, est.rank());
  const ComplexVector a = target_response(s);
  ComplexVector coeff = est.eigenvectors.leftCols(r).adjoint() * a;
  coeff.array() /= est.eigenvalues.head(r).array().cast<Complex>();
  Beamformer bf{est.eigenvectors.leftCols(r) * coeff, Method::nystrom, r < want, r};
  return bf;
}

Sinr empirical_sinr(const ComplexVector& w, const SnapshotSet& snaps) {
  const double num = (snaps.x.adjoint() * w).squaredNorm();
  const double den = (snaps.interference_plus_noise.adjoint() * w).squaredNorm();
  return to_db(num, den);
}

Sinr theoretical_sinr(const ComplexVector& w, const ArrayScenario& s) {
  const double num = std::real(w.dot(true_covariance(s) * w));
  const double den = std::real(w.dot(interference_covariance(s) * w));
  return to_db(num, den);
}

Sinr theoretical_sinr_opt(const ArrayScenario& s) { return theoretical_sinr(optimal_beamformer(s).weights, s); }

std::vector<Eigen::Index> log_grid(Eigen::Index lo, Eigen::Index hi, int points) {
  if (lo < 1 || hi < lo || points < 1) throw InputError("invalid snapshot grid");
  std::vector<Eigen::Index> out;
  if (points == 1 || lo == hi) {
    out.push_back(lo);
    return out;
  }
  const double a = std::log(static_cast<double>(lo));
  const double b = std::log(static_cast<double>(hi));
  for (int i = 0; i < points; ++i) {
    const double v = std::exp(a + (b - a) * i / (points - 1));
    const auto n = static_cast<Eigen::Index>(std::llround(v));
    if (out.empty() || out.back() != n) out.push_back(n);
  }
  return out;
}

namespace {

struct TrialResult {
  // linear SINR per method (NaN = undefined), runtime per method
  double sinr[5];
  double runtime[5];
};

constexpr int kMethods = 5;

}  // namespace

Eigen::Index nystrom_subset_size(const ExperimentConfig& cfg) {
  if (cfg.nystrom_subset > 0) return cfg.nystrom_subset;
  return std::min(2 * cfg.nystrom_rank, cfg.elements);
}

namespace {

TrialResult run_trial(const ArrayScenario& s, const ExperimentConfig& cfg, Eigen::Index n, std::uint64_t trial_seed) {
  TrialResult r;
  std::fill(std::begin(r.sinr), std::end(r.sinr), std::numeric_limits<double>::quiet_NaN());
  std::fill(std::begin(r.runtime), std::end(r.runtime), 0.0);
  const SnapshotSet snaps = simulate_snapshots(s, n, trial_seed);
  const ComplexData x(snaps.x);
  auto linear = [&](const ComplexVector& w) { return std::pow(10.0, empirical_sinr(w, snaps).db / 10.0); };

  auto t0 = Clock::now();
  const ComplexMatrix cov = sample_covariance(x);
  const double t_cov = seconds_since(t0);

  t0 = Clock::now();
  auto w_sample = n >= s.elements ? sample_beamformer(cov, s) : std::nullopt;
  r.runtime[1] = t_cov + seconds_since(t0);
  if (w_sample) r.sinr[1] = linear(w_sample->weights);

  t0 = Clock::now();
  auto w_lw = ledoit_wolf_beamformer(x, cov, s);
  r.runtime[2] = t_cov + seconds_since(t0);
  if (w_lw) r.sinr[2] = linear(w_lw->weights);

  t0 = Clock::now();
  const Beamformer w_proj = projection_beamformer(cov, s, cfg.projection_rank);
  r.runtime[3] = t_cov + seconds_since(t0);
  r.sinr[3] = linear(w_proj.weights);

  const IndexSubset subset = uniform_subset(s.elements, nystrom_subset_size(cfg), derive_seed(trial_seed, {0x1157ULL}));
  t0 = Clock::now();
  const Beamformer w_nys = nystrom_beamformer(x, s, subset, cfg.nystrom_rank);
  r.runtime[4] = seconds_since(t0);
  r.sinr[4] = linear(w_nys.weights);
  return r;
}

}  // namespace

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg, Execution exec) {
  if (cfg.trials < 1) throw InputError("trials must be positive");
  if (cfg.snapshots.empty()) throw InputError("snapshot grid is empty");
  if (cfg.projection_rank < 1 || cfg.projection_rank > cfg.elements) throw InputError("projection rank must lie in [1, p]");
  if (cfg.nystrom_rank < 1 || cfg.nystrom_rank > cfg.elements) throw InputError("Nystrom rank must lie in [1, p]");
  if (cfg.nystrom_subset < 0 || cfg.nystrom_subset > cfg.elements)
    throw InputError("Nystrom subset size must lie in [1, p]");

  std::vector<ExperimentRow> rows;
  for (std::size_t a = 0; a < cfg.snr_db.size(); ++a) {
    const ArrayScenario s = reference_scenario(cfg.snr_db[a], cfg.inr_db, cfg.elements);
    auto t0 = Clock::now();
    const Beamformer w_opt = optimal_beamformer(s);
    const double t_opt = seconds_since(t0);
    const double sinr_opt = theoretical_sinr(w_opt.weights, s).db;

    for (std::size_t b = 0; b < cfg.snapshots.size(); ++b) {
      const Eigen::Index n = cfg.snapshots[b];
      if (n < 1) throw InputError("snapshot counts must be positive");
      std::vector<TrialResult> results(static_cast<std::size_t>(cfg.trials));
      auto body = [&](std::int64_t t) {
        results[static_cast<std::size_t>(t)] =
            run_trial(s, cfg, n, derive_seed(cfg.seed, {a, b, static_cast<std::uint64_t>(t)}));
      };
      if (exec == Execution::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
        for (std::int64_t t = 0; t < cfg.trials; ++t) body(t);
      } else {
        for (std::int64_t t = 0; t < cfg.trials; ++t) body(t);
      }

      rows.push_back({cfg.snr_db[a], n, Method::optimal, cfg.trials, true, sinr_opt, 0.0, t_opt});
      for (int m = 1; m < kMethods; ++m) {
        double sum = 0.0, sum_sq = 0.0, time = 0.0;
        std::int64_t count = 0;
        for (const auto& r : results) {
          if (std::isnan(r.sinr[m])) continue;
          sum += r.sinr[m];
          sum_sq += r.sinr[m] * r.sinr[m];
          time += r.runtime[m];
          ++count;
        }
        ExperimentRow row{cfg.snr_db[a], n, static_cast<Method>(m), count, count > 0, 0.0, 0.0, 0.0};
        if (count > 0) {
          const double mean = sum / static_cast<double>(count);
          const double var =
              count > 1 ? std::max(0.0, (sum_sq - sum * mean) / static_cast<double>(count - 1)) : 0.0;
          const double se = std::sqrt(var / static_cast<double>(count));
          row.mean_sinr_db = 10.0 * std::log10(mean);
          row.stderr_db = 10.0 / std::log(10.0) * se / mean;
          row.mean_runtime_s = time / static_cast<double>(count);
        }
        rows.push_back(row);
      }
    }
  }
  return rows;
}

std::string to_csv(const std::vector<ExperimentRow>& rows) {
  std::string out = "snr_db,n_snapshots,method,trials,mean_sinr_db,stderr_db,mean_runtime_s\n";
  char buf[256];
  for (const auto& r : rows) {
    std::snprintf(buf, sizeof buf, "%.10g,%lld,%s,%lld,", r.snr_db, static_cast<long long>(r.snapshots),
                  std::string(method_name(r.method)).c_str(), static_cast<long long>(r.trials));
    out += buf;
    if (r.defined) {
      std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.6e\n", r.mean_sinr_db, r.stderr_db, r.mean_runtime_s);
      out += buf;
    } else {
      out += ",,\n";
    }
  }
  return out;
}

}  // namespace nystrom::beam
