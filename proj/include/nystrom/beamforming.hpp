#pragma once

#include "nystrom/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nystrom::beam {

struct Source {
  double angle_deg;  // angle of arrival in [-90, 90]
  double power;      // linear, > 0
};

/// Narrowband half-wavelength uniform linear array. signals[0] is the desired source.
struct ArrayScenario {
  Eigen::Index elements = 0;
  std::vector<Source> signals;
  double noise_power = 1.0;

  void validate() const;
  const Source& desired() const { return signals.front(); }
};

/// p = 100, desired source at 10 deg with the given SNR, six interferers at
/// -65, -30, -25, 30, 45, 60 deg with the given INR, unit noise power.
ArrayScenario reference_scenario(double snr_db, double inr_db = 20.0, Eigen::Index elements = 100);

struct SnapshotSet {
  ComplexMatrix x;                        // p x n received snapshots
  ComplexVector desired;                  // z_1(t), length n
  ComplexMatrix interference_plus_noise;  // p x n
};

enum class Method { optimal, sample, ledoit_wolf, projection, nystrom };
std::string_view method_name(Method m);

struct Beamformer {
  ComplexVector weights;
  Method method = Method::optimal;
  /// Fewer nonzero components were available than the requested rank.
  bool rank_reduced = false;
  Eigen::Index rank = 0;
};

/// Element l: exp(-j pi l sin(theta)), l = 0..p-1.
ComplexVector steering_vector(double theta_deg, Eigen::Index elements);

/// sum_i sigma_i^2 a_i a_i^H + sigma_n^2 I.
ComplexMatrix true_covariance(const ArrayScenario& s);

/// Covariance of the interference plus noise (all sources but the first).
ComplexMatrix interference_covariance(const ArrayScenario& s);

/// Circularly-symmetric complex Gaussian envelopes and noise; deterministic in `seed`.
/// Sources with zero power and zero noise power contribute exact zeros.
SnapshotSet simulate_snapshots(const ArrayScenario& s, Eigen::Index n, std::uint64_t seed);

/// Sigma^{-1} a(theta_1) sigma_1^2.
Beamformer optimal_beamformer(const ArrayScenario& s);

/// S^{-1} a sigma_1^2; std::nullopt while S is singular (n < p or a failed Cholesky).
std::optional<Beamformer> sample_beamformer(const ComplexData& x, const ArrayScenario& s);
std::optional<Beamformer> sample_beamformer(const ComplexMatrix& sample_cov, const ArrayScenario& s);

/// Ledoit-Wolf shrunk covariance in place of Sigma.
std::optional<Beamformer> ledoit_wolf_beamformer(const ComplexData& x, const ArrayScenario& s);
std::optional<Beamformer> ledoit_wolf_beamformer(const ComplexData& x, const ComplexMatrix& sample_cov,
                                                 const ArrayScenario& s);

/// U_k L_k^{-1} U_k^H a sigma_1^2 from the top-k eigenpairs of the sample covariance.
Beamformer projection_beamformer(const ComplexData& x, const ArrayScenario& s, Eigen::Index rank);
Beamformer projection_beamformer(const ComplexMatrix& sample_cov, const ArrayScenario& s, Eigen::Index rank);

/// U_r L_r^{-1} U_r^H a sigma_1^2 from the top-r eigenpairs of the factored estimate
/// Sigma_hat(I); rank = 0 keeps every nonzero eigenpair, i.e. pinv(Sigma_hat(I)) a sigma_1^2.
/// Throws PreconditionError when the estimate is zero.
Beamformer nystrom_beamformer(const ComplexData& x, const ArrayScenario& s, const IndexSubset& subset,
                              Eigen::Index rank = 0);

struct Sinr {
  double db = 0.0;
  bool infinite = false;
};

/// 10 log10( sum_t |w^H x(t)|^2 / sum_t |w^H z(t)|^2 ).
Sinr empirical_sinr(const ComplexVector& w, const SnapshotSet& snaps);

/// w^H Sigma w / w^H Sigma_z w in dB.
Sinr theoretical_sinr(const ComplexVector& w, const ArrayScenario& s);

/// theoretical_sinr of the optimal beamformer.
Sinr theoretical_sinr_opt(const ArrayScenario& s);

// ---------------------------------------------------------------------------
// SINR-vs-snapshots experiment

struct ExperimentConfig {
  std::vector<double> snr_db{-10.0, 10.0, 30.0};
  double inr_db = 20.0;
  Eigen::Index elements = 100;
  std::vector<Eigen::Index> snapshots;  // n grid
  std::int64_t trials = 100;
  Eigen::Index projection_rank = 7;
  Eigen::Index nystrom_rank = 7;
  /// Sensors in the Nystrom subset; 0 means 2 * nystrom_rank (capped at p).
  Eigen::Index nystrom_subset = 0;
  std::uint64_t seed = 0;
};

/// Resolved Nystrom subset size for a config.
Eigen::Index nystrom_subset_size(const ExperimentConfig& cfg);

/// n values log-spaced over [lo, hi], rounded and deduplicated.
std::vector<Eigen::Index> log_grid(Eigen::Index lo, Eigen::Index hi, int points);

/// One CSV row. Undefined cells (sample beamformer with n < p) have defined = false.
struct ExperimentRow {
  double snr_db = 0.0;
  Eigen::Index snapshots = 0;
  Method method = Method::optimal;
  std::int64_t trials = 0;
  bool defined = true;
  double mean_sinr_db = 0.0;
  double stderr_db = 0.0;
  double mean_runtime_s = 0.0;
};

/// Rows ordered by (snr, n, method). Trial t of cell (snr index a, n index b) uses the
/// stream keyed by (seed, a, b, t); SINR is averaged in the linear domain.
/// Numeric columns other than runtime are identical for both execution policies.
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& cfg, Execution exec = Execution::parallel);

/// Header plus rows: snr_db,n_snapshots,method,trials,mean_sinr_db,stderr_db,mean_runtime_s
std::string to_csv(const std::vector<ExperimentRow>& rows);

}  // namespace nystrom::beam
