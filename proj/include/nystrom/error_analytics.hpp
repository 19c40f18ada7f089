#pragma once

#include "nystrom/types.hpp"

#include <cstdint>

namespace nystrom::analytics {

/// Gaussian ground truth: columns x_t ~ N(0, sigma), n samples per dataset.
class GroundTruthModel {
 public:
  GroundTruthModel(RealMatrix sigma, Eigen::Index samples);

  const RealMatrix& sigma() const { return sigma_; }
  /// Lower Cholesky factor L with L L^T = sigma.
  const RealMatrix& cholesky() const { return chol_; }
  Eigen::Index dim() const { return sigma_.rows(); }
  Eigen::Index samples() const { return n_; }

 private:
  RealMatrix sigma_;
  RealMatrix chol_;
  Eigen::Index n_;
};

/// E[Sigma_hat(I)]: the I and IJ blocks equal those of sigma, and the J block is
/// (k/n) Sigma_J + ((n-k)/n) Sigma_IJ^T Sigma_I^{-1} Sigma_IJ.
RealMatrix expected_nystrom(const GroundTruthModel& model, const IndexSubset& subset);

/// sigma - E[Sigma_hat(I)]; nonzero only on J x J, where it is ((n-k)/n) (sigma / sigma_I).
RealMatrix nystrom_bias(const GroundTruthModel& model, const IndexSubset& subset);

/// (1/n) [tr(sigma^2) + tr(sigma)^2].
double sample_mse(const GroundTruthModel& model);

/// The two algebraic forms of the Nystrom Frobenius MSE.
struct MseForms {
  double trace_form;      // MSE(S) + (n-k)/n^2 [(n-k-1) tr(A^2) - tr(A)^2]
  double frobenius_form;  // MSE(S) + (n-k)^2/n^2 [||A||_F^2 - MSE(A_hat)]
};
MseForms nystrom_mse_forms(const GroundTruthModel& model, const IndexSubset& subset);

/// E ||sigma - Sigma_hat(I)||_F^2. Throws std::logic_error if the two forms disagree
/// beyond 1e-9 relative.
double nystrom_mse(const GroundTruthModel& model, const IndexSubset& subset);

/// MSE(S) + (n-k)(n-p-1)/n^2 tr(A^2); tight when sigma = I.
double mse_lower_bound(const GroundTruthModel& model, const IndexSubset& subset);

struct ErrorReport {
  RealMatrix analytic_bias;
  double analytic_mse = 0.0;
  RealMatrix empirical_bias;
  RealMatrix bias_standard_error;  // entrywise
  double empirical_mse = 0.0;
  std::int64_t trials = 0;
  double standard_error = 0.0;  // of empirical_mse

  /// |empirical - analytic| / standard error for the MSE (0 if both agree exactly).
  double mse_zscore() const;
  /// Largest entrywise |empirical bias - analytic bias| / standard error.
  double max_bias_zscore() const;
  bool agrees(double nsigma = 4.0) const { return mse_zscore() <= nsigma && max_bias_zscore() <= nsigma; }
};

/// Draws `trials` independent datasets X = L G (G standard normal, p x n), forms the
/// Nystrom estimate for `subset` and accumulates mean estimate and squared Frobenius
/// error. Trial t draws from the stream keyed by (seed, t); trials are summed in
/// fixed blocks merged in block order, so the report does not depend on `exec` or
/// on the thread count.
ErrorReport monte_carlo_verify(const GroundTruthModel& model, const IndexSubset& subset, std::int64_t trials,
                               std::uint64_t seed, Execution exec = Execution::parallel);

/// Random symmetric positive definite matrix Q diag(d) Q^T with eigenvalues d in [0.5, 3].
RealMatrix random_spd(Eigen::Index p, std::uint64_t seed);

}  // namespace nystrom::analytics
