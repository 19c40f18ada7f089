#pragma once

#include "nystrom/types.hpp"

#include <cstdint>

namespace nystrom {

/// S = (1/n) X X^H.
template <typename Scalar>
Matrix<Scalar> sample_covariance(const DataMatrix<Scalar>& x);

/// Q_J - Q_IJ^H pinv(Q_I) Q_IJ for a PSD matrix Q, where J is the complement of I.
/// Rows/columns of the result follow the ascending order of J.
template <typename Scalar>
Matrix<Scalar> schur_complement(const Matrix<Scalar>& q, const IndexSubset& subset,
                                const RankTolerance& tol = RankTolerance{});

/// n x n orthogonal projection onto the span of the rows of X selected by `subset`.
template <typename Scalar>
Matrix<Scalar> nystrom_projection(const DataMatrix<Scalar>& x, const IndexSubset& subset,
                                  const RankTolerance& tol = RankTolerance{});

/// Nystrom covariance estimate (1/n) X P(I) X^H in factored form W W^H.
///
/// With the thin SVD X_I = U_X D_X V_X^H the factor is
///   W_I = U_X D_X / sqrt(n),   W_J = X_J V_X / sqrt(n),
/// so the I and IJ blocks of W W^H reproduce those of the sample covariance.
/// Cost is O(p n r) and no p x p matrix is formed.
template <typename Scalar>
NystromEstimate<Scalar> nystrom_estimate(const DataMatrix<Scalar>& x, const IndexSubset& subset,
                                         const RankTolerance& tol = RankTolerance{});

/// As nystrom_estimate, plus the r nonzero eigenpairs of W W^H taken from the
/// thin SVD of W (QR of W followed by an r x r SVD). O(p n r + p r^2).
template <typename Scalar>
NystromEstimate<Scalar> nystrom_eig(const DataMatrix<Scalar>& x, const IndexSubset& subset,
                                    const RankTolerance& tol = RankTolerance{});

/// Adds the spectrum to an estimate that only carries its factor.
template <typename Scalar>
void compute_spectrum(NystromEstimate<Scalar>& estimate);

struct ShrinkageCoefficients {
  double weight = 0.0;  // b^2 / d^2, in [0, 1]
  double target = 0.0;  // m = tr(S) / p
};

/// Plug-in Ledoit-Wolf coefficients for the target m I.
template <typename Scalar>
ShrinkageCoefficients ledoit_wolf_coefficients(const DataMatrix<Scalar>& x, const Matrix<Scalar>& s);

/// weight * m I + (1 - weight) * S. Returns S unchanged when S is already a multiple of I.
template <typename Scalar>
Matrix<Scalar> ledoit_wolf_estimate(const DataMatrix<Scalar>& x);

/// Same, reusing a precomputed sample covariance.
template <typename Scalar>
Matrix<Scalar> ledoit_wolf_estimate(const DataMatrix<Scalar>& x, const Matrix<Scalar>& s);

/// Uniformly random k-subset of {0, ..., p-1}; deterministic in `seed`.
IndexSubset uniform_subset(Eigen::Index p, Eigen::Index k, std::uint64_t seed);

}  // namespace nystrom
