#pragma once

#include "nystrom/types.hpp"

#include <span>

namespace nystrom::linalg {

/// Thin SVD A = U diag(s) V^H keeping only singular values above the rank threshold.
template <typename Scalar>
struct ThinSvd {
  Matrix<Scalar> u;
  RealVector singular_values;  // nonincreasing, all > threshold
  Matrix<Scalar> v;

  Eigen::Index rank() const { return singular_values.size(); }
};

template <typename Scalar>
ThinSvd<Scalar> thin_svd(const Matrix<Scalar>& a, const RankTolerance& tol);

/// Moore-Penrose pseudoinverse under the rank tolerance.
template <typename Scalar>
Matrix<Scalar> pinv(const Matrix<Scalar>& a, const RankTolerance& tol);

/// Rows of `a` listed in `rows`, in that order.
template <typename Scalar>
Matrix<Scalar> select_rows(const Matrix<Scalar>& a, std::span<const Eigen::Index> rows);

/// a(rows, cols).
template <typename Scalar>
Matrix<Scalar> select_block(const Matrix<Scalar>& a, std::span<const Eigen::Index> rows,
                            std::span<const Eigen::Index> cols);

/// Hermitian to `rel_tol` (relative to the largest entry) and no eigenvalue below
/// -rel_tol * (largest eigenvalue magnitude).
template <typename Scalar>
bool is_hermitian_psd(const Matrix<Scalar>& a, double rel_tol = 1e-10);

/// Eigenvalues of a Hermitian matrix, nonincreasing.
template <typename Scalar>
RealVector sorted_eigenvalues(const Matrix<Scalar>& a);

}  // namespace nystrom::linalg
