#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace nystrom {

using Real = double;
using Complex = std::complex<double>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using RealMatrix = Matrix<Real>;
using RealVector = Vector<Real>;
using ComplexMatrix = Matrix<Complex>;
using ComplexVector = Vector<Complex>;

/// Loop execution policy. Both policies produce bit-identical results; the serial
/// path is the reference the parallel kernels are tested against.
enum class Execution { serial, parallel };

/// Malformed caller input: bad sizes, out-of-range indices, non-finite data.
class InputError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A mathematical precondition does not hold (e.g. a singular block that must be inverted).
class PreconditionError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// p x n matrix of column observations. Rows are coordinates, columns samples.
template <typename Scalar>
class DataMatrix {
 public:
  explicit DataMatrix(Matrix<Scalar> entries);

  const Matrix<Scalar>& entries() const { return entries_; }
  Eigen::Index dim() const { return entries_.rows(); }
  Eigen::Index samples() const { return entries_.cols(); }

 private:
  Matrix<Scalar> entries_;
};

using RealData = DataMatrix<Real>;
using ComplexData = DataMatrix<Complex>;

/// Sorted set of k distinct zero-based row indices into a p-dimensional space.
class IndexSubset {
 public:
  IndexSubset(std::vector<Eigen::Index> indices, Eigen::Index dim);

  /// The full set {0, ..., dim-1}.
  static IndexSubset all(Eigen::Index dim);

  const std::vector<Eigen::Index>& indices() const { return indices_; }
  Eigen::Index size() const { return static_cast<Eigen::Index>(indices_.size()); }
  Eigen::Index dim() const { return dim_; }
  bool contains(Eigen::Index i) const;

  /// Indices not in the subset, ascending.
  std::vector<Eigen::Index> complement() const;

  /// Subset indices followed by the complement: a permutation of {0..dim-1}.
  std::vector<Eigen::Index> permutation() const;

  bool operator==(const IndexSubset&) const = default;

 private:
  std::vector<Eigen::Index> indices_;
  Eigen::Index dim_;
};

/// Relative singular-value cutoff used for every rank / pseudoinverse decision.
/// A singular value s counts as nonzero when s > eps * s_max * max(rows, cols).
class RankTolerance {
 public:
  explicit RankTolerance(double eps = 1e-12);
  double eps() const { return eps_; }
  double threshold(double largest_singular_value, Eigen::Index rows, Eigen::Index cols) const;

 private:
  double eps_;
};

/// Factored Nystrom covariance estimate: dense form is W * W^H.
template <typename Scalar>
struct NystromEstimate {
  IndexSubset subset;
  Matrix<Scalar> factor;  // p x r
  /// Nonzero eigenvalues, nonincreasing. Empty until the spectrum is computed.
  RealVector eigenvalues;
  /// Orthonormal eigenvectors (p x r) matching `eigenvalues`.
  Matrix<Scalar> eigenvectors;

  Eigen::Index rank() const { return factor.cols(); }
  bool has_spectrum() const { return eigenvectors.cols() == factor.cols() && eigenvalues.size() == factor.cols(); }
  Matrix<Scalar> densify() const { return factor * factor.adjoint(); }
};

}  // namespace nystrom
