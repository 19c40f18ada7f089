#include "nystrom/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace nystrom {

template <typename Scalar>
DataMatrix<Scalar>::DataMatrix(Matrix<Scalar> entries) : entries_(std::move(entries)) {
  if (entries_.rows() < 1 || entries_.cols() < 1) throw InputError("data matrix must be at least 1x1");
  if (!entries_.allFinite()) throw InputError("data matrix contains non-finite entries");
}

template class DataMatrix<Real>;
template class DataMatrix<Complex>;

IndexSubset::IndexSubset(std::vector<Eigen::Index> indices, Eigen::Index dim)
    : indices_(std::move(indices)), dim_(dim) {
  if (dim_ < 1) throw InputError("subset dimension must be positive");
  if (indices_.empty()) throw InputError("subset must contain at least one index");
  if (static_cast<Eigen::Index>(indices_.size()) > dim_) throw InputError("subset larger than dimension");
  std::sort(indices_.begin(), indices_.end());
  for (std::size_t i = 0; i < indices_.size(); ++i) {
    if (indices_[i] < 0 || indices_[i] >= dim_)
      throw InputError("subset index " + std::to_string(indices_[i]) + " out of range [0, " +
                       std::to_string(dim_) + ")");
    if (i > 0 && indices_[i] == indices_[i - 1])
      throw InputError("duplicate subset index " + std::to_string(indices_[i]));
  }
}

IndexSubset IndexSubset::all(Eigen::Index dim) {
  std::vector<Eigen::Index> idx(static_cast<std::size_t>(dim));
  for (Eigen::Index i = 0; i < dim; ++i) idx[static_cast<std::size_t>(i)] = i;
  return IndexSubset(std::move(idx), dim);
}

bool IndexSubset::contains(Eigen::Index i) const {
  return std::binary_search(indices_.begin(), indices_.end(), i);
}

std::vector<Eigen::Index> IndexSubset::complement() const {
  std::vector<Eigen::Index> out;
  out.reserve(static_cast<std::size_t>(dim_) - indices_.size());
  auto it = indices_.begin();
  for (Eigen::Index i = 0; i < dim_; ++i) {
    if (it != indices_.end() && *it == i) {
      ++it;
      continue;
    }
    out.push_back(i);
  }
  return out;
}

std::vector<Eigen::Index> IndexSubset::permutation() const {
  std::vector<Eigen::Index> perm = indices_;
  auto rest = complement();
  perm.insert(perm.end(), rest.begin(), rest.end());
  return perm;
}

RankTolerance::RankTolerance(double eps) : eps_(eps) {
  if (!(eps > 0.0 && eps < 1.0)) throw InputError("rank tolerance must lie in (0, 1)");
}

double RankTolerance::threshold(double largest_singular_value, Eigen::Index rows, Eigen::Index cols) const {
  return eps_ * largest_singular_value * static_cast<double>(std::max(rows, cols));
}

namespace linalg {

template <typename Scalar>
ThinSvd<Scalar> thin_svd(const Matrix<Scalar>& a, const RankTolerance& tol) {
  ThinSvd<Scalar> out;
  if (a.size() == 0) {
    out.u.resize(a.rows(), 0);
    out.v.resize(a.cols(), 0);
    return out;
  }
  Eigen::JacobiSVD<Matrix<Scalar>> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const RealVector& s = svd.singularValues();
  const double cut = tol.threshold(s.size() > 0 ? s(0) : 0.0, a.rows(), a.cols());
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > cut && s(r) > 0.0) ++r;
  out.u = svd.matrixU().leftCols(r);
  out.singular_values = s.head(r);
  out.v = svd.matrixV().leftCols(r);
  return out;
}

template <typename Scalar>
Matrix<Scalar> pinv(const Matrix<Scalar>& a, const RankTolerance& tol) {
  auto svd = thin_svd(a, tol);
  Matrix<Scalar> scaled = svd.v;
  for (Eigen::Index j = 0; j < svd.rank(); ++j) scaled.col(j) /= svd.singular_values(j);
  return scaled * svd.u.adjoint();
}

template <typename Scalar>
Matrix<Scalar> select_rows(const Matrix<Scalar>& a, std::span<const Eigen::Index> rows) {
  Matrix<Scalar> out(static_cast<Eigen::Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = a.row(rows[i]);
  return out;
}

template <typename Scalar>
Matrix<Scalar> select_block(const Matrix<Scalar>& a, std::span<const Eigen::Index> rows,
                            std::span<const Eigen::Index> cols) {
  Matrix<Scalar> out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t j = 0; j < cols.size(); ++j)
    for (std::size_t i = 0; i < rows.size(); ++i)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = a(rows[i], cols[j]);
  return out;
}

template <typename Scalar>
bool is_hermitian_psd(const Matrix<Scalar>& a, double rel_tol) {
  if (a.rows() != a.cols()) return false;
  if (a.size() == 0) return true;
  const double scale = std::max(a.cwiseAbs().maxCoeff(), 1e-300);
  if ((a - a.adjoint()).cwiseAbs().maxCoeff() > rel_tol * scale) return false;
  RealVector ev = sorted_eigenvalues(a);
  const double mag = std::max(std::abs(ev(0)), std::abs(ev(ev.size() - 1)));
  return ev(ev.size() - 1) >= -rel_tol * std::max(mag, scale);
}

template <typename Scalar>
RealVector sorted_eigenvalues(const Matrix<Scalar>& a) {
  Matrix<Scalar> h = (a + a.adjoint()) / Scalar(2);
  Eigen::SelfAdjointEigenSolver<Matrix<Scalar>> es(h, Eigen::EigenvaluesOnly);
  return es.eigenvalues().reverse();
}

#define NYSTROM_INSTANTIATE(S)                                                                        \
  template struct ThinSvd<S>;                                                                         \
  template ThinSvd<S> thin_svd<S>(const Matrix<S>&, const RankTolerance&);                            \
  template Matrix<S> pinv<S>(const Matrix<S>&, const RankTolerance&);                                 \
  template Matrix<S> select_rows<S>(const Matrix<S>&, std::span<const Eigen::Index>);                 \
  template Matrix<S> select_block<S>(const Matrix<S>&, std::span<const Eigen::Index>,                 \
                                     std::span<const Eigen::Index>);                                  \
  template bool is_hermitian_psd<S>(const Matrix<S>&, double);                                        \
  template RealVector sorted_eigenvalues<S>(const Matrix<S>&);

NYSTROM_INSTANTIATE(Real)
NYSTROM_INSTANTIATE(Complex)
#undef NYSTROM_INSTANTIATE

}  // namespace linalg
}  // namespace nystrom
