#include "nystrom/estimators.hpp"

#include "nystrom/linalg.hpp"
#include "nystrom/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace nystrom {

namespace {

template <typename Scalar>
void check_subset(const DataMatrix<Scalar>& x, const IndexSubset& subset) {
  if (subset.dim() != x.dim())
    throw InputError("subset dimension " + std::to_string(subset.dim()) + " does not match data dimension " +
                     std::to_string(x.dim()));
}

}  // namespace

template <typename Scalar>
Matrix<Scalar> sample_covariance(const DataMatrix<Scalar>& x) {
  const auto& a = x.entries();
  Matrix<Scalar> s = Matrix<Scalar>::Zero(a.rows(), a.rows());
  s.template selfadjointView<Eigen::Lower>().rankUpdate(a, 1.0 / static_cast<double>(a.cols()));
  return s.template selfadjointView<Eigen::Lower>();
}

template <typename Scalar>
Matrix<Scalar> schur_complement(const Matrix<Scalar>& q, const IndexSubset& subset, const RankTolerance& tol) {
  if (q.rows() != q.cols()) throw InputError("schur_complement: matrix must be square");
  if (subset.dim() != q.rows()) throw InputError("schur_complement: subset dimension mismatch");
  const auto& i = subset.indices();
  const auto j = subset.complement();
  const Matrix<Scalar> q_i = linalg::select_block(q, std::span(i), std::span(i));
  const Matrix<Scalar> q_ij = linalg::select_block(q, std::span(i), std::span(j));
  const Matrix<Scalar> q_j = linalg::select_block(q, std::span(j), std::span(j));
  Matrix<Scalar> out = q_j - q_ij.adjoint() * linalg::pinv(q_i, tol) * q_ij;
  return (out + out.adjoint()) / Scalar(2);
}

template <typename Scalar>
Matrix<Scalar> nystrom_projection(const DataMatrix<Scalar>& x, const IndexSubset& subset, const RankTolerance& tol) {
  check_subset(x, subset);
  const Matrix<Scalar> y = linalg::select_rows(x.entries(), std::span(subset.indices()));
  const auto svd = linalg::thin_svd(y, tol);
  return svd.v * svd.v.adjoint();
}

template <typename Scalar>
NystromEstimate<Scalar> nystrom_estimate(const DataMatrix<Scalar>& x, const IndexSubset& subset,
                                         const RankTolerance& tol) {
  check_subset(x, subset);
  const auto& a = x.entries();
  const auto& rows_i = subset.indices();
  const auto rows_j = subset.complement();
  const double scale = 1.0 / std::sqrt(static_cast<double>(a.cols()));

  const Matrix<Scalar> y = linalg::select_rows(a, std::span(rows_i));
  const auto svd = linalg::thin_svd(y, tol);
  const Eigen::Index r = svd.rank();

  Matrix<Scalar> w(a.rows(), r);
  const Matrix<Scalar> w_i = svd.u * svd.singular_values.asDiagonal() * scale;
  for (std::size_t t = 0; t < rows_i.size(); ++t) w.row(rows_i[t]) = w_i.row(static_cast<Eigen::Index>(t));
  for (Eigen::Index row : rows_j) w.row(row).noalias() = a.row(row) * svd.v * scale;

  NystromEstimate<Scalar> est{subset, std::move(w), {}, {}};
  return est;
}

template <typename Scalar>
void compute_spectrum(NystromEstimate<Scalar>& est) {
  const Matrix<Scalar>& w = est.factor;
  const Eigen::Index r = w.cols();
  if (r == 0) {
    est.eigenvalues.resize(0);
    est.eigenvectors.resize(w.rows(), 0);
    return;
  }
  // W = Q R, R = U_R L V_R^H  =>  W = (Q U_R) L V_R^H.
  Eigen::HouseholderQR<Matrix<Scalar>> qr(w);
  const Matrix<Scalar> q = qr.householderQ() * Matrix<Scalar>::Identity(w.rows(), r);
  const Matrix<Scalar> rr = qr.matrixQR().topRows(r).template triangularView<Eigen::Upper>();
  Eigen::JacobiSVD<Matrix<Scalar>> svd(rr, Eigen::ComputeFullU);
  est.eigenvalues = svd.singularValues().array().square().matrix();
  est.eigenvectors = q * svd.matrixU();
}

template <typename Scalar>
NystromEstimate<Scalar> nystrom_eig(const DataMatrix<Scalar>& x, const IndexSubset& subset, const RankTolerance& tol) {
  auto est = nystrom_estimate(x, subset, tol);
  compute_spectrum(est);
  return est;
}

template <typename Scalar>
ShrinkageCoefficients ledoit_wolf_coefficients(const DataMatrix<Scalar>& x, const Matrix<Scalar>& s) {
  const auto& a = x.entries();
  const Eigen::Index p = a.rows();
  const Eigen::Index n = a.cols();
  if (n < 2) throw InputError("ledoit_wolf: need at least two samples");
  if (s.rows() != p || s.cols() != p) throw InputError("ledoit_wolf: covariance size mismatch");

  ShrinkageCoefficients c;
  c.target = std::real(s.trace()) / static_cast<double>(p);
  Matrix<Scalar> centered = s;
  centered.diagonal().array() -= Scalar(c.target);
  const double d2 = centered.squaredNorm();
  if (d2 <= 0.0) return c;

  // sum_t ||x_t x_t^H - S||_F^2 = sum_t ||x_t||^4 - n ||S||_F^2
  const double fourth = a.colwise().squaredNorm().array().square().sum();
  const double bbar2 = std::max(0.0, (fourth - static_cast<double>(n) * s.squaredNorm())) /
                       (static_cast<double>(n) * static_cast<double>(n));
  c.weight = std::min(bbar2, d2) / d2;
  return c;
}

template <typename Scalar>
Matrix<Scalar> ledoit_wolf_estimate(const DataMatrix<Scalar>& x, const Matrix<Scalar>& s) {
  const auto c = ledoit_wolf_coefficients(x, s);
  if (c.weight == 0.0) return s;
  Matrix<Scalar> out = (1.0 - c.weight) * s;
  out.diagonal().array() += Scalar(c.weight * c.target);
  return out;
}

template <typename Scalar>
Matrix<Scalar> ledoit_wolf_estimate(const DataMatrix<Scalar>& x) {
  return ledoit_wolf_estimate(x, sample_covariance(x));
}

IndexSubset uniform_subset(Eigen::Index p, Eigen::Index k, std::uint64_t seed) {
  if (p < 1) throw InputError("uniform_subset: dimension must be positive");
  if (k < 1 || k > p)
    throw InputError("uniform_subset: size " + std::to_string(k) + " not in [1, " + std::to_string(p) + "]");
  std::vector<Eigen::Index> pool(static_cast<std::size_t>(p));
  std::iota(pool.begin(), pool.end(), Eigen::Index{0});
  auto rng = make_stream(seed, {0x5eb5e7ULL});
  for (Eigen::Index i = 0; i < k; ++i) {
    std::uniform_int_distribution<Eigen::Index> pick(i, p - 1);
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return IndexSubset(std::move(pool), p);
}

#define NYSTROM_INSTANTIATE(S)                                                                              \
  template Matrix<S> sample_covariance<S>(const DataMatrix<S>&);                                            \
  template Matrix<S> schur_complement<S>(const Matrix<S>&, const IndexSubset&, const RankTolerance&);       \
  template Matrix<S> nystrom_projection<S>(const DataMatrix<S>&, const IndexSubset&, const RankTolerance&); \
  template NystromEstimate<S> nystrom_estimate<S>(const DataMatrix<S>&, const IndexSubset&,                 \
                                                  const RankTolerance&);                                    \
  template NystromEstimate<S> nystrom_eig<S>(const DataMatrix<S>&, const IndexSubset&, const RankTolerance&); \
  template void compute_spectrum<S>(NystromEstimate<S>&);                                                   \
  template ShrinkageCoefficients ledoit_wolf_coefficients<S>(const DataMatrix<S>&, const Matrix<S>&);       \
  template Matrix<S> ledoit_wolf_estimate<S>(const DataMatrix<S>&);                                         \
  template Matrix<S> ledoit_wolf_estimate<S>(const DataMatrix<S>&, const Matrix<S>&);

NYSTROM_INSTANTIATE(Real)
NYSTROM_INSTANTIATE(Complex)
#undef NYSTROM_INSTANTIATE

}  // namespace nystrom
