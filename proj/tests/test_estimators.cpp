#include "nystrom/estimators.hpp"
#include "nystrom/linalg.hpp"
#include "nystrom/random.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

#include <limits>
#include <map>

using namespace nystrom;
using testutil::dense_nystrom;
using testutil::rel_diff;

namespace {

RealData data(std::initializer_list<std::initializer_list<double>> rows) {
  RealMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    Eigen::Index j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return RealData(m);
}

}  // namespace

// ---- types --------------------------------------------------------------

TEST(DataMatrix, RejectsNonFiniteAndEmpty) {
  RealMatrix m = RealMatrix::Ones(2, 2);
  m(1, 0) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(RealData{m}, InputError);
  m(1, 0) = std::numeric_limits<double>::infinity();
  EXPECT_THROW(RealData{m}, InputError);
  EXPECT_THROW(RealData{RealMatrix(0, 3)}, InputError);
  EXPECT_THROW(RealData{RealMatrix(3, 0)}, InputError);
}

TEST(IndexSubset, ValidatesAndSorts) {
  const IndexSubset s({3, 0, 2}, 5);
  EXPECT_EQ(s.indices(), (std::vector<Eigen::Index>{0, 2, 3}));
  EXPECT_EQ(s.complement(), (std::vector<Eigen::Index>{1, 4}));
  EXPECT_EQ(s.permutation(), (std::vector<Eigen::Index>{0, 2, 3, 1, 4}));
  EXPECT_TRUE(s.contains(2));
  EXPECT_FALSE(s.contains(1));
  EXPECT_THROW(IndexSubset({0, 5}, 5), InputError);
  EXPECT_THROW(IndexSubset({-1}, 5), InputError);
  EXPECT_THROW(IndexSubset({1, 1}, 5), InputError);
  EXPECT_THROW(IndexSubset({}, 5), InputError);
}

TEST(RankTolerance, RangeAndThreshold) {
  EXPECT_THROW(RankTolerance(0.0), InputError);
  EXPECT_THROW(RankTolerance(1.0), InputError);
  EXPECT_DOUBLE_EQ(RankTolerance(1e-12).threshold(2.0, 3, 5), 1e-12 * 2.0 * 5);
}

// ---- sample covariance -----------------------------------------------------

TEST(SampleCovariance, IdentityData) {
  const RealMatrix s = sample_covariance(RealData(RealMatrix::Identity(2, 2)));
  EXPECT_TRUE(s.isApprox(0.5 * RealMatrix::Identity(2, 2)));
}

TEST(SampleCovariance, TwoByTwoMatchesLoop) {
  const RealData x = data({{2, 0}, {1, 1}});
  RealMatrix expect(2, 2);
  expect << 2, 1, 1, 1;
  RealMatrix loop = RealMatrix::Zero(2, 2);
  for (int t = 0; t < 2; ++t)
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) loop(i, j) += x.entries()(i, t) * x.entries()(j, t) / 2.0;
  const RealMatrix s = sample_covariance(x);
  EXPECT_LT((s - expect).norm(), 1e-15);
  EXPECT_LT((s - loop).norm(), 1e-15);
}

TEST(SampleCovariance, SymmetricPsd) {
  std::mt19937_64 rng(7);
  for (int rep = 0; rep < 20; ++rep) {
    const RealMatrix s = sample_covariance(RealData(testutil::gaussian(6, 3 + rep % 5, rng)));
    EXPECT_EQ(s, s.transpose());
    EXPECT_TRUE(linalg::is_hermitian_psd(s));
  }
}

// ---- Schur complement ----------------------------------------------------

TEST(SchurComplement, TwoByTwo) {
  RealMatrix q(2, 2);
  q << 4, 2, 2, 2;
  const RealMatrix r = schur_complement(q, IndexSubset({0}, 2));
  ASSERT_EQ(r.rows(), 1);
  EXPECT_NEAR(r(0, 0), 2.0 - 2.0 * 0.25 * 2.0, 1e-15);
  EXPECT_NEAR(r(0, 0), 1.0, 1e-15);
}

TEST(SchurComplement, IdentityGivesIdentity) {
  const RealMatrix r = schur_complement(RealMatrix(RealMatrix::Identity(6, 6)), IndexSubset({1, 4}, 6));
  EXPECT_TRUE(r.isApprox(RealMatrix::Identity(4, 4)));
}

TEST(SchurComplement, RankKVanishes) {
  std::mt19937_64 rng(3);
  const RealMatrix a = testutil::gaussian(7, 3, rng);
  const RealMatrix q = a * a.transpose();
  const RealMatrix r = schur_complement(q, IndexSubset({0, 2, 5}, 7));
  EXPECT_LT(r.norm(), 1e-10 * q.norm());
}

TEST(SchurComplement, SingularBlockUsesPseudoinverse) {
  RealMatrix q = RealMatrix::Zero(3, 3);
  q(2, 2) = 5.0;
  const RealMatrix r = schur_complement(q, IndexSubset({0}, 3));
  EXPECT_TRUE(r.isApprox(q.bottomRightCorner(2, 2)));
}

// ---- projection ----------------------------------------------------------

TEST(NystromProjection, SingleRow) {
  const RealMatrix p = nystrom_projection(data({{2, 0}, {5, 7}}), IndexSubset({0}, 2));
  RealMatrix expect(2, 2);
  expect << 1, 0, 0, 0;
  EXPECT_LT((p - expect).norm(), 1e-14);
}

TEST(NystromProjection, FullRowSpaceIsIdentity) {
  std::mt19937_64 rng(11);
  const RealData x(testutil::gaussian(6, 4, rng));
  const RealMatrix p = nystrom_projection(x, IndexSubset({0, 1, 3, 5}, 6));
  EXPECT_LT((p - RealMatrix::Identity(4, 4)).norm(), 1e-12);
}

TEST(NystromProjection, ZeroRowIsZero) {
  const RealMatrix p = nystrom_projection(data({{0, 0, 0}, {1, 2, 3}}), IndexSubset({0}, 2));
  EXPECT_EQ(p.norm(), 0.0);
}

TEST(NystromProjection, ProjectionLaws) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 50; ++rep) {
    const Eigen::Index p = 3 + rep % 6, n = 2 + rep % 7, k = 1 + rep % p;
    const RealData x(testutil::gaussian(p, n, rng));
    const RealMatrix proj = nystrom_projection(x, uniform_subset(p, k, rep));
    const double tol = 1e-10 * static_cast<double>(n);
    EXPECT_LE((proj * proj - proj).norm(), tol);
    EXPECT_LE((proj - proj.transpose()).norm(), tol);
    const double rank = static_cast<double>(std::min(k, n));
    EXPECT_NEAR(proj.trace(), rank, 1e-9);
  }
}

TEST(NystromProjection, ComplexLaws) {
  std::mt19937_64 rng(15);
  const ComplexData x(testutil::complex_gaussian(6, 5, rng));
  const ComplexMatrix proj = nystrom_projection(x, IndexSubset({1, 4}, 6));
  EXPECT_LT((proj * proj - proj).norm(), 1e-12);
  EXPECT_LT((proj - proj.adjoint()).norm(), 1e-12);
  EXPECT_NEAR(proj.trace().real(), 2.0, 1e-12);
}

// ---- estimate ------------------------------------------------------------

TEST(NystromEstimate, HandExample) {
  const RealMatrix s = nystrom_estimate(data({{2, 0}, {1, 1}}), IndexSubset({0}, 2)).densify();
  RealMatrix expect(2, 2);
  expect << 2, 1, 1, 0.5;
  EXPECT_LT((s - expect).norm(), 1e-14);
}

TEST(NystromEstimate, MatchesDenseFormula) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index p = 2 + rep % 12, n = 1 + rep % 9, k = 1 + rep % p;
    const RealMatrix x = testutil::gaussian(p, n, rng);
    const IndexSubset sub = uniform_subset(p, k, 100 + rep);
    const RealMatrix est = nystrom_estimate(RealData(x), sub).densify();
    EXPECT_LT(rel_diff(est, dense_nystrom(x, sub.indices())), 1e-10) << "rep " << rep;
  }
}

TEST(NystromEstimate, BlockReconstruction) {
  std::mt19937_64 rng(22);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index p = 3 + rep % 10, n = 2 + rep % 15, k = 1 + rep % (p - 1);
    const RealData x(testutil::gaussian(p, n, rng));
    const IndexSubset sub = uniform_subset(p, k, rep);
    const RealMatrix s = sample_covariance(x);
    const RealMatrix e = nystrom_estimate(x, sub).densify();
    const auto& i = sub.indices();
    const auto j = sub.complement();
    const RealMatrix ds = linalg::select_block<Real>(s, i, i), de = linalg::select_block<Real>(e, i, i);
    EXPECT_LE((ds - de).cwiseAbs().maxCoeff(), 1e-12 * s.cwiseAbs().maxCoeff());
    const RealMatrix os = linalg::select_block<Real>(s, i, j), oe = linalg::select_block<Real>(e, i, j);
    EXPECT_LE((os - oe).cwiseAbs().maxCoeff(), 1e-12 * s.cwiseAbs().maxCoeff());
  }
}

TEST(NystromEstimate, ResidualIsSchurComplement) {
  std::mt19937_64 rng(23);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index p = 3 + rep % 10, n = 2 + rep % 15, k = 1 + rep % (p - 1);
    const RealData x(testutil::gaussian(p, n, rng));
    const IndexSubset sub = uniform_subset(p, k, rep);
    const RealMatrix s = sample_covariance(x);
    const RealMatrix resid = s - nystrom_estimate(x, sub).densify();
    const auto j = sub.complement();
    const RealMatrix rj = linalg::select_block<Real>(resid, j, j);
    EXPECT_LE((rj - schur_complement(s, sub)).norm(), 1e-10 * std::max(1.0, s.norm()));
    // everything outside J x J vanishes
    RealMatrix outside = resid;
    for (auto a : j)
      for (auto b : j) outside(a, b) = 0.0;
    EXPECT_LE(outside.norm(), 1e-10 * std::max(1.0, s.norm()));
    EXPECT_GE(Eigen::SelfAdjointEigenSolver<RealMatrix>(resid).eigenvalues().minCoeff(), -1e-10 * s.norm());
  }
}

TEST(NystromEstimate, HermitianPsdAndRankBound) {
  std::mt19937_64 rng(24);
  for (int rep = 0; rep < 60; ++rep) {
    const Eigen::Index p = 2 + rep % 10, n = 1 + rep % 8, k = 1 + rep % p;
    const RealData x(testutil::gaussian(p, n, rng));
    const auto est = nystrom_estimate(x, uniform_subset(p, k, rep));
    EXPECT_LE(est.rank(), std::min(k, n));
    EXPECT_TRUE(linalg::is_hermitian_psd(est.densify()));
  }
}

TEST(NystromEstimate, ExactWhenProjectionSpansRowSpace) {
  std::mt19937_64 rng(25);
  // rank-3 data: any 3 generic rows span the row space
  const RealMatrix x = testutil::gaussian(8, 3, rng) * testutil::gaussian(3, 10, rng);
  const RealMatrix s = sample_covariance(RealData(x));
  const RealMatrix e = nystrom_estimate(RealData(x), IndexSubset({1, 4, 6}, 8)).densify();
  EXPECT_LE((e - s).norm(), 1e-10 * s.norm());
  // and trivially with n <= k
  const RealMatrix y = testutil::gaussian(8, 3, rng);
  const RealMatrix sy = sample_covariance(RealData(y));
  EXPECT_LE((nystrom_estimate(RealData(y), IndexSubset({0, 2, 7}, 8)).densify() - sy).norm(), 1e-10 * sy.norm());
}

TEST(NystromEstimate, ZeroRowDropsOut) {
  std::mt19937_64 rng(26);
  RealMatrix x = testutil::gaussian(6, 5, rng);
  x.row(2).setZero();
  const RealMatrix with = nystrom_estimate(RealData(x), IndexSubset({0, 2, 4}, 6)).densify();
  const RealMatrix without = nystrom_estimate(RealData(x), IndexSubset({0, 4}, 6)).densify();
  EXPECT_LT(rel_diff(with, without), 1e-12);
  EXPECT_LT(rel_diff(with, dense_nystrom(x, {0, 4})), 1e-10);
}

TEST(NystromEstimate, WeylShrinkage) {
  std::mt19937_64 rng(27);
  for (int rep = 0; rep < 200; ++rep) {
    const Eigen::Index p = 2 + rep % 19, n = 1 + rep % 13, k = 1 + rep % p;
    const RealData x(testutil::gaussian(p, n, rng));
    const RealVector ls = linalg::sorted_eigenvalues<Real>(sample_covariance(x));
    const RealVector le = linalg::sorted_eigenvalues<Real>(nystrom_estimate(x, uniform_subset(p, k, rep)).densify());
    for (Eigen::Index i = 0; i < p; ++i) EXPECT_LE(le(i), ls(i) + 1e-10);
  }
}

TEST(NystromEstimate, ComplexMatchesDense) {
  std::mt19937_64 rng(28);
  for (int rep = 0; rep < 30; ++rep) {
    const Eigen::Index p = 3 + rep % 8, n = 2 + rep % 6, k = 1 + rep % p;
    const ComplexMatrix x = testutil::complex_gaussian(p, n, rng);
    const IndexSubset sub = uniform_subset(p, k, rep);
    const ComplexMatrix e = nystrom_estimate(ComplexData(x), sub).densify();
    EXPECT_LT(rel_diff(e, dense_nystrom(x, sub.indices())), 1e-10);
    EXPECT_TRUE(linalg::is_hermitian_psd(e));
  }
}

// ---- eigendecomposition ----------------------------------------------------

TEST(NystromEig, SmallInstanceMatchesDenseSolver) {
  const RealData x = data({{1, 0, 2}, {0, 3, 1}, {1, 1, 0}});
  const IndexSubset sub({0, 2}, 3);
  const auto est = nystrom_eig(x, sub);
  const RealMatrix dense = dense_nystrom(x.entries(), sub.indices());
  Eigen::SelfAdjointEigenSolver<RealMatrix> es(dense);
  const RealVector ref = es.eigenvalues().reverse();
  ASSERT_EQ(est.rank(), 2);
  for (Eigen::Index i = 0; i < 2; ++i) {
    EXPECT_NEAR(est.eigenvalues(i), ref(i), 1e-8 * ref(0));
    EXPECT_LT((dense * est.eigenvectors.col(i) - est.eigenvalues(i) * est.eigenvectors.col(i)).norm(), 1e-8 * ref(0));
  }
  EXPECT_NEAR(ref(2), 0.0, 1e-12);
}

TEST(NystromEig, RankOne) {
  const double c = 3.0;
  RealMatrix x = RealMatrix::Zero(4, 6);
  x.row(0).setConstant(c);
  const auto est = nystrom_eig(RealData(x), IndexSubset({0, 3}, 4));
  ASSERT_EQ(est.rank(), 1);
  EXPECT_NEAR(est.eigenvalues(0), c * c, 1e-12);
  EXPECT_NEAR(std::abs(est.eigenvectors(0, 0)), 1.0, 1e-12);
}

TEST(NystromEig, FullSubsetGivesSampleSpectrum) {
  std::mt19937_64 rng(31);
  const RealData x(testutil::gaussian(5, 9, rng));
  const auto est = nystrom_eig(x, IndexSubset::all(5));
  const RealVector ref = linalg::sorted_eigenvalues<Real>(sample_covariance(x));
  ASSERT_EQ(est.rank(), 5);
  EXPECT_LT((est.eigenvalues - ref).norm(), 1e-10 * ref(0));
}

TEST(NystromEig, ResidualAndOrthonormality) {
  std::mt19937_64 rng(32);
  for (int rep = 0; rep < 100; ++rep) {
    const Eigen::Index p = 2 + rep % 49, n = 1 + rep % 40, k = 1 + rep % std::min<Eigen::Index>(p, 10);
    const RealData x(testutil::gaussian(p, n, rng));
    const auto est = nystrom_eig(x, uniform_subset(p, k, rep));
    ASSERT_TRUE(est.has_spectrum());
    const RealMatrix dense = est.densify();
    const double lmax = est.eigenvalues.size() ? est.eigenvalues(0) : 0.0;
    for (Eigen::Index i = 0; i < est.rank(); ++i) {
      const RealVector u = est.eigenvectors.col(i);
      EXPECT_LE((dense * u - est.eigenvalues(i) * u).norm(), 1e-8 * lmax);
      if (i > 0) EXPECT_LE(est.eigenvalues(i), est.eigenvalues(i - 1));
      EXPECT_GE(est.eigenvalues(i), 0.0);
    }
    const RealMatrix gram = est.eigenvectors.transpose() * est.eigenvectors;
    EXPECT_LT((gram - RealMatrix::Identity(est.rank(), est.rank())).norm(), 1e-10);
  }
}

TEST(NystromEig, ComplexResidual) {
  std::mt19937_64 rng(33);
  const ComplexData x(testutil::complex_gaussian(20, 12, rng));
  const auto est = nystrom_eig(x, IndexSubset({0, 3, 7, 11, 19}, 20));
  const ComplexMatrix dense = testutil::dense_nystrom(x.entries(), est.subset.indices());
  for (Eigen::Index i = 0; i < est.rank(); ++i) {
    const ComplexVector u = est.eigenvectors.col(i);
    EXPECT_LE((dense * u - est.eigenvalues(i) * u).norm(), 1e-8 * est.eigenvalues(0));
  }
}

TEST(NystromEig, ZeroDataHasEmptySpectrum) {
  const auto est = nystrom_eig(RealData(RealMatrix::Zero(4, 3)), IndexSubset({1}, 4));
  EXPECT_EQ(est.rank(), 0);
  EXPECT_EQ(est.densify().norm(), 0.0);
}

// ---- Ledoit-Wolf -----------------------------------------------------------

TEST(LedoitWolf, ScaledIdentityUnchanged) {
  RealMatrix x(2, 4);
  x << 1, -1, 0, 0, 0, 0, 1, -1;
  const RealMatrix s = sample_covariance(RealData(x));
  ASSERT_TRUE(s.isApprox(0.5 * RealMatrix::Identity(2, 2)));
  EXPECT_TRUE(ledoit_wolf_estimate(RealData(x)).isApprox(s));
}

TEST(LedoitWolf, CoefficientsMatchBruteForce) {
  std::mt19937_64 rng(41);
  for (int rep = 0; rep < 20; ++rep) {
    const Eigen::Index p = 3 + rep % 6, n = 2 + rep % 9;
    const RealMatrix x = testutil::gaussian(p, n, rng);
    const RealMatrix s = x * x.transpose() / static_cast<double>(n);
    const double m = s.trace() / static_cast<double>(p);
    const double d2 = (s - m * RealMatrix::Identity(p, p)).squaredNorm();
    double b2 = 0.0;
    for (Eigen::Index t = 0; t < n; ++t) b2 += (x.col(t) * x.col(t).transpose() - s).squaredNorm();
    b2 = std::min(b2 / static_cast<double>(n * n), d2);
    const RealMatrix expect = (b2 / d2) * m * RealMatrix::Identity(p, p) + (1.0 - b2 / d2) * s;
    EXPECT_LT(rel_diff(ledoit_wolf_estimate(RealData(x)), expect), 1e-12);
    const auto c = ledoit_wolf_coefficients(RealData(x), s);
    EXPECT_NEAR(c.weight, b2 / d2, 1e-12);
    EXPECT_NEAR(c.target, m, 1e-12);
  }
}

TEST(LedoitWolf, ComplexBruteForce) {
  std::mt19937_64 rng(42);
  const ComplexMatrix x = testutil::complex_gaussian(5, 7, rng);
  const ComplexMatrix s = x * x.adjoint() / 7.0;
  const double m = s.trace().real() / 5.0;
  const double d2 = (s - m * ComplexMatrix::Identity(5, 5)).squaredNorm();
  double b2 = 0.0;
  for (Eigen::Index t = 0; t < 7; ++t) b2 += (x.col(t) * x.col(t).adjoint() - s).squaredNorm();
  b2 = std::min(b2 / 49.0, d2);
  const ComplexMatrix expect = (b2 / d2) * m * ComplexMatrix::Identity(5, 5) + (1.0 - b2 / d2) * s;
  EXPECT_LT(rel_diff(ledoit_wolf_estimate(ComplexData(x)), expect), 1e-12);
}

TEST(LedoitWolf, RepeatedColumnIsConvexCombination) {
  RealMatrix x(3, 4);
  for (int t = 0; t < 4; ++t) x.col(t) << 1, 2, -1;
  const auto c = ledoit_wolf_coefficients(RealData(x), sample_covariance(RealData(x)));
  EXPECT_GE(c.weight, 0.0);
  EXPECT_LE(c.weight, 1.0);
}

TEST(LedoitWolf, WeightShrinksWithSamples) {
  const RealMatrix sigma = RealVector::LinSpaced(6, 1.0, 4.0).asDiagonal();
  const Eigen::LLT<RealMatrix> llt(sigma);
  double prev = 1.0;
  for (Eigen::Index n : {10, 100, 1000, 10000}) {
    double mean = 0.0;
    for (int rep = 0; rep < 20; ++rep) {
      auto rng = make_stream(9, {static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(rep)});
      const RealData x(RealMatrix(llt.matrixL() * testutil::gaussian(6, n, rng)));
      mean += ledoit_wolf_coefficients(x, sample_covariance(x)).weight / 20.0;
    }
    EXPECT_LT(mean, prev);
    prev = mean;
  }
  EXPECT_LT(prev, 0.01);
}

TEST(LedoitWolf, NeedsTwoSamples) { EXPECT_THROW(ledoit_wolf_estimate(RealData(RealMatrix::Ones(3, 1))), InputError); }

// ---- subset sampling -------------------------------------------------------

TEST(UniformSubset, FullAndDeterministic) {
  EXPECT_EQ(uniform_subset(5, 5, 1), IndexSubset::all(5));
  EXPECT_EQ(uniform_subset(50, 7, 123), uniform_subset(50, 7, 123));
  EXPECT_THROW(uniform_subset(4, 5, 0), InputError);
  EXPECT_THROW(uniform_subset(4, 0, 0), InputError);
}

TEST(UniformSubset, BinaryFrequency) {
  int first = 0;
  const int seeds = 100000;
  for (int s = 0; s < seeds; ++s) first += uniform_subset(2, 1, static_cast<std::uint64_t>(s)).indices()[0] == 0;
  EXPECT_NEAR(static_cast<double>(first) / seeds, 0.5, 0.01);
}

TEST(UniformSubset, PairFrequenciesChiSquare) {
  // all C(5,2) = 10 subsets should be equally likely
  std::map<std::vector<Eigen::Index>, int> counts;
  const int draws = 50000;
  for (int s = 0; s < draws; ++s) ++counts[uniform_subset(5, 2, static_cast<std::uint64_t>(s)).indices()];
  ASSERT_EQ(counts.size(), 10u);
  double chi2 = 0.0;
  for (const auto& [k, c] : counts) chi2 += std::pow(c - draws / 10.0, 2) / (draws / 10.0);
  EXPECT_LT(chi2, 27.88);  // 0.999 quantile, 9 dof
}
