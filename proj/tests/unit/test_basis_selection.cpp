#include <algorithm>
#include <numeric>

#include <gtest/gtest.h>

#include "blurgp/basis_selection.hpp"
#include "blurgp/error.hpp"
#include "test_util.hpp"

namespace blurgp {
namespace {

Matrix blobs(testing::Rng& rng, int per, const std::vector<Vector>& centers, double sd) {
  Matrix x(per * static_cast<int>(centers.size()), centers.front().size());
  int r = 0;
  for (const auto& c : centers) {
    for (int i = 0; i < per; ++i, ++r) {
      for (Eigen::Index j = 0; j < c.size(); ++j) x(r, j) = c[j] + sd * rng.normal();
    }
  }
  return x;
}

TEST(Kmeans, RecoversSeparatedBlobs) {
  testing::Rng rng(1);
  const std::vector<Vector> truth{Vector::Constant(2, -5.0), Vector::Constant(2, 5.0),
                                  (Vector(2) << 5.0, -5.0).finished()};
  const Matrix x = blobs(rng, 30, truth, 0.3);
  const Clustering c = kmeans(x, 3, 7);
  for (const auto& t : truth) {
    double best = 1e9;
    for (Eigen::Index k = 0; k < 3; ++k) best = std::min(best, (c.centers.row(k).transpose() - t).norm());
    EXPECT_LT(best, 0.3);
  }
  EXPECT_EQ(std::accumulate(c.counts.begin(), c.counts.end(), 0), 90);
  for (int n : c.counts) EXPECT_EQ(n, 30);
}

TEST(Kmeans, DeterministicGivenSeed) {
  testing::Rng rng(2);
  const Matrix x = blobs(rng, 40, {Vector::Zero(2)}, 1.0);
  const Clustering a = kmeans(x, 5, 11);
  const Clustering b = kmeans(x, 5, 11);
  EXPECT_EQ(a.centers, b.centers);
  EXPECT_EQ(a.assignment, b.assignment);
}

TEST(Kmeans, ObjectiveNeverIncreases) {
  testing::Rng rng(3);
  for (int t = 0; t < 10; ++t) {
    const Matrix x = blobs(rng, 50, {Vector::Zero(2)}, 1.0);
    const Clustering c = kmeans(x, 6, static_cast<std::uint64_t>(t));
    for (std::size_t i = 1; i < c.objective_history.size(); ++i) {
      EXPECT_LE(c.objective_history[i], c.objective_history[i - 1] * (1 + 1e-12));
    }
  }
}

TEST(Kmeans, EveryClusterNonEmptyAndCentersAreMeans) {
  testing::Rng rng(4);
  const Matrix x = blobs(rng, 20, {Vector::Zero(2)}, 1.0);
  const Clustering c = kmeans(x, 20, 3);
  Matrix sums = Matrix::Zero(20, 2);
  for (Eigen::Index i = 0; i < x.rows(); ++i) sums.row(c.assignment[i]) += x.row(i);
  for (int k = 0; k < 20; ++k) {
    ASSERT_GT(c.counts[k], 0);
    EXPECT_LE((sums.row(k) / c.counts[k] - c.centers.row(k)).norm(), 1e-12);
  }
}

TEST(Kmeans, MEqualsNGivesOnePointPerCluster) {
  testing::Rng rng(5);
  const Matrix x = blobs(rng, 7, {Vector::Zero(2)}, 1.0);
  const Clustering c = kmeans(x, 7, 1);
  for (int n : c.counts) EXPECT_EQ(n, 1);
}

TEST(Kmeans, RejectsBadM) {
  const Matrix x = Matrix::Zero(3, 2);
  EXPECT_THROW(kmeans(x, 0, 1), InvalidConfig);
  EXPECT_THROW(kmeans(x, 4, 1), InvalidConfig);
  EXPECT_THROW(kmeans(Matrix(0, 2), 1, 1), DataError);
}

TEST(LocalCovariances, ModesOnKnownCluster) {
  // Four points at (+-1, +-2): scatter diag(1, 4).
  Matrix x(4, 2);
  x << 1, 2, -1, 2, 1, -2, -1, -2;
  Clustering c;
  c.centers = Matrix::Zero(1, 2);
  c.assignment = {0, 0, 0, 0};
  c.counts = {4};
  const Matrix full = local_covariances(c, x, {CovKind::Full, 0.0}).basis[0].cov;
  EXPECT_TRUE(full.isApprox((Matrix(2, 2) << 1, 0, 0, 4).finished(), 1e-15));
  const Matrix ridged = local_covariances(c, x, {CovKind::Full, 0.1}).basis[0].cov;
  EXPECT_NEAR(ridged(0, 0), 1.25, 1e-15);
  EXPECT_NEAR(ridged(1, 1), 4.25, 1e-15);
  const Matrix sphere = local_covariances(c, x, {CovKind::Sphere}).basis[0].cov;
  EXPECT_TRUE(sphere.isApprox(2.5 * Matrix::Identity(2, 2), 1e-15));
  EXPECT_TRUE(local_covariances(c, x, {CovKind::Zero}).basis[0].cov.isZero(0.0));
  const auto lc = local_covariances(c, x, {CovKind::Zero}, 3.0);
  EXPECT_EQ(lc.basis[0].precision, 3.0);
  EXPECT_EQ(lc.basis[0].virtual_target, 0.0);
  EXPECT_EQ(lc.basis[0].center, Vector::Zero(2));
}

TEST(LocalCovariances, SingletonFallsBackToSphere) {
  Matrix x(3, 2);
  x << 0, 0, 1, 0, 10, 10;
  Clustering c;
  c.centers = (Matrix(2, 2) << 0.5, 0, 10, 10).finished();
  c.assignment = {0, 0, 1};
  c.counts = {2, 1};
  const auto lc = local_covariances(c, x, {CovKind::Full});
  EXPECT_EQ(lc.sphere_fallbacks, std::vector<int>{1});
  EXPECT_TRUE(lc.basis[1].cov.isZero(0.0));
}

TEST(LocalCovariances, PsdAndSymmetricOnRandomClusters) {
  testing::Rng rng(6);
  for (int t = 0; t < 20; ++t) {
    const Matrix x = blobs(rng, 30, {Vector::Zero(2)}, rng.uniform(0.1, 3));
    const Clustering c = kmeans(x, 4, static_cast<std::uint64_t>(t));
    for (CovKind kind : {CovKind::Full, CovKind::Sphere, CovKind::Zero}) {
      for (const auto& b : local_covariances(c, x, {kind}).basis) {
        EXPECT_EQ(b.cov, b.cov.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(b.cov);
        EXPECT_GE(es.eigenvalues().minCoeff(), 0.0);
      }
    }
  }
}

TEST(LocalCovariances, Validation) {
  Clustering c;
  c.centers = Matrix::Zero(1, 2);
  c.assignment = {0};
  c.counts = {1};
  EXPECT_THROW(local_covariances(c, Matrix::Zero(2, 2), {}), ShapeError);
  EXPECT_THROW(local_covariances(c, Matrix::Zero(1, 2), {CovKind::Full, -1.0}), InvalidConfig);
}

TEST(CovKind, NamesRoundTrip) {
  for (CovKind k : {CovKind::Full, CovKind::Sphere, CovKind::Zero}) {
    EXPECT_EQ(parse_cov_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_cov_kind("diag"), InvalidConfig);
}

}  // namespace
}  // namespace blurgp
