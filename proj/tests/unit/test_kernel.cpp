#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "blurgp/error.hpp"
#include "blurgp/kernel.hpp"
#include "blurgp/oracles.hpp"
#include "test_util.hpp"

namespace blurgp {
namespace {

Vector v1(double a) { return Vector::Constant(1, a); }
Matrix m1(double a) { return Matrix::Constant(1, 1, a); }

TEST(RbfKernel, Examples) {
  EXPECT_DOUBLE_EQ(rbf_eval(RbfKernel(1.0, 1), v1(0.3), v1(0.3)), 1.0);
  EXPECT_NEAR(rbf_eval(RbfKernel(1.0, 1), v1(0.0), v1(1.0)), 0.606531, 1e-6);
  EXPECT_NEAR(rbf_eval(RbfKernel(2.0, 1), v1(0.0), v1(2.0)), 0.606531, 1e-6);
}

TEST(RbfKernel, RejectsBadArguments) {
  EXPECT_THROW(RbfKernel(0.0, 1), InvalidConfig);
  EXPECT_THROW(RbfKernel(1.0, 0), InvalidConfig);
  EXPECT_THROW(rbf_eval(RbfKernel(1.0, 2), v1(0.0), v1(1.0)), ShapeError);
}

TEST(RbfKernel, SymmetricAndBounded) {
  testing::Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    const RbfKernel k(rng.uniform(0.2, 3.0), 3);
    const Vector x = rng.vector(3, -3, 3);
    const Vector y = rng.vector(3, -3, 3);
    const double kxy = rbf_eval(k, x, y);
    EXPECT_EQ(kxy, rbf_eval(k, y, x));
    EXPECT_GT(kxy, 0.0);
    EXPECT_LE(kxy, 1.0);
  }
}

TEST(BlurredCross, Examples) {
  const RbfKernel k(1.0, 1);
  EXPECT_NEAR(blurred_cross(k, v1(0.0), {v1(0.0), m1(1.0)}),
              1.0 / std::sqrt(2.0), 1e-12);
  EXPECT_NEAR(blurred_cross(k, v1(1.0), {v1(0.0), m1(1.0)}),
              std::exp(-0.25) / std::sqrt(2.0), 1e-12);
  // (1/sqrt 2) exp(-1/4) = 0.5506953...
  EXPECT_NEAR(blurred_cross(k, v1(1.0), {v1(0.0), m1(1.0)}), 0.5506953149, 1e-10);
}

TEST(BlurredCross, ZeroBlurIsKernelExactly) {
  testing::Rng rng(2);
  for (int d : {1, 2, 3}) {
    for (int t = 0; t < 20; ++t) {
      const RbfKernel k(rng.uniform(0.5, 2.0), d);
      const Vector x = rng.vector(d, -2, 2);
      const Vector b = rng.vector(d, -2, 2);
      EXPECT_NEAR(blurred_cross(k, x, {b, Matrix::Zero(d, d)}),
                  rbf_eval(k, x, b), 1e-15);
    }
  }
}

TEST(BlurredCross, NormalizationUsesInputDimension) {
  // In d = 2 with c = s^2 I, the integral is (sigma^2 / (sigma^2 + s^2)) at
  // x = b. A normalization tied to the number of bases would change it.
  const double sigma = 0.8;
  const double s2 = 0.5;
  const RbfKernel k(sigma, 2);
  const BlurredBasis b{Vector::Zero(2), s2 * Matrix::Identity(2, 2)};
  EXPECT_NEAR(blurred_cross(k, Vector::Zero(2), b),
              sigma * sigma / (sigma * sigma + s2), 1e-14);
}

TEST(BlurredCross, MatchesQuadrature) {
  testing::Rng rng(3);
  for (int t = 0; t < 30; ++t) {
    const int d = 1 + t % 2;
    const double sigma = rng.uniform(0.5, 2.0);
    const RbfKernel k(sigma, d);
    const Matrix c = rng.psd(d, 0.0, 2.0);
    const Vector b = rng.vector(d);
    const Vector x = b + rng.unit_vector(d) * rng.uniform(0, 3 * sigma);
    EXPECT_NEAR(blurred_cross(k, x, {b, c}),
                oracle::quad_blurred_cross(sigma, x, b, c), 1e-6);
  }
}

TEST(BlurredCross, TranslationInvariant) {
  testing::Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    const RbfKernel k(rng.uniform(0.5, 2.0), 2);
    const Matrix c = rng.psd(2, 0.0, 2.0);
    const Vector x = rng.vector(2, -2, 2);
    const Vector b = rng.vector(2, -2, 2);
    const Vector shift = rng.vector(2, -5, 5);
    EXPECT_NEAR(blurred_cross(k, x + shift, {b + shift, c}),
                blurred_cross(k, x, {b, c}), 1e-12);
  }
}

TEST(BlurredCross, PeakBoundAttainedAtCenter) {
  testing::Rng rng(5);
  for (int t = 0; t < 50; ++t) {
    const double sigma = rng.uniform(0.5, 2.0);
    const RbfKernel k(sigma, 2);
    const BlurredBasis b{rng.vector(2), rng.psd(2, 0.0, 2.0)};
    const double peak = blurred_cross(k, b.center, b);
    const Matrix s = b.cov + sigma * sigma * Matrix::Identity(2, 2);
    EXPECT_NEAR(peak, sigma * sigma / std::sqrt(s.determinant()), 1e-12);
    const Vector x = b.center + rng.vector(2, -3, 3);
    const double v = blurred_cross(k, x, b);
    EXPECT_GT(v, 0.0);
    EXPECT_LE(v, peak);
  }
}

TEST(BlurredVector, EntriesFollowBasisOrder) {
  testing::Rng rng(6);
  std::vector<BlurredBasis> bs;
  for (int j = 0; j < 3; ++j) bs.push_back({rng.vector(2), rng.psd(2, 0.0, 1.0)});
  const BasisSet set(bs);
  const RbfKernel k(0.9, 2);
  const Vector x = rng.vector(2);
  const Vector row = blurred_vector(k, x, set);
  ASSERT_EQ(row.size(), 3);
  const BlurredFeatures feats(k, set);
  const Vector cached = feats(x);
  for (int j = 0; j < 3; ++j) {
    EXPECT_EQ(row[j], blurred_cross(k, x, bs[j]));
    EXPECT_NEAR(cached[j], row[j], 1e-14);
    EXPECT_NEAR(row[j], oracle::quad_blurred_cross(0.9, x, bs[j].center, bs[j].cov),
                1e-6);
  }
}

TEST(BlurredVector, SingletonAndZeroBlur) {
  const RbfKernel k(1.3, 2);
  const Vector x = Vector::Constant(2, 0.4);
  const BlurredBasis one{Vector::Zero(2), Matrix::Identity(2, 2)};
  EXPECT_EQ(blurred_vector(k, x, BasisSet({one}))[0], blurred_cross(k, x, one));
  const BasisSet zero({{Vector::Zero(2), Matrix::Zero(2, 2)},
                       {Vector::Ones(2), Matrix::Zero(2, 2)}});
  const Vector row = blurred_vector(k, x, zero);
  EXPECT_NEAR(row[0], rbf_eval(k, x, Vector::Zero(2)), 1e-15);
  EXPECT_NEAR(row[1], rbf_eval(k, x, Vector::Ones(2)), 1e-15);
}

TEST(DoublyBlurred, Examples) {
  const RbfKernel k(1.0, 1);
  EXPECT_DOUBLE_EQ(doubly_blurred(k, {v1(0.2), m1(0.0)}, {v1(0.2), m1(0.0)}),
                   1.0);
  EXPECT_NEAR(doubly_blurred(k, {v1(0.0), m1(1.0)}, {v1(0.0), m1(1.0)}),
              1.0 / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(oracle::quad_doubly_blurred(1.0, v1(0.0), m1(1.0), v1(0.0), m1(1.0)),
              0.577350, 1e-6);
}

TEST(DoublyBlurred, SymmetricAndMatchesQuadrature) {
  testing::Rng rng(7);
  for (int t = 0; t < 20; ++t) {
    const int d = 1 + t % 2;
    const double sigma = rng.uniform(0.5, 2.0);
    const RbfKernel k(sigma, d);
    const BlurredBasis bi{rng.vector(d), rng.psd(d, 0.0, 2.0)};
    const BlurredBasis bj{bi.center + rng.unit_vector(d) * rng.uniform(0, 3 * sigma),
                          rng.psd(d, 0.0, 2.0)};
    const double v = doubly_blurred(k, bi, bj);
    EXPECT_EQ(v, doubly_blurred(k, bj, bi));
    EXPECT_NEAR(v, oracle::quad_doubly_blurred(sigma, bi.center, bi.cov,
                                               bj.center, bj.cov),
                1e-6);
  }
}

TEST(BasisSet, Validation) {
  EXPECT_THROW(BasisSet({}), InvalidConfig);
  EXPECT_THROW(BasisSet({{v1(0), m1(1)}, {Vector::Zero(2), Matrix::Zero(2, 2)}}),
               ShapeError);
  Matrix asym(2, 2);
  asym << 1, 0.5, 0, 1;
  EXPECT_THROW(BasisSet({{Vector::Zero(2), asym}}), InvalidConfig);
  EXPECT_THROW(BasisSet({{v1(0), m1(-1.0)}}), InvalidConfig);
  EXPECT_THROW(BasisSet({{v1(0), m1(1.0), 0.0}}), InvalidConfig);
  EXPECT_NO_THROW(BasisSet({{v1(0), m1(0.0)}}));
}

TEST(GramKhat, Examples) {
  const RbfKernel k(1.0, 1);
  const KhatGram one = gram_khat(k, BasisSet({{v1(0.5), m1(0.0)}}), 0.0);
  EXPECT_DOUBLE_EQ(one.matrix(0, 0), 1.0);

  testing::Rng rng(8);
  std::vector<BlurredBasis> bs;
  for (int j = 0; j < 5; ++j) bs.push_back({rng.vector(2, -2, 2), Matrix::Zero(2, 2)});
  const RbfKernel k2(0.7, 2);
  const KhatGram g = gram_khat(k2, BasisSet(bs), 0.0);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j)
      EXPECT_NEAR(g.matrix(i, j), rbf_eval(k2, bs[i].center, bs[j].center), 1e-15);
  EXPECT_EQ(g.jitter, 0.0);
}

TEST(GramKhat, RandomSpdCovariancesArePsd) {
  testing::Rng rng(9);
  for (int t = 0; t < 20; ++t) {
    std::vector<BlurredBasis> bs;
    for (int j = 0; j < 4; ++j) bs.push_back({rng.vector(2, -2, 2), rng.psd(2, 0.01, 1.0)});
    const RbfKernel k(rng.uniform(0.5, 2.0), 2);
    Matrix raw(4, 4);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) raw(i, j) = doubly_blurred(k, bs[i], bs[j]);
    EXPECT_LE((raw - raw.transpose()).cwiseAbs().maxCoeff(), 0.0);
    Eigen::SelfAdjointEigenSolver<Matrix> es(raw);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
    const KhatGram g = gram_khat(k, BasisSet(bs), 0.0);
    EXPECT_EQ(g.factor.info(), Eigen::Success);
  }
}

TEST(GramKhat, DistinctCentersFactorWithoutJitter) {
  testing::Rng rng(10);
  for (int t = 0; t < 20; ++t) {
    std::vector<BlurredBasis> bs;
    for (int j = 0; j < 6; ++j) bs.push_back({rng.vector(2, -3, 3), rng.psd(2, 0.0, 0.3)});
    const KhatGram g = gram_khat(RbfKernel(0.5, 2), BasisSet(bs), 0.0);
    EXPECT_EQ(g.jitter, 0.0);
    EXPECT_TRUE(g.matrix.isApprox(g.matrix.transpose(), 0.0));
  }
}

TEST(GramKhat, DuplicateCentersEscalateJitter) {
  const RbfKernel k(1.0, 1);
  const BasisSet dup({{v1(0.0), m1(0.0)}, {v1(0.0), m1(0.0)}});
  const KhatGram g = gram_khat(k, dup, 0.0);
  EXPECT_GT(g.jitter, 0.0);
  EXPECT_LE(g.jitter, kMaxJitter);
  EXPECT_GE(g.attempted_jitters.size(), 2u);
  EXPECT_EQ(g.factor.info(), Eigen::Success);
}

TEST(GramKhat, FixedJitterFailsOnSingularMatrix) {
  const RbfKernel k(1.0, 1);
  const BasisSet dup({{v1(0.0), m1(0.0)}, {v1(0.0), m1(0.0)}});
  try {
    gram_khat_fixed(k, dup, 0.0);
    FAIL() << "expected IllConditionedBasis";
  } catch (const IllConditionedBasis& e) {
    ASSERT_EQ(e.attempted_jitters().size(), 1u);
    EXPECT_EQ(e.attempted_jitters()[0], 0.0);
  }
}

}  // namespace
}  // namespace blurgp
