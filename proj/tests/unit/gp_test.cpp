#include <gtest/gtest.h>

#include <cmath>
#include <iomanip>
#include <numbers>

#include <Eigen/LU>

#include "mlbq/designs.hpp"
#include "mlbq/error.hpp"
#include "mlbq/gp.hpp"
#include "mlbq/oracles.hpp"
#include "mlbq/rng.hpp"

namespace {

using namespace mlbq;

PointSet column(std::initializer_list<double> xs) {
  PointSet w(static_cast<Eigen::Index>(xs.size()), 1);
  Eigen::Index i = 0;
  for (double x : xs) w(i++, 0) = x;
  return w;
}

PointSet random_points(Rng& rng, int n, int d) {
  PointSet w(n, d);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < d; ++j) w(i, j) = rng.uniform();
  return w;
}

Vector values(std::initializer_list<double> ys) {
  Vector v(static_cast<Eigen::Index>(ys.size()));
  Eigen::Index i = 0;
  for (double y : ys) v(i++) = y;
  return v;
}

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

TEST(FitGp, SinglePointWeights) {
  const auto fit = fit_gp(Kernel::isotropic(Family::Matern12, 1.0, 1), column({0.5}), values({2.0}), {}, 0.0);
  ASSERT_EQ(fit.weights.size(), 1);
  EXPECT_EQ(fit.weights(0), 2.0);
  EXPECT_EQ(fit.nugget, 0.0);
}

TEST(FitGp, CenteredDataGivesZeroWeights) {
  Rng rng(3);
  const PointSet w = random_points(rng, 6, 2);
  const Vector y = Vector::Constant(6, 1.5);
  const auto fit = fit_gp(Kernel::isotropic(Family::Matern52, 0.4, 2), w, y, PriorMean::constant(1.5));
  EXPECT_TRUE(fit.weights.isZero(0.0));
  const double x[2] = {0.2, 0.9};
  EXPECT_EQ(gp_posterior_at(fit, x).mean, 1.5);
}

TEST(FitGp, RandomDesignInterpolates) {
  Rng rng(5);
  const PointSet w = random_points(rng, 5, 1);
  Vector y(5);
  for (int i = 0; i < 5; ++i) y(i) = std::sin(6.0 * w(i, 0));
  const Kernel k = Kernel::isotropic(Family::SquaredExponential, 0.3, 1);
  const auto fit = fit_gp(k, w, y);
  // Direct dense solve as the oracle for the weights.
  const Vector direct = gram(k, w).fullPivLu().solve(y);
  for (int i = 0; i < 5; ++i) {
    EXPECT_NEAR(gp_posterior_at(fit, point_row(w, i)).mean, y(i), 1e-6);
    EXPECT_NEAR(fit.weights(i), direct(i), 1e-4 * (1.0 + direct.cwiseAbs().maxCoeff()));
  }
}

TEST(FitGp, FactorAndWeightInvariants) {
  Rng rng(7);
  for (auto f : {Family::Matern12, Family::Matern52, Family::SquaredExponential}) {
    const PointSet w = random_points(rng, 12, 2);
    Vector y(12);
    for (int i = 0; i < 12; ++i) y(i) = rng.normal();
    const Kernel k = Kernel::isotropic(f, 0.5, 2, 2.0);
    const auto fit = fit_gp(k, w, y);
    const Matrix l = fit.lower();
    const Matrix target = gram(k, w) + fit.nugget * 2.0 * Matrix::Identity(12, 12);
    EXPECT_LT((l * l.transpose() - target).cwiseAbs().maxCoeff(), 1e-8 * 2.0);
    if (fit.nugget <= 1e-8) {
      EXPECT_LT((gram(k, w) * fit.weights - y).cwiseAbs().maxCoeff(), 1e-6 * (1.0 + y.cwiseAbs().maxCoeff()));
    }
  }
}

TEST(FitGp, DuplicatePointsWalkTheNuggetLadder) {
  const PointSet w = column({0.3, 0.3, 0.6});
  const auto fit = fit_gp(Kernel::isotropic(Family::SquaredExponential, 1.0, 1), w, values({1.0, 1.0, 2.0}), {}, 0.0);
  EXPECT_GT(fit.nugget, 0.0);
  EXPECT_LE(fit.nugget, kMaxNugget);
}

TEST(FitGp, LadderExhaustionReportsLastNugget) {
  // A gram that is negative definite cannot be rescued by any nugget on the ladder.
  Matrix g(2, 2);
  g << -1.0, 0.0, 0.0, -1.0;
  Eigen::LLT<Matrix> llt;
  try {
    factorize_with_ladder(g, 1.0, 0.0, llt);
    FAIL();
  } catch (const SingularMatrixError& e) {
    EXPECT_EQ(e.last_nugget(), kMaxNugget);
  }
}

TEST(FitGp, RejectsMismatchedInput) {
  const Kernel k = Kernel::isotropic(Family::Matern12, 1.0, 1);
  EXPECT_THROW(fit_gp(k, column({0.1, 0.2}), values({1.0})), InvalidArgument);
  EXPECT_THROW(fit_gp(k, PointSet(0, 1), Vector(0)), InvalidArgument);
}

TEST(Posterior, Examples) {
  const Kernel k = Kernel::isotropic(Family::Matern12, 1.0, 1);
  const auto fit = fit_gp(k, column({0.5}), values({2.0}), {}, 0.0);
  const double at = 0.7;
  EXPECT_NEAR(gp_posterior_at(fit, std::span(&at, 1)).mean, 1.6374615, 1e-7);
  const double train = 0.5;
  const auto p = gp_posterior_at(fit, std::span(&train, 1));
  EXPECT_NEAR(p.mean, 2.0, 1e-8);
  EXPECT_NEAR(p.variance, 0.0, 1e-8);
  const double far = 40.0;
  EXPECT_NEAR(gp_posterior_at(fit, std::span(&far, 1)).variance, 1.0, 1e-6);
}

TEST(Posterior, VarianceBoundsAndMonotoneConditioning) {
  Rng rng(11);
  for (auto f : {Family::Matern12, Family::Matern52, Family::SquaredExponential}) {
    const Kernel k = Kernel::isotropic(f, 0.3, 2, 1.7);
    const PointSet all = random_points(rng, 15, 2);
    Vector y(15);
    for (int i = 0; i < 15; ++i) y(i) = rng.normal();
    const PointSet tests = random_points(rng, 40, 2);
    std::vector<double> previous(40, 1.7);
    for (int n = 1; n <= 15; ++n) {
      const auto fit = fit_gp(k, all.topRows(n), y.head(n));
      for (int t = 0; t < 40; ++t) {
        const double v = gp_posterior_at(fit, point_row(tests, t)).variance;
        ASSERT_GE(v, 0.0);
        ASSERT_LE(v, 1.7);
        ASSERT_LE(v, previous[t] + 1e-8 * 1.7) << to_string(f) << " n=" << n;
        previous[t] = v;
      }
    }
  }
}

TEST(LogMarginalLikelihood, Examples) {
  const Kernel k = Kernel::isotropic(Family::Matern12, 1.0, 1);
  EXPECT_NEAR(log_marginal_likelihood(k, column({0.2}), values({0.0}), {}, 0.0), -0.5 * kLog2Pi, 1e-12);
  EXPECT_NEAR(log_marginal_likelihood(k, column({0.2}), values({1.0}), {}, 0.0), -0.5 - 0.5 * kLog2Pi, 1e-12);
}

TEST(LogMarginalLikelihood, MatchesDenseOracle) {
  Rng rng(13);
  for (int rep = 0; rep < 20; ++rep) {
    const PointSet w = random_points(rng, 4, 2);
    Vector y(4);
    for (int i = 0; i < 4; ++i) y(i) = rng.normal();
    const Kernel k = Kernel::isotropic(Family::Matern52, 0.2 + rng.uniform(), 2, 0.5 + rng.uniform());
    const Matrix full = gram(k, w) + kDefaultNugget * k.amplitude() * Matrix::Identity(4, 4);
    EXPECT_NEAR(log_marginal_likelihood(k, w, y), oracle::dense_log_likelihood(full, y), 1e-8);
  }
}

TEST(MleAmplitude, Examples) {
  const Kernel k = Kernel::isotropic(Family::Matern12, 1.0, 1);
  EXPECT_EQ(mle_amplitude(k, column({0.1, 0.6}), values({0.4, 0.4}), PriorMean::constant(0.4)), 0.0);
  EXPECT_NEAR(mle_amplitude(k, column({0.5}), values({3.0}), {}, 0.0), 3.0, 1e-12);
}

TEST(MleAmplitude, BeatsGridScan) {
  Rng rng(17);
  for (int rep = 0; rep < 10; ++rep) {
    const PointSet w = random_points(rng, 6, 1);
    Vector y(6);
    for (int i = 0; i < 6; ++i) y(i) = 3.0 * rng.normal();
    const Kernel unit = Kernel::isotropic(Family::Matern52, 0.3, 1);
    const double s = mle_amplitude(unit, w, y);
    const double best = log_marginal_likelihood(unit.with_amplitude(s * s), w, y);
    for (int i = 0; i < 200; ++i) {
      const double t = s * std::pow(100.0, i / 199.0) / 10.0;
      EXPECT_GE(best, log_marginal_likelihood(unit.with_amplitude(t * t), w, y) - 1e-9);
    }
  }
}

TEST(FitHyperparameters, ZeroDataReturnsMidBound) {
  const Kernel fitted = fit_hyperparameters(Kernel::isotropic(Family::Matern12, 1.0, 1), column({0.1, 0.5, 0.9}),
                                            Vector::Zero(3), {}, {0.01, 100.0});
  EXPECT_NEAR(fitted.factors()[0].lengthscale, 1.0, 1e-12);
  EXPECT_EQ(fitted.amplitude(), std::numeric_limits<double>::min());
}

TEST(FitHyperparameters, RejectsBadInput) {
  const Kernel k = Kernel::isotropic(Family::Matern12, 1.0, 1);
  EXPECT_THROW(fit_hyperparameters(k, column({0.1, 0.2}), values({1, 2}), {}, {1.0, 0.5}), InvalidArgument);
  EXPECT_THROW(fit_hyperparameters(k, column({0.1}), values({1}), {}, {0.1, 1.0}), InvalidArgument);
}

TEST(FitHyperparameters, BeatsLogGrid) {
  Rng rng(19);
  for (int rep = 0; rep < 10; ++rep) {
    const PointSet w = random_points(rng, 15, 1);
    Vector y(15);
    for (int i = 0; i < 15; ++i) y(i) = std::sin(5.0 * w(i, 0)) + 0.3 * rng.normal();
    const LengthscaleBounds b{0.01, 10.0};
    const Kernel family = Kernel::isotropic(Family::Matern52, 1.0, 1);
    const Kernel fitted = fit_hyperparameters(family, w, y, {}, b);
    const double at = profiled_log_likelihood(fitted.with_amplitude(1.0), w, y);
    for (int i = 0; i < 64; ++i) {
      const double l = b.lo * std::pow(b.hi / b.lo, i / 63.0);
      EXPECT_GE(at, profiled_log_likelihood(family.with_lengthscale(l), w, y) - 1e-6) << std::setprecision(17) << "l=" << l << " fitted=" << fitted.factors()[0].lengthscale;
    }
    const double s = mle_amplitude(fitted, w, y);
    EXPECT_NEAR(fitted.amplitude(), s * s, 1e-12 * s * s);
  }
}

TEST(FitHyperparameters, PerDimensionNeverWorseThanShared) {
  Rng rng(23);
  const PointSet w = random_points(rng, 30, 2);
  Vector y(30);
  for (int i = 0; i < 30; ++i) y(i) = std::sin(8.0 * w(i, 0)) + 0.2 * w(i, 1);
  const Kernel family = Kernel::isotropic(Family::SquaredExponential, 1.0, 2);
  FitOptions per;
  per.per_dimension = true;
  const Kernel shared = fit_hyperparameters(family, w, y, {}, {0.05, 20.0});
  const Kernel each = fit_hyperparameters(family, w, y, {}, {0.05, 20.0}, per);
  EXPECT_GE(profiled_log_likelihood(each.with_amplitude(1.0), w, y),
            profiled_log_likelihood(shared.with_amplitude(1.0), w, y));
  EXPECT_LT(each.factors()[0].lengthscale, each.factors()[1].lengthscale);
}

TEST(FitHyperparameters, Deterministic) {
  Rng rng(29);
  const PointSet w = random_points(rng, 10, 1);
  Vector y(10);
  for (int i = 0; i < 10; ++i) y(i) = rng.normal();
  const Kernel family = Kernel::isotropic(Family::Matern12, 1.0, 1);
  const Kernel a = fit_hyperparameters(family, w, y, {}, {0.01, 10.0});
  const Kernel b = fit_hyperparameters(family, w, y, {}, {0.01, 10.0});
  EXPECT_EQ(a.lengthscales(), b.lengthscales());
  EXPECT_EQ(a.amplitude(), b.amplitude());
}

TEST(FitHyperparameters, RecoversLengthscaleOfGpDraws) {
  const double truth = 0.5;
  const Kernel k = Kernel::isotropic(Family::SquaredExponential, truth, 1);
  int hits = 0;
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(derive_seed(31, {static_cast<std::uint64_t>(trial)}));
    const PointSet w = random_points(rng, 40, 1);
    Eigen::LLT<Matrix> llt;
    factorize_with_ladder(gram(k, w), 1.0, 1e-8, llt);
    Vector z(40);
    for (int i = 0; i < 40; ++i) z(i) = rng.normal();
    const Vector y = llt.matrixL() * z;
    const Kernel fitted =
        fit_hyperparameters(Kernel::isotropic(Family::SquaredExponential, 1.0, 1), w, y, {}, {0.01, 10.0});
    const double l = fitted.factors()[0].lengthscale;
    if (l >= truth / 2.0 && l <= truth * 2.0) ++hits;
  }
  EXPECT_GE(hits, 45);
}

}  // namespace
