#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "mlbq/error.hpp"
#include "mlbq/models.hpp"
#include "mlbq/oracles.hpp"
#include "mlbq/rng.hpp"

namespace {

using namespace mlbq;

double at(const MultifidelityModel& m, std::size_t l, std::initializer_list<double> x) {
  const std::vector<double> p(x);
  return m.evaluate(l, p);
}

TEST(Tridiagonal, SolvesAndRejectsZeroPivot) {
  const auto x = solve_tridiagonal({1.0, 1.0}, {2.0, 2.0, 2.0}, {1.0, 1.0}, {3.0, 4.0, 3.0});
  for (double v : x) EXPECT_NEAR(v, 1.0, 1e-15);
  EXPECT_THROW(solve_tridiagonal({1.0}, {0.0, 1.0}, {1.0}, {1.0, 1.0}), NumericalError);
}

TEST(PiecewiseLinear, InterpolatesExactly) {
  const PiecewiseLinearFunction f({0.0, 0.5, 1.0}, {0.0, 2.0, 1.0});
  EXPECT_EQ(f(0.25), 1.0);
  EXPECT_EQ(f(0.75), 1.5);
  EXPECT_EQ(f(1.0), 1.0);
  EXPECT_EQ(f.integral(), 0.5 + 0.75);
  EXPECT_EQ(f.slopes(), (std::vector<double>{4.0, -2.0}));
  EXPECT_THROW(PiecewiseLinearFunction({0.0, 0.0, 1.0}, {0.0, 1.0, 2.0}), InvalidArgument);
  EXPECT_THROW(PiecewiseLinearFunction({0.0, 1.0}, {0.0}), InvalidArgument);
}

TEST(Poisson, NodalValuesMatchExactSolution) {
  const auto model = PoissonModel::equispaced({3}, {1.0});
  EXPECT_NEAR(at(model, 0, {0.25}), -0.09375, 1e-12);
  EXPECT_NEAR(at(model, 0, {0.5}), -0.125, 1e-12);
  EXPECT_NEAR(at(model, 0, {0.75}), -0.09375, 1e-12);
}

TEST(Poisson, NodalExactnessOnIrregularMeshes) {
  Rng rng(3);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<double> nodes(5 + rep);
    for (double& x : nodes) x = rng.uniform_open();
    std::sort(nodes.begin(), nodes.end());
    const PoissonModel model({nodes}, {1.0});
    for (double x : nodes) EXPECT_NEAR(at(model, 0, {x}), 0.5 * x * (x - 1.0), 1e-10);
  }
}

TEST(Poisson, References) {
  const auto model = PoissonModel::equispaced();
  EXPECT_NEAR(model.reference().value, -1.0 / 12.0, 1e-16);
  EXPECT_TRUE(model.reference().exact);
  for (std::size_t l = 0; l < 3; ++l) {
    EXPECT_NEAR(model.level_integral(l).value, model.level_function(l).integral(), 1e-16);
    EXPECT_GT(model.level_integral(l).value, -1.0 / 12.0);
  }
  EXPECT_EQ(model.error_reference().value, model.level_integral(2).value);
}

TEST(Poisson, LevelIntegralsAgreeWithMonteCarlo) {
  const auto model = PoissonModel::equispaced();
  for (std::size_t l = 0; l < 3; ++l) {
    Rng rng(derive_seed(5, {l}));
    const int n = 1'000'000;
    double s = 0.0, s2 = 0.0;
    for (int i = 0; i < n; ++i) {
      const double v = at(model, l, {rng.uniform()});
      s += v;
      s2 += v * v;
    }
    const double mean = s / n;
    const double se = std::sqrt((s2 / n - mean * mean) / n);
    EXPECT_NEAR(model.level_integral(l).value, mean, 4.0 * se) << "level " << l;
  }
}

TEST(Poisson, LevelErrorsShrink) {
  const auto model = PoissonModel::equispaced();
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < 3; ++l) {
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
      const double x = i / 999.0;
      worst = std::max(worst, std::abs(at(model, l, {x}) - 0.5 * x * (x - 1.0)));
    }
    EXPECT_LE(worst, previous);
    previous = worst;
  }
}

TEST(Poisson, IncrementNormsMatchSlopeIntegration) {
  const auto model = PoissonModel::equispaced();
  const auto norms = model.increment_norms();
  ASSERT_EQ(norms.size(), 3u);
  const PiecewiseLinearFunction zero({0.0, 1.0}, {0.0, 0.0});
  EXPECT_NEAR(norms[0], oracle::slope_norm(model.level_function(0), zero), 1e-12);
  for (std::size_t l = 1; l < 3; ++l)
    EXPECT_NEAR(norms[l], oracle::slope_norm(model.level_function(l), model.level_function(l - 1)), 1e-12);
  EXPECT_GT(norms[0], norms[1]);
  EXPECT_GT(norms[1], norms[2]);
}

TEST(Poisson, RejectsBadLevelsAndPoints) {
  const auto model = PoissonModel::equispaced();
  EXPECT_THROW(at(model, 3, {0.5}), InvalidArgument);
  EXPECT_THROW(at(model, 0, {1.5}), InvalidArgument);
  EXPECT_THROW(at(model, 0, {0.1, 0.2}), InvalidArgument);
  EXPECT_THROW(PoissonModel::equispaced({4, 16}, {1.0}), InvalidArgument);
}

TEST(BrownianNorm, Examples) {
  const PiecewiseLinearFunction zero({0.0, 1.0}, {0.0, 0.0});
  EXPECT_NEAR(brownian_rkhs_increment_norm(PiecewiseLinearFunction({0.0, 1.0}, {0.0, 1.0}), zero), 1.0, 1e-15);
  EXPECT_NEAR(brownian_rkhs_increment_norm(PiecewiseLinearFunction({0.0, 0.5, 1.0}, {0.0, 1.0, 0.0}), zero), 2.0,
              1e-15);
  EXPECT_THROW(brownian_rkhs_increment_norm(PiecewiseLinearFunction({0.0, 1.0}, {1.0, 1.0}), zero), InvalidArgument);
}

TEST(BrownianNorm, MatchesSlopeIntegralOnRandomPairs) {
  Rng rng(7);
  auto random_function = [&](int segments) {
    std::vector<double> x(segments + 1), y(segments + 1);
    x[0] = 0.0;
    y[0] = 0.0;
    for (int i = 1; i < segments; ++i) x[i] = rng.uniform_open();
    x[segments] = 1.0;
    std::sort(x.begin() + 1, x.end() - 1);
    for (int i = 1; i <= segments; ++i) y[i] = rng.normal();
    return PiecewiseLinearFunction(x, y);
  };
  for (int rep = 0; rep < 100; ++rep) {
    const auto g = random_function(10);
    const auto h = random_function(10);
    EXPECT_NEAR(brownian_rkhs_increment_norm(g, h), oracle::slope_norm(g, h), 1e-10);
  }
}

TEST(Ode, ConstantCoefficientConvergence) {
  const OdeModel model;
  const double w2 = 0.8;
  const double exact = -model.r() / 12.0 * w2 * w2;
  double previous = std::abs(model.solve(4, 0.0, w2) - exact);
  for (std::size_t n = 8; n <= 512; n *= 2) {
    const double err = std::abs(model.solve(n, 0.0, w2) - exact);
    EXPECT_GE(previous / err, 1.8) << "intervals " << n;
    previous = err;
  }
}

TEST(Ode, LevelsApproachReference) {
  const OdeModel model;
  const double fine_gap = std::abs(model.level_integral(2).value - model.reference().value);
  EXPECT_GT(model.reference().error_estimate, 0.0);
  EXPECT_LT(model.reference().error_estimate, fine_gap);
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t l = 0; l < 3; ++l) {
    const double gap = std::abs(model.level_integral(l).value - model.reference().value);
    EXPECT_LT(gap, previous);
    previous = gap;
  }
  EXPECT_EQ(model.error_reference().value, model.reference().value);
}

TEST(Ode, DeterministicEvaluation) {
  const OdeModel model;
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(at(model, l, {0.4, -1.3}), at(model, l, {0.4, -1.3}));
  EXPECT_EQ(model.dimension(), 2u);
  EXPECT_THROW(at(model, 0, {1.2, 0.0}), InvalidArgument);
}

TEST(Step, Examples) {
  const StepModel coarse({2}, {1.0});
  EXPECT_EQ(at(coarse, 0, {2.0}), 2.5);
  EXPECT_EQ(at(coarse, 0, {7.0}), 7.5);
  const StepModel model;
  EXPECT_EQ(model.level_integral(2).value, 5.0);
  EXPECT_EQ(model.reference().value, 5.0);
  for (std::size_t l = 0; l < 3; ++l) EXPECT_EQ(model.level_integral(l).value, 5.0);
  EXPECT_EQ(model.breakpoints(1), (std::vector<double>{0.0, 2.5, 5.0, 7.5, 10.0}));
}

TEST(Factory, BuildsRegisteredModels) {
  EXPECT_EQ(make_model({"poisson", {4, 16, 64}, {1, 2, 3}})->level_count(), 3u);
  EXPECT_EQ(make_model({"ode", {8, 32}, {1, 2}})->level_count(), 2u);
  EXPECT_EQ(make_model({"step", {}, {}})->name(), "step");
  EXPECT_THROW(make_model({"tsunami", {}, {}}), InvalidArgument);
}

}  // namespace
