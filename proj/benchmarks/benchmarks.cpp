#include <benchmark/benchmark.h>

#include "mlbq/allocation.hpp"
#include "mlbq/designs.hpp"
#include "mlbq/gp.hpp"
#include "mlbq/models.hpp"
#include "mlbq/quadrature.hpp"

namespace {

using namespace mlbq;

void BM_Gram(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mu = ProductMeasure({Uniform{0.0, 1.0}, StandardNormal{}});
  const auto d = generate_design(DesignKind::Halton, mu, n);
  const Kernel k = Kernel::isotropic(Family::SquaredExponential, 0.7, 2);
  for (auto _ : state) benchmark::DoNotOptimize(gram(k, d.points));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Gram)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_FitGp(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mu = ProductMeasure::unit_cube(1);
  const auto d = generate_design(DesignKind::Grid, mu, n);
  Vector y(d.points.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = std::sin(6.0 * d.points(i, 0));
  const Kernel k = Kernel::isotropic(Family::Matern12, 0.5, 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_gp(k, d.points, y).weights);
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_FitGp)->RangeMultiplier(2)->Range(64, 1024)->Complexity(benchmark::oNCubed);

void BM_FitHyperparameters(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto mu = ProductMeasure::unit_cube(1);
  const auto d = generate_design(DesignKind::Grid, mu, n);
  Vector y(d.points.rows());
  for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = std::sin(6.0 * d.points(i, 0));
  const Kernel k = Kernel::isotropic(Family::Matern12, 1.0, 1);
  for (auto _ : state)
    benchmark::DoNotOptimize(fit_hyperparameters(k, d.points, y, PriorMean::zero(), {0.01, 10.0}).amplitude());
}
BENCHMARK(BM_FitHyperparameters)->Arg(64)->Arg(256);

void BM_OdeLevel(benchmark::State& state) {
  const OdeModel model;
  const double x[2] = {0.4, 1.1};
  const auto level = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(model.evaluate(level, x));
}
BENCHMARK(BM_OdeLevel)->DenseRange(0, 2);

void BM_MlbqAllocation(benchmark::State& state) {
  AllocationInput in{{0.0625, 0.0225, 0.003125}, {3.6e-3, 8.5e-3, 42.4e-3}, 1.503, 1.0, 1, 1.0};
  for (auto _ : state) benchmark::DoNotOptimize(mlbq_allocation(in).n);
}
BENCHMARK(BM_MlbqAllocation);

}  // namespace
BENCHMARK_MAIN();
