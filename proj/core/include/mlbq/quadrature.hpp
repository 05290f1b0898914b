#pragma once

#include <cstddef>
#include <vector>

#include "mlbq/gp.hpp"
#include "mlbq/kernels.hpp"
#include "mlbq/types.hpp"

namespace mlbq {

// Increment data f_l(W_l) - f_{l-1}(W_l) with f_{-1} = 0.
struct LevelData {
  std::size_t level = 0;
  PointSet points;
  Vector values;
  double cost = 1.0;

  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
};

// Throws InvalidArgument unless sizes agree, n >= 1, and points lie in the support.
void validate(const LevelData& data, const ProductMeasure& mu);

struct GaussianPosterior {
  double mean = 0.0;
  double variance = 0.0;
  std::vector<double> level_means;
  std::vector<double> level_variances;
};

GaussianPosterior bq_posterior(const GPFit& fit, const ProductMeasure& mu,
                               const InitialErrorOptions& opts = {});

GaussianPosterior mlbq_estimate(const std::vector<LevelData>& levels, const std::vector<Kernel>& kernels,
                                const std::vector<PriorMean>& means, const ProductMeasure& mu,
                                double nugget = kDefaultNugget, const InitialErrorOptions& opts = {});

double mc_estimate(const Vector& values);
double mlmc_estimate(const std::vector<LevelData>& levels);

// Joint conditioning under the separable prior Cov(g_l, g_l') = B(l, l') c.
GaussianPosterior sk_mlbq_estimate(const std::vector<LevelData>& levels, const Kernel& base, const Matrix& b,
                                   const std::vector<PriorMean>& means, const ProductMeasure& mu,
                                   double nugget = kDefaultNugget, const InitialErrorOptions& opts = {});

}  // namespace mlbq
