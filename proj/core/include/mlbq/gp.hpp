#pragma once

#include <functional>
#include <span>

#include <Eigen/Cholesky>

#include "mlbq/kernels.hpp"
#include "mlbq/types.hpp"

namespace mlbq {

inline constexpr double kDefaultNugget = 1e-10;
inline constexpr double kMaxNugget = 1e-4;

// A prior mean m together with its integral against the measure in use.
struct PriorMean {
  std::function<double(std::span<const double>)> fn;  // empty means m = 0
  double integral = 0.0;

  double operator()(std::span<const double> x) const { return fn ? fn(x) : 0.0; }
  static PriorMean zero() { return {}; }
  static PriorMean constant(double c) {
    return {[c](std::span<const double>) { return c; }, c};
  }
};

// Cholesky factor of gram(k, W) + nugget * sigma^2 * I plus the solved weights.
struct GPFit {
  Kernel kernel;
  PointSet points;
  Vector centered;  // y - m(W)
  Eigen::LLT<Matrix> factor;
  Vector weights;
  double nugget = 0.0;
  PriorMean mean;

  Matrix lower() const { return factor.matrixL(); }
};

// Factors gram + nugget * amplitude * I, walking the nugget ladder on failure.
// Returns the nugget actually used.
double factorize_with_ladder(const Matrix& gram_matrix, double amplitude, double nugget,
                             Eigen::LLT<Matrix>& out);
// Same ladder with a per-row jitter scale: diagonal gets nugget * scale(i).
double factorize_with_ladder(const Matrix& gram_matrix, const Vector& scale, double nugget,
                             Eigen::LLT<Matrix>& out);

GPFit fit_gp(const Kernel& k, const PointSet& w, const Vector& y, const PriorMean& m = {},
             double nugget = kDefaultNugget);

struct PointPosterior {
  double mean = 0.0;
  double variance = 0.0;
};

PointPosterior gp_posterior_at(const GPFit& fit, std::span<const double> x);

double log_marginal_likelihood(const Kernel& k, const PointSet& w, const Vector& y,
                               const PriorMean& m = {}, double nugget = kDefaultNugget);

// sigma* = sqrt(r^T C^{-1} r / n) for the unit-amplitude gram C; k's amplitude is ignored.
double mle_amplitude(const Kernel& k, const PointSet& w, const Vector& y, const PriorMean& m = {},
                     double nugget = kDefaultNugget);

// Log marginal likelihood with sigma^2 replaced by its closed-form maximizer.
// Returns -inf when the gram cannot be factored; +inf when the data are all zero.
double profiled_log_likelihood(const Kernel& k, const PointSet& w, const Vector& centered,
                               double nugget = kDefaultNugget);

struct LengthscaleBounds {
  double lo = 1e-2;
  double hi = 1e1;
};

struct FitOptions {
  bool per_dimension = false;
  int grid_points = 32;
  double rel_tol = 1e-4;
  int sweeps = 3;
  double nugget = kDefaultNugget;
};

Kernel fit_hyperparameters(const Kernel& family, const PointSet& w, const Vector& y, const PriorMean& m,
                           LengthscaleBounds bounds, const FitOptions& opts = {});

}  // namespace mlbq
