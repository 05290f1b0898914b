#include "mlbq/quadrature.hpp"

#include <cmath>
#include <string>

#include "mlbq/error.hpp"

namespace mlbq {

namespace {

double clamp_variance(double var, double amplitude) {
  if (var >= 0.0) return var;
  if (var > -1e-10 * amplitude) return 0.0;
  throw NumericalError("integral variance is negative beyond roundoff");
}

template <class F>
auto tagged(std::size_t level, F&& f) -> decltype(f()) {
  const std::string tag = "level " + std::to_string(level) + ": ";
  try {
    return f();
  } catch (const SingularMatrixError& e) {
    throw SingularMatrixError(tag + e.what(), e.last_nugget());
  } catch (const NumericalError& e) {
    throw NumericalError(tag + e.what());
  } catch (const UnsupportedPair& e) {
    throw UnsupportedPair(tag + e.what());
  } catch (const InvalidArgument& e) {
    throw InvalidArgument(tag + e.what());
  }
}

}  // namespace

void validate(const LevelData& data, const ProductMeasure& mu) {
  if (data.values.size() != data.points.rows())
    throw InvalidArgument("level data has mismatched point and value counts");
  if (data.values.size() < 1) throw InvalidArgument("level data is empty");
  if (static_cast<std::size_t>(data.points.cols()) != mu.dimension())
    throw InvalidArgument("level data dimension does not match the measure");
  if (!(data.cost > 0.0)) throw InvalidArgument("level cost must be positive");
  for (Eigen::Index i = 0; i < data.points.rows(); ++i)
    if (!mu.contains(point_row(data.points, i))) throw InvalidArgument("design point outside the support");
  if (!data.values.allFinite()) throw InvalidArgument("level data has non-finite values");
}

GaussianPosterior bq_posterior(const GPFit& fit, const ProductMeasure& mu, const InitialErrorOptions& opts) {
  const Vector z = kernel_means(fit.kernel, mu, fit.points);
  const double mean = fit.mean.integral + z.dot(fit.weights);
  const Vector v = fit.factor.matrixL().solve(z);
  const double prior = initial_error(fit.kernel, mu, opts).value;
  const double var = clamp_variance(prior - v.squaredNorm(), fit.kernel.amplitude());
  return {mean, var, {mean}, {var}};
}

GaussianPosterior mlbq_estimate(const std::vector<LevelData>& levels, const std::vector<Kernel>& kernels,
                                const std::vector<PriorMean>& means, const ProductMeasure& mu, double nugget,
                                const InitialErrorOptions& opts) {
  if (levels.empty()) throw InvalidArgument("MLBQ needs at least one level");
  if (kernels.size() != levels.size() || means.size() != levels.size())
    throw InvalidArgument("MLBQ needs one kernel and one prior mean per level");
  GaussianPosterior out;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    const auto post = tagged(l, [&] {
      validate(levels[l], mu);
      return bq_posterior(fit_gp(kernels[l], levels[l].points, levels[l].values, means[l], nugget), mu, opts);
    });
    if (l == 0) {
      out.mean = post.mean;
      out.variance = post.variance;
    } else {
      out.mean += post.mean;
      out.variance += post.variance;
    }
    out.level_means.push_back(post.mean);
    out.level_variances.push_back(post.variance);
  }
  return out;
}

double mc_estimate(const Vector& values) {
  if (values.size() == 0) throw InvalidArgument("Monte Carlo needs at least one sample");
  return values.mean();
}

double mlmc_estimate(const std::vector<LevelData>& levels) {
  if (levels.empty()) throw InvalidArgument("MLMC needs at least one level");
  double sum = 0.0;
  for (std::size_t l = 0; l < levels.size(); ++l) sum += tagged(l, [&] { return mc_estimate(levels[l].values); });
  return sum;
}

GaussianPosterior sk_mlbq_estimate(const std::vector<LevelData>& levels, const Kernel& base, const Matrix& b,
                                   const std::vector<PriorMean>& means, const ProductMeasure& mu, double nugget,
                                   const InitialErrorOptions& opts) {
  const auto nl = static_cast<Eigen::Index>(levels.size());
  if (nl == 0) throw InvalidArgument("SK-MLBQ needs at least one level");
  if (b.rows() != nl || b.cols() != nl) throw InvalidArgument("coregionalization matrix has the wrong shape");
  if (means.size() != levels.size()) throw InvalidArgument("SK-MLBQ needs one prior mean per level");
  if ((b - b.transpose()).cwiseAbs().maxCoeff() > 1e-14 * b.cwiseAbs().maxCoeff())
    throw InvalidArgument("coregionalization matrix must be symmetric");
  if (Eigen::LLT<Matrix>(b).info() != Eigen::Success)
    throw InvalidArgument("coregionalization matrix must be positive definite");

  std::vector<Eigen::Index> offset(levels.size() + 1, 0);
  for (std::size_t l = 0; l < levels.size(); ++l) {
    tagged(l, [&] { validate(levels[l], mu); });
    offset[l + 1] = offset[l] + static_cast<Eigen::Index>(levels[l].size());
  }
  const Eigen::Index n = offset.back();
  Matrix k(n, n);
  Vector jitter(n), z(n), r(n);
  const Vector colsum = b.colwise().sum().transpose();
  for (Eigen::Index l = 0; l < nl; ++l) {
    const auto& dl = levels[l];
    for (Eigen::Index m = 0; m <= l; ++m) {
      const Matrix block = b(l, m) * cross_gram(base, dl.points, levels[m].points);
      k.block(offset[l], offset[m], block.rows(), block.cols()) = block;
      k.block(offset[m], offset[l], block.cols(), block.rows()) = block.transpose();
    }
    jitter.segment(offset[l], dl.size()).setConstant(base.amplitude() * b(l, l));
    z.segment(offset[l], dl.size()) = colsum(l) * kernel_means(base, mu, dl.points);
    for (Eigen::Index i = 0; i < dl.values.size(); ++i)
      r(offset[l] + i) = dl.values(i) - means[l](point_row(dl.points, i));
  }
  Eigen::LLT<Matrix> llt;
  factorize_with_ladder(k, jitter, nugget, llt);
  const Vector weights = llt.solve(r);
  double prior_mean = 0.0;
  for (const auto& m : means) prior_mean += m.integral;
  const double base_prior = initial_error(base, mu, opts).value;
  const double prior_var = b.sum() * base_prior;
  const double mean = prior_mean + z.dot(weights);
  const Vector v = llt.matrixL().solve(z);
  const double var = clamp_variance(prior_var - v.squaredNorm(), base.amplitude() * b.diagonal().maxCoeff());

  GaussianPosterior out{mean, var, {}, {}};
  // Per-level marginals Pi[g_l] | all data, for diagnostics.
  for (Eigen::Index l = 0; l < nl; ++l) {
    Vector zl(n);
    for (Eigen::Index m = 0; m < nl; ++m)
      zl.segment(offset[m], levels[m].size()) = b(l, m) * kernel_means(base, mu, levels[m].points);
    const Vector vl = llt.matrixL().solve(zl);
    out.level_means.push_back(means[l].integral + zl.dot(weights));
    out.level_variances.push_back(
        clamp_variance(b(l, l) * base_prior - vl.squaredNorm(), base.amplitude() * b(l, l)));
  }
  return out;
}

}  // namespace mlbq
