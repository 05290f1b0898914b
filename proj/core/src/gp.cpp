#include "mlbq/gp.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "mlbq/error.hpp"

namespace mlbq {

namespace {

const double kLog2Pi = std::log(2.0 * std::numbers::pi);

Vector centered_values(const PointSet& w, const Vector& y, const PriorMean& m) {
  if (w.rows() != y.size()) throw InvalidArgument("design and observation counts differ");
  if (w.rows() < 1) throw InvalidArgument("GP needs at least one observation");
  Vector r(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) r(i) = y(i) - m(point_row(w, i));
  return r;
}

bool pivots_ok(const Eigen::LLT<Matrix>& llt, double scale) {
  if (llt.info() != Eigen::Success) return false;
  const auto d = llt.matrixLLT().diagonal();
  if (!d.allFinite()) return false;
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  return (d.array() * d.array()).minCoeff() > floor;
}

double log_det(const Eigen::LLT<Matrix>& llt) {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

// Golden-section maximization of f over [a, b] in log space.
template <class F>
std::pair<double, double> golden_max(F&& f, double a, double b, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return fc >= fd ? std::pair{c, fc} : std::pair{d, fd};
}

// Maximizes g(log lengthscale) over the bounds: coarse log grid then golden refinement.
template <class G>
std::pair<double, double> maximize_log(G&& g, double log_lo, double log_hi, const FitOptions& opts) {
  const int n = std::max(opts.grid_points, 2);
  std::vector<double> xs(n), fs(n);
  int best = -1;
  for (int i = 0; i < n; ++i) {
    xs[i] = log_lo + (log_hi - log_lo) * i / (n - 1);
    fs[i] = g(xs[i]);
    if (std::isfinite(fs[i]) && (best < 0 || fs[i] > fs[best])) best = i;
  }
  if (best < 0) return {0.5 * (log_lo + log_hi), -std::numeric_limits<double>::infinity()};
  const double a = xs[std::max(best - 1, 0)];
  const double b = xs[std::min(best + 1, n - 1)];
  // relative tolerance on the lengthscale equals absolute tolerance on its log
  auto [x, fx] = golden_max(g, a, b, opts.rel_tol);
  if (!(fx > fs[best])) return {xs[best], fs[best]};
  return {x, fx};
}

}  // namespace

double factorize_with_ladder(const Matrix& gram_matrix, double amplitude, double nugget,
                             Eigen::LLT<Matrix>& out) {
  return factorize_with_ladder(gram_matrix, Vector::Constant(gram_matrix.rows(), amplitude), nugget, out);
}

double factorize_with_ladder(const Matrix& gram_matrix, const Vector& scale, double nugget,
                             Eigen::LLT<Matrix>& out) {
  if (!(nugget >= 0.0)) throw InvalidArgument("nugget must be nonnegative");
  if (scale.size() != gram_matrix.rows()) throw InvalidArgument("jitter scale has the wrong length");
  double nu = nugget;
  const double size = std::max(gram_matrix.diagonal().cwiseAbs().maxCoeff(), scale.maxCoeff());
  Matrix k = gram_matrix;
  while (true) {
    k.diagonal() = gram_matrix.diagonal() + nu * scale;
    out.compute(k);
    if (pivots_ok(out, size)) return nu;
    if (nu >= kMaxNugget) {
      std::ostringstream os;
      os << "gram matrix is singular after nugget ladder; last nugget tried " << nu;
      throw SingularMatrixError(os.str(), nu);
    }
    // The top rung is kMaxNugget itself, whatever the starting nugget.
    nu = std::min((nu == 0.0) ? kDefaultNugget : nu * 10.0, kMaxNugget);
  }
}

GPFit fit_gp(const Kernel& k, const PointSet& w, const Vector& y, const PriorMean& m, double nugget) {
  if (static_cast<std::size_t>(w.cols()) != k.dimension())
    throw InvalidArgument("design dimension does not match kernel dimension");
  Vector r = centered_values(w, y, m);
  Eigen::LLT<Matrix> llt;
  const double used = factorize_with_ladder(gram(k, w), k.amplitude(), nugget, llt);
  Vector weights = llt.solve(r);
  return GPFit{k, w, std::move(r), std::move(llt), std::move(weights), used, m};
}

PointPosterior gp_posterior_at(const GPFit& fit, std::span<const double> x) {
  const Eigen::Index n = fit.points.rows();
  Vector kx(n);
  for (Eigen::Index i = 0; i < n; ++i) kx(i) = kernel_eval(fit.kernel, x, point_row(fit.points, i));
  const double mean = fit.mean(x) + kx.dot(fit.weights);
  const Vector v = fit.factor.matrixL().solve(kx);
  double var = kernel_eval(fit.kernel, x, x) - v.squaredNorm();
  if (var < 0.0) {
    if (var > -1e-10 * fit.kernel.amplitude()) var = 0.0;
    else throw NumericalError("posterior variance is negative beyond roundoff");
  }
  return {mean, var};
}

double log_marginal_likelihood(const Kernel& k, const PointSet& w, const Vector& y, const PriorMean& m,
                               double nugget) {
  const Vector r = centered_values(w, y, m);
  Eigen::LLT<Matrix> llt;
  factorize_with_ladder(gram(k, w), k.amplitude(), nugget, llt);
  const Vector v = llt.matrixL().solve(r);
  const double n = static_cast<double>(r.size());
  return -0.5 * v.squaredNorm() - 0.5 * log_det(llt) - 0.5 * n * kLog2Pi;
}

double mle_amplitude(const Kernel& k, const PointSet& w, const Vector& y, const PriorMean& m, double nugget) {
  const Vector r = centered_values(w, y, m);
  Eigen::LLT<Matrix> llt;
  factorize_with_ladder(gram(k.with_amplitude(1.0), w), 1.0, nugget, llt);
  const Vector v = llt.matrixL().solve(r);
  return std::sqrt(v.squaredNorm() / static_cast<double>(r.size()));
}

double profiled_log_likelihood(const Kernel& k, const PointSet& w, const Vector& centered, double nugget) {
  if (centered.isZero(0.0)) return std::numeric_limits<double>::infinity();
  Eigen::LLT<Matrix> llt;
  try {
    factorize_with_ladder(gram(k.with_amplitude(1.0), w), 1.0, nugget, llt);
  } catch (const SingularMatrixError&) {
    return -std::numeric_limits<double>::infinity();
  }
  const Vector v = llt.matrixL().solve(centered);
  const double n = static_cast<double>(centered.size());
  const double s2 = v.squaredNorm() / n;
  if (!(s2 > 0.0)) return std::numeric_limits<double>::infinity();
  return -0.5 * n - 0.5 * n * std::log(s2) - 0.5 * log_det(llt) - 0.5 * n * kLog2Pi;
}

Kernel fit_hyperparameters(const Kernel& family, const PointSet& w, const Vector& y, const PriorMean& m,
                           LengthscaleBounds bounds, const FitOptions& opts) {
  if (!(bounds.lo > 0.0) || !(bounds.lo < bounds.hi) || !std::isfinite(bounds.hi))
    throw InvalidArgument("lengthscale bounds need 0 < lo < hi");
  if (w.rows() < 2) throw InvalidArgument("hyperparameter fitting needs at least two observations");
  if (static_cast<std::size_t>(w.cols()) != family.dimension())
    throw InvalidArgument("design dimension does not match kernel dimension");
  const Vector r = centered_values(w, y, m);
  const Kernel unit = family.with_amplitude(1.0);
  const double log_lo = std::log(bounds.lo);
  const double log_hi = std::log(bounds.hi);
  const std::size_t d = family.dimension();
  // Grid end points map back onto the bounds exactly.
  auto length = [&](double lg) {
    if (lg <= log_lo) return bounds.lo;
    if (lg >= log_hi) return bounds.hi;
    return std::exp(lg);
  };

  auto finish = [&](const Kernel& k) {
    const double s = mle_amplitude(k, w, r, PriorMean::zero(), opts.nugget);
    // A zero amplitude is not a valid kernel; keep the smallest positive one.
    return k.with_amplitude(std::max(s * s, std::numeric_limits<double>::min()));
  };

  if (r.isZero(0.0)) return finish(unit.with_lengthscale(std::sqrt(bounds.lo * bounds.hi)));

  auto shared = [&](double lg) {
    return profiled_log_likelihood(unit.with_lengthscale(length(lg)), w, r, opts.nugget);
  };
  auto [best_log, best_val] = maximize_log(shared, log_lo, log_hi, opts);
  if (!std::isfinite(best_val) && best_val < 0.0)
    throw SingularMatrixError("every candidate lengthscale gave a singular gram", kMaxNugget);

  std::vector<double> ls(d, length(best_log));
  if (opts.per_dimension && d > 1) {
    for (int sweep = 0; sweep < opts.sweeps; ++sweep) {
      for (std::size_t j = 0; j < d; ++j) {
        auto coord = [&](double lg) {
          auto trial = ls;
          trial[j] = length(lg);
          return profiled_log_likelihood(unit.with_lengthscales(trial), w, r, opts.nugget);
        };
        auto [x, fx] = maximize_log(coord, log_lo, log_hi, opts);
        if (fx > best_val) {
          best_val = fx;
          ls[j] = length(x);
        }
      }
    }
  }
  return finish(unit.with_lengthscales(ls));
}

}  // namespace mlbq
