#include "mlbq/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <Eigen/LU>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "mlbq/error.hpp"

namespace mlbq::oracle {

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
  double err = 0.0;
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 12, tol, &err);
}

double kernel_mean_1d(const KernelFactor& f, const Marginal& m, double x) {
  auto c = [&](double t) { return factor_eval(f, x, t); };
  if (const auto* u = std::get_if<Uniform>(&m)) {
    const double lo = std::clamp(x, u->a, u->b);
    const double len = u->b - u->a;
    return (integrate(c, u->a, lo) + integrate(c, lo, u->b)) / len;
  }
  const double inv = 1.0 / std::sqrt(2.0 * std::numbers::pi);
  auto g = [&](double t) { return c(t) * inv * std::exp(-0.5 * t * t); };
  const double inf = std::numeric_limits<double>::infinity();
  return integrate(g, -inf, x) + integrate(g, x, inf);
}

double initial_error_1d(const KernelFactor& f, const Marginal& m) {
  const auto* u = std::get_if<Uniform>(&m);
  if (!u) throw InvalidArgument("double-quadrature oracle supports uniform marginals only");
  auto outer = [&](double x) { return kernel_mean_1d(f, m, x); };
  return integrate(outer, u->a, u->b, 1e-12) / (u->b - u->a);
}

double dense_log_likelihood(const Matrix& k, const Vector& r) {
  Eigen::FullPivLU<Matrix> lu(k);
  const Matrix inv = lu.inverse();
  const double n = static_cast<double>(r.size());
  return -0.5 * r.dot(inv * r) - 0.5 * std::log(lu.determinant()) - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

std::vector<std::size_t> exhaustive_allocation(const std::vector<double>& costs, double budget, std::size_t cap,
                                               const std::function<double(const std::vector<double>&)>& objective) {
  const std::size_t nl = costs.size();
  std::vector<std::size_t> cur(nl, 1), best;
  double best_val = std::numeric_limits<double>::infinity();
  while (true) {
    double c = 0.0;
    for (std::size_t l = 0; l < nl; ++l) c += costs[l] * static_cast<double>(cur[l]);
    if (c <= budget) {
      const double v = objective(std::vector<double>(cur.begin(), cur.end()));
      if (v < best_val) {
        best_val = v;
        best = cur;
      }
    }
    std::size_t l = 0;
    while (l < nl && ++cur[l] > cap) cur[l++] = 1;
    if (l == nl) break;
  }
  return best;
}

double slope_norm(const PiecewiseLinearFunction& g, const PiecewiseLinearFunction& h) {
  std::set<double> knots(g.breakpoints().begin(), g.breakpoints().end());
  knots.insert(h.breakpoints().begin(), h.breakpoints().end());
  const std::vector<double> x(knots.begin(), knots.end());
  double s = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    const double w = x[i] - x[i - 1];
    const double dg = (g(x[i]) - g(x[i - 1])) / w;
    const double dh = (h(x[i]) - h(x[i - 1])) / w;
    s += (dg - dh) * (dg - dh) * w;
  }
  return std::sqrt(s);
}

double log_log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  const std::size_t n = x.size();
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

}  // namespace mlbq::oracle
