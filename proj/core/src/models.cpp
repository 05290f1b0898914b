#include "mlbq/models.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <numbers>
#include <sstream>

#include "mlbq/error.hpp"

namespace mlbq {

namespace {

struct GaussRule {
  std::vector<double> nodes;  // on [0, 1]
  std::vector<double> weights;
};

GaussRule gauss_legendre01(std::size_t n) {
  GaussRule rule;
  for (std::size_t i = 0; i < n; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p0 = 1.0, p1 = x;
      for (std::size_t k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
        p0 = p1;
        p1 = p2;
      }
      dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
      const double dx = p1 / dp;
      x -= dx;
      if (std::abs(dx) < 1e-16) break;
    }
    rule.nodes.push_back(0.5 * (1.0 - x));
    rule.weights.push_back(1.0 / ((1.0 - x * x) * dp * dp));
  }
  return rule;
}

void check_costs(const std::vector<double>& costs, std::size_t levels) {
  if (levels == 0) throw InvalidArgument("model needs at least one level");
  if (costs.size() != levels) throw InvalidArgument("model needs one cost per level");
  for (double c : costs)
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("model costs must be positive");
}

}  // namespace

std::vector<double> solve_tridiagonal(std::vector<double> sub, std::vector<double> diag, std::vector<double> super,
                                      std::vector<double> rhs) {
  const std::size_t n = diag.size();
  if (rhs.size() != n || (n > 0 && (sub.size() + 1 != n || super.size() + 1 != n)))
    throw InvalidArgument("tridiagonal system has inconsistent sizes");
  for (std::size_t i = 1; i < n; ++i) {
    if (diag[i - 1] == 0.0) throw NumericalError("tridiagonal solve hit a zero pivot");
    const double m = sub[i - 1] / diag[i - 1];
    diag[i] -= m * super[i - 1];
    rhs[i] -= m * rhs[i - 1];
  }
  if (n > 0 && diag[n - 1] == 0.0) throw NumericalError("tridiagonal solve hit a zero pivot");
  for (std::size_t i = n; i-- > 0;) {
    if (i + 1 < n) rhs[i] -= super[i] * rhs[i + 1];
    rhs[i] /= diag[i];
    if (!std::isfinite(rhs[i])) throw NumericalError("tridiagonal solve produced a non-finite value");
  }
  return rhs;
}

PiecewiseLinearFunction::PiecewiseLinearFunction(std::vector<double> breakpoints, std::vector<double> values)
    : x_(std::move(breakpoints)), y_(std::move(values)) {
  if (x_.size() < 2 || x_.size() != y_.size())
    throw InvalidArgument("piecewise-linear function needs at least two matching breakpoints and values");
  for (std::size_t i = 1; i < x_.size(); ++i)
    if (!(x_[i] > x_[i - 1])) throw InvalidArgument("breakpoints must be strictly increasing");
}

double PiecewiseLinearFunction::operator()(double x) const {
  if (x <= x_.front()) return y_.front();
  if (x >= x_.back()) return y_.back();
  const auto it = std::upper_bound(x_.begin(), x_.end(), x);
  const std::size_t i = static_cast<std::size_t>(it - x_.begin());
  const double t = (x - x_[i - 1]) / (x_[i] - x_[i - 1]);
  return y_[i - 1] + t * (y_[i] - y_[i - 1]);
}

double PiecewiseLinearFunction::integral() const {
  double s = 0.0;
  for (std::size_t i = 1; i < x_.size(); ++i) s += 0.5 * (y_[i] + y_[i - 1]) * (x_[i] - x_[i - 1]);
  return s;
}

std::vector<double> PiecewiseLinearFunction::slopes() const {
  std::vector<double> s;
  for (std::size_t i = 1; i < x_.size(); ++i) s.push_back((y_[i] - y_[i - 1]) / (x_[i] - x_[i - 1]));
  return s;
}

double brownian_rkhs_increment_norm(const PiecewiseLinearFunction& g, const PiecewiseLinearFunction& h) {
  // f = sum_k beta_k min(., x_k) with beta_k the slope drop at knot x_k.
  std::vector<double> knots, coef;
  auto expand = [&](const PiecewiseLinearFunction& f, double sign) {
    if (f.breakpoints().front() != 0.0 || f.values().front() != 0.0)
      throw InvalidArgument("Brownian-motion RKHS functions must start at (0, 0)");
    const auto s = f.slopes();
    for (std::size_t k = 0; k < s.size(); ++k) {
      const double next = (k + 1 < s.size()) ? s[k + 1] : 0.0;
      knots.push_back(f.breakpoints()[k + 1]);
      coef.push_back(sign * (s[k] - next));
    }
  };
  expand(g, 1.0);
  expand(h, -1.0);
  // sum_ij beta_i beta_j min(x_i, x_j) regrouped over sorted knots: each gap (x_{k-1}, x_k] carries the
  // squared tail sum of beta, which avoids the cancellation of the plain double sum.
  std::vector<std::size_t> order(knots.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return knots[a] < knots[b]; });
  std::vector<double> tail(order.size() + 1, 0.0);
  for (std::size_t k = order.size(); k-- > 0;) tail[k] = tail[k + 1] + coef[order[k]];
  double sq = 0.0;
  double left = 0.0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const double x = knots[order[k]];
    sq += (x - left) * tail[k] * tail[k];
    left = x;
  }
  return std::sqrt(sq);
}

double MultifidelityModel::cost(std::size_t level) const {
  check_level(level);
  return costs()[level];
}

double MultifidelityModel::increment(std::size_t level, std::span<const double> x) const {
  const double fine = evaluate(level, x);
  return level == 0 ? fine : fine - evaluate(level - 1, x);
}

void MultifidelityModel::check_level(std::size_t level) const {
  if (level >= level_count()) {
    std::ostringstream os;
    os << name() << ": level " << level << " out of range (model has " << level_count() << " levels)";
    throw InvalidArgument(os.str());
  }
}

void MultifidelityModel::check_point(std::span<const double> x) const {
  if (!measure().contains(x)) throw InvalidArgument(name() + ": point outside the support");
}

PoissonModel::PoissonModel(std::vector<std::vector<double>> interior_nodes, std::vector<double> costs)
    : measure_(ProductMeasure::unit_cube(1)), costs_(std::move(costs)) {
  check_costs(costs_, interior_nodes.size());
  for (const auto& nodes : interior_nodes) {
    std::vector<double> x{0.0};
    x.insert(x.end(), nodes.begin(), nodes.end());
    x.push_back(1.0);
    for (std::size_t i = 1; i < x.size(); ++i)
      if (!(x[i] > x[i - 1])) throw InvalidArgument("Poisson nodes must be strictly increasing inside (0, 1)");
    const std::size_t p = nodes.size();
    std::vector<double> sub, diag(p), super, rhs(p);
    for (std::size_t i = 1; i <= p; ++i) {
      const double hl = x[i] - x[i - 1];
      const double hr = x[i + 1] - x[i];
      diag[i - 1] = 1.0 / hl + 1.0 / hr;
      if (i < p) {
        sub.push_back(-1.0 / hr);
        super.push_back(-1.0 / hr);
      }
      // stiffness * a = -(integral of the hat function), forcing u'' = 1
      rhs[i - 1] = -0.5 * (hl + hr);
    }
    std::vector<double> y{0.0};
    if (p > 0) {
      const auto a = solve_tridiagonal(sub, diag, super, rhs);
      y.insert(y.end(), a.begin(), a.end());
    }
    y.push_back(0.0);
    levels_.emplace_back(std::move(x), std::move(y));
  }
}

PoissonModel PoissonModel::equispaced(const std::vector<std::size_t>& interior_counts, std::vector<double> costs) {
  std::vector<std::vector<double>> nodes;
  for (std::size_t p : interior_counts) {
    std::vector<double> v;
    for (std::size_t i = 1; i <= p; ++i) v.push_back(static_cast<double>(i) / static_cast<double>(p + 1));
    nodes.push_back(std::move(v));
  }
  return PoissonModel(std::move(nodes), std::move(costs));
}

double PoissonModel::evaluate(std::size_t level, std::span<const double> x) const {
  check_level(level);
  check_point(x);
  return levels_[level](x[0]);
}

Reference PoissonModel::level_integral(std::size_t level) const {
  check_level(level);
  return {levels_[level].integral(), 0.0, true};
}

std::optional<double> PoissonModel::exact_value(std::span<const double> x) const {
  check_point(x);
  return 0.5 * x[0] * (x[0] - 1.0);
}

const PiecewiseLinearFunction& PoissonModel::level_function(std::size_t level) const {
  check_level(level);
  return levels_[level];
}

std::vector<double> PoissonModel::increment_norms() const {
  std::vector<double> out;
  const PiecewiseLinearFunction zero({0.0, 1.0}, {0.0, 0.0});
  for (std::size_t l = 0; l < levels_.size(); ++l)
    out.push_back(brownian_rkhs_increment_norm(levels_[l], l == 0 ? zero : levels_[l - 1]));
  return out;
}

OdeModel::OdeModel(std::vector<std::size_t> intervals, std::vector<double> costs, double r)
    : measure_({Uniform{0.0, 1.0}, StandardNormal{}}), intervals_(std::move(intervals)), costs_(std::move(costs)), r_(r) {
  check_costs(costs_, intervals_.size());
  for (std::size_t m : intervals_)
    if (m < 2) throw InvalidArgument("ODE meshes need at least two intervals");
  if (!std::isfinite(r_)) throw InvalidArgument("ODE forcing constant must be finite");
  const std::size_t fine = intervals_.back() * 8;
  const Reference a = integrate_w1(fine);
  const Reference b = integrate_w1(fine * 2);
  reference_ = {a.value, a.error_estimate + std::abs(a.value - b.value), false};
}

double OdeModel::solve(std::size_t intervals, double w1, double w2) const {
  const std::size_t n = intervals - 1;
  const double h = 1.0 / static_cast<double>(intervals);
  std::vector<double> sub(n - 1), diag(n), super(n - 1), rhs(n, r_ * w2 * w2);
  for (std::size_t i = 1; i <= n; ++i) {
    const double di = static_cast<double>(i);
    diag[i - 1] = -w1 * (2.0 * di - 1.0) / h - 2.0 / (h * h);
    if (i < n) super[i - 1] = w1 * di / h + 1.0 / (h * h);
    if (i > 1) sub[i - 2] = w1 * (di - 1.0) / h + 1.0 / (h * h);
  }
  const auto u = solve_tridiagonal(std::move(sub), std::move(diag), std::move(super), std::move(rhs));
  double s = 0.0;
  for (double v : u) s += v;
  return h * s;
}

double OdeModel::evaluate(std::size_t level, std::span<const double> x) const {
  check_level(level);
  check_point(x);
  try {
    return solve(intervals_[level], x[0], x[1]);
  } catch (const NumericalError& e) {
    std::ostringstream os;
    os << "ode level " << level << " at (" << x[0] << ", " << x[1] << "): " << e.what();
    throw NumericalError(os.str());
  }
}

Reference OdeModel::integrate_w1(std::size_t intervals) const {
  // f is w2^2 times a smooth function of w1 and E[w2^2] = 1.
  auto quad = [&](std::size_t order) {
    const auto rule = gauss_legendre01(order);
    double s = 0.0;
    for (std::size_t i = 0; i < order; ++i) s += rule.weights[i] * solve(intervals, rule.nodes[i], 1.0);
    return s;
  };
  const double lo = quad(20);
  const double hi = quad(40);
  return {hi, std::abs(hi - lo), false};
}

Reference OdeModel::level_integral(std::size_t level) const {
  check_level(level);
  return integrate_w1(intervals_[level]);
}

StepModel::StepModel(std::vector<std::size_t> cells, std::vector<double> costs)
    : measure_({Uniform{0.0, 10.0}}), costs_(std::move(costs)) {
  check_costs(costs_, cells.size());
  for (std::size_t p : cells) {
    if (p < 1) throw InvalidArgument("step levels need at least one cell");
    std::vector<double> b;
    for (std::size_t i = 0; i <= p; ++i) b.push_back(10.0 * static_cast<double>(i) / static_cast<double>(p));
    breakpoints_.push_back(std::move(b));
  }
}

double StepModel::evaluate(std::size_t level, std::span<const double> x) const {
  check_level(level);
  check_point(x);
  const auto& b = breakpoints_[level];
  auto it = std::upper_bound(b.begin(), b.end(), x[0]);
  std::size_t i = static_cast<std::size_t>(it - b.begin());
  // the right end belongs to the last cell
  if (i >= b.size()) i = b.size() - 1;
  return 0.5 * (b[i - 1] + b[i]);
}

Reference StepModel::level_integral(std::size_t level) const {
  check_level(level);
  const auto& b = breakpoints_[level];
  double s = 0.0;
  for (std::size_t i = 1; i < b.size(); ++i) s += 0.5 * (b[i - 1] + b[i]) * (b[i] - b[i - 1]);
  return {s / 10.0, 0.0, true};
}

std::optional<double> StepModel::exact_value(std::span<const double> x) const {
  check_point(x);
  return x[0];
}

std::unique_ptr<MultifidelityModel> make_model(const ModelSpec& spec) {
  if (spec.name == "poisson") {
    auto res = spec.resolution.empty() ? std::vector<std::size_t>{4, 16, 64} : spec.resolution;
    auto costs = spec.costs.empty() ? std::vector<double>{3.6e-3, 8.5e-3, 42.4e-3} : spec.costs;
    return std::make_unique<PoissonModel>(PoissonModel::equispaced(res, costs));
  }
  if (spec.name == "ode") {
    auto res = spec.resolution.empty() ? std::vector<std::size_t>{8, 32, 128} : spec.resolution;
    auto costs = spec.costs.empty() ? std::vector<double>{1.0e-3, 2.6e-3, 21.8e-3} : spec.costs;
    return std::make_unique<OdeModel>(res, costs, spec.r);
  }
  if (spec.name == "step") {
    auto res = spec.resolution.empty() ? std::vector<std::size_t>{2, 4, 8} : spec.resolution;
    auto costs = spec.costs.empty() ? std::vector<double>{3e-5, 6e-5, 2e-4} : spec.costs;
    return std::make_unique<StepModel>(res, costs);
  }
  throw InvalidArgument("unknown model '" + spec.name + "'");
}

}  // namespace mlbq
