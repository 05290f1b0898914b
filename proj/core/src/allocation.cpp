#include "mlbq/allocation.hpp"

#include <cmath>
#include <limits>

#include "mlbq/error.hpp"

namespace mlbq {

namespace {

void check_common(const AllocationInput& in) {
  if (in.magnitudes.empty()) throw InvalidArgument("allocation needs at least one level");
  if (in.magnitudes.size() != in.costs.size())
    throw InvalidArgument("allocation magnitudes and costs differ in length");
  for (double v : in.magnitudes)
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument("allocation magnitudes must be positive");
  for (double c : in.costs)
    if (!(c > 0.0) || !std::isfinite(c)) throw InvalidArgument("allocation costs must be positive");
  if (!(in.budget > 0.0) || !std::isfinite(in.budget)) throw InvalidArgument("allocation budget must be positive");
}

double sum_cost(const std::vector<std::size_t>& n, const std::vector<double>& costs) {
  double c = 0.0;
  for (std::size_t l = 0; l < n.size(); ++l) c += costs[l] * static_cast<double>(n[l]);
  return c;
}

std::vector<double> as_real(const std::vector<std::size_t>& n) { return {n.begin(), n.end()}; }

}  // namespace

std::string to_string(AllocationMethod m) { return m == AllocationMethod::Mlmc ? "mlmc" : "mlbq"; }

double mlmc_objective(const std::vector<double>& variances, const std::vector<double>& n) {
  double s = 0.0;
  for (std::size_t l = 0; l < n.size(); ++l) s += variances[l] / n[l];
  return s;
}

double mlbq_objective(const std::vector<double>& norms, const std::vector<double>& n, double tau, std::size_t dim) {
  double s = 0.0;
  for (std::size_t l = 0; l < n.size(); ++l) s += norms[l] * std::pow(n[l], -tau / static_cast<double>(dim));
  return s;
}

std::vector<std::size_t> integerize_allocation(const std::vector<double>& real_n, const std::vector<double>& costs,
                                               double budget, const LevelObjective& objective) {
  if (real_n.size() != costs.size() || real_n.empty())
    throw InvalidArgument("integerization needs matching, nonempty inputs");
  double min_total = 0.0;
  for (double c : costs) min_total += c;
  if (min_total > budget) throw InvalidArgument("budget cannot afford one sample at every level");

  const std::size_t nl = real_n.size();
  std::vector<std::size_t> n(nl);
  for (std::size_t l = 0; l < nl; ++l) {
    if (!std::isfinite(real_n[l]) || real_n[l] < 0.0) throw InvalidArgument("real sample sizes must be finite");
    n[l] = std::max<std::size_t>(1, static_cast<std::size_t>(std::floor(real_n[l])));
  }
  auto gain = [&](std::size_t l, double from, double to) { return objective(l, from) - objective(l, to); };

  while (sum_cost(n, costs) > budget) {
    std::size_t pick = nl;
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < nl; ++l) {
      if (n[l] <= 1) continue;
      const double loss = -gain(l, static_cast<double>(n[l]), static_cast<double>(n[l] - 1)) / costs[l];
      if (loss < best) {
        best = loss;
        pick = l;
      }
    }
    if (pick == nl) break;
    --n[pick];
  }
  while (sum_cost(n, costs) < budget) {
    std::size_t pick = 0;
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t l = 0; l < nl; ++l) {
      const double g = gain(l, static_cast<double>(n[l]), static_cast<double>(n[l] + 1)) / costs[l];
      if (g > best) {
        best = g;
        pick = l;
      }
    }
    ++n[pick];
  }
  return n;
}

AllocationPlan mlmc_allocation(const AllocationInput& in) {
  check_common(in);
  const std::size_t nl = in.costs.size();
  double denom = 0.0;
  for (std::size_t l = 0; l < nl; ++l) denom += std::sqrt(in.magnitudes[l] * in.costs[l]);
  AllocationPlan plan;
  plan.method = AllocationMethod::Mlmc;
  plan.budget = in.budget;
  for (std::size_t l = 0; l < nl; ++l)
    plan.real_n.push_back(in.budget * std::sqrt(in.magnitudes[l] / in.costs[l]) / denom);
  const auto& v = in.magnitudes;
  plan.n = integerize_allocation(plan.real_n, in.costs, in.budget,
                                 [&v](std::size_t l, double n) { return v[l] / n; });
  plan.cost = sum_cost(plan.n, in.costs);
  plan.real_objective = mlmc_objective(v, plan.real_n);
  plan.objective = mlmc_objective(v, as_real(plan.n));
  return plan;
}

AllocationPlan mlbq_allocation(const AllocationInput& in) {
  check_common(in);
  if (in.dim < 1) throw InvalidArgument("allocation dimension must be at least 1");
  const double d = static_cast<double>(in.dim);
  if (!(in.tau > d / 2.0) || !std::isfinite(in.tau)) throw InvalidArgument("allocation needs tau > d / 2");
  if (!(in.overhead >= 1.0) || !std::isfinite(in.overhead)) throw InvalidArgument("allocation overhead must be >= 1");
  const std::size_t nl = in.costs.size();
  const double p = d / (in.tau + d);
  const double q = in.tau / (in.tau + d);
  double denom = 0.0;
  for (std::size_t l = 0; l < nl; ++l) denom += std::pow(in.costs[l], q) * std::pow(in.magnitudes[l], p);
  const double scale = in.budget / (in.overhead * denom);
  AllocationPlan plan;
  plan.method = AllocationMethod::Mlbq;
  plan.budget = in.budget;
  for (std::size_t l = 0; l < nl; ++l) plan.real_n.push_back(scale * std::pow(in.magnitudes[l] / in.costs[l], p));
  std::vector<double> eff(in.costs);
  for (double& c : eff) c *= in.overhead;
  const auto& norms = in.magnitudes;
  const double rate = in.tau / d;
  plan.n = integerize_allocation(plan.real_n, eff, in.budget,
                                 [&norms, rate](std::size_t l, double n) { return norms[l] * std::pow(n, -rate); });
  plan.cost = sum_cost(plan.n, in.costs);
  plan.real_objective = mlbq_objective(norms, plan.real_n, in.tau, in.dim);
  plan.objective = mlbq_objective(norms, as_real(plan.n), in.tau, in.dim);
  return plan;
}

double default_tau(Family family, std::size_t dim) {
  if (family == Family::Matern12 || family == Family::Matern52)
    return matern_smoothness(family) + static_cast<double>(dim) / 2.0;
  throw InvalidArgument("no default smoothness for " + to_string(family) + "; supply tau explicitly");
}

}  // namespace mlbq
