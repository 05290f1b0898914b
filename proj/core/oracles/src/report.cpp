#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>

#include "mlbq/allocation.hpp"
#include "mlbq/gp.hpp"
#include "mlbq/oracles.hpp"
#include "mlbq/quadrature.hpp"
#include "mlbq/rng.hpp"

namespace mlbq::oracle {

namespace {

Check make(std::string name, std::string provenance, double expected, double actual, double tol) {
  return {std::move(name), std::move(provenance), expected, actual, tol, std::abs(expected - actual) <= tol};
}

}  // namespace

std::vector<Check> run_suite() {
  std::vector<Check> out;
  const Marginal unit = Uniform{0.0, 1.0};
  const Marginal normal = StandardNormal{};
  const KernelFactor m12{Family::Matern12, 1.0};
  const KernelFactor m52{Family::Matern52, 1.0};
  const KernelFactor se{Family::SquaredExponential, 1.0};

  out.push_back(make("kernel mean matern12 U(0,1) x=0.5", "derived: adaptive quadrature",
                     kernel_mean_1d(m12, unit, 0.5), factor_kernel_mean(m12, unit, 0.5), 1e-10));
  out.push_back(make("kernel mean se U(0,1) x=0", "derived: adaptive quadrature", kernel_mean_1d(se, unit, 0.0),
                     factor_kernel_mean(se, unit, 0.0), 1e-10));
  out.push_back(make("kernel mean matern52 U(-1,3) x=2.3 l=0.7", "derived: adaptive quadrature",
                     kernel_mean_1d({Family::Matern52, 0.7}, Uniform{-1.0, 3.0}, 2.3),
                     factor_kernel_mean({Family::Matern52, 0.7}, Uniform{-1.0, 3.0}, 2.3), 1e-10));
  out.push_back(make("kernel mean matern52 N(0,1) x=0.7 l=0.5", "derived: adaptive quadrature",
                     kernel_mean_1d({Family::Matern52, 0.5}, normal, 0.7),
                     factor_kernel_mean({Family::Matern52, 0.5}, normal, 0.7), 1e-9));
  out.push_back(make("kernel mean se N(0,1) x=-1.2 l=0.8", "derived: adaptive quadrature",
                     kernel_mean_1d({Family::SquaredExponential, 0.8}, normal, -1.2),
                     factor_kernel_mean({Family::SquaredExponential, 0.8}, normal, -1.2), 1e-9));
  out.push_back(make("initial error matern12 U(0,1)", "derived: double quadrature", initial_error_1d(m12, unit),
                     factor_initial_error(m12, unit).value, 1e-9));
  out.push_back(make("initial error matern52 U(0,1)", "derived: double quadrature", initial_error_1d(m52, unit),
                     factor_initial_error(m52, unit).value, 1e-9));
  out.push_back(make("initial error se U(0,2) l=0.8", "derived: double quadrature",
                     initial_error_1d({Family::SquaredExponential, 0.8}, Uniform{0.0, 2.0}),
                     factor_initial_error({Family::SquaredExponential, 0.8}, Uniform{0.0, 2.0}).value, 1e-9));
  {
    // SE against N(0,1): integrate the closed-form kernel mean once more.
    const KernelFactor f{Family::SquaredExponential, 2.0};
    const double inf = std::numeric_limits<double>::infinity();
    const double q = integrate(
        [&](double t) { return factor_kernel_mean(f, normal, t) * std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); },
        -inf, inf);
    out.push_back(make("initial error se N(0,1) l=2", "derived: quadrature of kernel mean", q,
                       factor_initial_error(f, normal).value, 1e-10));
  }
  {
    const KernelFactor f{Family::Matern52, 1.0};
    const double inf = std::numeric_limits<double>::infinity();
    const double q = integrate(
        [&](double t) { return factor_kernel_mean(f, normal, t) * std::exp(-0.5 * t * t) / std::sqrt(2.0 * std::numbers::pi); },
        -inf, inf);
    const auto mc = factor_initial_error(f, normal);
    out.push_back(make("initial error matern52 N(0,1) (Monte Carlo, 4 std errors)", "derived: quadrature of kernel mean",
                       q, mc.value, 4.0 * mc.std_error));
  }
  {
    Rng rng(7);
    PointSet w(4, 1);
    Vector r(4);
    for (int i = 0; i < 4; ++i) {
      w(i, 0) = rng.uniform();
      r(i) = rng.normal();
    }
    const Kernel k = Kernel::isotropic(Family::Matern12, 0.3, 1, 1.7);
    Matrix g = gram(k, w);
    g.diagonal().array() += kDefaultNugget * 1.7;
    out.push_back(make("log marginal likelihood n=4", "derived: dense inverse and determinant",
                       dense_log_likelihood(g, r), log_marginal_likelihood(k, w, r), 1e-8));
  }
  {
    Rng rng(11);
    std::vector<double> xg{0.0}, yg{0.0}, xh{0.0}, yh{0.0};
    for (int i = 1; i <= 10; ++i) {
      xg.push_back(i / 10.0);
      yg.push_back(rng.normal());
      xh.push_back(std::pow(i / 10.0, 1.3));
      yh.push_back(rng.normal());
    }
    const PiecewiseLinearFunction g(xg, yg), h(xh, yh);
    out.push_back(make("Brownian RKHS norm, 10 segments", "derived: segment-wise slope integration",
                       slope_norm(g, h), brownian_rkhs_increment_norm(g, h), 1e-10));
  }
  {
    const auto model = PoissonModel::equispaced({3}, {1.0});
    const auto& f = model.level_function(0);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < f.breakpoints().size(); ++i) {
      const double x = f.breakpoints()[i];
      worst = std::max(worst, std::abs(f.values()[i] - 0.5 * x * (x - 1.0)));
    }
    out.push_back(make("FEM nodal exactness, 3 interior nodes", "derived: exact solution x(x-1)/2", 0.0, worst, 1e-10));
  }
  {
    AllocationInput in{{0.0625, 0.0225, 0.003125}, {3.6e-3, 8.5e-3, 42.4e-3}, 0.376, 1.0, 1, 1.0};
    const auto plan = mlbq_allocation(in);
    const auto best = exhaustive_allocation(in.costs, in.budget, 60, [&](const std::vector<double>& n) {
      return mlbq_objective(in.magnitudes, n, 1.0, 1);
    });
    const double exhaustive = mlbq_objective(in.magnitudes, {best.begin(), best.end()}, 1.0, 1);
    out.push_back(make("greedy integerization vs lattice search (relative excess)", "derived: exhaustive lattice search",
                       0.0, std::max(0.0, plan.objective / exhaustive - 1.0), 0.02));
  }
  {
    // Three levels of synthetic increments on U(0,1) shared by the decomposition and separable-kernel checks.
    Rng rng(0x0bad5eedULL);
    const auto mu = ProductMeasure::unit_cube(1);
    std::vector<LevelData> levels;
    std::vector<Kernel> kernels;
    for (std::size_t l = 0; l < 3; ++l) {
      LevelData d;
      d.level = l;
      const Eigen::Index n = 10 - 3 * static_cast<Eigen::Index>(l);
      d.points.resize(n, 1);
      d.values.resize(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        d.points(i, 0) = rng.uniform();
        d.values(i) = std::pow(0.2, static_cast<double>(l)) * std::sin(3.0 * (l + 1) * d.points(i, 0));
      }
      levels.push_back(std::move(d));
      kernels.push_back(Kernel::isotropic(Family::Matern52, 0.3, 1, std::pow(0.04, static_cast<double>(l))));
    }
    const std::vector<PriorMean> means(3);
    const auto ml = mlbq_estimate(levels, kernels, means, mu);
    double mean = 0.0, var = 0.0;
    for (std::size_t l = 0; l < 3; ++l) {
      const auto p = bq_posterior(fit_gp(kernels[l], levels[l].points, levels[l].values), mu);
      mean += p.mean;
      var += p.variance;
    }
    const double rel = std::max(std::abs(ml.mean - mean) / std::abs(mean), std::abs(ml.variance - var) / var);
    out.push_back(make("MLBQ equals the sum of per-level BQ (relative)", "derived: independent per-level BQ", 0.0, rel,
                       1e-12));

    const Kernel shared = kernels[0];
    const auto sk = sk_mlbq_estimate(levels, shared, Matrix::Identity(3, 3), means, mu);
    const auto ml_shared = mlbq_estimate(levels, {shared, shared, shared}, means, mu);
    out.push_back(make("separable kernel with B = I equals MLBQ", "derived: block-diagonal reduction", 0.0,
                       std::max(std::abs(sk.mean - ml_shared.mean), std::abs(sk.variance - ml_shared.variance)), 1e-10));
  }
  {
    // Lagrange stationarity of the real MLBQ allocation.
    const std::vector<double> norms{0.8, 0.25, 0.04, 0.01};
    const std::vector<double> costs{1.0, 4.0, 16.0, 64.0};
    const double tau = 2.5, gamma = 1.3;
    const std::size_t d = 2;
    const auto plan = mlbq_allocation({norms, costs, 5000.0, tau, d, gamma});
    const double r = tau / static_cast<double>(d);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
    for (std::size_t l = 0; l < norms.size(); ++l) {
      const double g = r * norms[l] * std::pow(plan.real_n[l], -r - 1.0) / (gamma * costs[l]);
      lo = std::min(lo, g);
      hi = std::max(hi, g);
    }
    out.push_back(make("MLBQ allocation stationarity (relative spread)", "derived: Lagrange conditions", 0.0,
                       (hi - lo) / hi, 1e-8));
  }
  return out;
}

void print_report(std::ostream& os, const std::vector<Check>& checks) {
  os << std::setprecision(12);
  for (const auto& c : checks)
    os << (c.pass ? "PASS" : "FAIL") << "  " << c.name << "  [" << c.provenance << "]  expected " << c.expected
       << "  got " << c.actual << "  tol " << c.tolerance << '\n';
}

}  // namespace mlbq::oracle
