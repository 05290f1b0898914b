#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include "mlbq/kernels.hpp"
#include "mlbq/models.hpp"

// Independent reference computations used by tests and by `mlbq oracle`.
namespace mlbq::oracle {

// Adaptive Gauss-Kronrod on [a, b]; infinite limits allowed.
double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13);

double kernel_mean_1d(const KernelFactor& f, const Marginal& m, double x);
double initial_error_1d(const KernelFactor& f, const Marginal& m);

// -r^T K^{-1} r / 2 - log det K / 2 - n log(2 pi) / 2 with an explicit inverse and LU determinant.
double dense_log_likelihood(const Matrix& k, const Vector& r);

// Lowest-objective integer allocation with every n_l in [1, cap] and sum C_l n_l <= budget.
std::vector<std::size_t> exhaustive_allocation(const std::vector<double>& costs, double budget, std::size_t cap,
                                               const std::function<double(const std::vector<double>&)>& objective);

// sqrt of the integral of (g' - h')^2 over the union of their breakpoints.
double slope_norm(const PiecewiseLinearFunction& g, const PiecewiseLinearFunction& h);

// Least-squares slope of log(y) against log(x).
double log_log_slope(const std::vector<double>& x, const std::vector<double>& y);

struct Check {
  std::string name;
  std::string provenance;
  double expected = 0.0;
  double actual = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

std::vector<Check> run_suite();
void print_report(std::ostream& os, const std::vector<Check>& checks);

}  // namespace mlbq::oracle
