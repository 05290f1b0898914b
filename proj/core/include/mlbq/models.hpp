#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mlbq/kernels.hpp"

namespace mlbq {

// Solves a tridiagonal system in place of rhs. sub[i] couples rows i+1 and i; super[i] couples i and i+1.
// Throws NumericalError on a zero pivot.
std::vector<double> solve_tridiagonal(std::vector<double> sub, std::vector<double> diag, std::vector<double> super,
                                      std::vector<double> rhs);

class PiecewiseLinearFunction {
 public:
  PiecewiseLinearFunction(std::vector<double> breakpoints, std::vector<double> values);

  double operator()(double x) const;
  // Exact integral over [first breakpoint, last breakpoint].
  double integral() const;
  std::vector<double> slopes() const;
  const std::vector<double>& breakpoints() const { return x_; }
  const std::vector<double>& values() const { return y_; }

 private:
  std::vector<double> x_;
  std::vector<double> y_;
};

// Norm of g - h in the RKHS of min(x, y): both functions must start at (0, 0) and are held
// constant after their last breakpoint.
double brownian_rkhs_increment_norm(const PiecewiseLinearFunction& g, const PiecewiseLinearFunction& h);

struct Reference {
  double value = 0.0;
  double error_estimate = 0.0;
  bool exact = false;
};

class MultifidelityModel {
 public:
  virtual ~MultifidelityModel() = default;

  virtual std::string name() const = 0;
  virtual std::size_t level_count() const = 0;
  virtual const ProductMeasure& measure() const = 0;
  virtual const std::vector<double>& costs() const = 0;
  virtual double evaluate(std::size_t level, std::span<const double> x) const = 0;
  // Pi[f] for the limit function.
  virtual Reference reference() const = 0;
  // Pi[f_l].
  virtual Reference level_integral(std::size_t level) const = 0;
  // Truth used for error metrics.
  virtual Reference error_reference() const { return level_integral(level_count() - 1); }
  virtual std::optional<double> exact_value(std::span<const double>) const { return std::nullopt; }

  std::size_t dimension() const { return measure().dimension(); }
  double cost(std::size_t level) const;
  // f_l(x) - f_{l-1}(x) with f_{-1} = 0.
  double increment(std::size_t level, std::span<const double> x) const;

 protected:
  void check_level(std::size_t level) const;
  void check_point(std::span<const double> x) const;
};

// -u'' = -1 on (0, 1), u(0) = u(1) = 0, solved with linear finite elements. Exact u = x(x-1)/2.
class PoissonModel final : public MultifidelityModel {
 public:
  // One list of interior nodes per level.
  PoissonModel(std::vector<std::vector<double>> interior_nodes, std::vector<double> costs);
  static PoissonModel equispaced(const std::vector<std::size_t>& interior_counts = {4, 16, 64},
                                 std::vector<double> costs = {3.6e-3, 8.5e-3, 42.4e-3});

  std::string name() const override { return "poisson"; }
  std::size_t level_count() const override { return levels_.size(); }
  const ProductMeasure& measure() const override { return measure_; }
  const std::vector<double>& costs() const override { return costs_; }
  double evaluate(std::size_t level, std::span<const double> x) const override;
  Reference reference() const override { return {-1.0 / 12.0, 0.0, true}; }
  Reference level_integral(std::size_t level) const override;
  std::optional<double> exact_value(std::span<const double> x) const override;

  const PiecewiseLinearFunction& level_function(std::size_t level) const;
  // ||f_0||, ||f_1 - f_0||, ... in the Brownian-motion RKHS.
  std::vector<double> increment_norms() const;

 private:
  ProductMeasure measure_;
  std::vector<double> costs_;
  std::vector<PiecewiseLinearFunction> levels_;
};

// (1 + w1 x) u'' + w1 u' = r w2^2 on (0, 1) with u(0) = u(1) = 0; f = integral of u.
class OdeModel final : public MultifidelityModel {
 public:
  OdeModel(std::vector<std::size_t> intervals = {8, 32, 128}, std::vector<double> costs = {1.0e-3, 2.6e-3, 21.8e-3},
           double r = 50.0);

  std::string name() const override { return "ode"; }
  std::size_t level_count() const override { return intervals_.size(); }
  const ProductMeasure& measure() const override { return measure_; }
  const std::vector<double>& costs() const override { return costs_; }
  double evaluate(std::size_t level, std::span<const double> x) const override;
  Reference reference() const override { return reference_; }
  Reference level_integral(std::size_t level) const override;
  Reference error_reference() const override { return reference_; }

  // Finite-difference value on a mesh of `intervals` cells.
  double solve(std::size_t intervals, double w1, double w2) const;
  double r() const { return r_; }

 private:
  // Integral over w1 of solve(intervals, w1, 1) by Gauss-Legendre, with an order-doubling error estimate.
  Reference integrate_w1(std::size_t intervals) const;

  ProductMeasure measure_;
  std::vector<std::size_t> intervals_;
  std::vector<double> costs_;
  double r_;
  Reference reference_;
};

// f(w) = w on [0, 10]; level l is the cell-midpoint step function on cells[l] equal cells.
class StepModel final : public MultifidelityModel {
 public:
  StepModel(std::vector<std::size_t> cells = {2, 4, 8}, std::vector<double> costs = {3e-5, 6e-5, 2e-4});

  std::string name() const override { return "step"; }
  std::size_t level_count() const override { return breakpoints_.size(); }
  const ProductMeasure& measure() const override { return measure_; }
  const std::vector<double>& costs() const override { return costs_; }
  double evaluate(std::size_t level, std::span<const double> x) const override;
  Reference reference() const override { return {5.0, 0.0, true}; }
  Reference level_integral(std::size_t level) const override;
  std::optional<double> exact_value(std::span<const double> x) const override;

  const std::vector<double>& breakpoints(std::size_t level) const { return breakpoints_.at(level); }

 private:
  ProductMeasure measure_;
  std::vector<std::vector<double>> breakpoints_;
  std::vector<double> costs_;
};

struct ModelSpec {
  std::string name;
  std::vector<std::size_t> resolution;  // interior nodes, intervals, or cells per level
  std::vector<double> costs;
  double r = 50.0;
};

std::unique_ptr<MultifidelityModel> make_model(const ModelSpec& spec);

}  // namespace mlbq
