#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "mlbq/types.hpp"

namespace mlbq {

enum class Family { Matern12, Matern52, SquaredExponential, BrownianMotion };

std::string to_string(Family f);
Family family_from_string(const std::string& name);
// Half-integer smoothness v of a Matern family.
double matern_smoothness(Family f);

struct KernelFactor {
  Family family = Family::Matern12;
  double lengthscale = 1.0;  // ignored for BrownianMotion
};

// sigma^2 times a product of one-dimensional factors.
class Kernel {
 public:
  Kernel(std::vector<KernelFactor> factors, double amplitude);
  static Kernel isotropic(Family family, double lengthscale, std::size_t dim,
                          double amplitude = 1.0);

  std::size_t dimension() const { return factors_.size(); }
  double amplitude() const { return amplitude_; }
  const std::vector<KernelFactor>& factors() const { return factors_; }
  std::vector<double> lengthscales() const;

  Kernel with_amplitude(double amplitude) const;
  Kernel with_lengthscales(std::span<const double> lengthscales) const;
  // Every factor shares one lengthscale.
  Kernel with_lengthscale(double lengthscale) const;

 private:
  std::vector<KernelFactor> factors_;
  double amplitude_;
};

struct Uniform {
  double a = 0.0;
  double b = 1.0;
};
struct StandardNormal {};
using Marginal = std::variant<Uniform, StandardNormal>;

class ProductMeasure {
 public:
  explicit ProductMeasure(std::vector<Marginal> marginals);
  static ProductMeasure unit_cube(std::size_t dim);

  std::size_t dimension() const { return marginals_.size(); }
  const std::vector<Marginal>& marginals() const { return marginals_; }
  const Marginal& operator[](std::size_t i) const { return marginals_[i]; }
  bool bounded() const;
  // Sup of the density; empty when any marginal is unbounded.
  std::optional<double> density_bound() const;
  bool contains(std::span<const double> point) const;
  // Maps a point of the open unit cube through each marginal's inverse CDF.
  void from_unit(std::span<double> point) const;

 private:
  std::vector<Marginal> marginals_;
};

std::string describe(const Marginal& m);

double factor_eval(const KernelFactor& f, double x, double y);
double kernel_eval(const Kernel& k, std::span<const double> x, std::span<const double> y);
Matrix gram(const Kernel& k, const PointSet& w);
Matrix cross_gram(const Kernel& k, const PointSet& x, const PointSet& y);

// One-dimensional closed forms with unit amplitude.
double factor_kernel_mean(const KernelFactor& f, const Marginal& m, double x);

struct InitialErrorOptions {
  std::size_t mc_samples = 1'000'000;
  std::uint64_t mc_seed = 0x5eed'0001ULL;
};

struct InitialError {
  double value = 0.0;
  // Monte Carlo standard error; zero when every factor has a closed form.
  double std_error = 0.0;
};

InitialError factor_initial_error(const KernelFactor& f, const Marginal& m,
                                  const InitialErrorOptions& opts = {});

double kernel_mean(const Kernel& k, const ProductMeasure& mu, std::span<const double> x);
Vector kernel_means(const Kernel& k, const ProductMeasure& mu, const PointSet& w);
InitialError initial_error(const Kernel& k, const ProductMeasure& mu,
                           const InitialErrorOptions& opts = {});

}  // namespace mlbq
