#include "mlbq/kernels.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "mlbq/error.hpp"
#include "mlbq/rng.hpp"
#include "mlbq/special_functions.hpp"

namespace mlbq {

namespace {

constexpr double kSqrt5 = 2.23606797749978969640917366873128;
constexpr double kSqrtPi = 1.77245385090551602729816748334115;
constexpr double kSqrt2Pi = 2.50662827463100050241576528481105;

void require_finite(std::span<const double> x) {
  for (double v : x)
    if (!std::isfinite(v)) throw InvalidArgument("kernel input has a non-finite coordinate");
}

// expm1(-t) + t without cancellation for small t.
double expm1_neg_plus(double t) {
  if (t < 0.1) {
    double term = t;
    double sum = 0.0;
    for (int k = 2; k < 14; ++k) {
      term *= -t / k;
      sum += term;
    }
    return -sum;  // series of e^{-t} - 1 + t starts at +t^2/2
  }
  return std::expm1(-t) + t;
}

double m12_uniform_mean(double g, double a, double b, double x) {
  return (2.0 * g - g * std::exp((a - x) / g) - g * std::exp((x - b) / g)) / (b - a);
}

double m52_uniform_mean(double g, double a, double b, double x) {
  const double da = x - a;
  const double db = b - x;
  const double left = std::exp(-kSqrt5 * da / g) * (kSqrt5 * (8.0 * g * g + 5.0 * da * da) / g + 25.0 * da);
  const double right = std::exp(-kSqrt5 * db / g) * (kSqrt5 * (8.0 * g * g + 5.0 * db * db) / g + 25.0 * db);
  return (16.0 * kSqrt5 * g - left - right) / (15.0 * (b - a));
}

double se_uniform_mean(double g, double a, double b, double x) {
  return kSqrtPi * g * (std::erf((x - a) / g) + std::erf((b - x) / g)) / (2.0 * (b - a));
}

double se_normal_mean(double g, double x) {
  const double s = g * g + 2.0;
  return g * std::exp(-x * x / s) / std::sqrt(s);
}

// exp(-x^2/2 + z^2) erfc(z) without overflow.
double scaled_erfc_term(double x, double z) {
  if (z >= 0.0) return std::exp(-0.5 * x * x) * erfcx(z);
  return std::exp(z * z - 0.5 * x * x) * std::erfc(z);
}

double m52_normal_mean(double g, double x) {
  const double g2 = g * g;
  const double g3 = g2 * g;
  const double g4 = g2 * g2;
  const double zm = (kSqrt5 / g - x) / std::numbers::sqrt2;
  const double zp = (kSqrt5 / g + x) / std::numbers::sqrt2;
  const double common = 25.0 + 3.0 * g4 + 5.0 * g2 * (x * x - 2.0);
  const double odd = 10.0 * kSqrt5 * g * x - 3.0 * kSqrt5 * g3 * x;
  const double poly_m = common - odd;
  const double poly_p = common + odd;
  const double lead = std::exp(-0.5 * x * x) * 4.0 * kSqrt5 * g * (3.0 * g2 - 5.0);
  const double tails = kSqrt2Pi * (poly_m * scaled_erfc_term(x, zm) + poly_p * scaled_erfc_term(x, zp));
  return (lead + tails) / (6.0 * g4 * kSqrt2Pi);
}

[[noreturn]] void unsupported(const KernelFactor& f, const Marginal& m, const char* what) {
  throw UnsupportedPair(std::string("no closed form ") + what + " for " + to_string(f.family) +
                        " with " + describe(m));
}

}  // namespace

std::string to_string(Family f) {
  switch (f) {
    case Family::Matern12: return "matern12";
    case Family::Matern52: return "matern52";
    case Family::SquaredExponential: return "se";
    case Family::BrownianMotion: return "brownian";
  }
  return "unknown";
}

Family family_from_string(const std::string& name) {
  if (name == "matern12") return Family::Matern12;
  if (name == "matern52") return Family::Matern52;
  if (name == "se") return Family::SquaredExponential;
  if (name == "brownian") return Family::BrownianMotion;
  throw InvalidArgument("unknown kernel family '" + name + "'");
}

double matern_smoothness(Family f) {
  if (f == Family::Matern12) return 0.5;
  if (f == Family::Matern52) return 2.5;
  throw InvalidArgument(to_string(f) + " is not a Matern family");
}

Kernel::Kernel(std::vector<KernelFactor> factors, double amplitude)
    : factors_(std::move(factors)), amplitude_(amplitude) {
  if (factors_.empty()) throw InvalidArgument("kernel needs at least one factor");
  if (!(amplitude_ > 0.0) || !std::isfinite(amplitude_))
    throw InvalidArgument("kernel amplitude must be positive and finite");
  for (const auto& f : factors_)
    if (f.family != Family::BrownianMotion && (!(f.lengthscale > 0.0) || !std::isfinite(f.lengthscale)))
      throw InvalidArgument("kernel lengthscale must be positive and finite");
}

Kernel Kernel::isotropic(Family family, double lengthscale, std::size_t dim, double amplitude) {
  return Kernel(std::vector<KernelFactor>(dim, KernelFactor{family, lengthscale}), amplitude);
}

std::vector<double> Kernel::lengthscales() const {
  std::vector<double> out;
  out.reserve(factors_.size());
  for (const auto& f : factors_) out.push_back(f.lengthscale);
  return out;
}

Kernel Kernel::with_amplitude(double amplitude) const { return Kernel(factors_, amplitude); }

Kernel Kernel::with_lengthscales(std::span<const double> lengthscales) const {
  if (lengthscales.size() != factors_.size())
    throw InvalidArgument("lengthscale count does not match kernel dimension");
  auto f = factors_;
  for (std::size_t i = 0; i < f.size(); ++i) f[i].lengthscale = lengthscales[i];
  return Kernel(std::move(f), amplitude_);
}

Kernel Kernel::with_lengthscale(double lengthscale) const {
  std::vector<double> ls(factors_.size(), lengthscale);
  return with_lengthscales(ls);
}

ProductMeasure::ProductMeasure(std::vector<Marginal> marginals) : marginals_(std::move(marginals)) {
  if (marginals_.empty()) throw InvalidArgument("measure needs at least one marginal");
  for (const auto& m : marginals_)
    if (const auto* u = std::get_if<Uniform>(&m))
      if (!std::isfinite(u->a) || !std::isfinite(u->b) || !(u->a < u->b))
        throw InvalidArgument("uniform marginal needs finite a < b");
}

ProductMeasure ProductMeasure::unit_cube(std::size_t dim) {
  return ProductMeasure(std::vector<Marginal>(dim, Uniform{0.0, 1.0}));
}

bool ProductMeasure::bounded() const {
  for (const auto& m : marginals_)
    if (std::holds_alternative<StandardNormal>(m)) return false;
  return true;
}

std::optional<double> ProductMeasure::density_bound() const {
  double d = 1.0;
  for (const auto& m : marginals_) {
    const auto* u = std::get_if<Uniform>(&m);
    if (!u) return std::nullopt;
    d /= (u->b - u->a);
  }
  return d;
}

bool ProductMeasure::contains(std::span<const double> point) const {
  if (point.size() != marginals_.size()) return false;
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (!std::isfinite(point[i])) return false;
    if (const auto* u = std::get_if<Uniform>(&marginals_[i]))
      if (point[i] < u->a || point[i] > u->b) return false;
  }
  return true;
}

void ProductMeasure::from_unit(std::span<double> point) const {
  for (std::size_t i = 0; i < point.size(); ++i) {
    if (const auto* u = std::get_if<Uniform>(&marginals_[i]))
      point[i] = u->a + (u->b - u->a) * point[i];
    else
      point[i] = normal_quantile(point[i]);
  }
}

std::string describe(const Marginal& m) {
  if (const auto* u = std::get_if<Uniform>(&m)) {
    std::ostringstream os;
    os << "uniform(" << u->a << ", " << u->b << ")";
    return os.str();
  }
  return "standard normal";
}

double factor_eval(const KernelFactor& f, double x, double y) {
  const double r = std::abs(x - y);
  switch (f.family) {
    case Family::Matern12: return std::exp(-r / f.lengthscale);
    case Family::Matern52: {
      const double s = kSqrt5 * r / f.lengthscale;
      return (1.0 + s + s * s / 3.0) * std::exp(-s);
    }
    case Family::SquaredExponential: {
      const double s = r / f.lengthscale;
      return std::exp(-s * s);
    }
    case Family::BrownianMotion: return std::min(x, y);
  }
  return 0.0;
}

double kernel_eval(const Kernel& k, std::span<const double> x, std::span<const double> y) {
  if (x.size() != k.dimension() || y.size() != k.dimension())
    throw InvalidArgument("point dimension does not match kernel dimension");
  require_finite(x);
  require_finite(y);
  double v = k.amplitude();
  const auto& fs = k.factors();
  for (std::size_t i = 0; i < fs.size(); ++i) v *= factor_eval(fs[i], x[i], y[i]);
  return v;
}

Matrix gram(const Kernel& k, const PointSet& w) {
  const Eigen::Index n = w.rows();
  Matrix g(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    g(i, i) = kernel_eval(k, point_row(w, i), point_row(w, i));
    for (Eigen::Index j = 0; j < i; ++j) {
      const double v = kernel_eval(k, point_row(w, i), point_row(w, j));
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return g;
}

Matrix cross_gram(const Kernel& k, const PointSet& x, const PointSet& y) {
  Matrix g(x.rows(), y.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i)
    for (Eigen::Index j = 0; j < y.rows(); ++j) g(i, j) = kernel_eval(k, point_row(x, i), point_row(y, j));
  return g;
}

double factor_kernel_mean(const KernelFactor& f, const Marginal& m, double x) {
  const double g = f.lengthscale;
  if (const auto* u = std::get_if<Uniform>(&m)) {
    switch (f.family) {
      case Family::Matern12: return m12_uniform_mean(g, u->a, u->b, x);
      case Family::Matern52: return m52_uniform_mean(g, u->a, u->b, x);
      case Family::SquaredExponential: return se_uniform_mean(g, u->a, u->b, x);
      default: break;
    }
  } else {
    switch (f.family) {
      case Family::Matern52: return m52_normal_mean(g, x);
      case Family::SquaredExponential: return se_normal_mean(g, x);
      default: break;
    }
  }
  unsupported(f, m, "kernel mean");
}

InitialError factor_initial_error(const KernelFactor& f, const Marginal& m,
                                  const InitialErrorOptions& opts) {
  const double g = f.lengthscale;
  if (const auto* u = std::get_if<Uniform>(&m)) {
    const double len = u->b - u->a;
    switch (f.family) {
      case Family::Matern12: {
        return {2.0 * g * g * expm1_neg_plus(len / g) / (len * len), 0.0};
      }
      case Family::Matern52: {
        const double v = 2.0 *
                         (8.0 * kSqrt5 * len * g - 15.0 * g * g +
                          std::exp(-kSqrt5 * len / g) * (5.0 * len * len + 7.0 * kSqrt5 * len * g + 15.0 * g * g)) /
                         (15.0 * len * len);
        return {v, 0.0};
      }
      case Family::SquaredExponential: {
        const double t = len / g;
        const double v = g * (g * std::expm1(-t * t) + len * kSqrtPi * std::erf(t)) / (len * len);
        return {v, 0.0};
      }
      default: break;
    }
  } else {
    switch (f.family) {
      case Family::SquaredExponential: return {g / std::sqrt(g * g + 4.0), 0.0};
      case Family::Matern52: {
        if (opts.mc_samples < 2) throw InvalidArgument("initial error Monte Carlo needs at least 2 samples");
        Rng rng(opts.mc_seed);
        double mean = 0.0;
        double m2 = 0.0;
        for (std::size_t i = 0; i < opts.mc_samples; ++i) {
          const double v = m52_normal_mean(g, rng.normal());
          const double delta = v - mean;
          mean += delta / static_cast<double>(i + 1);
          m2 += delta * (v - mean);
        }
        const double n = static_cast<double>(opts.mc_samples);
        return {mean, std::sqrt(m2 / (n - 1.0) / n)};
      }
      default: break;
    }
  }
  unsupported(f, m, "initial error");
}

double kernel_mean(const Kernel& k, const ProductMeasure& mu, std::span<const double> x) {
  if (mu.dimension() != k.dimension()) throw InvalidArgument("measure and kernel dimensions differ");
  if (x.size() != k.dimension()) throw InvalidArgument("point dimension does not match kernel dimension");
  require_finite(x);
  double v = k.amplitude();
  for (std::size_t i = 0; i < x.size(); ++i) v *= factor_kernel_mean(k.factors()[i], mu[i], x[i]);
  return v;
}

Vector kernel_means(const Kernel& k, const ProductMeasure& mu, const PointSet& w) {
  Vector z(w.rows());
  for (Eigen::Index i = 0; i < w.rows(); ++i) z(i) = kernel_mean(k, mu, point_row(w, i));
  return z;
}

InitialError initial_error(const Kernel& k, const ProductMeasure& mu, const InitialErrorOptions& opts) {
  if (mu.dimension() != k.dimension()) throw InvalidArgument("measure and kernel dimensions differ");
  double v = k.amplitude();
  double rel2 = 0.0;
  for (std::size_t i = 0; i < k.dimension(); ++i) {
    const auto e = factor_initial_error(k.factors()[i], mu[i], opts);
    v *= e.value;
    if (e.std_error > 0.0) rel2 += (e.std_error / e.value) * (e.std_error / e.value);
  }
  return {v, v * std::sqrt(rel2)};
}

}  // namespace mlbq
