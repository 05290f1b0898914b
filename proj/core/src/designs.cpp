#include "mlbq/designs.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "mlbq/error.hpp"
#include "mlbq/rng.hpp"

namespace mlbq {

namespace {

void fill_iid(PointSet& pts, Eigen::Index first, Eigen::Index count, const ProductMeasure& mu, Rng& rng) {
  const auto d = static_cast<Eigen::Index>(mu.dimension());
  for (Eigen::Index i = first; i < first + count; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      if (const auto* u = std::get_if<Uniform>(&mu[j]))
        pts(i, j) = u->a + (u->b - u->a) * rng.uniform();
      else
        pts(i, j) = rng.normal();
    }
}

}  // namespace

std::string to_string(DesignKind k) {
  switch (k) {
    case DesignKind::Iid: return "iid";
    case DesignKind::Grid: return "grid";
    case DesignKind::Halton: return "halton";
    case DesignKind::Lhs: return "lhs";
  }
  return "unknown";
}

DesignKind design_kind_from_string(const std::string& name) {
  if (name == "iid") return DesignKind::Iid;
  if (name == "grid") return DesignKind::Grid;
  if (name == "halton") return DesignKind::Halton;
  if (name == "lhs") return DesignKind::Lhs;
  throw InvalidArgument("unknown design kind '" + name + "'");
}

bool is_deterministic(DesignKind k) { return k == DesignKind::Grid || k == DesignKind::Halton; }

std::size_t integer_root(std::size_t n, std::size_t d) {
  if (d == 0) throw InvalidArgument("dimension must be positive");
  auto k = static_cast<std::size_t>(std::llround(std::pow(static_cast<double>(n), 1.0 / static_cast<double>(d))));
  auto power = [d](std::size_t b) {
    long double p = 1;
    for (std::size_t i = 0; i < d; ++i) p *= b;
    return p;
  };
  while (k > 0 && power(k) > static_cast<long double>(n)) --k;
  while (power(k + 1) <= static_cast<long double>(n)) ++k;
  return k;
}

bool is_perfect_power(std::size_t n, std::size_t d) {
  const std::size_t k = integer_root(n, d);
  std::size_t p = 1;
  for (std::size_t i = 0; i < d; ++i) p *= k;
  return p == n;
}

double radical_inverse(std::uint64_t index, std::uint64_t base) {
  double inv = 1.0 / static_cast<double>(base);
  double f = inv;
  double r = 0.0;
  while (index > 0) {
    r += f * static_cast<double>(index % base);
    index /= base;
    f *= inv;
  }
  return r;
}

std::uint64_t nth_prime(std::size_t i) {
  std::uint64_t count = 0;
  for (std::uint64_t c = 2;; ++c) {
    bool prime = true;
    for (std::uint64_t p = 2; p * p <= c; ++p)
      if (c % p == 0) {
        prime = false;
        break;
      }
    if (prime && count++ == i) return c;
  }
}

Design generate_design(DesignKind kind, const ProductMeasure& mu, std::size_t n, std::uint64_t seed) {
  if (n < 1) throw InvalidArgument("design needs at least one point");
  const std::size_t d = mu.dimension();
  Design out;
  out.kind = kind;
  out.seed = seed;
  out.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  auto& pts = out.points;
  switch (kind) {
    case DesignKind::Iid: {
      out.scheme = std::string(kRngScheme);
      Rng rng(seed);
      fill_iid(pts, 0, pts.rows(), mu, rng);
      break;
    }
    case DesignKind::Grid: {
      out.scheme = "closed-grid";
      out.seed = 0;
      if (!mu.bounded()) throw InvalidArgument("grid designs need bounded marginals");
      if (!is_perfect_power(n, d)) throw InvalidArgument("grid size must be a perfect power of the dimension");
      const std::size_t k = integer_root(n, d);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t rem = i;
        // last dimension varies fastest
        for (std::size_t jj = d; jj-- > 0;) {
          const std::size_t idx = rem % k;
          rem /= k;
          const auto& u = std::get<Uniform>(mu[jj]);
          pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jj)) =
              k == 1 ? 0.5 * (u.a + u.b)
                     : (idx == k - 1 ? u.b : u.a + (u.b - u.a) * static_cast<double>(idx) / static_cast<double>(k - 1));
        }
      }
      break;
    }
    case DesignKind::Halton: {
      out.scheme = "halton-index-from-1";
      out.seed = 0;
      std::vector<double> row(d);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < d; ++j) row[j] = radical_inverse(i + 1, nth_prime(j));
        mu.from_unit(row);
        for (std::size_t j = 0; j < d; ++j) pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = row[j];
      }
      break;
    }
    case DesignKind::Lhs: {
      out.scheme = std::string(kRngScheme);
      Rng rng(seed);
      std::vector<std::size_t> perm(n);
      std::vector<double> cell(n * d);
      for (std::size_t j = 0; j < d; ++j) {
        std::iota(perm.begin(), perm.end(), std::size_t{0});
        for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[rng.below(i)]);
        for (std::size_t i = 0; i < n; ++i)
          cell[i * d + j] = (static_cast<double>(perm[i]) + rng.uniform_open()) / static_cast<double>(n);
      }
      for (std::size_t i = 0; i < n; ++i) {
        std::span<double> row(cell.data() + i * d, d);
        mu.from_unit(row);
        for (std::size_t j = 0; j < d; ++j) {
          double v = row[j];
          // stratum edges must not round outside the support
          if (const auto* u = std::get_if<Uniform>(&mu[j])) v = std::clamp(v, u->a, u->b);
          pts(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
      }
      break;
    }
  }
  return out;
}

Design generate_mixture_design(const std::vector<MixtureComponent>& components, std::size_t n, std::uint64_t seed) {
  if (components.empty()) throw InvalidArgument("mixture needs at least one component");
  if (n < 1) throw InvalidArgument("design needs at least one point");
  const std::size_t d = components.front().measure.dimension();
  double total = 0.0;
  for (const auto& c : components) {
    if (!(c.weight > 0.0)) throw InvalidArgument("mixture weights must be positive");
    if (c.measure.dimension() != d) throw InvalidArgument("mixture components differ in dimension");
    total += c.weight;
  }
  std::vector<std::size_t> counts(components.size());
  std::vector<std::pair<double, std::size_t>> rem;
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < components.size(); ++i) {
    const double exact = static_cast<double>(n) * components[i].weight / total;
    counts[i] = static_cast<std::size_t>(std::floor(exact));
    assigned += counts[i];
    rem.emplace_back(-(exact - std::floor(exact)), i);
  }
  std::stable_sort(rem.begin(), rem.end());
  for (std::size_t i = 0; assigned < n; ++i, ++assigned) ++counts[rem[i % rem.size()].second];

  Design out;
  out.kind = DesignKind::Iid;
  out.seed = seed;
  out.scheme = std::string(kRngScheme) + "/mixture";
  out.points.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  Rng rng(seed);
  Eigen::Index first = 0;
  for (std::size_t i = 0; i < components.size(); ++i) {
    fill_iid(out.points, first, static_cast<Eigen::Index>(counts[i]), components[i].measure, rng);
    first += static_cast<Eigen::Index>(counts[i]);
  }
  return out;
}

FillDistance fill_distance(const PointSet& points, const ProductMeasure& mu, std::size_t resolution) {
  if (!mu.bounded()) throw InvalidArgument("fill distance needs bounded marginals");
  if (points.rows() < 1) throw InvalidArgument("fill distance needs a nonempty design");
  const std::size_t d = mu.dimension();
  if (static_cast<std::size_t>(points.cols()) != d) throw InvalidArgument("design dimension does not match measure");
  if (resolution < 2) throw InvalidArgument("fill distance resolution must be at least 2");
  long double total = 1;
  for (std::size_t j = 0; j < d; ++j) total *= resolution;
  if (total < 1000) throw InvalidArgument("fill distance lattice needs at least 1000 candidates");
  if (total > 1e9) throw InvalidArgument("fill distance lattice is too large");

  std::vector<double> lo(d), step(d);
  double spacing = 0.0;
  for (std::size_t j = 0; j < d; ++j) {
    const auto& u = std::get<Uniform>(mu[j]);
    lo[j] = u.a;
    step[j] = (u.b - u.a) / static_cast<double>(resolution - 1);
    spacing = std::max(spacing, step[j]);
  }
  std::vector<std::size_t> idx(d, 0);
  std::vector<double> cand(d);
  double worst = 0.0;
  const auto count = static_cast<std::size_t>(total);
  for (std::size_t c = 0; c < count; ++c) {
    for (std::size_t j = 0; j < d; ++j) cand[j] = lo[j] + step[j] * static_cast<double>(idx[j]);
    double nearest = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < points.rows() && nearest > worst; ++i) {
      double s = 0.0;
      for (std::size_t j = 0; j < d; ++j) {
        const double diff = cand[j] - points(i, static_cast<Eigen::Index>(j));
        s += diff * diff;
      }
      nearest = std::min(nearest, s);
    }
    worst = std::max(worst, nearest);
    for (std::size_t j = 0; j < d; ++j) {
      if (++idx[j] < resolution) break;
      idx[j] = 0;
    }
  }
  return {std::sqrt(worst), spacing};
}

}  // namespace mlbq
