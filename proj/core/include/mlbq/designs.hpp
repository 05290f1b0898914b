#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mlbq/kernels.hpp"
#include "mlbq/types.hpp"

namespace mlbq {

enum class DesignKind { Iid, Grid, Halton, Lhs };

std::string to_string(DesignKind k);
DesignKind design_kind_from_string(const std::string& name);
bool is_deterministic(DesignKind k);

struct Design {
  DesignKind kind = DesignKind::Iid;
  PointSet points;
  std::uint64_t seed = 0;
  std::string scheme;  // generator identification, e.g. the RNG scheme name
};

Design generate_design(DesignKind kind, const ProductMeasure& mu, std::size_t n, std::uint64_t seed = 0);

// IID draws from a mixture of sampling measures with fixed component counts (largest remainder),
// concatenated in component order. Used for measure-mismatched designs.
struct MixtureComponent {
  double weight = 1.0;
  ProductMeasure measure;
};
Design generate_mixture_design(const std::vector<MixtureComponent>& components, std::size_t n, std::uint64_t seed);

// Largest k with k^d <= n; true when n is an exact d-th power.
std::size_t integer_root(std::size_t n, std::size_t d);
bool is_perfect_power(std::size_t n, std::size_t d);

double radical_inverse(std::uint64_t index, std::uint64_t base);
std::uint64_t nth_prime(std::size_t i);  // nth_prime(0) == 2

struct FillDistance {
  double value = 0.0;
  double lattice_spacing = 0.0;  // largest per-dimension spacing of the candidate lattice
};

// Max over a lattice of `resolution` points per dimension of the distance to the nearest point.
FillDistance fill_distance(const PointSet& points, const ProductMeasure& mu, std::size_t resolution = 1001);

}  // namespace mlbq
