#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "mlbq/kernels.hpp"

namespace mlbq {

enum class AllocationMethod { Mlmc, Mlbq };

std::string to_string(AllocationMethod m);

struct AllocationInput {
  std::vector<double> magnitudes;  // variances V_l (MLMC) or increment norms (MLBQ)
  std::vector<double> costs;
  double budget = 0.0;
  double tau = 1.0;  // MLBQ only, must exceed dim / 2
  std::size_t dim = 1;
  double overhead = 1.0;  // MLBQ only, >= 1
};

struct AllocationPlan {
  AllocationMethod method = AllocationMethod::Mlmc;
  std::vector<double> real_n;
  std::vector<std::size_t> n;
  double budget = 0.0;
  double cost = 0.0;  // sum C_l n_l of the integer plan
  double real_objective = 0.0;
  double objective = 0.0;  // at the integer plan
};

// Objective contribution of level l with n samples; decreasing in n.
using LevelObjective = std::function<double(std::size_t level, double n)>;

double mlmc_objective(const std::vector<double>& variances, const std::vector<double>& n);
double mlbq_objective(const std::vector<double>& norms, const std::vector<double>& n, double tau, std::size_t dim);

AllocationPlan mlmc_allocation(const AllocationInput& in);
AllocationPlan mlbq_allocation(const AllocationInput& in);

// Floors (minimum one), trims greedily while over budget, then adds samples to the level with the
// largest objective decrease per unit cost until the budget is reached; the last addition may
// overshoot by at most one level cost.
std::vector<std::size_t> integerize_allocation(const std::vector<double>& real_n, const std::vector<double>& costs,
                                               double budget, const LevelObjective& objective);

// tau = v + d / 2 for Matern families; other families have no default.
double default_tau(Family family, std::size_t dim);

}  // namespace mlbq
