#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "mlbq/allocation.hpp"
#include "mlbq/config.hpp"
#include "mlbq/quadrature.hpp"
#include "mlbq/records.hpp"

namespace mlbq {

struct CellLog {
  std::size_t budget_index = 0;
  std::size_t replication = 0;
  std::string group;  // design id and sample sizes
  std::uint64_t data_hash = 0;
  std::vector<std::string> estimators;
};

struct CellFailure {
  std::size_t budget_index = 0;
  std::size_t replication = 0;
  std::string estimator;
  std::string message;
};

struct ExperimentResult {
  std::vector<ResultRecord> records;
  std::vector<CellLog> cells;
  std::vector<CellFailure> failures;
  std::vector<std::string> warnings;
};

struct RunOptions {
  std::size_t jobs = 1;
};

// Sample sizes for estimator e at budget b (length L+1, or 1 for single-level estimators).
std::vector<std::size_t> sample_sizes(const ExperimentConfig& cfg, const MultifidelityModel& model,
                                      const EstimatorSpec& e, std::size_t budget_index);

std::uint64_t hash_levels(const std::vector<LevelData>& levels);

struct EstimatorOutput {
  double estimate = 0.0;
  std::optional<double> variance;
  std::vector<double> level_means;
  std::vector<double> level_variances;
};

// Kernel for one level's data under the configured hyperparameter policy.
Kernel level_kernel(const ExperimentConfig& cfg, const LevelData& data);

EstimatorOutput run_estimator(const ExperimentConfig& cfg, const MultifidelityModel& model, const EstimatorSpec& e,
                              const std::vector<LevelData>& data);

// Designs and increments for one group; single-level data hold f_L values at level L.
std::vector<LevelData> generate_level_data(const ExperimentConfig& cfg, const MultifidelityModel& model,
                                           const DesignSpec& design, const std::vector<std::size_t>& sizes,
                                           bool single_level, std::size_t budget_index, std::size_t replication);

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts = {});

}  // namespace mlbq
