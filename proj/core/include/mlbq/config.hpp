#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mlbq/designs.hpp"
#include "mlbq/gp.hpp"
#include "mlbq/kernels.hpp"
#include "mlbq/models.hpp"

namespace mlbq {

inline constexpr int kSchemaVersion = 1;

enum class EstimatorKind { Mc, Mlmc, Bq, Mlbq, SkMlbq };

std::string to_string(EstimatorKind k);
EstimatorKind estimator_kind_from_string(const std::string& name);
bool is_bayesian(EstimatorKind k);
bool is_multilevel(EstimatorKind k);

struct AllocationSource {
  enum class Kind { Table, MlmcFormula, MlbqFormula };
  Kind kind = Kind::Table;
  std::vector<std::vector<std::size_t>> rows;  // Table: one row per budget
  std::vector<double> magnitudes;              // variances or increment norms
  bool norms_from_model = false;
  std::optional<double> tau;
  double overhead = 1.0;
};

struct DesignSpec {
  DesignKind kind = DesignKind::Iid;
  std::vector<MixtureComponent> mixture;  // nonempty: IID from this sampling mixture

  std::string id() const;
};

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::Mlbq;
  std::string label;
  DesignSpec design;
  std::optional<AllocationSource> allocation;
  std::optional<std::vector<double>> budgets;  // restricts the estimator to these budgets
  std::optional<Matrix> coregionalization;     // sk-mlbq only
};

struct HyperparameterPolicy {
  bool fitted = true;
  std::vector<double> lengthscales;  // fixed policy: one value or one per dimension
  std::optional<double> amplitude;   // fixed policy: empty means closed-form maximum likelihood
  LengthscaleBounds bounds;
  bool per_dimension = false;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  ModelSpec model;
  std::vector<EstimatorSpec> estimators;
  std::vector<Family> families;  // one per dimension
  HyperparameterPolicy hyper;
  double nugget = kDefaultNugget;
  std::vector<double> budgets;
  AllocationSource allocation;
  std::size_t replications = 1;
  std::uint64_t seed = 0;
  std::string output;
  InitialErrorOptions initial_error;
};

// Throws InvalidArgument with a field path on malformed input.
ExperimentConfig parse_config(const std::string& json_text);
ExperimentConfig load_config(const std::string& path);

}  // namespace mlbq
