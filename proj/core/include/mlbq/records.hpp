#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace mlbq {

struct ResultRecord {
  std::size_t replication = 0;
  std::string estimator;
  double budget = 0.0;
  double estimate = 0.0;
  std::optional<double> variance;
  double abs_error = 0.0;
  double cost = 0.0;
  std::vector<std::size_t> n_per_level;

  bool operator==(const ResultRecord&) const = default;
};

inline constexpr const char* kRecordHeader =
    "replication,estimator,budget,estimate,variance,abs_error,cost,n_per_level";

// Shortest round-trip decimal form.
std::string format_double(double v);

void write_records(std::ostream& os, const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_records(std::istream& is);

struct CoverageRow {
  std::string estimator;
  double budget = 0.0;
  double nominal = 0.0;
  double coverage = 0.0;
  double std_error = 0.0;  // binomial, at the nominal level
  std::size_t count = 0;
};

// Central Gaussian interval coverage per (estimator, budget) over records with a variance.
std::vector<CoverageRow> calibration_table(const std::vector<ResultRecord>& records,
                                           const std::vector<double>& levels);
void write_coverage(std::ostream& os, const std::vector<CoverageRow>& rows);

}  // namespace mlbq
