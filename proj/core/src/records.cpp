#include "mlbq/records.hpp"

#include <charconv>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "mlbq/error.hpp"
#include "mlbq/special_functions.hpp"

namespace mlbq {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidArgument("records line " + std::to_string(line) + ": bad number '" + s + "'");
  return v;
}

std::size_t parse_size(const std::string& s, std::size_t line) {
  std::size_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw InvalidArgument("records line " + std::to_string(line) + ": bad integer '" + s + "'");
  return v;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

void write_records(std::ostream& os, const std::vector<ResultRecord>& records) {
  os << kRecordHeader << '\n';
  for (const auto& r : records) {
    os << r.replication << ',' << r.estimator << ',' << format_double(r.budget) << ',' << format_double(r.estimate)
       << ',' << (r.variance ? format_double(*r.variance) : std::string()) << ',' << format_double(r.abs_error) << ','
       << format_double(r.cost) << ',';
    for (std::size_t i = 0; i < r.n_per_level.size(); ++i) os << (i ? ";" : "") << r.n_per_level[i];
    os << '\n';
  }
}

std::vector<ResultRecord> read_records(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kRecordHeader) throw InvalidArgument("records file has an unexpected header");
  std::vector<ResultRecord> out;
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 8) throw InvalidArgument("records line " + std::to_string(lineno) + ": expected 8 fields");
    ResultRecord r;
    r.replication = parse_size(f[0], lineno);
    r.estimator = f[1];
    r.budget = parse_double(f[2], lineno);
    r.estimate = parse_double(f[3], lineno);
    if (!f[4].empty()) r.variance = parse_double(f[4], lineno);
    r.abs_error = parse_double(f[5], lineno);
    r.cost = parse_double(f[6], lineno);
    for (const auto& n : split(f[7], ';')) r.n_per_level.push_back(parse_size(n, lineno));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<CoverageRow> calibration_table(const std::vector<ResultRecord>& records, const std::vector<double>& levels) {
  for (double q : levels)
    if (!(q > 0.0 && q < 1.0)) throw InvalidArgument("credible levels must lie in (0, 1)");
  // keyed by first appearance to keep output order stable
  std::vector<std::pair<std::string, double>> keys;
  std::map<std::pair<std::string, double>, std::vector<const ResultRecord*>> by_key;
  for (const auto& r : records) {
    if (!r.variance) continue;
    const auto key = std::make_pair(r.estimator, r.budget);
    auto& bucket = by_key[key];
    if (bucket.empty()) keys.push_back(key);
    bucket.push_back(&r);
  }
  if (keys.empty()) throw InvalidArgument("calibration needs records with a posterior variance");
  std::vector<CoverageRow> rows;
  for (const auto& key : keys) {
    const auto& bucket = by_key[key];
    for (double q : levels) {
      const double z = normal_quantile(0.5 * (1.0 + q));
      std::size_t hit = 0;
      for (const auto* r : bucket)
        if (r->abs_error <= z * std::sqrt(*r->variance)) ++hit;
      const double n = static_cast<double>(bucket.size());
      rows.push_back({key.first, key.second, q, static_cast<double>(hit) / n, std::sqrt(q * (1.0 - q) / n),
                      bucket.size()});
    }
  }
  return rows;
}

void write_coverage(std::ostream& os, const std::vector<CoverageRow>& rows) {
  os << "estimator,budget,nominal,coverage,std_error,count\n";
  for (const auto& r : rows)
    os << r.estimator << ',' << format_double(r.budget) << ',' << format_double(r.nominal) << ','
       << format_double(r.coverage) << ',' << format_double(r.std_error) << ',' << r.count << '\n';
}

}  // namespace mlbq
