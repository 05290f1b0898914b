// Acceptance gate: one PASS/FAIL line per criterion.
//   mlbq_acceptance            runs every criterion
//   mlbq_acceptance <name>...  runs the named criteria
// Exit status is 0 only when every selected criterion passes.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "mlbq/allocation.hpp"
#include "mlbq/config.hpp"
#include "mlbq/designs.hpp"
#include "mlbq/gp.hpp"
#include "mlbq/harness.hpp"
#include "mlbq/models.hpp"
#include "mlbq/oracles.hpp"
#include "mlbq/quadrature.hpp"
#include "mlbq/records.hpp"
#include "mlbq/rng.hpp"

namespace {

using namespace mlbq;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int number;
  std::string name;
  double time_limit;  // seconds
  std::function<Outcome()> run;
};

std::string config_path(const std::string& name) { return std::string(MLBQ_SOURCE_DIR) + "/configs/" + name; }

// Keeps the labelled estimators, each restricted to the listed budgets (empty list keeps all).
ExperimentConfig restrict(ExperimentConfig cfg, const std::map<std::string, std::vector<double>>& keep) {
  std::vector<EstimatorSpec> kept;
  for (auto& e : cfg.estimators) {
    const auto it = keep.find(e.label);
    if (it == keep.end()) continue;
    if (!it->second.empty()) e.budgets = it->second;
    kept.push_back(e);
  }
  cfg.estimators = kept;
  return cfg;
}

// Mean absolute error per (estimator, budget).
std::map<std::pair<std::string, double>, double> mean_errors(const ExperimentResult& res) {
  std::map<std::pair<std::string, double>, std::pair<double, std::size_t>> acc;
  for (const auto& r : res.records) {
    auto& [sum, count] = acc[{r.estimator, r.budget}];
    sum += r.abs_error;
    ++count;
  }
  std::map<std::pair<std::string, double>, double> out;
  for (const auto& [key, v] : acc) out[key] = v.first / static_cast<double>(v.second);
  return out;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::string sizes(const std::vector<std::size_t>& n) {
  std::string s = "(";
  for (std::size_t i = 0; i < n.size(); ++i) s += (i ? "," : "") + std::to_string(n[i]);
  return s + ")";
}

Outcome allocation_reproduction() {
  const std::vector<double> costs{3.6e-3, 8.5e-3, 42.4e-3};
  const std::vector<double> budgets{0.376, 0.751, 1.503};
  const std::vector<std::vector<std::size_t>> mlmc_rows{{67, 11, 1}, {133, 23, 2}, {266, 46, 3}};
  const std::vector<std::vector<std::size_t>> mlbq_rows{{38, 15, 3}, {78, 31, 5}, {153, 60, 10}};
  Outcome o{true, ""};
  std::ostringstream os;
  auto check = [&](const char* method, const std::vector<std::size_t>& got, const std::vector<std::size_t>& want,
                   double slack, double budget) {
    bool ok = true;
    for (std::size_t l = 0; l < want.size(); ++l)
      ok = ok && std::abs(static_cast<double>(got[l]) - static_cast<double>(want[l])) <= slack;
    os << method << " T=" << budget << " " << sizes(got) << (ok ? " ok" : " expected " + sizes(want)) << "; ";
    o.pass = o.pass && ok;
  };
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    const auto mlmc = mlmc_allocation({{1.305e-3, 0.088e-3, 0.002e-3}, costs, budgets[b]});
    check("mlmc", mlmc.n, mlmc_rows[b], 2.0, budgets[b]);
  }
  for (std::size_t b = 0; b < budgets.size(); ++b) {
    const auto mlbq = mlbq_allocation({{62.5e-3, 22.5e-3, 3.125e-3}, costs, budgets[b], 1.0, 1, 1.0});
    check("mlbq", mlbq.n, mlbq_rows[b], 1.0, budgets[b]);
  }
  o.detail = os.str();
  return o;
}

Outcome poisson_ordering() {
  // MLBQ(grid) runs on its own allocation row, MLMC(IID) on its own; the same-size comparison is also required.
  const auto cfg = restrict(load_config(config_path("poisson.json")),
                            {{"mlmc", {}}, {"mlbq-grid", {}}, {"mlbq-grid-nmlbq", {}}});
  const auto res = run_experiment(cfg, {4});
  if (!res.failures.empty()) return {false, "cell failure: " + res.failures.front().message};
  const auto err = mean_errors(res);
  Outcome o{true, ""};
  std::ostringstream os;
  for (double t : cfg.budgets) {
    const double mlmc = err.at({"mlmc", t});
    const double own = err.at({"mlbq-grid-nmlbq", t});
    const double same = err.at({"mlbq-grid", t});
    const bool ok = own * 5.0 <= mlmc && same < mlmc;
    o.pass = o.pass && ok;
    os << "T=" << t << " mlmc " << fmt(mlmc) << " mlbq-grid " << fmt(own) << " (x" << fmt(mlmc / own)
       << ", same sizes " << fmt(same) << ")" << (ok ? "" : " FAIL") << "; ";
  }
  o.detail = os.str();
  return o;
}

Outcome ode_budget_multiplier() {
  const auto cfg =
      restrict(load_config(config_path("ode.json")), {{"mlmc", {30.347}}, {"mlbq-halton", {1.517}}});
  const auto res = run_experiment(cfg, {4});
  if (!res.failures.empty()) return {false, "cell failure: " + res.failures.front().message};
  const auto err = mean_errors(res);
  const double mlbq = err.at({"mlbq-halton", 1.517});
  const double mlmc = err.at({"mlmc", 30.347});
  return {mlbq <= mlmc, "mlbq-halton at T=1.517: " + fmt(mlbq) + ", mlmc at T=30.347: " + fmt(mlmc)};
}

Outcome convergence_rate() {
  const auto model = PoissonModel::equispaced();
  const double truth = model.reference().value;
  const Kernel family = Kernel::isotropic(Family::Matern12, 1.0, 1);
  std::vector<double> ns, errors;
  std::ostringstream os;
  for (std::size_t n = 8; n <= 256; n *= 2) {
    const auto design = generate_design(DesignKind::Grid, model.measure(), n);
    Vector y(design.points.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) = *model.exact_value(point_row(design.points, i));
    const Kernel k = fit_hyperparameters(family, design.points, y, {}, {0.01, 10.0});
    const double e = std::abs(bq_posterior(fit_gp(k, design.points, y), model.measure()).mean - truth);
    ns.push_back(static_cast<double>(n));
    errors.push_back(e);
    os << "n=" << n << " " << fmt(e) << "; ";
  }
  const double slope = oracle::log_log_slope(ns, errors);
  return {slope <= -0.9, "slope " + fmt(slope) + "; " + os.str()};
}

Outcome oracle_suites() {
  const auto checks = oracle::run_suite();
  std::size_t passed = 0;
  std::string failed;
  for (const auto& c : checks) {
    if (c.pass)
      ++passed;
    else
      failed += " [" + c.name + "]";
  }
  return {passed == checks.size(),
          std::to_string(passed) + "/" + std::to_string(checks.size()) + " checks" + (failed.empty() ? "" : ", failed:" + failed)};
}

Outcome calibration() {
  std::ostringstream os;
  bool pass = true;
  {
    Rng rng(derive_seed(20240606, {1}));
    std::vector<ResultRecord> recs(5000);
    for (std::size_t i = 0; i < recs.size(); ++i) {
      recs[i].replication = i;
      recs[i].estimator = "synthetic";
      recs[i].variance = std::exp(rng.normal());
      recs[i].estimate = std::sqrt(*recs[i].variance) * rng.normal();
      recs[i].abs_error = std::abs(recs[i].estimate);
    }
    os << "synthetic:";
    for (const auto& row : calibration_table(recs, {0.5, 0.9, 0.99})) {
      const bool ok = std::abs(row.coverage - row.nominal) <= 2.0 * row.std_error;
      pass = pass && ok;
      os << " q=" << row.nominal << " " << row.coverage << (ok ? "" : " FAIL");
    }
  }
  {
    // MLBQ on IID points with its own allocation is the gate; the MLMC-sized run is reported alongside.
    const auto cfg = restrict(load_config(config_path("poisson.json")),
                              {{"mlbq-iid-nmlbq", {1.503}}, {"mlbq-iid", {1.503}}});
    const auto res = run_experiment(cfg, {4});
    if (!res.failures.empty()) return {false, "cell failure: " + res.failures.front().message};
    std::map<std::string, CoverageRow> at90;
    for (const auto& row : calibration_table(res.records, {0.5, 0.9}))
      if (row.nominal == 0.9) at90[row.estimator] = row;
    const auto gate = at90.find("mlbq-iid-nmlbq");
    const bool ok = gate != at90.end() && gate->second.coverage >= 0.9;
    pass = pass && ok;
    os << "; poisson T=1.503 q=0.9 coverage:";
    for (const auto& [name, row] : at90) os << " " << name << " " << row.coverage << " (" << row.count << " reps)";
    os << (ok ? "" : " FAIL");
  }
  return {pass, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<Criterion> all{
      {1, "allocation", 1.0, allocation_reproduction},
      {2, "poisson_ordering", 120.0, poisson_ordering},
      {3, "ode_budget_multiplier", 600.0, ode_budget_multiplier},
      {4, "convergence_rate", 10.0, convergence_rate},
      {5, "oracle_suites", 600.0, oracle_suites},
      {6, "calibration", 600.0, calibration},
  };
  std::vector<const Criterion*> selected;
  for (int i = 1; i < argc; ++i) {
    const Criterion* hit = nullptr;
    for (const auto& c : all)
      if (c.name == argv[i]) hit = &c;
    if (!hit) {
      std::cerr << "unknown criterion '" << argv[i] << "'\n";
      return 2;
    }
    selected.push_back(hit);
  }
  if (selected.empty())
    for (const auto& c : all) selected.push_back(&c);

  bool all_pass = true;
  for (const auto* c : selected) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c->run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = seconds < c->time_limit;
    const bool pass = o.pass && in_time;
    all_pass = all_pass && pass;
    std::cout << (pass ? "PASS" : "FAIL") << "  " << c->number << " " << c->name << "  (" << fmt(seconds) << " s"
              << (in_time ? "" : ", over the " + fmt(c->time_limit) + " s limit") << ")  " << o.detail << std::endl;
  }
  return all_pass ? 0 : 1;
}
