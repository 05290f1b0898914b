#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>

#include "mlbq/allocation.hpp"
#include "mlbq/error.hpp"
#include "mlbq/harness.hpp"
#include "mlbq/oracles.hpp"
#include "mlbq/records.hpp"

namespace mlbq::cli {

namespace {

std::string join(const std::vector<double>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + format_double(v[i]);
  return s;
}

std::string join(const std::vector<std::size_t>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ";" : "") + std::to_string(v[i]);
  return s;
}

struct Output {
  std::ofstream file;
  std::ostream* os;
  Output(const std::string& path, std::ostream& fallback) : os(&fallback) {
    if (!path.empty()) {
      file.open(path);
      if (!file) throw InvalidArgument("cannot open output file '" + path + "'");
      os = &file;
    }
  }
};

void report_failures(const ExperimentResult& res, std::ostream& err) {
  for (const auto& w : res.warnings) err << "warning: " << w << '\n';
  for (const auto& f : res.failures)
    err << "cell failure: budget #" << f.budget_index << " replication " << f.replication << " estimator "
        << f.estimator << ": " << f.message << '\n';
}

}  // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multilevel Bayesian quadrature experiments"};
  app.require_subcommand(1);

  std::string method = "mlbq";
  std::vector<double> magnitudes, costs, budgets;
  std::optional<double> tau;
  std::size_t dim = 1;
  double gamma = 1.0;
  auto* allocate = app.add_subcommand("allocate", "Optimal per-level sample sizes");
  allocate->add_option("--method", method, "mlmc or mlbq")->check(CLI::IsMember({"mlmc", "mlbq"}));
  allocate->add_option("--magnitudes", magnitudes, "Variances (mlmc) or increment norms (mlbq)")
      ->required()->delimiter(',');
  allocate->add_option("--costs", costs, "Per-level costs")->required()->delimiter(',');
  allocate->add_option("--budget", budgets, "One or more budgets")->required()->delimiter(',');
  allocate->add_option("--tau", tau, "Smoothness (mlbq)");
  allocate->add_option("--dim", dim, "Input dimension");
  allocate->add_option("--gamma", gamma, "Overhead factor (mlbq)");

  std::string config_path, out_path, in_path;
  std::optional<std::uint64_t> seed;
  std::size_t jobs = 1;
  std::size_t budget_index = 0;
  std::size_t replication = 0;
  std::vector<double> levels{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 0.95, 0.99};

  auto* estimate = app.add_subcommand("estimate", "Run every estimator once on one budget");
  estimate->add_option("--config", config_path, "Experiment config (JSON)")->required();
  estimate->add_option("--seed", seed, "Override the master seed");
  estimate->add_option("--budget-index", budget_index, "Which configured budget to use");
  estimate->add_option("--replication", replication, "Replication id for seed derivation");
  estimate->add_option("--out", out_path, "Write records CSV here");

  auto* experiment = app.add_subcommand("experiment", "Full budget sweep to CSV");
  experiment->add_option("--config", config_path, "Experiment config (JSON)")->required();
  experiment->add_option("--seed", seed, "Override the master seed");
  experiment->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  experiment->add_option("--out", out_path, "Records CSV (defaults to the config output, else stdout)");

  auto* calibrate = app.add_subcommand("calibrate", "Credible-interval coverage from a records CSV");
  calibrate->add_option("--in", in_path, "Records CSV")->required();
  calibrate->add_option("--out", out_path, "Coverage CSV (default stdout)");
  calibrate->add_option("--levels", levels, "Nominal credible levels")->delimiter(',');

  auto* oracle_cmd = app.add_subcommand("oracle", "Run the reference oracles and print a report");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*allocate) {
      AllocationInput in;
      in.magnitudes = magnitudes;
      in.costs = costs;
      in.dim = dim;
      in.overhead = gamma;
      if (method == "mlbq") {
        if (!tau) throw InvalidArgument("--tau is required for mlbq allocation");
        in.tau = *tau;
      }
      out << "method,budget,real_n,n,cost,objective\n";
      for (double b : budgets) {
        in.budget = b;
        const auto plan = method == "mlmc" ? mlmc_allocation(in) : mlbq_allocation(in);
        out << method << ',' << format_double(b) << ',' << join(plan.real_n) << ',' << join(plan.n) << ','
            << format_double(plan.cost) << ',' << format_double(plan.objective) << '\n';
      }
      return kExitOk;
    }
    if (*estimate) {
      auto cfg = load_config(config_path);
      if (seed) cfg.seed = *seed;
      if (budget_index >= cfg.budgets.size()) throw InvalidArgument("--budget-index is out of range");
      cfg.budgets = {cfg.budgets[budget_index]};
      if (cfg.allocation.kind == AllocationSource::Kind::Table)
        cfg.allocation.rows = {cfg.allocation.rows.at(budget_index)};
      for (auto& e : cfg.estimators)
        if (e.allocation && e.allocation->kind == AllocationSource::Kind::Table)
          e.allocation->rows = {e.allocation->rows.at(budget_index)};
      cfg.replications = replication + 1;
      auto res = run_experiment(cfg);
      std::vector<ResultRecord> mine;
      for (auto& r : res.records)
        if (r.replication == replication) mine.push_back(r);
      out << std::setprecision(10);
      for (const auto& r : mine) {
        out << r.estimator << ": estimate " << r.estimate;
        if (r.variance) out << "  sd " << std::sqrt(*r.variance);
        out << "  abs_error " << r.abs_error << "  n " << join(r.n_per_level) << "  cost " << r.cost << '\n';
      }
      if (!out_path.empty()) {
        Output o(out_path, out);
        write_records(*o.os, mine);
      }
      report_failures(res, err);
      return res.failures.empty() ? kExitOk : kExitNumerical;
    }
    if (*experiment) {
      auto cfg = load_config(config_path);
      if (seed) cfg.seed = *seed;
      const auto res = run_experiment(cfg, RunOptions{jobs});
      Output o(out_path.empty() ? cfg.output : out_path, out);
      write_records(*o.os, res.records);
      report_failures(res, err);
      return res.failures.empty() ? kExitOk : kExitNumerical;
    }
    if (*calibrate) {
      std::ifstream in(in_path);
      if (!in) throw InvalidArgument("cannot open records file '" + in_path + "'");
      const auto rows = calibration_table(read_records(in), levels);
      Output o(out_path, out);
      write_coverage(*o.os, rows);
      return kExitOk;
    }
    if (*oracle_cmd) {
      const auto checks = oracle::run_suite();
      oracle::print_report(out, checks);
      for (const auto& c : checks)
        if (!c.pass) return kExitNumerical;
      return kExitOk;
    }
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace mlbq::cli
