#include "mlbq/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mlbq/error.hpp"

namespace mlbq {

namespace {

using json = nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  throw InvalidArgument("config " + path + ": " + msg);
}

const json& require(const json& j, const std::string& key, const std::string& path) {
  if (!j.is_object() || !j.contains(key)) fail(path, "missing field '" + key + "'");
  return j.at(key);
}

double as_double(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

std::size_t as_size(const json& j, const std::string& path) {
  if (!j.is_number_integer() || j.get<long long>() < 0) fail(path, "expected a nonnegative integer");
  return j.get<std::size_t>();
}

std::vector<double> as_doubles(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_double(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::vector<std::size_t> as_sizes(const json& j, const std::string& path) {
  if (!j.is_array()) fail(path, "expected an array of integers");
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(as_size(j[i], path + "[" + std::to_string(i) + "]"));
  return out;
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) fail(path, "expected a string");
  return j.get<std::string>();
}

template <class F>
auto guarded(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const InvalidArgument& e) {
    const std::string what = e.what();
    if (what.rfind("config ", 0) == 0) throw;
    fail(path, what);
  }
}

Marginal parse_marginal(const json& j, const std::string& path) {
  if (j.is_string() && j.get<std::string>() == "normal") return StandardNormal{};
  if (j.is_object() && j.contains("uniform")) {
    const auto ab = as_doubles(j.at("uniform"), path + ".uniform");
    if (ab.size() != 2) fail(path, "uniform needs [a, b]");
    return Uniform{ab[0], ab[1]};
  }
  fail(path, "expected \"normal\" or {\"uniform\": [a, b]}");
}

AllocationSource parse_allocation(const json& j, const std::string& path) {
  AllocationSource a;
  const std::string source = as_string(require(j, "source", path), path + ".source");
  if (source == "table") {
    a.kind = AllocationSource::Kind::Table;
    const auto& rows = require(j, "rows", path);
    if (!rows.is_array() || rows.empty()) fail(path + ".rows", "expected a nonempty array of rows");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string rp = path + ".rows[" + std::to_string(i) + "]";
      auto row = as_sizes(rows[i], rp);
      if (row.empty()) fail(rp, "row is empty");
      for (auto n : row)
        if (n < 1) fail(rp, "sample sizes must be at least 1");
      a.rows.push_back(std::move(row));
    }
  } else if (source == "mlmc-formula") {
    a.kind = AllocationSource::Kind::MlmcFormula;
    a.magnitudes = as_doubles(require(j, "variances", path), path + ".variances");
  } else if (source == "mlbq-formula") {
    a.kind = AllocationSource::Kind::MlbqFormula;
    const auto& norms = require(j, "norms", path);
    if (norms.is_string() && norms.get<std::string>() == "model")
      a.norms_from_model = true;
    else
      a.magnitudes = as_doubles(norms, path + ".norms");
    if (j.contains("tau")) a.tau = as_double(j.at("tau"), path + ".tau");
    if (j.contains("gamma")) a.overhead = as_double(j.at("gamma"), path + ".gamma");
  } else {
    fail(path + ".source", "unknown allocation source '" + source + "'");
  }
  for (double m : a.magnitudes)
    if (!(m > 0.0)) fail(path, "magnitudes must be positive");
  if (!(a.overhead >= 1.0)) fail(path + ".gamma", "must be at least 1");
  return a;
}

DesignSpec parse_design(const json& j, const std::string& path) {
  DesignSpec d;
  if (j.is_string()) {
    d.kind = guarded(path, [&] { return design_kind_from_string(j.get<std::string>()); });
    return d;
  }
  if (!j.is_object() || as_string(require(j, "kind", path), path + ".kind") != "mixture")
    fail(path, "expected a design name or {\"kind\": \"mixture\", ...}");
  d.kind = DesignKind::Iid;
  const auto& comps = require(j, "components", path);
  if (!comps.is_array() || comps.empty()) fail(path + ".components", "expected a nonempty array");
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string cp = path + ".components[" + std::to_string(i) + "]";
    const double w = as_double(require(comps[i], "weight", cp), cp + ".weight");
    const auto& m = require(comps[i], "measure", cp);
    if (!m.is_array()) fail(cp + ".measure", "expected an array of marginals");
    std::vector<Marginal> marg;
    for (std::size_t k = 0; k < m.size(); ++k) marg.push_back(parse_marginal(m[k], cp + ".measure[" + std::to_string(k) + "]"));
    d.mixture.push_back({w, guarded(cp, [&] { return ProductMeasure(marg); })});
  }
  return d;
}

}  // namespace

std::string to_string(EstimatorKind k) {
  switch (k) {
    case EstimatorKind::Mc: return "mc";
    case EstimatorKind::Mlmc: return "mlmc";
    case EstimatorKind::Bq: return "bq";
    case EstimatorKind::Mlbq: return "mlbq";
    case EstimatorKind::SkMlbq: return "sk-mlbq";
  }
  return "unknown";
}

EstimatorKind estimator_kind_from_string(const std::string& name) {
  if (name == "mc") return EstimatorKind::Mc;
  if (name == "mlmc") return EstimatorKind::Mlmc;
  if (name == "bq") return EstimatorKind::Bq;
  if (name == "mlbq") return EstimatorKind::Mlbq;
  if (name == "sk-mlbq") return EstimatorKind::SkMlbq;
  throw InvalidArgument("unknown estimator '" + name + "'");
}

bool is_bayesian(EstimatorKind k) {
  return k == EstimatorKind::Bq || k == EstimatorKind::Mlbq || k == EstimatorKind::SkMlbq;
}

bool is_multilevel(EstimatorKind k) {
  return k == EstimatorKind::Mlmc || k == EstimatorKind::Mlbq || k == EstimatorKind::SkMlbq;
}

std::string DesignSpec::id() const {
  if (mixture.empty()) return to_string(kind);
  std::ostringstream os;
  os << "mixture";
  for (const auto& c : mixture) {
    os << "(" << c.weight;
    for (const auto& m : c.measure.marginals()) os << ";" << describe(m);
    os << ")";
  }
  return os.str();
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) fail("$", "expected an object");
  ExperimentConfig cfg;
  cfg.schema_version = static_cast<int>(as_size(require(j, "schema_version", "$"), "$.schema_version"));
  if (cfg.schema_version != kSchemaVersion)
    fail("$.schema_version", "unsupported version " + std::to_string(cfg.schema_version));

  const auto& model = require(j, "model", "$");
  cfg.model.name = as_string(require(model, "name", "$.model"), "$.model.name");
  if (model.contains("resolution")) cfg.model.resolution = as_sizes(model.at("resolution"), "$.model.resolution");
  if (model.contains("costs")) cfg.model.costs = as_doubles(model.at("costs"), "$.model.costs");
  if (model.contains("r")) cfg.model.r = as_double(model.at("r"), "$.model.r");
  const auto probe = guarded("$.model", [&] { return make_model(cfg.model); });
  const std::size_t dim = probe->dimension();
  const std::size_t levels = probe->level_count();

  const auto& kernel = require(j, "kernel", "$");
  const auto& fam = require(kernel, "families", "$.kernel");
  if (fam.is_string()) {
    cfg.families.assign(dim, guarded("$.kernel.families", [&] { return family_from_string(fam.get<std::string>()); }));
  } else {
    if (!fam.is_array() || fam.size() != dim) fail("$.kernel.families", "expected one family per dimension");
    for (std::size_t i = 0; i < fam.size(); ++i)
      cfg.families.push_back(guarded("$.kernel.families", [&] { return family_from_string(as_string(fam[i], "$.kernel.families")); }));
  }
  for (auto f : cfg.families)
    if (f == Family::BrownianMotion) fail("$.kernel.families", "brownian kernels have no closed-form kernel mean");
  const std::string policy = as_string(require(kernel, "policy", "$.kernel"), "$.kernel.policy");
  if (policy == "fitted") {
    cfg.hyper.fitted = true;
    const auto b = as_doubles(require(kernel, "bounds", "$.kernel"), "$.kernel.bounds");
    if (b.size() != 2 || !(b[0] > 0.0) || !(b[0] < b[1])) fail("$.kernel.bounds", "expected [lo, hi] with 0 < lo < hi");
    cfg.hyper.bounds = {b[0], b[1]};
    if (kernel.contains("per_dimension")) {
      if (!kernel.at("per_dimension").is_boolean()) fail("$.kernel.per_dimension", "expected a boolean");
      cfg.hyper.per_dimension = kernel.at("per_dimension").get<bool>();
    }
  } else if (policy == "fixed") {
    cfg.hyper.fitted = false;
    const auto& ls = require(kernel, "lengthscale", "$.kernel");
    cfg.hyper.lengthscales = ls.is_array() ? as_doubles(ls, "$.kernel.lengthscale")
                                           : std::vector<double>{as_double(ls, "$.kernel.lengthscale")};
    if (cfg.hyper.lengthscales.size() != 1 && cfg.hyper.lengthscales.size() != dim)
      fail("$.kernel.lengthscale", "expected one value or one per dimension");
    for (double v : cfg.hyper.lengthscales)
      if (!(v > 0.0)) fail("$.kernel.lengthscale", "must be positive");
    const auto& amp = require(kernel, "amplitude", "$.kernel");
    if (amp.is_string()) {
      if (amp.get<std::string>() != "mle") fail("$.kernel.amplitude", "expected a number or \"mle\"");
    } else {
      cfg.hyper.amplitude = as_double(amp, "$.kernel.amplitude");
      if (!(*cfg.hyper.amplitude > 0.0)) fail("$.kernel.amplitude", "must be positive");
    }
  } else {
    fail("$.kernel.policy", "expected \"fitted\" or \"fixed\"");
  }
  if (j.contains("nugget")) {
    cfg.nugget = as_double(j.at("nugget"), "$.nugget");
    if (!(cfg.nugget >= 0.0)) fail("$.nugget", "must be nonnegative");
  }
  if (j.contains("initial_error_samples")) {
    cfg.initial_error.mc_samples = as_size(j.at("initial_error_samples"), "$.initial_error_samples");
    if (cfg.initial_error.mc_samples < 2) fail("$.initial_error_samples", "must be at least 2");
  }

  cfg.budgets = as_doubles(require(j, "budgets", "$"), "$.budgets");
  if (cfg.budgets.empty()) fail("$.budgets", "expected at least one budget");
  for (double b : cfg.budgets)
    if (!(b > 0.0) || !std::isfinite(b)) fail("$.budgets", "budgets must be positive");

  cfg.allocation = parse_allocation(require(j, "allocation", "$"), "$.allocation");

  const auto& ests = require(j, "estimators", "$");
  if (!ests.is_array() || ests.empty()) fail("$.estimators", "expected a nonempty array");
  for (std::size_t i = 0; i < ests.size(); ++i) {
    const std::string ep = "$.estimators[" + std::to_string(i) + "]";
    EstimatorSpec e;
    e.kind = guarded(ep + ".name", [&] { return estimator_kind_from_string(as_string(require(ests[i], "name", ep), ep + ".name")); });
    e.label = ests[i].contains("label") ? as_string(ests[i].at("label"), ep + ".label") : to_string(e.kind);
    if (e.label.empty() || e.label.find_first_of(",\"\n\r") != std::string::npos)
      fail(ep + ".label", "labels must be nonempty and free of commas, quotes, and newlines");
    e.design = parse_design(require(ests[i], "design", ep), ep + ".design");
    if (ests[i].contains("allocation")) e.allocation = parse_allocation(ests[i].at("allocation"), ep + ".allocation");
    if (ests[i].contains("budgets")) {
      e.budgets = as_doubles(ests[i].at("budgets"), ep + ".budgets");
      for (double b : *e.budgets)
        if (std::find(cfg.budgets.begin(), cfg.budgets.end(), b) == cfg.budgets.end())
          fail(ep + ".budgets", "every budget must appear in $.budgets");
    }
    if (e.kind == EstimatorKind::SkMlbq) {
      const auto& b = require(ests[i], "coregionalization", ep);
      Matrix m = Matrix::Identity(static_cast<Eigen::Index>(levels), static_cast<Eigen::Index>(levels));
      if (b.is_number()) {
        const double off = b.get<double>();
        for (Eigen::Index r = 0; r < m.rows(); ++r)
          for (Eigen::Index c = 0; c < m.cols(); ++c)
            if (r != c) m(r, c) = off;
      } else {
        if (!b.is_array() || b.size() != levels) fail(ep + ".coregionalization", "expected a number or a square matrix");
        for (std::size_t r = 0; r < levels; ++r) {
          const auto row = as_doubles(b[r], ep + ".coregionalization");
          if (row.size() != levels) fail(ep + ".coregionalization", "expected a square matrix");
          for (std::size_t c = 0; c < levels; ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
        }
      }
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > 0.0 || Eigen::LLT<Matrix>(m).info() != Eigen::Success)
        fail(ep + ".coregionalization", "must be symmetric positive definite");
      e.coregionalization = m;
    }
    if (is_bayesian(e.kind)) {
      for (std::size_t k = 0; k < dim; ++k)
        guarded(ep, [&] {
          factor_kernel_mean(KernelFactor{cfg.families[k], 1.0}, probe->measure()[k], 0.0);
          return 0;
        });
    }
    if (e.design.kind == DesignKind::Grid && !probe->measure().bounded())
      fail(ep + ".design", "grid designs need bounded marginals");
    for (const auto& c : e.design.mixture)
      if (c.measure.dimension() != dim) fail(ep + ".design", "mixture dimension does not match the model");
    for (const auto& other : cfg.estimators)
      if (other.label == e.label) fail(ep + ".label", "duplicate estimator label '" + e.label + "'");
    cfg.estimators.push_back(std::move(e));
  }

  auto check_table = [&](const AllocationSource& a, const std::string& path, bool multilevel, bool global) {
    if (a.kind != AllocationSource::Kind::Table) return;
    if (a.rows.size() != cfg.budgets.size())
      fail(path + ".rows", "needs one row per budget (" + std::to_string(cfg.budgets.size()) + ")");
    for (std::size_t r = 0; r < a.rows.size(); ++r) {
      const std::size_t len = a.rows[r].size();
      const bool ok = len == levels || (!multilevel && !global && len == 1);
      if (!ok) fail(path + ".rows[" + std::to_string(r) + "]", "needs one entry per level (" + std::to_string(levels) + ")");
    }
  };
  bool uses_global = false;
  for (std::size_t i = 0; i < cfg.estimators.size(); ++i) {
    const auto& e = cfg.estimators[i];
    if (e.allocation)
      check_table(*e.allocation, "$.estimators[" + std::to_string(i) + "].allocation", is_multilevel(e.kind), false);
    else
      uses_global = true;
  }
  if (uses_global) check_table(cfg.allocation, "$.allocation", true, true);

  cfg.replications = as_size(require(j, "replications", "$"), "$.replications");
  if (cfg.replications < 1) fail("$.replications", "must be at least 1");
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned() && !(j.at("seed").is_number_integer() && j.at("seed").get<long long>() >= 0))
      fail("$.seed", "expected an unsigned integer");
    cfg.seed = j.at("seed").get<std::uint64_t>();
  }
  if (j.contains("output")) cfg.output = as_string(j.at("output"), "$.output");
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

}  // namespace mlbq
