#include "mlbq/harness.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "mlbq/error.hpp"
#include "mlbq/rng.hpp"

namespace mlbq {

namespace {

std::uint64_t fnv1a(const void* data, std::size_t bytes, std::uint64_t h = 0xcbf29ce484222325ULL) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < bytes; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t hash_string(const std::string& s) { return fnv1a(s.data(), s.size()); }

const AllocationSource& source_for(const ExperimentConfig& cfg, const EstimatorSpec& e) {
  return e.allocation ? *e.allocation : cfg.allocation;
}

bool runs_at(const EstimatorSpec& e, double budget) {
  if (!e.budgets) return true;
  return std::find(e.budgets->begin(), e.budgets->end(), budget) != e.budgets->end();
}

double realized_cost(const MultifidelityModel& model, const std::vector<LevelData>& data) {
  double c = 0.0;
  for (const auto& d : data) c += static_cast<double>(d.size()) * model.cost(d.level);
  return c;
}

std::vector<std::size_t> realized_sizes(const std::vector<LevelData>& data) {
  std::vector<std::size_t> n;
  for (const auto& d : data) n.push_back(d.size());
  return n;
}

std::string join_sizes(const std::vector<std::size_t>& n) {
  std::ostringstream os;
  for (std::size_t i = 0; i < n.size(); ++i) os << (i ? ";" : "") << n[i];
  return os.str();
}

std::vector<double> default_norms(const MultifidelityModel& model) {
  const auto* poisson = dynamic_cast<const PoissonModel*>(&model);
  if (!poisson) throw InvalidArgument("model-derived increment norms are only available for the poisson model");
  return poisson->increment_norms();
}

struct Group {
  std::string key;
  DesignSpec design;
  std::vector<std::size_t> sizes;
  bool single_level = false;
  std::vector<std::size_t> estimators;  // indices into cfg.estimators
};

struct Outcome {
  bool ok = false;
  EstimatorOutput out;
  std::string error;
};

struct TaskResult {
  std::vector<ResultRecord> records;
  std::vector<CellLog> cells;
  std::vector<CellFailure> failures;
};

template <class F>
void parallel_for(std::size_t count, std::size_t jobs, F&& body) {
  jobs = std::max<std::size_t>(1, std::min(jobs, count));
  if (jobs == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < jobs; ++t)
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

}  // namespace

std::uint64_t hash_levels(const std::vector<LevelData>& levels) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& d : levels) {
    const std::uint64_t meta[3] = {d.level, static_cast<std::uint64_t>(d.points.rows()),
                                   static_cast<std::uint64_t>(d.points.cols())};
    h = fnv1a(meta, sizeof(meta), h);
    h = fnv1a(d.points.data(), sizeof(double) * static_cast<std::size_t>(d.points.size()), h);
    h = fnv1a(d.values.data(), sizeof(double) * static_cast<std::size_t>(d.values.size()), h);
  }
  return h;
}

std::vector<std::size_t> sample_sizes(const ExperimentConfig& cfg, const MultifidelityModel& model,
                                      const EstimatorSpec& e, std::size_t budget_index) {
  const AllocationSource& src = source_for(cfg, e);
  const double budget = cfg.budgets.at(budget_index);
  const std::size_t levels = model.level_count();
  const auto& costs = model.costs();
  if (src.kind == AllocationSource::Kind::Table) {
    if (src.rows.size() != cfg.budgets.size())
      throw InvalidArgument("allocation table for '" + e.label + "' needs one row per budget");
    const auto& row = src.rows[budget_index];
    if (!is_multilevel(e.kind) && row.size() == 1) return row;
    if (is_multilevel(e.kind)) {
      if (row.size() != levels)
        throw InvalidArgument("allocation row for '" + e.label + "' needs one entry per level");
      return row;
    }
  }
  const double overhead = src.kind == AllocationSource::Kind::MlbqFormula ? src.overhead : 1.0;
  if (!is_multilevel(e.kind)) {
    const double n = std::floor(budget / (overhead * costs.back()));
    return {static_cast<std::size_t>(std::max(1.0, n))};
  }
  AllocationInput in;
  in.costs = costs;
  in.budget = budget;
  in.dim = model.dimension();
  in.overhead = overhead;
  if (src.kind == AllocationSource::Kind::MlmcFormula) {
    in.magnitudes = src.magnitudes;
    if (in.magnitudes.size() != levels) throw InvalidArgument("allocation needs one variance per level");
    return mlmc_allocation(in).n;
  }
  in.magnitudes = src.norms_from_model ? default_norms(model) : src.magnitudes;
  if (in.magnitudes.size() != levels) throw InvalidArgument("allocation needs one norm per level");
  if (src.tau) {
    in.tau = *src.tau;
  } else {
    for (auto f : cfg.families)
      if (f != cfg.families.front()) throw InvalidArgument("mixed kernel families need an explicit tau");
    in.tau = default_tau(cfg.families.front(), model.dimension());
  }
  return mlbq_allocation(in).n;
}

Kernel level_kernel(const ExperimentConfig& cfg, const LevelData& data) {
  std::vector<KernelFactor> factors;
  for (auto f : cfg.families) factors.push_back({f, 1.0});
  const Kernel base(factors, 1.0);
  const auto& hp = cfg.hyper;
  if (!hp.fitted) {
    std::vector<double> ls = hp.lengthscales;
    if (ls.size() == 1) ls.assign(base.dimension(), ls.front());
    const Kernel k = base.with_lengthscales(ls);
    if (hp.amplitude) return k.with_amplitude(*hp.amplitude);
    const double s = mle_amplitude(k, data.points, data.values, PriorMean::zero(), cfg.nugget);
    return k.with_amplitude(std::max(s * s, std::numeric_limits<double>::min()));
  }
  if (data.size() < 2) {
    const Kernel k = base.with_lengthscale(std::sqrt(hp.bounds.lo * hp.bounds.hi));
    const double s = mle_amplitude(k, data.points, data.values, PriorMean::zero(), cfg.nugget);
    return k.with_amplitude(std::max(s * s, std::numeric_limits<double>::min()));
  }
  FitOptions opts;
  opts.per_dimension = hp.per_dimension;
  opts.nugget = cfg.nugget;
  return fit_hyperparameters(base, data.points, data.values, PriorMean::zero(), hp.bounds, opts);
}

EstimatorOutput run_estimator(const ExperimentConfig& cfg, const MultifidelityModel& model, const EstimatorSpec& e,
                              const std::vector<LevelData>& data) {
  const ProductMeasure& mu = model.measure();
  EstimatorOutput out;
  switch (e.kind) {
    case EstimatorKind::Mc:
      out.estimate = mc_estimate(data.at(0).values);
      break;
    case EstimatorKind::Mlmc:
      out.estimate = mlmc_estimate(data);
      for (const auto& d : data) out.level_means.push_back(mc_estimate(d.values));
      break;
    case EstimatorKind::Bq: {
      validate(data.at(0), mu);
      const auto fit = fit_gp(level_kernel(cfg, data[0]), data[0].points, data[0].values, PriorMean::zero(), cfg.nugget);
      const auto post = bq_posterior(fit, mu, cfg.initial_error);
      out = {post.mean, post.variance, post.level_means, post.level_variances};
      break;
    }
    case EstimatorKind::Mlbq: {
      std::vector<Kernel> kernels;
      for (std::size_t l = 0; l < data.size(); ++l) {
        validate(data[l], mu);
        kernels.push_back(level_kernel(cfg, data[l]));
      }
      const std::vector<PriorMean> means(data.size());
      const auto post = mlbq_estimate(data, kernels, means, mu, cfg.nugget, cfg.initial_error);
      out = {post.mean, post.variance, post.level_means, post.level_variances};
      break;
    }
    case EstimatorKind::SkMlbq: {
      validate(data.at(0), mu);
      const Kernel base = level_kernel(cfg, data[0]);
      const std::vector<PriorMean> means(data.size());
      const auto post = sk_mlbq_estimate(data, base, e.coregionalization.value(), means, mu, cfg.nugget,
                                         cfg.initial_error);
      out = {post.mean, post.variance, post.level_means, post.level_variances};
      break;
    }
  }
  return out;
}

std::vector<LevelData> generate_level_data(const ExperimentConfig& cfg, const MultifidelityModel& model,
                                           const DesignSpec& design, const std::vector<std::size_t>& sizes,
                                           bool single_level, std::size_t budget_index, std::size_t replication) {
  const std::size_t top = model.level_count() - 1;
  const std::size_t d = model.dimension();
  std::vector<LevelData> out;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const std::size_t level = single_level ? top : i;
    const std::uint64_t seed =
        derive_seed(cfg.seed, {budget_index, replication, level, single_level ? 1u : 0u, hash_string(design.id())});
    std::size_t n = sizes[i];
    if (design.kind == DesignKind::Grid && design.mixture.empty() && !is_perfect_power(n, d)) {
      const std::size_t lo = std::max<std::size_t>(1, integer_root(n, d));
      const double a = std::pow(static_cast<double>(lo), static_cast<double>(d));
      const double b = std::pow(static_cast<double>(lo + 1), static_cast<double>(d));
      n = static_cast<std::size_t>(std::llround((static_cast<double>(n) - a <= b - static_cast<double>(n)) ? a : b));
    }
    Design des = design.mixture.empty() ? generate_design(design.kind, model.measure(), n, seed)
                                        : generate_mixture_design(design.mixture, n, seed);
    LevelData ld;
    ld.level = level;
    ld.cost = model.cost(level);
    ld.points = std::move(des.points);
    ld.values.resize(ld.points.rows());
    for (Eigen::Index r = 0; r < ld.points.rows(); ++r)
      ld.values(r) = single_level ? model.evaluate(level, point_row(ld.points, r)) : model.increment(level, point_row(ld.points, r));
    out.push_back(std::move(ld));
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, const RunOptions& opts) {
  const auto model = make_model(cfg.model);
  const double reference = model->error_reference().value;
  const std::size_t nb = cfg.budgets.size();
  const std::size_t ne = cfg.estimators.size();
  const double max_cost = *std::max_element(model->costs().begin(), model->costs().end());
  ExperimentResult result;

  std::vector<std::vector<Group>> groups(nb);
  for (std::size_t b = 0; b < nb; ++b) {
    std::map<std::string, std::size_t> index;
    for (std::size_t e = 0; e < ne; ++e) {
      const auto& est = cfg.estimators[e];
      if (!runs_at(est, cfg.budgets[b])) continue;
      auto sizes = sample_sizes(cfg, *model, est, b);
      const bool single = !is_multilevel(est.kind);
      double cost = 0.0;
      for (std::size_t i = 0; i < sizes.size(); ++i)
        cost += static_cast<double>(sizes[i]) * model->cost(single ? model->level_count() - 1 : i);
      if (cost > cfg.budgets[b] + max_cost) {
        std::ostringstream os;
        os << "estimator '" << est.label << "' at budget " << cfg.budgets[b] << " costs " << cost
           << ", above budget plus one level cost";
        result.warnings.push_back(os.str());
      }
      const std::string key = est.design.id() + (single ? "|single|" : "|multi|") + join_sizes(sizes);
      auto [it, fresh] = index.emplace(key, groups[b].size());
      if (fresh) groups[b].push_back({key, est.design, sizes, single, {}});
      groups[b][it->second].estimators.push_back(e);
    }
  }

  auto deterministic = [](const Group& g) { return g.design.mixture.empty() && is_deterministic(g.design.kind); };

  auto evaluate_group = [&](const Group& g, const std::vector<LevelData>& data) {
    std::vector<Outcome> outs;
    for (std::size_t e : g.estimators) {
      Outcome o;
      try {
        o.out = run_estimator(cfg, *model, cfg.estimators[e], data);
        o.ok = true;
      } catch (const NumericalError& ex) {
        o.error = ex.what();
      } catch (const InvalidArgument& ex) {
        o.error = ex.what();
      }
      outs.push_back(std::move(o));
    }
    return outs;
  };

  // Deterministic designs carry no randomness: evaluate once per budget and reuse across replications.
  struct Cached {
    std::vector<LevelData> data;
    std::uint64_t hash = 0;
    std::vector<Outcome> outcomes;
    std::string error;
  };
  std::vector<std::pair<std::size_t, std::size_t>> det_jobs;
  for (std::size_t b = 0; b < nb; ++b)
    for (std::size_t g = 0; g < groups[b].size(); ++g)
      if (deterministic(groups[b][g])) det_jobs.emplace_back(b, g);
  std::vector<Cached> cache(det_jobs.size());
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> cache_index;
  for (std::size_t i = 0; i < det_jobs.size(); ++i) cache_index[det_jobs[i]] = i;
  parallel_for(det_jobs.size(), opts.jobs, [&](std::size_t i) {
    const auto [b, g] = det_jobs[i];
    const Group& grp = groups[b][g];
    try {
      cache[i].data = generate_level_data(cfg, *model, grp.design, grp.sizes, grp.single_level, b, 0);
      cache[i].hash = hash_levels(cache[i].data);
      cache[i].outcomes = evaluate_group(grp, cache[i].data);
    } catch (const NumericalError& ex) {
      cache[i].error = ex.what();
    }
  });

  std::vector<TaskResult> tasks(nb * cfg.replications);
  parallel_for(tasks.size(), opts.jobs, [&](std::size_t t) {
    const std::size_t b = t / cfg.replications;
    const std::size_t rep = t % cfg.replications;
    TaskResult& tr = tasks[t];
    std::vector<std::optional<ResultRecord>> slots(ne);
    for (std::size_t g = 0; g < groups[b].size(); ++g) {
      const Group& grp = groups[b][g];
      std::vector<LevelData> local;
      const std::vector<LevelData>* data = nullptr;
      std::vector<Outcome> local_out;
      const std::vector<Outcome>* outs = nullptr;
      std::uint64_t hash = 0;
      std::string error;
      if (deterministic(grp)) {
        const Cached& c = cache[cache_index.at({b, g})];
        data = &c.data;
        outs = &c.outcomes;
        hash = c.hash;
        error = c.error;
      } else {
        try {
          local = generate_level_data(cfg, *model, grp.design, grp.sizes, grp.single_level, b, rep);
          hash = hash_levels(local);
          local_out = evaluate_group(grp, local);
        } catch (const NumericalError& ex) {
          error = ex.what();
        }
        data = &local;
        outs = &local_out;
      }
      CellLog log{b, rep, grp.key, hash, {}};
      for (std::size_t k = 0; k < grp.estimators.size(); ++k) {
        const auto& est = cfg.estimators[grp.estimators[k]];
        log.estimators.push_back(est.label);
        if (!error.empty()) {
          tr.failures.push_back({b, rep, est.label, error});
          continue;
        }
        const Outcome& o = (*outs)[k];
        if (!o.ok) {
          tr.failures.push_back({b, rep, est.label, o.error});
          continue;
        }
        ResultRecord r;
        r.replication = rep;
        r.estimator = est.label;
        r.budget = cfg.budgets[b];
        r.estimate = o.out.estimate;
        r.variance = o.out.variance;
        r.abs_error = std::abs(o.out.estimate - reference);
        r.cost = realized_cost(*model, *data);
        r.n_per_level = realized_sizes(*data);
        slots[grp.estimators[k]] = std::move(r);
      }
      tr.cells.push_back(std::move(log));
    }
    for (auto& s : slots)
      if (s) tr.records.push_back(std::move(*s));
  });

  for (auto& tr : tasks) {
    for (auto& r : tr.records) result.records.push_back(std::move(r));
    for (auto& c : tr.cells) result.cells.push_back(std::move(c));
    for (auto& f : tr.failures) result.failures.push_back(std::move(f));
  }
  return result;
}

}  // namespace mlbq
