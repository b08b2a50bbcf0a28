#pragma once

#include <atomic>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <thread>

#include "vbo/flops/model.hpp"
#include "vbo/harness/config.hpp"

namespace vbo {

struct SeedOutcome {
  std::string method;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  RunResult result;
};

struct ComparisonRow {
  std::string method;
  double final_reward = 0.0;    // mean over seeds of last-20-iteration mean reward
  double seed_variance = 0.0;   // across seeds
  long evaluations = 0;
};

namespace detail {

inline std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline double last20_mean(const std::vector<IterationTrace>& traces) {
  if (traces.empty()) return 0.0;
  const size_t n = std::min<size_t>(20, traces.size());
  double s = 0.0;
  for (size_t i = traces.size() - n; i < traces.size(); ++i) s += traces[i].mean_reward;
  return s / static_cast<double>(n);
}

inline std::string flop_model_method(const std::string& method) {
  if (method == "gp_ucb") return "gp";
  if (method == "random") return "";
  return "vbo";  // vbo and its ablations share the model row
}

}  // namespace detail

inline Objective build_objective(const ExperimentConfig& cfg) {
  Objective o = make_objective(cfg.objective, cfg.dim_override);
  o.noise_sd = cfg.noise_sd;
  return o;
}

inline long expected_evaluations(const std::string& method, const ExperimentConfig& cfg) {
  if (method == "gp_ucb") return cfg.gp_ucb.n_init + cfg.gp_ucb.iterations;
  if (method == "random")
    return static_cast<long>(cfg.random_search.iterations) * cfg.random_search.batch;
  const long full = static_cast<long>(cfg.vbo.warmup_steps + cfg.vbo.iterations) * cfg.vbo.batch;
  return cfg.vbo.max_evaluations >= 0 ? std::min(full, cfg.vbo.max_evaluations) : full;
}

/// Runs one (method, seed) cell.
inline RunResult dispatch_run(const std::string& method, const ExperimentConfig& cfg,
                              std::uint64_t seed) {
  const Objective obj = build_objective(cfg);
  if (method == "gp_ucb") {
    GpUcbRunConfig g = cfg.gp_ucb;
    g.seed = seed;
    return run_gp_ucb(g, obj);
  }
  if (method == "random") {
    RandomSearchConfig r = cfg.random_search;
    r.seed = seed;
    return run_random_search(r, obj);
  }
  VboConfig v = cfg.vbo;
  v.seed = seed;
  if (method == "vbo_gp_exploration") v.exploration_mode = ExplorationMode::GpSigma;
  if (method == "vbo_gp_exploitation") v.exploitation_mode = ExploitationMode::GpMean;
  return run_vbo(v, obj);
}

/// Fixed trace schema: one row per iteration, LF endings.
inline void write_trace_csv(const std::string& path, const std::string& method,
                            const std::vector<IterationTrace>& traces) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace file '" + path + "'");
  out << "iteration,mean_reward,best_so_far,S_t,mi_estimate,loss_action,loss_critic,model_flops\n";
  const std::string model = detail::flop_model_method(method);
  for (const auto& tr : traces) {
    const double flops = model.empty() ? 0.0 : method_flops(model, std::max(1, tr.t)).total;
    out << tr.t << ',' << detail::fmt(tr.mean_reward) << ',' << detail::fmt(tr.best_so_far) << ','
        << detail::fmt(tr.s_t) << ',' << detail::fmt(tr.mi_estimate) << ','
        << detail::fmt(tr.loss_action) << ',' << detail::fmt(tr.loss_critic) << ','
        << detail::fmt(flops) << '\n';
  }
}

inline std::string trace_path(const std::string& dir, const std::string& method,
                              std::uint64_t seed) {
  return dir + "/trace_" + method + "_seed" + std::to_string(seed) + ".csv";
}

/// Long-format plot data: one row per (method, seed, iteration).
inline void emit_plot_data(const std::string& path, const std::vector<SeedOutcome>& outcomes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write plot data '" + path + "'");
  out << "iteration,S_t,best_so_far,method,seed\n";
  for (const auto& oc : outcomes) {
    if (!oc.ok) continue;
    for (const auto& tr : oc.result.traces)
      out << tr.t << ',' << detail::fmt(tr.s_t) << ',' << detail::fmt(tr.best_so_far) << ','
          << oc.method << ',' << oc.seed << '\n';
  }
}

/// All (method, seed) cells with up to `jobs` worker threads. A failing cell
/// is recorded and does not abort its siblings.
inline std::vector<SeedOutcome> run_cells(const ExperimentConfig& cfg, const std::string& dir) {
  std::filesystem::create_directories(dir);
  std::vector<std::pair<std::string, std::uint64_t>> cells;
  for (const auto& method : cfg.methods)
    for (int s = 0; s < cfg.n_seeds; ++s) cells.emplace_back(method, cfg.base_seed + s);

  std::vector<SeedOutcome> outcomes(cells.size());
  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (size_t i = next.fetch_add(1); i < cells.size(); i = next.fetch_add(1)) {
      SeedOutcome& oc = outcomes[i];
      oc.method = cells[i].first;
      oc.seed = cells[i].second;
      try {
        oc.result = dispatch_run(oc.method, cfg, oc.seed);
        write_trace_csv(trace_path(dir, oc.method, oc.seed), oc.method, oc.result.traces);
        oc.ok = true;
      } catch (const std::exception& e) {
        oc.error = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(cfg.jobs, static_cast<int>(cells.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    for (int i = 0; i < n_threads; ++i) threads.emplace_back(worker);
    for (auto& t : threads) t.join();
  }
  return outcomes;
}

/// Trace CSV per (method, seed), a summary CSV, and the frozen resolved config.
inline std::vector<SeedOutcome> run_experiment(const ExperimentConfig& cfg) {
  const std::string dir = cfg.output_dir;
  std::filesystem::create_directories(dir);
  {
    std::ofstream frozen(dir + "/config_resolved.ini", std::ios::binary);
    frozen << frozen_config_text(cfg);
  }
  std::vector<SeedOutcome> outcomes = run_cells(cfg, dir);

  std::ofstream summary(dir + "/summary.csv", std::ios::binary);
  summary << "method,seed,status,best_y,final_reward_last20,total_evaluations\n";
  for (const auto& oc : outcomes) {
    if (oc.ok) {
      summary << oc.method << ',' << oc.seed << ",ok," << detail::fmt(oc.result.best_y) << ','
              << detail::fmt(detail::last20_mean(oc.result.traces)) << ','
              << oc.result.total_evaluations << '\n';
    } else {
      std::string msg = oc.error;
      for (char& ch : msg)
        if (ch == ',' || ch == '\n') ch = ';';
      summary << oc.method << ',' << oc.seed << ",error: " << msg << ",,,\n";
    }
  }
  emit_plot_data(dir + "/plot_data.csv", outcomes);
  return outcomes;
}

/// Applies one sweepable parameter by dotted name.
inline void apply_sweep_value(ExperimentConfig& cfg, const std::string& param, double value) {
  auto as_int = [&](int lo = 1) {
    const int v = static_cast<int>(value);
    if (static_cast<double>(v) != value || v < lo)
      throw std::runtime_error("sweep value " + detail::fmt(value) + " invalid for " + param);
    return v;
  };
  if (param == "vbo.beta") cfg.vbo.beta = value;
  else if (param == "vbo.batch") cfg.vbo.batch = as_int(2);
  else if (param == "vbo.warmup_steps") cfg.vbo.warmup_steps = as_int();
  else if (param == "vbo.iterations") cfg.vbo.iterations = as_int(0);
  else if (param == "vbo.k_critic") cfg.vbo.k_critic = as_int(0);
  else if (param == "vbo.k_action") cfg.vbo.k_action = as_int(0);
  else if (param == "vbo.lr_action") cfg.vbo.lr_action = value;
  else if (param == "vbo.lr_critic") cfg.vbo.lr_critic = value;
  else if (param == "gp_ucb.beta") cfg.gp_ucb.beta = value;
  else throw std::runtime_error("unknown sweep parameter '" + param + "'");
}

struct SweepRow {
  std::string parameter;
  double value = 0.0;
  std::string method;
  double final_reward_mean = 0.0;
  double final_reward_std = 0.0;
  int n_ok = 0;
};

/// Full experiment per sweep value; per-value outputs land in subdirectories.
inline std::vector<SweepRow> sweep(const ExperimentConfig& cfg) {
  if (cfg.sweep_parameter.empty() || cfg.sweep_values.size() < 2)
    throw std::runtime_error("sweep: need sweep.parameter and >= 2 finite sweep.values");
  for (double v : cfg.sweep_values)
    if (!std::isfinite(v)) throw std::runtime_error("sweep: values must be finite");

  std::vector<SweepRow> rows;
  for (double value : cfg.sweep_values) {
    ExperimentConfig cell = cfg;
    apply_sweep_value(cell, cfg.sweep_parameter, value);
    std::ostringstream sub;
    sub << cfg.output_dir << "/" << cfg.sweep_parameter << "_" << value;
    std::string subdir = sub.str();
    for (char& ch : subdir)
      if (ch == '.') ch = '_';
    cell.output_dir = subdir;
    std::vector<SeedOutcome> outcomes = run_experiment(cell);

    for (const auto& method : cfg.methods) {
      SweepRow row;
      row.parameter = cfg.sweep_parameter;
      row.value = value;
      row.method = method;
      std::vector<double> finals;
      for (const auto& oc : outcomes)
        if (oc.ok && oc.method == method) finals.push_back(detail::last20_mean(oc.result.traces));
      row.n_ok = static_cast<int>(finals.size());
      if (!finals.empty()) {
        double m = 0.0;
        for (double f : finals) m += f;
        m /= static_cast<double>(finals.size());
        double var = 0.0;
        for (double f : finals) var += (f - m) * (f - m);
        row.final_reward_mean = m;
        row.final_reward_std = std::sqrt(var / static_cast<double>(finals.size()));
      }
      rows.push_back(std::move(row));
    }
  }

  std::filesystem::create_directories(cfg.output_dir);
  std::ofstream out(cfg.output_dir + "/sweep.csv", std::ios::binary);
  out << "parameter,value,method,final_reward_mean,final_reward_std,n_ok\n";
  for (const auto& r : rows)
    out << r.parameter << ',' << detail::fmt(r.value) << ',' << r.method << ','
        << detail::fmt(r.final_reward_mean) << ',' << detail::fmt(r.final_reward_std) << ','
        << r.n_ok << '\n';
  return rows;
}

/// Last-20-iteration mean and cross-seed variance per method. All methods
/// must consume the same evaluation budget.
inline std::vector<ComparisonRow> compare(const ExperimentConfig& cfg) {
  long budget = -1;
  for (const auto& method : cfg.methods) {
    const long e = expected_evaluations(method, cfg);
    if (budget < 0) budget = e;
    if (e != budget)
      throw std::runtime_error("compare: method '" + method + "' consumes " + std::to_string(e) +
                               " evaluations, expected " + std::to_string(budget));
  }
  std::vector<SeedOutcome> outcomes = run_experiment(cfg);
  std::vector<ComparisonRow> rows;
  for (const auto& method : cfg.methods) {
    ComparisonRow row;
    row.method = method;
    row.evaluations = budget;
    std::vector<double> finals;
    for (const auto& oc : outcomes) {
      if (oc.method != method) continue;
      if (!oc.ok) throw std::runtime_error("compare: cell " + method + "/seed" +
                                           std::to_string(oc.seed) + " failed: " + oc.error);
      finals.push_back(detail::last20_mean(oc.result.traces));
    }
    double m = 0.0;
    for (double f : finals) m += f;
    m /= static_cast<double>(finals.size());
    double var = 0.0;
    for (double f : finals) var += (f - m) * (f - m);
    row.final_reward = m;
    row.seed_variance = var / static_cast<double>(finals.size());
    rows.push_back(std::move(row));
  }
  std::ofstream out(cfg.output_dir + "/compare.csv", std::ios::binary);
  out << "method,final_reward,seed_variance,evaluations\n";
  for (const auto& r : rows)
    out << r.method << ',' << detail::fmt(r.final_reward) << ',' << detail::fmt(r.seed_variance)
        << ',' << r.evaluations << '\n';
  return rows;
}

}  // namespace vbo
