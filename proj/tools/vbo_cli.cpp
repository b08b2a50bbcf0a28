// Experiment harness CLI: run / sweep / compare / flops / estimate-mi.

#include <CLI11.hpp>
#include <iostream>

#include "vbo/vbo_all.hpp"

namespace {

vbo::ExperimentConfig load_experiment(const std::string& config_path, long seed_override,
                                      const std::string& out_override, int jobs_override) {
  vbo::ExperimentConfig cfg = vbo::resolve_config(vbo::parse_config_file(config_path));
  if (seed_override >= 0) cfg.base_seed = static_cast<std::uint64_t>(seed_override);
  if (!out_override.empty()) cfg.output_dir = out_override;
  if (jobs_override > 0) cfg.jobs = jobs_override;
  return cfg;
}

// Whitespace- or comma-delimited rows; the last column is y, the rest x.
std::pair<vbo::Matrix, vbo::Matrix> load_samples(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample file '" + path + "'");
  std::vector<std::vector<double>> rows;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    for (char& ch : line)
      if (ch == ',') ch = ' ';
    std::istringstream is(line);
    std::vector<double> row;
    double v;
    while (is >> v) row.push_back(v);
    if (row.empty()) continue;
    if (row.size() < 2)
      throw std::runtime_error("sample file line " + std::to_string(lineno) +
                               ": need at least one x column and one y column");
    if (!rows.empty() && row.size() != rows.front().size())
      throw std::runtime_error("sample file line " + std::to_string(lineno) +
                               ": inconsistent column count");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("sample file '" + path + "' is empty");
  const int n = static_cast<int>(rows.size());
  const int dx = static_cast<int>(rows.front().size()) - 1;
  vbo::Matrix x(n, dx), y(n, 1);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < dx; ++j) x(i, j) = rows[i][j];
    y(i, 0) = rows[i][dx];
  }
  return {std::move(x), std::move(y)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Black-box optimization experiment harness"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long seed = -1;
  int jobs = 0;

  auto add_common = [&](CLI::App* sub, bool config_required = true) {
    sub->add_option("--config", config_path, "experiment config file")->required(config_required);
    sub->add_option("--seed", seed, "base seed override");
    sub->add_option("--out", out_dir, "output directory override");
    sub->add_option("--jobs", jobs, "parallel (method, seed) cells");
  };

  CLI::App* cmd_run = app.add_subcommand("run", "run the configured experiment");
  add_common(cmd_run);

  CLI::App* cmd_sweep = app.add_subcommand("sweep", "run the configured parameter sweep");
  add_common(cmd_sweep);

  CLI::App* cmd_compare = app.add_subcommand("compare", "compare methods at matched budgets");
  add_common(cmd_compare);

  CLI::App* cmd_flops = app.add_subcommand("flops", "emit the per-iteration FLOP cost model");
  int t_max = 200, t_step = 10;
  std::string flops_out = "flops.csv";
  cmd_flops->add_option("--t-max", t_max, "largest iteration count");
  cmd_flops->add_option("--t-step", t_step, "iteration stride");
  cmd_flops->add_option("--out", flops_out, "output CSV path");

  CLI::App* cmd_mi = app.add_subcommand("estimate-mi", "standalone MI estimate from a sample file");
  std::string mi_input, mi_pairing = "all_pairs";
  long mi_seed = 0;
  cmd_mi->add_option("--input", mi_input, "sample file, one (x..., y) row per line")->required();
  cmd_mi->add_option("--seed", mi_seed, "estimator seed");
  cmd_mi->add_option("--pairing", mi_pairing, "all_pairs or derangement");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*cmd_run) {
      const auto cfg = load_experiment(config_path, seed, out_dir, jobs);
      const auto outcomes = vbo::run_experiment(cfg);
      int failed = 0;
      for (const auto& oc : outcomes) {
        std::cout << oc.method << " seed=" << oc.seed << ": "
                  << (oc.ok ? "ok best_y=" + vbo::detail::fmt(oc.result.best_y) : "error: " + oc.error)
                  << "\n";
        failed += oc.ok ? 0 : 1;
      }
      std::cout << "outputs in " << cfg.output_dir << "\n";
      return failed == 0 ? 0 : 1;
    }
    if (*cmd_sweep) {
      const auto cfg = load_experiment(config_path, seed, out_dir, jobs);
      const auto rows = vbo::sweep(cfg);
      int incomplete = 0;
      for (const auto& r : rows) {
        std::cout << r.parameter << "=" << r.value << " " << r.method
                  << " final_reward=" << r.final_reward_mean << " +- " << r.final_reward_std
                  << " (" << r.n_ok << "/" << cfg.n_seeds << " seeds)\n";
        incomplete += r.n_ok == cfg.n_seeds ? 0 : 1;
      }
      return incomplete == 0 ? 0 : 1;
    }
    if (*cmd_compare) {
      const auto cfg = load_experiment(config_path, seed, out_dir, jobs);
      for (const auto& r : vbo::compare(cfg))
        std::cout << r.method << ": final_reward=" << r.final_reward
                  << " seed_variance=" << r.seed_variance << " evaluations=" << r.evaluations
                  << "\n";
      return 0;
    }
    if (*cmd_flops) {
      if (t_max < 1 || t_step < 1) throw std::runtime_error("flops: t-max and t-step must be >= 1");
      std::ofstream out(flops_out, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write '" + flops_out + "'");
      out << "method,T,surrogate_flops,acquisition_flops,total\n";
      for (const std::string method : {"gp", "hmc", "dkl", "lla", "vbo"})
        for (int t = t_step; t <= t_max; t += t_step) {
          const vbo::FlopReport r = vbo::method_flops(method, t);
          out << r.method << ',' << r.iterations << ',' << vbo::detail::fmt(r.surrogate_flops)
              << ',' << vbo::detail::fmt(r.acquisition_flops) << ',' << vbo::detail::fmt(r.total)
              << '\n';
        }
      std::cout << "model FLOPs written to " << flops_out << "\n";
      return 0;
    }
    if (*cmd_mi) {
      auto [x, y] = load_samples(mi_input);
      vbo::MiEstimatorConfig cfg;
      cfg.seed = static_cast<std::uint64_t>(mi_seed);
      if (mi_pairing == "derangement") cfg.pairing = vbo::PairingMode::Derangement;
      else if (mi_pairing != "all_pairs") throw std::runtime_error("unknown pairing '" + mi_pairing + "'");
      const vbo::MiEstimate est = vbo::estimate_mi_standalone(x, y, cfg);
      std::cout << "mi_estimate_nats=" << est.value << " term_joint=" << est.term_joint
                << " term_marginal=" << est.term_marginal << "\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
