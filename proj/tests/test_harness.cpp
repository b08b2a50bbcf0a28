#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "vbo/harness/harness.hpp"

using namespace vbo;
namespace fs = std::filesystem;

namespace {

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) out.push_back(line);
  return out;
}

fs::path fresh_dir(const std::string& name) {
  fs::path p = fs::path("/tmp/vbo_harness_tests") / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ExperimentConfig tiny_experiment() {
  ExperimentConfig c;
  c.objective = "quadratic1d";
  c.noise_sd = 0.1;
  c.methods = {"vbo", "random"};
  c.n_seeds = 2;
  c.vbo.warmup_steps = 2;
  c.vbo.iterations = 3;
  c.vbo.batch = 4;
  c.vbo.k_action = 1;
  c.vbo.seed_dim = 3;
  c.vbo.action_hidden = {8};
  c.vbo.critic_hidden = 4;
  c.vbo.head_hidden = {8};
  c.vbo.head_steps = 1;
  c.random_search.iterations = 5;
  c.random_search.batch = 4;
  return c;
}

}  // namespace

TEST_CASE("config text parsing") {
  std::istringstream in(
      "objective = branin   # trailing comment\n"
      "\n"
      "[vbo]\n"
      "beta = 2.5\n"
      "; full-line comment\n"
      "batch = 32\n");
  RawConfig raw = parse_config_text(in);
  CHECK(raw.at("experiment").at("objective") == "branin");
  CHECK(raw.at("vbo").at("beta") == "2.5");
  CHECK(raw.at("vbo").at("batch") == "32");

  std::istringstream bad1("[vbo\nbeta = 1\n");
  CHECK_THROWS_WITH_AS(parse_config_text(bad1),
                       doctest::Contains("line 1"), std::runtime_error);
  std::istringstream bad2("just a token\n");
  CHECK_THROWS_AS(parse_config_text(bad2), std::runtime_error);
}

TEST_CASE("resolve_config types, defaults and unknown keys") {
  std::istringstream in(
      "objective = quadratic1d\n"
      "methods = vbo, random\n"
      "n_seeds = 3\n"
      "[vbo]\n"
      "beta = 0.5\n"
      "pairing = derangement\n");
  ExperimentConfig c = resolve_config(parse_config_text(in));
  CHECK(c.objective == "quadratic1d");
  CHECK(c.methods == std::vector<std::string>{"vbo", "random"});
  CHECK(c.n_seeds == 3);
  CHECK(c.vbo.beta == 0.5);
  CHECK(c.vbo.pairing == PairingMode::Derangement);
  CHECK(c.vbo.warmup_steps == 25);  // untouched default

  SUBCASE("unknown keys are rejected by name") {
    std::istringstream t(
        "[vbo]\nbetaa = 1.0\n");
    try {
      resolve_config(parse_config_text(t));
      FAIL("expected throw");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("vbo.betaa") != std::string::npos);
    }
  }
  SUBCASE("type errors carry section and key") {
    std::istringstream t("[vbo]\nbatch = lots\n");
    try {
      resolve_config(parse_config_text(t));
      FAIL("expected throw");
    } catch (const std::exception& e) {
      CHECK(std::string(e.what()).find("vbo.batch") != std::string::npos);
    }
  }
  SUBCASE("bad enum values are rejected") {
    std::istringstream t("[vbo]\nexploration_mode = maximal\n");
    CHECK_THROWS_AS(resolve_config(parse_config_text(t)), std::runtime_error);
  }
  SUBCASE("method and methods are mutually exclusive") {
    std::istringstream t("method = vbo\nmethods = vbo, random\n");
    CHECK_THROWS_AS(resolve_config(parse_config_text(t)), std::runtime_error);
    std::istringstream u("method = hillclimb\n");
    CHECK_THROWS_AS(resolve_config(parse_config_text(u)), std::runtime_error);
  }
}

TEST_CASE("frozen config text is a fixed point of parse + resolve") {
  ExperimentConfig c = tiny_experiment();
  c.base_seed = 9;
  c.vbo.beta = 0.25;
  c.sweep_parameter = "vbo.beta";
  c.sweep_values = {0.0, 1.0};
  const std::string frozen = frozen_config_text(c);
  std::istringstream in(frozen);
  ExperimentConfig back = resolve_config(parse_config_text(in));
  CHECK(frozen_config_text(back) == frozen);
}

TEST_CASE("run_experiment writes the full artifact set deterministically") {
  ExperimentConfig c = tiny_experiment();
  c.output_dir = fresh_dir("exp_a").string();
  std::vector<SeedOutcome> outcomes = run_experiment(c);
  REQUIRE(outcomes.size() == 4);  // 2 methods x 2 seeds
  for (const auto& oc : outcomes) CHECK(oc.ok);

  const fs::path dir = c.output_dir;
  CHECK(fs::exists(dir / "config_resolved.ini"));
  CHECK(fs::exists(dir / "summary.csv"));
  CHECK(fs::exists(dir / "plot_data.csv"));

  SUBCASE("trace schema and invariants") {
    const std::string trace = read_file(dir / "trace_vbo_seed0.csv");
    std::vector<std::string> rows = lines_of(trace);
    REQUIRE(rows.size() == 4);  // header + T=3
    CHECK(rows[0] ==
          "iteration,mean_reward,best_so_far,S_t,mi_estimate,loss_action,loss_critic,model_flops");
    double prev_best = -1e300, running = 0.0;
    for (size_t i = 1; i < rows.size(); ++i) {
      std::istringstream is(rows[i]);
      std::string cell;
      std::vector<double> vals;
      while (std::getline(is, cell, ',')) vals.push_back(std::stod(cell));
      REQUIRE(vals.size() == 8);
      CHECK(vals[0] == doctest::Approx(static_cast<double>(i)));
      CHECK(vals[2] >= prev_best);
      prev_best = vals[2];
      running += vals[1];
      CHECK(vals[3] == doctest::Approx(running / static_cast<double>(i)).epsilon(1e-12));
      // model flops column follows the theoretical per-iteration model
      CHECK(vals[7] == doctest::Approx(method_flops("vbo", static_cast<std::int64_t>(i)).total));
    }
    // the random-search control carries no surrogate, so no model flops
    const std::vector<std::string> rnd = lines_of(read_file(dir / "trace_random_seed0.csv"));
    std::istringstream is(rnd[1]);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(is, cell, ',')) cells.push_back(cell);
    CHECK(std::stod(cells[7]) == 0.0);
  }

  SUBCASE("plot data is long-format with one row per iteration") {
    std::vector<std::string> rows = lines_of(read_file(dir / "plot_data.csv"));
    CHECK(rows[0] == "iteration,S_t,best_so_far,method,seed");
    // vbo: 2 seeds x 3 iters; random: 2 seeds x 5 iters
    CHECK(rows.size() == 1 + 2 * 3 + 2 * 5);
  }

  SUBCASE("summary has one row per cell") {
    std::vector<std::string> rows = lines_of(read_file(dir / "summary.csv"));
    REQUIRE(rows.size() == 5);
    CHECK(rows[0] == "method,seed,status,best_y,final_reward_last20,total_evaluations");
    CHECK(rows[1].find("vbo,0,ok,") == 0);
  }

  SUBCASE("re-running yields byte-identical outputs") {
    ExperimentConfig c2 = tiny_experiment();
    c2.output_dir = fresh_dir("exp_b").string();
    run_experiment(c2);
    for (const char* f : {"trace_vbo_seed0.csv", "trace_vbo_seed1.csv", "trace_random_seed0.csv",
                          "summary.csv", "plot_data.csv"})
      CHECK(read_file(dir / f) == read_file(fs::path(c2.output_dir) / f));
  }

  SUBCASE("seeds are isolated: shared seeds give identical traces") {
    ExperimentConfig c2 = tiny_experiment();
    c2.base_seed = 1;  // seeds {1, 2} overlap the original {0, 1} in seed 1
    c2.output_dir = fresh_dir("exp_c").string();
    run_experiment(c2);
    CHECK(read_file(dir / "trace_vbo_seed1.csv") ==
          read_file(fs::path(c2.output_dir) / "trace_vbo_seed1.csv"));
    CHECK(read_file(dir / "trace_random_seed1.csv") ==
          read_file(fs::path(c2.output_dir) / "trace_random_seed1.csv"));
  }
}

TEST_CASE("failing cells are reported, not fatal") {
  ExperimentConfig c = tiny_experiment();
  c.n_seeds = 1;
  c.vbo.critic_window = 0;  // rejected inside the vbo cell at run time
  c.output_dir = fresh_dir("exp_fail").string();
  std::vector<SeedOutcome> outcomes = run_experiment(c);
  REQUIRE(outcomes.size() == 2);
  bool saw_failure = false, saw_success = false;
  for (const auto& oc : outcomes) {
    if (oc.method == "vbo") {
      CHECK(!oc.ok);
      CHECK(!oc.error.empty());
      saw_failure = true;
    } else {
      CHECK(oc.ok);  // the sibling random cell still completes
      saw_success = true;
    }
  }
  CHECK(saw_failure);
  CHECK(saw_success);
  const std::string summary = read_file(fs::path(c.output_dir) / "summary.csv");
  CHECK(summary.find("error") != std::string::npos);

  SUBCASE("an exhausted budget is an empty run, not an error") {
    ExperimentConfig z = tiny_experiment();
    z.methods = {"vbo"};
    z.n_seeds = 1;
    z.vbo.max_evaluations = 0;
    z.output_dir = fresh_dir("exp_zero").string();
    std::vector<SeedOutcome> ok = run_experiment(z);
    CHECK(ok[0].ok);
    CHECK(ok[0].result.traces.empty());
  }
}

TEST_CASE("sweep runs one experiment per value with substituted parameter") {
  ExperimentConfig c = tiny_experiment();
  c.methods = {"vbo"};
  c.n_seeds = 1;
  c.sweep_parameter = "vbo.beta";
  c.sweep_values = {0.0, 1.0};
  c.output_dir = fresh_dir("sweep_a").string();
  std::vector<SweepRow> rows = sweep(c);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].value == 0.0);
  CHECK(rows[1].value == 1.0);
  CHECK(rows[0].n_ok == 1);
  CHECK(fs::exists(fs::path(c.output_dir) / "sweep.csv"));
  CHECK(fs::exists(fs::path(c.output_dir) / "vbo_beta_0" / "trace_vbo_seed0.csv"));
  CHECK(fs::exists(fs::path(c.output_dir) / "vbo_beta_1" / "trace_vbo_seed0.csv"));

  SUBCASE("the beta = 0 sweep cell equals a direct exploration-free run") {
    ExperimentConfig d = tiny_experiment();
    d.methods = {"vbo"};
    d.n_seeds = 1;
    d.vbo.exploration_mode = ExplorationMode::None;
    d.output_dir = fresh_dir("sweep_ref").string();
    run_experiment(d);
    CHECK(read_file(fs::path(c.output_dir) / "vbo_beta_0" / "trace_vbo_seed0.csv") ==
          read_file(fs::path(d.output_dir) / "trace_vbo_seed0.csv"));
  }

  SUBCASE("sweep validation") {
    ExperimentConfig bad = c;
    bad.sweep_values = {1.0};
    CHECK_THROWS_AS(sweep(bad), std::runtime_error);
    bad.sweep_values = {};
    CHECK_THROWS_AS(sweep(bad), std::runtime_error);
  }
}

TEST_CASE("apply_sweep_value validation") {
  ExperimentConfig c = tiny_experiment();
  apply_sweep_value(c, "vbo.batch", 8.0);
  CHECK(c.vbo.batch == 8);
  apply_sweep_value(c, "gp_ucb.beta", 3.0);
  CHECK(c.gp_ucb.beta == 3.0);
  CHECK_THROWS_AS(apply_sweep_value(c, "vbo.batch", 2.5), std::runtime_error);
  CHECK_THROWS_AS(apply_sweep_value(c, "vbo.batch", 1.0), std::runtime_error);
  CHECK_THROWS_AS(apply_sweep_value(c, "vbo.nonesuch", 1.0), std::runtime_error);
}

TEST_CASE("compare enforces budget parity across methods") {
  ExperimentConfig c = tiny_experiment();
  c.methods = {"vbo", "gp_ucb", "random"};
  c.n_seeds = 2;
  // all three consume (2 + 3) * 4 = 20 evaluations
  c.gp_ucb.n_init = 4;
  c.gp_ucb.iterations = 16;
  c.gp_ucb.ucb.candidate_pool_size = 64;
  c.gp_ucb.ucb.n_refine_steps = 5;
  c.random_search.iterations = 5;
  c.random_search.batch = 4;
  c.output_dir = fresh_dir("cmp_a").string();
  std::vector<ComparisonRow> rows = compare(c);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    CHECK(r.evaluations == 20);
    CHECK(std::isfinite(r.final_reward));
    CHECK(r.seed_variance >= 0.0);
  }
  CHECK(fs::exists(fs::path(c.output_dir) / "compare.csv"));

  SUBCASE("mismatched budgets abort before any run") {
    ExperimentConfig bad = c;
    bad.gp_ucb.iterations = 99;
    bad.output_dir = fresh_dir("cmp_bad").string();
    CHECK_THROWS_AS(compare(bad), std::runtime_error);
    CHECK(!fs::exists(fs::path(bad.output_dir) / "summary.csv"));
  }
}

TEST_CASE("expected_evaluations arithmetic") {
  ExperimentConfig c = tiny_experiment();
  CHECK(expected_evaluations("vbo", c) == (2 + 3) * 4);
  CHECK(expected_evaluations("vbo_gp_exploration", c) == (2 + 3) * 4);
  CHECK(expected_evaluations("random", c) == 5 * 4);
  CHECK(expected_evaluations("gp_ucb", c) == c.gp_ucb.n_init + c.gp_ucb.iterations);
  c.vbo.max_evaluations = 12;
  CHECK(expected_evaluations("vbo", c) == 12);
}

TEST_CASE("parallel jobs produce the same artifacts as a serial run") {
  ExperimentConfig c = tiny_experiment();
  c.jobs = 4;
  c.output_dir = fresh_dir("par_a").string();
  run_experiment(c);
  ExperimentConfig s = tiny_experiment();
  s.jobs = 1;
  s.output_dir = fresh_dir("par_b").string();
  run_experiment(s);
  for (const char* f : {"trace_vbo_seed0.csv", "trace_random_seed1.csv", "summary.csv"})
    CHECK(read_file(fs::path(c.output_dir) / f) == read_file(fs::path(s.output_dir) / f));
}
