// End-to-end acceptance checks. Each criterion prints exactly one PASS/FAIL
// line; the process exits non-zero if any criterion fails.
#include <Eigen/LU>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "vbo/vbo_all.hpp"

using namespace vbo;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void criterion(int n, const std::string& desc, bool pass) {
  std::printf("%s criterion %d: %s\n", pass ? "PASS" : "FAIL", n, desc.c_str());
  std::fflush(stdout);
  if (!pass) ++g_failures;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double median5(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  return v[2];
}

// ---------------------------------------------------------------------------
// criterion 1: gradient fidelity via central finite differences
// ---------------------------------------------------------------------------

struct GradCheck {
  double worst_param = 0.0;  // relative error over all parameter gradients
  double worst_input = 0.0;  // relative error over all input gradients
};

double rel_err(double ad, double fd) {
  return std::abs(ad - fd) / std::max({1.0, std::abs(ad), std::abs(fd)});
}

// FD over every entry of every block; `rebuild` evaluates the scalar loss
// from the current ParamSet values.
template <typename Rebuild>
double fd_params(ParamSet& params, const std::map<std::string, std::vector<double>>& analytic,
                 Rebuild rebuild) {
  const double h = 1e-6;
  double worst = 0.0;
  for (auto& [name, block] : params.blocks) {
    const auto& ad = analytic.at(name);
    for (size_t i = 0; i < block.value.size(); ++i) {
      const double orig = block.value[i];
      block.value[i] = orig + h;
      const double up = rebuild();
      block.value[i] = orig - h;
      const double dn = rebuild();
      block.value[i] = orig;
      worst = std::max(worst, rel_err(ad[i], (up - dn) / (2.0 * h)));
    }
  }
  return worst;
}

template <typename Rebuild>
double fd_inputs(std::vector<double>& input, const std::vector<double>& analytic,
                 Rebuild rebuild) {
  const double h = 1e-6;
  double worst = 0.0;
  for (size_t i = 0; i < input.size(); ++i) {
    const double orig = input[i];
    input[i] = orig + h;
    const double up = rebuild();
    input[i] = orig - h;
    const double dn = rebuild();
    input[i] = orig;
    worst = std::max(worst, rel_err(analytic[i], (up - dn) / (2.0 * h)));
  }
  return worst;
}

std::map<std::string, std::vector<double>> collect_grads(const ParamSet& params,
                                                         const MountedParams& mounted) {
  std::map<std::string, std::vector<double>> out;
  for (const auto& [name, _] : params.blocks) out[name] = mounted.at(name).grad();
  return out;
}

GradCheck check_action_net(std::uint64_t trial) {
  Rng rng(trial);
  ActionNetConfig cfg;
  cfg.seed_dim = 2 + rng.uniform_int(0, 2);
  cfg.hidden_dims = {3 + rng.uniform_int(0, 3), 3 + rng.uniform_int(0, 3)};
  cfg.output_dim = 1 + rng.uniform_int(0, 2);
  ActionNet net(cfg, rng);
  Bounds bounds{std::vector<double>(cfg.output_dim, -2.0), std::vector<double>(cfg.output_dim, 3.0)};
  const int B = 3;
  std::vector<double> seeds = rng.normals(static_cast<size_t>(B) * cfg.seed_dim);
  const std::vector<double> mix = rng.normals(static_cast<size_t>(B) * cfg.output_dim);

  auto eval = [&] {
    Tape t;
    MountedParams p = mount(t, net.params());
    Tensor s = t.constant({B, cfg.seed_dim}, seeds);
    Tensor out = net.forward(t, p, s, bounds);
    return mean_all(mul(out, t.constant({B, cfg.output_dim}, mix))).value()[0];
  };

  std::map<std::string, std::vector<double>> param_grads;
  std::vector<double> input_grads;
  {
    Tape t;
    MountedParams p = mount(t, net.params());
    Tensor s = t.leaf({B, cfg.seed_dim}, seeds);
    Tensor loss = mean_all(mul(net.forward(t, p, s, bounds), t.constant({B, cfg.output_dim}, mix)));
    t.backward(loss);
    param_grads = collect_grads(net.params(), p);
    input_grads = s.grad();
  }
  GradCheck gc;
  gc.worst_param = fd_params(net.params(), param_grads, eval);
  gc.worst_input = fd_inputs(seeds, input_grads, eval);
  return gc;
}

GradCheck check_critic(std::uint64_t trial) {
  Rng rng(trial + 1000);
  CriticConfig cfg;
  const int d = 1 + rng.uniform_int(0, 2);
  cfg.input_dim = d + 1;
  cfg.hidden_dim = 3 + rng.uniform_int(0, 2);
  cfg.dense_dims = {cfg.hidden_dim, 1};
  Critic critic(cfg, rng);
  const int B = 2 + rng.uniform_int(0, 2), T = 1 + rng.uniform_int(0, 2);
  std::vector<std::vector<double>> xd, yd;
  for (int s = 0; s < T; ++s) {
    xd.push_back(rng.normals(static_cast<size_t>(B) * d, 0.7));
    yd.push_back(rng.normals(B, 0.7));
  }
  const std::vector<double> mix = rng.normals(B);

  auto eval = [&] {
    Tape t;
    MountedParams p = mount(t, critic.params());
    std::vector<Tensor> xs, ys;
    for (int s = 0; s < T; ++s) {
      xs.push_back(t.constant({B, d}, xd[s]));
      ys.push_back(t.constant({B, 1}, yd[s]));
    }
    return mean_all(mul(critic.forward(t, p, xs, ys), t.constant({B, 1}, mix))).value()[0];
  };

  std::map<std::string, std::vector<double>> param_grads;
  std::vector<std::vector<double>> input_grads;
  {
    Tape t;
    MountedParams p = mount(t, critic.params());
    std::vector<Tensor> xs, ys;
    for (int s = 0; s < T; ++s) {
      xs.push_back(t.leaf({B, d}, xd[s]));
      ys.push_back(t.constant({B, 1}, yd[s]));
    }
    Tensor loss = mean_all(mul(critic.forward(t, p, xs, ys), t.constant({B, 1}, mix)));
    t.backward(loss);
    param_grads = collect_grads(critic.params(), p);
    for (int s = 0; s < T; ++s) input_grads.push_back(xs[s].grad());
  }
  GradCheck gc;
  gc.worst_param = fd_params(critic.params(), param_grads, eval);
  for (int s = 0; s < T; ++s)
    gc.worst_input = std::max(gc.worst_input, fd_inputs(xd[s], input_grads[s], eval));
  return gc;
}

GradCheck check_reward_head(std::uint64_t trial) {
  Rng rng(trial + 2000);
  RewardHeadConfig cfg;
  cfg.input_dim = 1 + rng.uniform_int(0, 3);
  cfg.hidden_dims = {3 + rng.uniform_int(0, 3), 3 + rng.uniform_int(0, 3)};
  RewardHead head(cfg, rng);
  const int B = 3;
  std::vector<double> x = rng.normals(static_cast<size_t>(B) * cfg.input_dim);
  const std::vector<double> mix = rng.normals(B);

  auto eval = [&] {
    Tape t;
    MountedParams p = mount(t, head.params());
    return mean_all(mul(head.forward(t, p, t.constant({B, cfg.input_dim}, x)),
                        t.constant({B, 1}, mix)))
        .value()[0];
  };
  std::map<std::string, std::vector<double>> param_grads;
  std::vector<double> input_grads;
  {
    Tape t;
    MountedParams p = mount(t, head.params());
    Tensor xt = t.leaf({B, cfg.input_dim}, x);
    Tensor loss = mean_all(mul(head.forward(t, p, xt), t.constant({B, 1}, mix)));
    t.backward(loss);
    param_grads = collect_grads(head.params(), p);
    input_grads = xt.grad();
  }
  GradCheck gc;
  gc.worst_param = fd_params(head.params(), param_grads, eval);
  gc.worst_input = fd_inputs(x, input_grads, eval);
  return gc;
}

void run_criterion_1() {
  const auto t0 = Clock::now();
  double mlp_worst = 0.0, rec_param_worst = 0.0, rec_input_worst = 0.0;
  for (std::uint64_t trial = 0; trial < 20; ++trial) {
    GradCheck a = check_action_net(trial);
    GradCheck h = check_reward_head(trial);
    mlp_worst = std::max({mlp_worst, a.worst_param, a.worst_input, h.worst_param, h.worst_input});
    GradCheck c = check_critic(trial);
    rec_param_worst = std::max(rec_param_worst, c.worst_param);
    rec_input_worst = std::max(rec_input_worst, c.worst_input);
  }
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "gradient fidelity: worst relative error mlp=" << mlp_worst
    << " recurrent params=" << rec_param_worst << " recurrent inputs=" << rec_input_worst
    << " over 20 random configurations per network (" << elapsed << " s)";
  criterion(1, d.str(),
            mlp_worst < 1e-4 && rec_param_worst < 1e-4 && rec_input_worst < 1e-3 && elapsed < 60.0);
}

// ---------------------------------------------------------------------------
// criteria 2 + 3: analytic Gaussian MI targets, lower bound, data processing
// ---------------------------------------------------------------------------

void gauss_data(double rho, int dim, int n, std::uint64_t seed, Matrix& x, Matrix& y) {
  // per-component correlation rho; analytic MI is -dim/2 * ln(1 - rho^2)
  Rng rng(seed);
  x = Matrix(n, dim);
  y = Matrix(n, dim);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < dim; ++j) {
      const double u = rng.normal();
      x(i, j) = u;
      y(i, j) = rho * u + std::sqrt(1.0 - rho * rho) * rng.normal();
    }
}

void run_criteria_2_and_3() {
  struct Case {
    double rho;
    int dim;
    double truth, lo, hi;
  };
  // the 1.6607-nat target needs two correlated components; a single pair
  // caps at 0.8304 nats
  const std::vector<Case> cases{{0.0, 1, 0.0, -0.05, 0.10},
                                {0.5, 1, 0.14384, 0.14384 - 0.05, 0.14384 + 0.05},
                                {0.9, 2, 1.66073, 1.66073 - 0.15, 1.66073 + 0.15}};
  const int n = 2048;
  bool medians_ok = true, fits_fast = true, lower_bound_ok = true;
  double slowest_fit = 0.0;
  std::ostringstream detail2;
  double rho9_seed0 = 0.0;

  for (const auto& c : cases) {
    std::vector<double> est;
    for (std::uint64_t s = 0; s < 5; ++s) {
      Matrix x, y;
      gauss_data(c.rho, c.dim, n, 100 + s, x, y);
      MiEstimatorConfig cfg;
      cfg.seed = s;
      const auto t0 = Clock::now();
      const double v = estimate_mi_standalone(x, y, cfg).value;
      slowest_fit = std::max(slowest_fit, seconds_since(t0));
      est.push_back(v);
      if (c.rho == 0.9 && s == 0) rho9_seed0 = v;
      if (v > c.truth + 0.1) lower_bound_ok = false;
    }
    const double med = median5(est);
    if (med < c.lo || med > c.hi) medians_ok = false;
    detail2 << " rho=" << c.rho << " median=" << med << " (target " << c.truth << ")";
  }
  fits_fast = slowest_fit < 60.0;
  criterion(2, "gaussian MI estimates:" + detail2.str() + "; slowest fit " +
                   std::to_string(slowest_fit) + " s",
            medians_ok && fits_fast);

  // data-processing check: coarsening Y to its signs cannot gain information
  Matrix x, y;
  gauss_data(0.9, 2, n, 100, x, y);
  Matrix ys = y;
  for (auto& v : ys.a) v = v >= 0.0 ? 1.0 : -1.0;
  MiEstimatorConfig cfg;
  cfg.seed = 0;
  const double coarse = estimate_mi_standalone(x, ys, cfg).value;
  std::ostringstream d3;
  d3 << "lower-bound and data-processing: estimates never exceed truth + 0.1; I(X; sign(Y)) = "
     << coarse << " <= I(X; Y) + 0.1 = " << rho9_seed0 + 0.1;
  criterion(3, d3.str(), lower_bound_ok && coarse <= rho9_seed0 + 0.1);
}

// ---------------------------------------------------------------------------
// criterion 4: GP posterior / information gain against dense oracles
// ---------------------------------------------------------------------------

void run_criterion_4() {
  Rng rng(3);
  double worst_post = 0.0, worst_ig = 0.0, worst_interp = 0.0;
  bool monotone = true;
  for (int rep = 0; rep < 20; ++rep) {
    const int n = 5, d = 1 + rng.uniform_int(0, 2);
    Matrix x(n, d);
    for (auto& v : x.a) v = rng.uniform(-2.0, 2.0);
    std::vector<double> y = rng.normals(n);
    RbfKernel k(d, 0.8, 0.9);
    const double noise = 0.01;
    GpModel gp(k, noise);
    gp.fit(x, y);

    Eigen::MatrixXd K(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) K(i, j) = k(x.row(i), x.row(j));
    K.diagonal().array() += noise + 1e-10;  // the model's base jitter
    Eigen::FullPivLU<Eigen::MatrixXd> lu(K);
    Eigen::VectorXd yv = Eigen::Map<const Eigen::VectorXd>(y.data(), n);

    std::vector<double> q(d);
    for (auto& v : q) v = rng.uniform(-2.0, 2.0);
    Eigen::VectorXd kx(n);
    for (int i = 0; i < n; ++i) kx(i) = k(x.row(i), q.data());
    const double mu_ref = kx.dot(lu.solve(yv));
    const double var_ref = std::max(0.0, k(q.data(), q.data()) - kx.dot(lu.solve(kx)));
    auto [mu, sigma] = gp.posterior(q);
    worst_post = std::max({worst_post, std::abs(mu - mu_ref),
                           std::abs(sigma * sigma - var_ref)});

    // info gain vs a dense determinant (different algorithm, same matrix)
    Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) += k(x.row(i), x.row(j)) / noise;
    const double ref = 0.5 * std::log(Eigen::FullPivLU<Eigen::MatrixXd>(m).determinant());
    worst_ig = std::max(worst_ig, std::abs(info_gain(x, k, noise) - ref) / std::max(1.0, ref));

    // monotone growth of the same design
    double prev = 0.0;
    for (int m2 = 1; m2 <= n; ++m2) {
      Matrix head(m2, d, std::vector<double>(x.a.begin(), x.a.begin() + static_cast<size_t>(m2) * d));
      const double f = info_gain(head, k, noise);
      if (f < prev - 1e-12) monotone = false;
      prev = f;
    }
  }
  // noiseless interpolation
  {
    Matrix x(6, 1, {-2.0, -1.2, -0.4, 0.4, 1.2, 2.0});
    std::vector<double> y(6);
    for (int i = 0; i < 6; ++i) y[i] = std::sin(x(i, 0));
    GpModel gp(RbfKernel(1, 1.0, 1.0), 0.0);
    gp.fit(x, y);
    for (int i = 0; i < 6; ++i)
      worst_interp = std::max(worst_interp, std::abs(gp.posterior(x.row(i)).first - y[i]));
  }
  std::ostringstream d;
  d << "gp oracles: posterior err " << worst_post << " (<1e-8), info-gain err " << worst_ig
    << " (<1e-9), interpolation err " << worst_interp << " (<1e-6), info gain monotone";
  criterion(4, d.str(),
            worst_post < 1e-8 && worst_ig < 1e-9 && worst_interp < 1e-6 && monotone);
}

// ---------------------------------------------------------------------------
// criterion 5: GP-UCB baseline on the 2-d bowl benchmark
// ---------------------------------------------------------------------------

void run_criterion_5() {
  const auto t0 = Clock::now();
  Objective obj = make_branin();
  std::vector<double> best;
  for (std::uint64_t s = 0; s < 5; ++s) {
    GpUcbRunConfig cfg;
    cfg.n_init = 5;
    cfg.iterations = 95;
    cfg.seed = s;
    best.push_back(run_gp_ucb(cfg, obj).best_y);
  }
  const double med = median5(best);
  const double elapsed = seconds_since(t0);
  std::ostringstream d;
  d << "gp-ucb, 100 evaluations: median best " << med << " vs optimum -0.397887 ("
    << elapsed << " s)";
  criterion(5, d.str(), std::abs(med - (-0.397887)) < 0.5 && elapsed < 120.0);
}

// ---------------------------------------------------------------------------
// criterion 6: desk-scale optimization beats random search at equal budget
// ---------------------------------------------------------------------------

struct DeskResult {
  double med_best = 0.0, med_last20 = 0.0, med_rnd_last20 = 0.0;
  double elapsed = 0.0;
};

DeskResult desk_run(const Objective& obj, int iterations, int batch) {
  const auto t0 = Clock::now();
  std::vector<double> best, last20, rnd;
  for (std::uint64_t s = 0; s < 5; ++s) {
    VboConfig cfg;
    cfg.warmup_steps = 25;
    cfg.iterations = iterations;
    cfg.batch = batch;
    cfg.beta = 1.0;
    cfg.pairing = PairingMode::Derangement;  // O(B) pairing keeps the runtime budget
    cfg.seed = s;
    RunResult r = run_vbo(cfg, obj);
    best.push_back(r.best_y);
    last20.push_back(detail::last20_mean(r.traces));
    RandomSearchConfig rc;
    rc.iterations = 25 + iterations;  // identical evaluation budget
    rc.batch = batch;
    rc.seed = s;
    rnd.push_back(detail::last20_mean(run_random_search(rc, obj).traces));
  }
  return {median5(best), median5(last20), median5(rnd), seconds_since(t0)};
}

void run_criterion_6() {
  DeskResult b = desk_run(make_branin(), 50, 32);
  DeskResult h = desk_run(make_hartmann6(), 60, 64);
  std::ostringstream d;
  d << "desk-scale optimization: 2-d median best " << b.med_best
    << " (within 1.0 of -0.397887), policy reward " << b.med_last20 << " > random "
    << b.med_rnd_last20 << "; 6-d median best " << h.med_best << " (>= 3.0), policy reward "
    << h.med_last20 << " > random " << h.med_rnd_last20 << " (" << b.elapsed << " s / "
    << h.elapsed << " s)";
  criterion(6, d.str(),
            std::abs(b.med_best - (-0.397887)) < 1.0 && b.med_last20 > b.med_rnd_last20 &&
                h.med_best >= 3.0 && h.med_last20 > h.med_rnd_last20 && b.elapsed < 600.0 &&
                h.elapsed < 600.0);
}

// ---------------------------------------------------------------------------
// criterion 7: evaluation budget, freeze isolation, beta = 0 equivalence
// ---------------------------------------------------------------------------

bool params_equal(const NamedArrays& a, const NamedArrays& b, const std::string& prefix) {
  for (const auto& [name, arr] : a) {
    if (name.rfind(prefix, 0) != 0) continue;
    auto it = b.find(name);
    if (it == b.end() || it->second.data != arr.data) return false;
  }
  return true;
}

void run_criterion_7() {
  Objective obj = make_quadratic1d();
  obj.noise_sd = 0.05;
  VboConfig cfg;
  cfg.warmup_steps = 3;
  cfg.iterations = 4;
  cfg.batch = 4;
  cfg.seed_dim = 3;
  cfg.action_hidden = {8, 8};
  cfg.critic_hidden = 4;
  cfg.head_hidden = {8};
  cfg.head_steps = 2;
  cfg.seed = 11;

  // exact budget
  RunResult res = run_vbo(cfg, obj);
  const bool budget_ok =
      res.total_evaluations == static_cast<long>(cfg.warmup_steps + cfg.iterations) * cfg.batch;

  // freeze isolation at the update level
  VboOptimizer opt(cfg, obj);
  opt.warmup();
  NamedArrays before;
  for (const auto& [n, a] : opt.action_net().params().to_arrays()) before[n] = a;
  for (const auto& [n, a] : opt.critic().params().to_arrays()) before[n] = a;
  for (const auto& [n, a] : opt.reward_head().params().to_arrays()) before[n] = a;
  History h;
  Matrix hx(cfg.batch, 1), hy(cfg.batch, 1);
  for (int i = 0; i < cfg.batch; ++i) {
    hx(i, 0) = -2.0 + i;
    hy(i, 0) = -hx(i, 0) * hx(i, 0);
  }
  h.append(hx, hy);
  const_cast<History&>(opt.history()).append(hx, hy);
  Rng srng(5);
  Matrix seeds(cfg.batch, cfg.seed_dim);
  for (auto& v : seeds.a) v = srng.normal();
  opt.actor_update(seeds);
  NamedArrays after_actor;
  for (const auto& [n, a] : opt.critic().params().to_arrays()) after_actor[n] = a;
  for (const auto& [n, a] : opt.reward_head().params().to_arrays()) after_actor[n] = a;
  const bool actor_freeze = params_equal(before, after_actor, "critic.") &&
                            params_equal(before, after_actor, "head.");
  NamedArrays before_critic;
  for (const auto& [n, a] : opt.action_net().params().to_arrays()) before_critic[n] = a;
  opt.critic_update(h);
  NamedArrays after_critic;
  for (const auto& [n, a] : opt.action_net().params().to_arrays()) after_critic[n] = a;
  const bool critic_freeze = params_equal(before_critic, after_critic, "action.");

  // beta = 0 vs exploitation-only, bit for bit
  VboConfig a = cfg;
  a.beta = 0.0;
  a.exploration_mode = ExplorationMode::DvMi;
  VboConfig b = cfg;
  b.beta = 1.0;
  b.exploration_mode = ExplorationMode::None;
  RunResult ra = run_vbo(a, obj), rb = run_vbo(b, obj);
  bool beta0_ok = ra.traces.size() == rb.traces.size();
  for (size_t t = 0; beta0_ok && t < ra.traces.size(); ++t)
    beta0_ok = ra.traces[t].loss_action == rb.traces[t].loss_action &&
               ra.traces[t].mean_reward == rb.traces[t].mean_reward;
  for (const auto& [name, arr] : ra.final_params)
    beta0_ok = beta0_ok && arr.data == rb.final_params.at(name).data;

  criterion(7,
            "budget W*B + T*B exact; frozen phases leave the other networks bit-unchanged; "
            "beta=0 is bit-identical to the exploitation-only configuration",
            budget_ok && actor_freeze && critic_freeze && beta0_ok);
}

// ---------------------------------------------------------------------------
// criterion 8: closed-form cost-model arithmetic
// ---------------------------------------------------------------------------

void run_criterion_8() {
  const FlopReport hmc = method_flops("hmc", 100);
  const FlopReport vbo = method_flops("vbo", 100);
  const bool ratio_ok = hmc.acquisition_flops / vbo.acquisition_flops == 2500.0;
  const bool surrogate_ok = hmc.surrogate_flops == 1e9;
  std::ostringstream d;
  d << "cost model: resampling/learned acquisition ratio "
    << hmc.acquisition_flops / vbo.acquisition_flops << " == 2500, resampling surrogate at T=100 "
    << hmc.surrogate_flops << " == 1e9";
  criterion(8, d.str(), ratio_ok && surrogate_ok);
}

// ---------------------------------------------------------------------------
// criterion 9: surrogate ablation ordering on the PDE objective
// ---------------------------------------------------------------------------

void run_criterion_9() {
  Objective obj = make_brusselator_objective();
  obj.noise_sd = 0.05;
  auto run_mode = [&](ExploitationMode xm, ExplorationMode rm, std::uint64_t s) {
    VboConfig cfg;
    cfg.warmup_steps = 5;
    cfg.iterations = 40;
    cfg.batch = 8;
    cfg.beta = 1.0;
    cfg.pairing = PairingMode::Derangement;
    cfg.seed = s;
    cfg.exploitation_mode = xm;
    cfg.exploration_mode = rm;
    return detail::last20_mean(run_vbo(cfg, obj).traces);
  };
  std::vector<double> full, gp_exploit, gp_explore;
  for (std::uint64_t s = 1; s <= 5; ++s) {
    full.push_back(run_mode(ExploitationMode::RewardHead, ExplorationMode::DvMi, s));
    gp_exploit.push_back(run_mode(ExploitationMode::GpMean, ExplorationMode::DvMi, s));
    gp_explore.push_back(run_mode(ExploitationMode::RewardHead, ExplorationMode::GpSigma, s));
  }
  const double mf = median5(full), mx = median5(gp_exploit), mr = median5(gp_explore);
  std::ostringstream d;
  d << "ablation ordering on the reaction-diffusion objective (median last-20 reward, 5 seeds): "
    << "full " << mf << " >= gp-exploitation " << mx << " >= gp-exploration " << mr;
  criterion(9, d.str(), mf >= mx && mx >= mr);
}

// ---------------------------------------------------------------------------
// criterion 10: byte-for-byte reproducibility of experiment artifacts
// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void run_criterion_10() {
  ExperimentConfig c;
  c.objective = "branin";
  c.noise_sd = 0.1;
  c.methods = {"vbo", "gp_ucb", "random"};
  c.n_seeds = 2;
  c.vbo.warmup_steps = 2;
  c.vbo.iterations = 4;
  c.vbo.batch = 4;
  c.vbo.seed_dim = 3;
  c.vbo.action_hidden = {8};
  c.vbo.critic_hidden = 4;
  c.vbo.head_hidden = {8};
  c.vbo.head_steps = 2;
  c.gp_ucb.n_init = 3;
  c.gp_ucb.iterations = 8;
  c.gp_ucb.ucb.candidate_pool_size = 64;
  c.gp_ucb.ucb.n_refine_steps = 5;
  c.random_search.iterations = 6;
  c.random_search.batch = 4;

  const fs::path dir_a = "/tmp/vbo_acceptance/rep_a", dir_b = "/tmp/vbo_acceptance/rep_b";
  fs::remove_all(dir_a);
  fs::remove_all(dir_b);
  c.output_dir = dir_a.string();
  std::vector<SeedOutcome> oa = run_experiment(c);
  c.output_dir = dir_b.string();
  std::vector<SeedOutcome> ob = run_experiment(c);

  bool ok = oa.size() == ob.size();
  for (const auto& oc : oa) ok = ok && oc.ok;
  for (const auto& oc : ob) ok = ok && oc.ok;
  int compared = 0;
  for (const auto& method : c.methods)
    for (std::uint64_t s = 0; s < 2; ++s) {
      const std::string name = "trace_" + method + "_seed" + std::to_string(s) + ".csv";
      ok = ok && slurp(dir_a / name) == slurp(dir_b / name) && !slurp(dir_a / name).empty();
      ++compared;
    }
  ok = ok && slurp(dir_a / "summary.csv") == slurp(dir_b / "summary.csv");
  std::ostringstream d;
  d << "determinism: " << compared << " trace CSVs plus the summary reproduce byte-for-byte "
    << "across two identical experiment runs";
  criterion(10, d.str(), ok);
}

}  // namespace

int main() {
  run_criterion_1();
  run_criteria_2_and_3();
  run_criterion_4();
  run_criterion_5();
  run_criterion_6();
  run_criterion_7();
  run_criterion_8();
  run_criterion_9();
  run_criterion_10();
  if (g_failures > 0) {
    std::printf("%d criterion(s) failed\n", g_failures);
    return 1;
  }
  std::printf("all 10 criteria passed\n");
  return 0;
}
