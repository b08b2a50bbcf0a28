#pragma once

#include <algorithm>
#include <cmath>
#include <limits>

#include "vbo/bench/objectives.hpp"
#include "vbo/gp/gp.hpp"
#include "vbo/opt/history.hpp"

namespace vbo {

struct GpUcbRunConfig {
  int iterations = 100;  // objective evaluations after the initial design
  int n_init = 5;        // uniform random points before acquisition starts
  int batch = 1;         // > 1 selects a batch via fantasized sigma-only updates
  double beta = 2.0;
  std::uint64_t seed = 0;
  int hyperfit_every = 5;
  UcbConfig ucb;

  void validate() const {
    if (iterations < 0 || n_init < 1 || batch < 1)
      throw std::invalid_argument("GpUcbRunConfig: need n_init >= 1, batch >= 1, iterations >= 0");
    ucb.validate();
  }
};

/// Exact-GP UCB baseline. The GP is fit on inputs normalized to [-1,1] and
/// standardized observations; batch > 1 fantasizes each picked point as its
/// posterior mean so sigma collapses near it before the next pick.
inline RunResult run_gp_ucb(const GpUcbRunConfig& cfg, const Objective& objective) {
  cfg.validate();
  objective.bounds.validate();
  const int d = objective.dim;
  Rng rng(cfg.seed);
  Rng noise_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  NoisyEvaluator ev(objective, noise_rng);
  Bounds norm_bounds{std::vector<double>(d, -1.0), std::vector<double>(d, 1.0)};

  std::vector<std::vector<double>> xs;
  std::vector<double> ys;
  RunResult res;
  res.best_y = -std::numeric_limits<double>::infinity();
  auto observe = [&](std::vector<double> x) {
    const double y = ev(x);
    if (y > res.best_y) {
      res.best_y = y;
      res.best_x = x;
    }
    xs.push_back(std::move(x));
    ys.push_back(y);
    ++res.total_evaluations;
    return y;
  };

  for (int i = 0; i < cfg.n_init; ++i) {
    std::vector<double> x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.uniform(objective.bounds.lo[j], objective.bounds.hi[j]);
    observe(std::move(x));
  }

  GpModel model(RbfKernel(d, 0.5, 1.0), 1e-4);
  double reward_sum = 0.0;
  const int n_iters = (cfg.iterations + cfg.batch - 1) / cfg.batch;
  for (int t = 1; t <= n_iters; ++t) {
    double y_mean = 0.0;
    for (double y : ys) y_mean += y;
    y_mean /= static_cast<double>(ys.size());
    double var = 0.0;
    for (double y : ys) var += (y - y_mean) * (y - y_mean);
    const double y_sd = std::max(1e-8, std::sqrt(var / static_cast<double>(ys.size())));

    Matrix xn(static_cast<int>(xs.size()), d);
    std::vector<double> yn(ys.size());
    for (size_t i = 0; i < xs.size(); ++i) {
      for (int j = 0; j < d; ++j) xn(static_cast<int>(i), j) = objective.bounds.normalize(j, xs[i][j]);
      yn[i] = (ys[i] - y_mean) / y_sd;
    }
    model.fit(xn, yn);
    if (t == 1 || t % cfg.hyperfit_every == 0) fit_hyperparameters(model, 2);

    IterationTrace tr;
    tr.t = t;
    const int picks = std::min<int>(cfg.batch, cfg.iterations - (t - 1) * cfg.batch);
    for (int b = 0; b < picks; ++b) {
      std::vector<double> xq = ucb_acquire(model, cfg.beta, norm_bounds, cfg.ucb, rng);
      std::vector<double> x(d);
      for (int j = 0; j < d; ++j)
        x[j] = objective.bounds.mid(j) + 0.5 * objective.bounds.width(j) * xq[j];
      tr.batch_rewards.push_back(observe(x));
      if (b + 1 < picks) {
        // fantasize: append the pick at its posterior mean, refit data only
        Matrix xf(xn.rows + 1, d);
        std::copy(xn.a.begin(), xn.a.end(), xf.a.begin());
        for (int j = 0; j < d; ++j) xf(xn.rows, j) = xq[j];
        yn.push_back(model.posterior(xq).first);
        model.fit(xf, yn);
        xn = std::move(xf);
      }
    }
    double sum = 0.0, bmax = -std::numeric_limits<double>::infinity();
    for (double v : tr.batch_rewards) {
      sum += v;
      bmax = std::max(bmax, v);
    }
    tr.mean_reward = sum / static_cast<double>(tr.batch_rewards.size());
    tr.best_in_batch = bmax;
    tr.best_so_far = res.best_y;
    reward_sum += tr.mean_reward;
    tr.s_t = reward_sum / static_cast<double>(t);
    res.traces.push_back(std::move(tr));
  }
  return res;
}

struct RandomSearchConfig {
  int iterations = 50;
  int batch = 1;
  std::uint64_t seed = 0;
};

/// Uniform random sampling at the same batch/evaluation schedule as the
/// learned optimizers; the budget-parity control.
inline RunResult run_random_search(const RandomSearchConfig& cfg, const Objective& objective) {
  if (cfg.iterations < 0 || cfg.batch < 1)
    throw std::invalid_argument("RandomSearchConfig: iterations >= 0 and batch >= 1 required");
  objective.bounds.validate();
  const int d = objective.dim;
  Rng rng(cfg.seed);
  Rng noise_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
  NoisyEvaluator ev(objective, noise_rng);

  RunResult res;
  res.best_y = -std::numeric_limits<double>::infinity();
  double reward_sum = 0.0;
  for (int t = 1; t <= cfg.iterations; ++t) {
    IterationTrace tr;
    tr.t = t;
    double sum = 0.0, bmax = -std::numeric_limits<double>::infinity();
    for (int b = 0; b < cfg.batch; ++b) {
      std::vector<double> x(d);
      for (int j = 0; j < d; ++j) x[j] = rng.uniform(objective.bounds.lo[j], objective.bounds.hi[j]);
      const double y = ev(x);
      if (y > res.best_y) {
        res.best_y = y;
        res.best_x = x;
      }
      ++res.total_evaluations;
      tr.batch_rewards.push_back(y);
      sum += y;
      bmax = std::max(bmax, y);
    }
    tr.mean_reward = sum / static_cast<double>(cfg.batch);
    tr.best_in_batch = bmax;
    tr.best_so_far = res.best_y;
    reward_sum += tr.mean_reward;
    tr.s_t = reward_sum / static_cast<double>(t);
    res.traces.push_back(std::move(tr));
  }
  return res;
}

}  // namespace vbo
