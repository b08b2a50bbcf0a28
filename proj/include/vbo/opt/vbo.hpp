#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <tuple>

#include "vbo/bench/objectives.hpp"
#include "vbo/gp/gp.hpp"
#include "vbo/mi/dv.hpp"
#include "vbo/nets/networks.hpp"
#include "vbo/opt/history.hpp"

namespace vbo {

enum class ExploitationMode { RewardHead, BatchMeanConstant, GpMean };
enum class ExplorationMode { DvMi, GpSigma, None };

struct VboConfig {
  int warmup_steps = 25;  // W
  int iterations = 50;    // T
  int k_critic = 1;       // critic updates per iteration
  int k_action = 5;       // actor updates per iteration
  int batch = 64;         // B
  double beta = 1.0;
  int exploration_sign = +1;  // +1 treats the MI bound as a bonus; -1 as a penalty
  double lr_action = 0.002;
  double lr_critic = 0.002;
  double lr_head = 0.002;
  std::uint64_t seed = 0;
  ExploitationMode exploitation_mode = ExploitationMode::RewardHead;
  ExplorationMode exploration_mode = ExplorationMode::DvMi;
  PairingMode pairing = PairingMode::AllPairs;
  int critic_window = 256;  // trajectory steps fed to the critic; metrics keep full history
  int seed_dim = 8;
  std::vector<int> action_hidden = {64, 64};
  int critic_hidden = 32;
  std::vector<int> head_hidden = {64, 64};
  int head_steps = 20;   // head-only regression steps per iteration (skipped when k_critic == 0)
  int head_batch = 256;  // minibatch size for head regression
  int gp_max_points = 512;  // data cap for the GP ablation surrogate
  int gp_hyperfit_every = 5;
  long max_evaluations = -1;  // extra cap on objective calls; -1 disables

  void validate() const {
    if (warmup_steps < 1 || iterations < 0 || k_critic < 0 || k_action < 0)
      throw std::invalid_argument("VboConfig: warmup_steps >= 1 and non-negative loop counts required");
    if (batch < 2) throw std::invalid_argument("VboConfig: batch must be >= 2");
    if (!std::isfinite(beta) || beta < 0.0)
      throw std::invalid_argument("VboConfig: beta must be finite and >= 0");
    if (exploration_sign != 1 && exploration_sign != -1)
      throw std::invalid_argument("VboConfig: exploration_sign must be +1 or -1");
    if (lr_action <= 0.0 || lr_critic <= 0.0 || lr_head <= 0.0)
      throw std::invalid_argument("VboConfig: learning rates must be > 0");
    if (critic_window < 1 || seed_dim < 1 || critic_hidden < 1)
      throw std::invalid_argument("VboConfig: critic_window, seed_dim, critic_hidden must be >= 1");
    if (head_steps < 0 || head_batch < 1 || gp_max_points < 1 || gp_hyperfit_every < 1)
      throw std::invalid_argument("VboConfig: invalid auxiliary training constants");
  }
};

/// Warm-up plus alternating critic/actor training against a black-box
/// objective. One instance owns all mutable state of a single run.
class VboOptimizer {
 public:
  VboOptimizer(const VboConfig& cfg, const Objective& objective)
      : cfg_(cfg),
        obj_(&objective),
        rng_(cfg.seed),
        noise_rng_(cfg.seed ^ 0x9e3779b97f4a7c15ull) {
    cfg_.validate();
    objective.bounds.validate();
    const int d = objective.dim;
    Rng init_rng(cfg.seed ^ 0xda3e39cb94b95bdbull);
    action_ = ActionNet(ActionNetConfig{cfg.seed_dim, cfg.action_hidden, d, Activation::Tanh},
                        init_rng);
    critic_ = Critic(CriticConfig{d + 1, cfg.critic_hidden, {cfg.critic_hidden, 1}}, init_rng);
    head_ = RewardHead(RewardHeadConfig{d, cfg.head_hidden}, init_rng);
    norm_bounds_ = Bounds{std::vector<double>(d, -1.0), std::vector<double>(d, 1.0)};
    if (uses_gp()) gp_ = GpModel(RbfKernel(d, 0.5, 1.0), 1e-4);
  }

  const History& history() const { return history_; }
  long evaluations() const { return evaluations_; }
  ActionNet& action_net() { return action_; }
  Critic& critic() { return critic_; }
  RewardHead& reward_head() { return head_; }
  const MacCounter& macs() const { return macs_; }

  RunResult run() {
    warmup();
    RunResult res;
    double reward_sum = 0.0;
    for (int t = 1; t <= cfg_.iterations; ++t) {
      if (budget_exhausted()) break;
      IterationTrace tr = vbo_step(t);
      reward_sum += tr.mean_reward;
      tr.s_t = reward_sum / static_cast<double>(t);
      res.traces.push_back(std::move(tr));
    }
    res.best_x = best_x_;
    res.best_y = best_y_;
    res.total_evaluations = evaluations_;
    res.macs = macs_;
    for (const auto& [name, arr] : action_.params().to_arrays()) res.final_params[name] = arr;
    for (const auto& [name, arr] : critic_.params().to_arrays()) res.final_params[name] = arr;
    for (const auto& [name, arr] : head_.params().to_arrays()) res.final_params[name] = arr;
    return res;
  }

  /// W critic updates on fresh batches from a frozen actor at a fixed seed.
  void warmup() {
    const int B = cfg_.batch;
    warm_seeds_ = Matrix(B, cfg_.seed_dim);
    for (double& v : warm_seeds_.a) v = rng_.normal();
    for (int w = 0; w < cfg_.warmup_steps; ++w) {
      if (budget_exhausted()) return;
      Matrix x = sample_actions(warm_seeds_);
      Matrix y = evaluate_batch(x);
      History step;
      step.append(std::move(x), std::move(y));
      critic_update(step);
      if (cfg_.k_critic > 0)
        for (int i = 0; i < cfg_.head_steps; ++i) head_update();
    }
  }

  /// One main-loop iteration: sample B actions, evaluate, K_a critic updates
  /// with the actor frozen, then K_b actor updates with the critic frozen.
  IterationTrace vbo_step(int t) {
    const std::uint64_t macs_before = macs_.total();
    const int B = cfg_.batch;
    Matrix seeds(B, cfg_.seed_dim);
    for (double& v : seeds.a) v = rng_.normal();
    Matrix x = sample_actions(seeds);
    Matrix y = evaluate_batch(x);
    history_.append(std::move(x), std::move(y));

    IterationTrace tr;
    tr.t = t;
    tr.batch_rewards = history_.ys.back().a;
    double sum = 0.0, bmax = -std::numeric_limits<double>::infinity();
    for (double v : tr.batch_rewards) {
      sum += v;
      bmax = std::max(bmax, v);
    }
    tr.mean_reward = sum / static_cast<double>(B);
    tr.best_in_batch = bmax;
    tr.best_so_far = best_y_;

    for (int k = 0; k < cfg_.k_critic; ++k) tr.loss_critic = critic_update(history_);
    if (cfg_.k_critic > 0)
      for (int i = 0; i < cfg_.head_steps; ++i) head_update();
    tr.mi_estimate = cfg_.k_critic > 0 ? -tr.loss_critic : 0.0;
    if (uses_gp()) refit_gp(t);
    for (int k = 0; k < cfg_.k_action; ++k) tr.loss_action = actor_update(seeds);
    tr.flops_iteration = macs_.total() - macs_before;
    return tr;
  }

  /// Critic (and reward head, weight 1.0) gradient step on one history batch.
  double critic_update(const History& h) {
    if (h.steps() < 1) throw std::invalid_argument("critic_update: empty history");
    const int B = h.batch(), d = obj_->dim;
    Tape tape(&macs_);
    macs_.phase = MacCounter::Phase::CriticUpdate;
    MountedParams mc = mount(tape, critic_.params());
    MountedParams mh = mount(tape, head_.params());

    const int S = std::min(h.steps(), cfg_.critic_window);
    const int off = h.steps() - S;
    Tensor loss_c = [&] {
      if (cfg_.pairing == PairingMode::AllPairs) {
        std::vector<Tensor> xs, ys;
        for (int s = off; s < h.steps(); ++s) {
          const std::vector<double> xn = norm_x_data(h.xs[s]);
          const std::vector<double> yn = std_y_data(h.ys[s]);
          std::vector<double> xr(static_cast<size_t>(B) * B * d), yr(static_cast<size_t>(B) * B);
          for (int i = 0; i < B; ++i)
            for (int j = 0; j < B; ++j) {
              std::copy_n(xn.data() + static_cast<size_t>(i) * d, d,
                          xr.data() + (static_cast<size_t>(i) * B + j) * d);
              yr[static_cast<size_t>(i) * B + j] = yn[j];
            }
          xs.push_back(tape.constant({B * B, d}, std::move(xr)));
          ys.push_back(tape.constant({B * B, 1}, std::move(yr)));
        }
        Tensor scores = critic_.forward(tape, mc, xs, ys);
        std::vector<int> diag(B);
        for (int i = 0; i < B; ++i) diag[i] = i * B + i;
        return critic_loss_t(gather_rows(scores, diag), scores);
      }
      const std::vector<int> pi = rng_.derangement(B);
      std::vector<Tensor> xs, ys_joint, ys_cross;
      for (int s = off; s < h.steps(); ++s) {
        std::vector<double> yn = std_y_data(h.ys[s]);
        std::vector<double> yp(yn.size());
        for (int i = 0; i < B; ++i) yp[i] = yn[pi[i]];
        xs.push_back(tape.constant({B, d}, norm_x_data(h.xs[s])));
        ys_joint.push_back(tape.constant({B, 1}, std::move(yn)));
        ys_cross.push_back(tape.constant({B, 1}, std::move(yp)));
      }
      return critic_loss_t(critic_.forward(tape, mc, xs, ys_joint),
                           critic_.forward(tape, mc, xs, ys_cross));
    }();

    Tensor loss = add(loss_c, head_mse(tape, mh));
    tape.backward(loss);
    apply_adam(critic_.params(), mc, cfg_.lr_critic);
    apply_adam(head_.params(), mh, cfg_.lr_head);
    return loss_c.value()[0];
  }

  /// Actor gradient step: L_E = -(exploitation + sign * sqrt(beta) * exploration).
  double actor_update(const Matrix& seeds) {
    if (pool_x_.empty()) throw std::logic_error("actor_update: no observations yet");
    const int B = seeds.rows, d = obj_->dim;
    Tape tape(&macs_);
    macs_.phase = MacCounter::Phase::ActorUpdate;
    MountedParams ma = mount(tape, action_.params());

    Tensor seeds_c = tape.constant({B, cfg_.seed_dim}, seeds.a);
    Tensor actions = action_.forward(tape, ma, seeds_c, obj_->bounds);
    std::vector<double> mid(static_cast<size_t>(B) * d), inv_half(mid.size());
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < d; ++j) {
        mid[static_cast<size_t>(i) * d + j] = obj_->bounds.mid(j);
        inv_half[static_cast<size_t>(i) * d + j] = 2.0 / obj_->bounds.width(j);
      }
    Tensor a_norm = mul(sub(actions, tape.constant({B, d}, std::move(mid))),
                        tape.constant({B, d}, std::move(inv_half)));

    const bool want_head = cfg_.exploitation_mode == ExploitationMode::RewardHead ||
                           (cfg_.exploration_mode == ExplorationMode::DvMi && cfg_.beta > 0.0 &&
                            cfg_.exploitation_mode == ExploitationMode::RewardHead);
    std::optional<MountedParams> mh;
    std::optional<Tensor> yhat_std;
    if (want_head) {
      mh = mount(tape, head_.params());
      yhat_std = head_.forward(tape, *mh, a_norm);
    }

    Tensor exploit = [&] {
      switch (cfg_.exploitation_mode) {
        case ExploitationMode::RewardHead:
          return add_scalar(scale(mean_all(*yhat_std), y_sd_), y_mean_);
        case ExploitationMode::BatchMeanConstant: {
          const auto& y = history_.ys.empty() ? pool_y_ : history_.ys.back().a;
          double m = 0.0;
          for (double v : y) m += v;
          return tape.scalar_constant(m / static_cast<double>(y.size()));
        }
        case ExploitationMode::GpMean: {
          Matrix ax(B, d);
          ax.a = a_norm.value();
          std::vector<double> mu(B), sig(B);
          for (int i = 0; i < B; ++i) std::tie(mu[i], sig[i]) = gp_->posterior(ax.row(i));
          std::vector<double> jac = posterior_mean_fd_jacobian(*gp_, ax, norm_bounds_);
          Tensor mu_t = row_function(a_norm, std::move(mu), std::move(jac));
          return add_scalar(scale(mean_all(mu_t), y_sd_), y_mean_);
        }
      }
      throw std::logic_error("unreachable exploitation mode");
    }();

    Tensor loss = [&] {
      if (cfg_.beta <= 0.0 || cfg_.exploration_mode == ExplorationMode::None)
        return neg(exploit);
      const double w = cfg_.exploration_sign * std::sqrt(cfg_.beta);
      if (cfg_.exploration_mode == ExplorationMode::GpSigma) {
        Matrix ax(B, d);
        ax.a = a_norm.value();
        std::vector<double> sig(B);
        for (int i = 0; i < B; ++i) sig[i] = gp_->posterior(ax.row(i)).second;
        std::vector<double> jac = posterior_sigma_fd_jacobian(*gp_, ax, norm_bounds_);
        Tensor sigma_t = row_function(a_norm, std::move(sig), std::move(jac));
        return neg(add(exploit, scale(scale(mean_all(sigma_t), y_sd_), w)));
      }
      // DV exploration: score trajectories extended by the candidate step.
      MountedParams mc = mount(tape, critic_.params());
      Tensor y_cand = want_head ? *yhat_std
                                : tape.constant({B, 1}, std_y_data(history_.ys.back()));
      const int S = std::min(history_.steps(), cfg_.critic_window - 1);
      const int off = history_.steps() - S;
      Tensor mi = [&] {
        if (cfg_.pairing == PairingMode::AllPairs) {
          std::vector<Tensor> xs, ys;
          for (int s = off; s < history_.steps(); ++s) {
            const std::vector<double> xn = norm_x_data(history_.xs[s]);
            const std::vector<double> yn = std_y_data(history_.ys[s]);
            std::vector<double> xr(static_cast<size_t>(B) * B * d),
                yr(static_cast<size_t>(B) * B);
            for (int i = 0; i < B; ++i)
              for (int j = 0; j < B; ++j) {
                std::copy_n(xn.data() + static_cast<size_t>(i) * d, d,
                            xr.data() + (static_cast<size_t>(i) * B + j) * d);
                yr[static_cast<size_t>(i) * B + j] = yn[j];
              }
            xs.push_back(tape.constant({B * B, d}, std::move(xr)));
            ys.push_back(tape.constant({B * B, 1}, std::move(yr)));
          }
          xs.push_back(repeat_interleave_rows(a_norm, B));
          ys.push_back(tile_rows(y_cand, B));
          Tensor scores = critic_.forward(tape, mc, xs, ys);
          std::vector<int> diag(B);
          for (int i = 0; i < B; ++i) diag[i] = i * B + i;
          return dv_bound_t(gather_rows(scores, diag), scores);
        }
        const std::vector<int> pi = rng_.derangement(B);
        std::vector<Tensor> xs, ys_joint, ys_cross;
        for (int s = off; s < history_.steps(); ++s) {
          std::vector<double> yn = std_y_data(history_.ys[s]);
          std::vector<double> yp(yn.size());
          for (int i = 0; i < B; ++i) yp[i] = yn[pi[i]];
          xs.push_back(tape.constant({B, d}, norm_x_data(history_.xs[s])));
          ys_joint.push_back(tape.constant({B, 1}, std::move(yn)));
          ys_cross.push_back(tape.constant({B, 1}, std::move(yp)));
        }
        xs.push_back(a_norm);
        ys_joint.push_back(y_cand);
        ys_cross.push_back(gather_rows(y_cand, pi));
        return dv_bound_t(critic_.forward(tape, mc, xs, ys_joint),
                          critic_.forward(tape, mc, xs, ys_cross));
      }();
      return neg(add(exploit, scale(mi, w)));
    }();

    tape.backward(loss);
    apply_adam(action_.params(), ma, cfg_.lr_action);
    return loss.value()[0];
  }

 private:
  bool uses_gp() const {
    return cfg_.exploitation_mode == ExploitationMode::GpMean ||
           cfg_.exploration_mode == ExplorationMode::GpSigma;
  }

  bool budget_exhausted() const {
    return cfg_.max_evaluations >= 0 && evaluations_ + cfg_.batch > cfg_.max_evaluations;
  }

  Matrix sample_actions(const Matrix& seeds) {
    Tape tape(&macs_);
    macs_.phase = MacCounter::Phase::Evaluation;
    MountedParams ma = mount(tape, action_.params());
    Tensor s = tape.constant({seeds.rows, seeds.cols}, seeds.a);
    Tensor a = action_.forward(tape, ma, s, obj_->bounds);
    Matrix out(seeds.rows, obj_->dim);
    out.a = a.value();
    return out;
  }

  Matrix evaluate_batch(const Matrix& x) {
    NoisyEvaluator ev(*obj_, noise_rng_);
    Matrix y(x.rows, 1);
    for (int i = 0; i < x.rows; ++i) {
      std::vector<double> xi = x.row_vec(i);
      const double yi = ev(xi);
      y(i, 0) = yi;
      pool_x_.push_back(std::move(xi));
      pool_y_.push_back(yi);
      if (yi > best_y_) {
        best_y_ = yi;
        best_x_ = x.row_vec(i);
      }
      ++evaluations_;
    }
    update_y_stats();
    return y;
  }

  void update_y_stats() {
    double m = 0.0;
    for (double v : pool_y_) m += v;
    m /= static_cast<double>(pool_y_.size());
    double var = 0.0;
    for (double v : pool_y_) var += (v - m) * (v - m);
    y_mean_ = m;
    y_sd_ = std::max(1e-8, std::sqrt(var / static_cast<double>(pool_y_.size())));
  }

  std::vector<double> norm_x_data(const Matrix& x) const {
    std::vector<double> out(x.a.size());
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < x.cols; ++j)
        out[static_cast<size_t>(i) * x.cols + j] = obj_->bounds.normalize(j, x(i, j));
    return out;
  }

  std::vector<double> std_y_data(const Matrix& y) const {
    std::vector<double> out(y.a.size());
    for (size_t i = 0; i < y.a.size(); ++i) out[i] = (y.a[i] - y_mean_) / y_sd_;
    return out;
  }

  /// Squared-error loss of the reward head on a random pool minibatch.
  Tensor head_mse(Tape& tape, const MountedParams& mh) {
    const int d = obj_->dim;
    const int n = std::min<int>(cfg_.head_batch, static_cast<int>(pool_y_.size()));
    std::vector<double> xb(static_cast<size_t>(n) * d), yb(n);
    for (int i = 0; i < n; ++i) {
      const int r = rng_.uniform_int(0, static_cast<int>(pool_y_.size()) - 1);
      for (int j = 0; j < d; ++j)
        xb[static_cast<size_t>(i) * d + j] = obj_->bounds.normalize(j, pool_x_[r][j]);
      yb[i] = (pool_y_[r] - y_mean_) / y_sd_;
    }
    Tensor pred = head_.forward(tape, mh, tape.constant({n, d}, std::move(xb)));
    Tensor err = sub(pred, tape.constant({n, 1}, std::move(yb)));
    return mean_all(mul(err, err));
  }

  void head_update() {
    Tape tape(&macs_);
    macs_.phase = MacCounter::Phase::CriticUpdate;
    MountedParams mh = mount(tape, head_.params());
    Tensor loss = head_mse(tape, mh);
    tape.backward(loss);
    apply_adam(head_.params(), mh, cfg_.lr_head);
  }

  void refit_gp(int t) {
    const int n = std::min<int>(cfg_.gp_max_points, static_cast<int>(pool_y_.size()));
    const int start = static_cast<int>(pool_y_.size()) - n;
    const int d = obj_->dim;
    Matrix x(n, d);
    std::vector<double> y(n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < d; ++j) x(i, j) = obj_->bounds.normalize(j, pool_x_[start + i][j]);
      y[i] = (pool_y_[start + i] - y_mean_) / y_sd_;
    }
    gp_->fit(x, y);
    if (t == 1 || t % cfg_.gp_hyperfit_every == 0) fit_hyperparameters(*gp_, 2);
  }

  VboConfig cfg_;
  const Objective* obj_;
  Rng rng_;
  Rng noise_rng_;
  ActionNet action_;
  Critic critic_;
  RewardHead head_;
  Bounds norm_bounds_;
  std::optional<GpModel> gp_;

  History history_;  // main-phase trajectories; warm-up batches stay out
  std::vector<std::vector<double>> pool_x_;
  std::vector<double> pool_y_;
  Matrix warm_seeds_;
  double y_mean_ = 0.0, y_sd_ = 1.0;
  double best_y_ = -std::numeric_limits<double>::infinity();
  std::vector<double> best_x_;
  long evaluations_ = 0;
  MacCounter macs_;
};

/// Warm-up + T iterations under one config.
inline RunResult run_vbo(const VboConfig& cfg, const Objective& objective) {
  VboOptimizer opt(cfg, objective);
  return opt.run();
}

}  // namespace vbo
