#pragma once

#include <algorithm>
#include <numeric>

#include "vbo/mi/dv.hpp"
#include "vbo/nets/networks.hpp"

namespace vbo {

/// Standalone MI estimation over i.i.d. (x, y) pairs. Oracle data needs no
/// recurrence, so the critic here is a plain MLP on concat(x, y).
struct MiEstimatorConfig {
  std::vector<int> hidden_dims = {32, 32};
  double lr = 1e-3;
  int batch = 64;
  int max_epochs = 60;
  int eval_every = 2;
  int patience = 6;  // evaluations without val improvement before stopping
  double improvement_tol = 1e-3;
  PairingMode pairing = PairingMode::AllPairs;
  std::uint64_t seed = 0;
};

namespace detail {

/// MLP critic T(x, y) used only by the standalone estimator.
class PairCritic {
 public:
  PairCritic(int in_dim, const std::vector<int>& hidden, Rng& rng) : hidden_(hidden) {
    int in = in_dim;
    for (size_t l = 0; l < hidden.size(); ++l) {
      params_.add(name(l, "w"), {in, hidden[l]}, glorot_init(rng, in, hidden[l]));
      params_.add(name(l, "b"), {hidden[l]}, std::vector<double>(hidden[l], 0.0));
      in = hidden[l];
    }
    params_.add(name(hidden.size(), "w"), {in, 1}, glorot_init(rng, in, 1));
    params_.add(name(hidden.size(), "b"), {1}, std::vector<double>(1, 0.0));
  }

  ParamSet& params() { return params_; }

  Tensor forward(const MountedParams& p, const Tensor& xy) const {
    Tensor h = xy;
    for (size_t l = 0; l < hidden_.size(); ++l)
      h = relu_(add_rowvec(matmul(h, p.at(name(l, "w"))), p.at(name(l, "b"))));
    return add_rowvec(matmul(h, p.at(name(hidden_.size(), "w"))), p.at(name(hidden_.size(), "b")));
  }

 private:
  static std::string name(size_t l, const char* kind) {
    return "pair_critic.l" + std::to_string(l) + "." + kind;
  }
  std::vector<int> hidden_;
  ParamSet params_;
};

/// Stacks all (x_i, y_j) combinations for the given row index pairs.
inline std::vector<double> stack_pairs(const Matrix& x, const Matrix& y,
                                       const std::vector<int>& xi, const std::vector<int>& yi) {
  const int dx = x.cols, dy = y.cols;
  std::vector<double> out(xi.size() * static_cast<size_t>(dx + dy));
  for (size_t r = 0; r < xi.size(); ++r) {
    std::copy(x.row(xi[r]), x.row(xi[r]) + dx, out.begin() + r * (dx + dy));
    std::copy(y.row(yi[r]), y.row(yi[r]) + dy, out.begin() + r * (dx + dy) + dx);
  }
  return out;
}

inline MiEstimate eval_dv(const PairCritic& critic, const ParamSet& params, const Matrix& x,
                          const Matrix& y, const std::vector<int>& rows) {
  Tape tape;
  MountedParams p = mount(tape, params);
  const int b = static_cast<int>(rows.size());
  const int dxy = x.cols + y.cols;
  std::vector<int> xi, yi;
  xi.reserve(static_cast<size_t>(b) * b);
  yi.reserve(static_cast<size_t>(b) * b);
  for (int i = 0; i < b; ++i)
    for (int j = 0; j < b; ++j) { xi.push_back(rows[i]); yi.push_back(rows[j]); }
  Tensor scores = critic.forward(p, tape.constant({b * b, dxy}, stack_pairs(x, y, xi, yi)));
  std::vector<double> joint(b), cross(scores.value());
  for (int i = 0; i < b; ++i) joint[i] = cross[static_cast<size_t>(i) * b + i];
  return dv_bound(joint, cross, PairingMode::AllPairs);
}

}  // namespace detail

/// Trains a fresh MLP critic on (x, y) samples and reports the DV estimate on
/// held-out data (nats). Splits: 60% train, 20% validation for early stopping,
/// 20% test; the reported value is evaluated on validation + test at the
/// best-validation parameters. The test part never touches model selection,
/// which keeps the selection bias of the early stop small.
inline MiEstimate estimate_mi_standalone(const Matrix& x, const Matrix& y,
                                         const MiEstimatorConfig& cfg = {}) {
  if (x.rows != y.rows) throw std::invalid_argument("estimate_mi_standalone: x/y row mismatch");
  if (x.rows < 256) throw std::invalid_argument("estimate_mi_standalone: need >= 256 paired samples");

  Rng rng(cfg.seed);
  const int n = x.rows;
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng.engine());
  const int n_train = static_cast<int>(0.6 * n);
  const int n_val = static_cast<int>(0.2 * n);
  std::vector<int> train(perm.begin(), perm.begin() + n_train);
  std::vector<int> val(perm.begin() + n_train, perm.begin() + n_train + n_val);
  std::vector<int> held_out(perm.begin() + n_train, perm.end());  // val + test

  detail::PairCritic critic(x.cols + y.cols, cfg.hidden_dims, rng);
  const int dxy = x.cols + y.cols;

  double best_val = -1e300;
  NamedArrays best_params = critic.params().to_arrays();
  int stale = 0;

  for (int epoch = 0; epoch < cfg.max_epochs; ++epoch) {
    std::shuffle(train.begin(), train.end(), rng.engine());
    for (int start = 0; start + cfg.batch <= static_cast<int>(train.size()); start += cfg.batch) {
      std::vector<int> rows(train.begin() + start, train.begin() + start + cfg.batch);
      const int b = static_cast<int>(rows.size());
      Tape tape;
      MountedParams p = mount(tape, critic.params());
      Tensor loss;
      if (cfg.pairing == PairingMode::AllPairs) {
        std::vector<int> xi, yi, diag;
        for (int i = 0; i < b; ++i)
          for (int j = 0; j < b; ++j) { xi.push_back(rows[i]); yi.push_back(rows[j]); }
        for (int i = 0; i < b; ++i) diag.push_back(i * b + i);
        Tensor scores = critic.forward(p, tape.constant({b * b, dxy}, detail::stack_pairs(x, y, xi, yi)));
        loss = critic_loss_t(gather_rows(scores, diag), scores);
      } else {
        std::vector<int> pi = rng.derangement(b);
        std::vector<int> xj(rows), yj(b);
        for (int i = 0; i < b; ++i) yj[i] = rows[pi[i]];
        Tensor joint = critic.forward(p, tape.constant({b, dxy}, detail::stack_pairs(x, y, rows, rows)));
        Tensor cross = critic.forward(p, tape.constant({b, dxy}, detail::stack_pairs(x, y, xj, yj)));
        loss = critic_loss_t(joint, cross);
      }
      tape.backward(loss);
      apply_adam(critic.params(), p, cfg.lr);
    }

    if (epoch % cfg.eval_every == 0) {
      const double v = detail::eval_dv(critic, critic.params(), x, y, val).value;
      if (v > best_val + cfg.improvement_tol) {
        best_val = v;
        best_params = critic.params().to_arrays();
        stale = 0;
      } else if (++stale >= cfg.patience) {
        break;
      }
    }
  }

  critic.params().from_arrays(best_params);
  MiEstimate est = detail::eval_dv(critic, critic.params(), x, y, held_out);
  if (est.value > 10.0)
    throw std::runtime_error("estimate_mi_standalone: estimate diverged (> 10 nats)");
  return est;
}

}  // namespace vbo
