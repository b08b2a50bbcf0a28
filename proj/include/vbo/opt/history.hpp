#pragma once

#include <cstdint>
#include <vector>

#include "vbo/core/checkpoint.hpp"
#include "vbo/core/matrix.hpp"
#include "vbo/core/tensor.hpp"

namespace vbo {

/// B parallel trajectories of inputs and noisy observations.
struct History {
  std::vector<Matrix> xs;  // per step: [B, d]
  std::vector<Matrix> ys;  // per step: [B, 1]

  int steps() const { return static_cast<int>(xs.size()); }
  int batch() const { return xs.empty() ? 0 : xs.front().rows; }

  void append(Matrix x, Matrix y) {
    if (x.rows != y.rows || y.cols != 1)
      throw std::invalid_argument("History::append: batch mismatch or y not [B,1]");
    if (!xs.empty() && (x.rows != batch() || x.cols != xs.front().cols))
      throw std::invalid_argument("History::append: shape differs from existing steps");
    xs.push_back(std::move(x));
    ys.push_back(std::move(y));
  }
};

/// One row of a run trace.
struct IterationTrace {
  int t = 0;
  std::vector<double> batch_rewards;
  double mean_reward = 0.0;
  double best_in_batch = 0.0;
  double best_so_far = 0.0;
  double s_t = 0.0;  // running average of mean rewards
  double mi_estimate = 0.0;
  double loss_action = 0.0;
  double loss_critic = 0.0;
  std::uint64_t flops_iteration = 0;  // empirical MACs spent this iteration
};

struct RunResult {
  std::vector<IterationTrace> traces;
  std::vector<double> best_x;
  double best_y = 0.0;  // argmax over all evaluated points, never a network readout
  long total_evaluations = 0;
  NamedArrays final_params;
  MacCounter macs;
};

/// Cumulative average S_1..S_T of the per-iteration batch-mean rewards.
inline std::vector<double> average_reward(const std::vector<IterationTrace>& traces) {
  if (traces.empty()) throw std::invalid_argument("average_reward: empty traces");
  std::vector<double> s(traces.size());
  double acc = 0.0;
  for (size_t t = 0; t < traces.size(); ++t) {
    acc += traces[t].mean_reward;
    s[t] = acc / static_cast<double>(t + 1);
  }
  return s;
}

}  // namespace vbo
