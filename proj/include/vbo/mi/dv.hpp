#pragma once

#include <algorithm>
#include <cmath>

#include "vbo/core/matrix.hpp"
#include "vbo/core/rng.hpp"
#include "vbo/core/tensor.hpp"

namespace vbo {

enum class PairingMode { AllPairs, Derangement };

/// Donsker-Varadhan estimate split into its two terms (nats).
struct MiEstimate {
  double value = 0.0;
  double term_joint = 0.0;     // mean of joint scores
  double term_marginal = 0.0;  // log-mean-exp of cross scores
  PairingMode pairing_mode = PairingMode::AllPairs;
};

/// Batch rows of Y reordered by a uniformly sampled derangement, emulating
/// the product of marginals.
struct ShuffledBatch {
  Matrix y_shuffled;
  std::vector<int> pi;
};

inline ShuffledBatch shuffle_marginals(const Matrix& y, Rng& rng) {
  if (y.rows < 2) throw std::invalid_argument("shuffle_marginals: need B >= 2 to form marginal pairs");
  ShuffledBatch out;
  out.pi = rng.derangement(y.rows);
  out.y_shuffled = Matrix(y.rows, y.cols);
  for (int i = 0; i < y.rows; ++i)
    for (int j = 0; j < y.cols; ++j) out.y_shuffled(i, j) = y(out.pi[i], j);
  return out;
}

namespace detail {
inline double log_mean_exp_plain(const std::vector<double>& v) {
  if (v.empty()) throw std::invalid_argument("dv_bound: empty score array");
  double m = *std::max_element(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s / static_cast<double>(v.size()));
}
}  // namespace detail

/// DV lower bound from plain score arrays. In all-pairs mode `cross` holds all
/// B*B critic scores; in derangement mode it holds B scores at deranged pairs.
inline MiEstimate dv_bound(const std::vector<double>& joint, const std::vector<double>& cross,
                           PairingMode mode = PairingMode::AllPairs) {
  if (joint.empty()) throw std::invalid_argument("dv_bound: empty batch");
  const size_t b = joint.size();
  if (mode == PairingMode::AllPairs && cross.size() != b * b)
    throw std::invalid_argument("dv_bound: all_pairs mode needs B*B cross scores");
  if (mode == PairingMode::Derangement && cross.size() != b)
    throw std::invalid_argument("dv_bound: derangement mode needs B cross scores");
  MiEstimate est;
  est.pairing_mode = mode;
  for (double s : joint) est.term_joint += s;
  est.term_joint /= static_cast<double>(b);
  est.term_marginal = detail::log_mean_exp_plain(cross);
  est.value = est.term_joint - est.term_marginal;
  return est;
}

/// Differentiable DV bound: mean(joint) - log_mean_exp(cross). Both inputs are
/// score tensors of any shape; the result is a scalar tensor.
inline Tensor dv_bound_t(const Tensor& joint_scores, const Tensor& cross_scores) {
  if (joint_scores.numel() == 0 || cross_scores.numel() == 0)
    throw std::invalid_argument("dv_bound: empty batch");
  return sub(mean_all(joint_scores), log_mean_exp(cross_scores));
}

/// Critic training loss L_D = -I_hat; minimizing it tightens the MI bound.
inline Tensor critic_loss_t(const Tensor& joint_scores, const Tensor& cross_scores) {
  return neg(dv_bound_t(joint_scores, cross_scores));
}

}  // namespace vbo
