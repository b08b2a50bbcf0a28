#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbo {

/// Adam moment state for one parameter block. Moments start at zero and
/// step_count increments by exactly one per update.
struct AdamState {
  std::vector<double> m;  // first moment
  std::vector<double> v;  // second moment
  long step_count = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  explicit AdamState(size_t n = 0) : m(n, 0.0), v(n, 0.0) {}
};

/// Standard bias-corrected Adam update, in place.
inline void adam_step(std::vector<double>& params, const std::vector<double>& grads,
                      AdamState& state, double lr, const std::string& block_name = "") {
  if (params.size() != grads.size() || params.size() != state.m.size())
    throw std::invalid_argument("adam_step: size mismatch in block '" + block_name + "'");
  for (double g : grads)
    if (!std::isfinite(g))
      throw std::runtime_error("adam_step: non-finite gradient in block '" + block_name + "'");
  state.step_count += 1;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step_count));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step_count));
  for (size_t i = 0; i < params.size(); ++i) {
    state.m[i] = state.beta1 * state.m[i] + (1.0 - state.beta1) * grads[i];
    state.v[i] = state.beta2 * state.v[i] + (1.0 - state.beta2) * grads[i] * grads[i];
    const double mhat = state.m[i] / bc1;
    const double vhat = state.v[i] / bc2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + state.epsilon);
    if (!std::isfinite(params[i]))
      throw std::runtime_error("adam_step: non-finite parameter in block '" + block_name + "'");
  }
}

}  // namespace vbo
