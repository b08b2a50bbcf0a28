#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace vbo {

/// Constants for the theoretical per-iteration FLOP model. Numbers produced
/// from these are order-of-magnitude "model FLOPs" (unit constant factors),
/// never measured hardware FLOPs.
struct ComplexityParams {
  std::int64_t bnn_params = 10000;  // W
  std::int64_t input_dim = 10;      // D
  std::int64_t hidden = 64;         // H, critic LSTM state
  std::int64_t samples = 50;        // S, posterior samples (HMC)
  std::int64_t leapfrog = 20;       // L
  std::int64_t epochs = 100;        // E
  std::int64_t n_starts = 10;
  std::int64_t n_steps = 50;
  std::int64_t k_critic = 5;   // K_a
  std::int64_t k_action = 10;  // K_b

  std::int64_t acquisition_evals() const { return n_starts * n_steps; }  // N
};

struct FlopReport {
  std::string method;
  std::int64_t iterations = 0;  // T
  double surrogate_flops = 0.0;
  double acquisition_flops = 0.0;
  double total = 0.0;
  double ratio_vs_vbo = 0.0;  // total relative to the VBO-MI total at same T
};

/// Per-iteration model FLOPs for one method at dataset size T.
inline FlopReport method_flops(const std::string& method, std::int64_t t,
                               const ComplexityParams& p = {}) {
  if (t < 1) throw std::invalid_argument("method_flops: T must be >= 1");
  const double T = static_cast<double>(t);
  const double W = static_cast<double>(p.bnn_params);
  const double H = static_cast<double>(p.hidden);
  const double S = static_cast<double>(p.samples);
  const double L = static_cast<double>(p.leapfrog);
  const double N = static_cast<double>(p.acquisition_evals());

  FlopReport r;
  r.method = method;
  r.iterations = t;
  if (method == "gp") {
    r.surrogate_flops = T * T * T;
    r.acquisition_flops = N * T * T;
  } else if (method == "hmc") {
    r.surrogate_flops = S * L * T * W;
    r.acquisition_flops = N * S * W;
  } else if (method == "dkl") {
    r.surrogate_flops = T * W + T * T * T;
    r.acquisition_flops = N * (T * T + W);
  } else if (method == "lla") {
    r.surrogate_flops = T * W + W * W * W;
    r.acquisition_flops = N * W * W;
  } else if (method == "vbo") {
    r.surrogate_flops = static_cast<double>(p.k_critic) * T * H;
    r.acquisition_flops = static_cast<double>(p.k_action) * W;
  } else {
    throw std::invalid_argument("method_flops: unknown method '" + method + "'");
  }
  r.total = r.surrogate_flops + r.acquisition_flops;
  const FlopReport vbo = method == "vbo" ? r : method_flops("vbo", t, p);
  r.ratio_vs_vbo = r.total / vbo.total;
  return r;
}

}  // namespace vbo
