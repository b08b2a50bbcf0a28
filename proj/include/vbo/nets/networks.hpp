#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "vbo/nets/params.hpp"

namespace vbo {

enum class Activation { Tanh, Relu };

inline Tensor activate(const Tensor& x, Activation a) {
  return a == Activation::Tanh ? tanh_(x) : relu_(x);
}

/// One bound per input dimension; actions are squashed strictly inside.
struct Bounds {
  std::vector<double> lo, hi;

  int dim() const { return static_cast<int>(lo.size()); }
  void validate() const {
    if (lo.size() != hi.size() || lo.empty())
      throw std::invalid_argument("Bounds: lo/hi size mismatch or empty");
    for (size_t j = 0; j < lo.size(); ++j)
      if (!std::isfinite(lo[j]) || !std::isfinite(hi[j]) || lo[j] >= hi[j])
        throw std::invalid_argument("Bounds: need finite lo < hi per dimension");
  }
  double width(int j) const { return hi[j] - lo[j]; }
  double mid(int j) const { return 0.5 * (lo[j] + hi[j]); }
  /// Affine map to [-1, 1] per coordinate.
  double normalize(int j, double x) const { return (x - mid(j)) / (0.5 * width(j)); }
};

// ---------------------------------------------------------------------------
// Action network E_phi: MLP from Gaussian seeds to in-bounds candidate inputs.
// ---------------------------------------------------------------------------

struct ActionNetConfig {
  int seed_dim = 8;
  std::vector<int> hidden_dims = {64, 64};  // three dense layers total
  int output_dim = 0;
  Activation activation = Activation::Tanh;
};

class ActionNet {
 public:
  ActionNet() = default;
  ActionNet(const ActionNetConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.output_dim <= 0 || cfg.hidden_dims.empty())
      throw std::invalid_argument("ActionNet: output_dim must be set and hidden_dims non-empty");
    int in = cfg.seed_dim;
    for (size_t l = 0; l < cfg.hidden_dims.size(); ++l) {
      const int out = cfg.hidden_dims[l];
      params_.add(layer_name(l, "w"), {in, out}, glorot_init(rng, in, out));
      params_.add(layer_name(l, "b"), {out}, std::vector<double>(out, 0.0));
      in = out;
    }
    const size_t last = cfg.hidden_dims.size();
    params_.add(layer_name(last, "w"), {in, cfg.output_dim}, glorot_init(rng, in, cfg.output_dim));
    params_.add(layer_name(last, "b"), {cfg.output_dim}, std::vector<double>(cfg.output_dim, 0.0));
  }

  const ActionNetConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  /// seeds: [B, seed_dim]; returns actions [B, d], every coordinate strictly
  /// inside its bound via tanh squash + affine map.
  Tensor forward(Tape& tape, const MountedParams& p, const Tensor& seeds,
                 const Bounds& bounds) const {
    bounds.validate();
    if (bounds.dim() != cfg_.output_dim)
      throw std::invalid_argument("ActionNet: bounds dim != output_dim");
    for (double v : seeds.value())
      if (!std::isfinite(v)) throw std::invalid_argument("ActionNet: non-finite seed");
    Tensor h = seeds;
    for (size_t l = 0; l < cfg_.hidden_dims.size(); ++l) {
      h = add_rowvec(matmul(h, p.at(layer_name(l, "w"))), p.at(layer_name(l, "b")));
      h = activate(h, cfg_.activation);
    }
    const size_t last = cfg_.hidden_dims.size();
    h = add_rowvec(matmul(h, p.at(layer_name(last, "w"))), p.at(layer_name(last, "b")));
    Tensor squashed = tanh_(h);
    const int B = seeds.shape()[0], d = cfg_.output_dim;
    std::vector<double> half(static_cast<size_t>(B) * d), mid(static_cast<size_t>(B) * d);
    for (int i = 0; i < B; ++i)
      for (int j = 0; j < d; ++j) {
        half[static_cast<size_t>(i) * d + j] = 0.5 * bounds.width(j);
        mid[static_cast<size_t>(i) * d + j] = bounds.mid(j);
      }
    return add(mul(squashed, tape.constant({B, d}, std::move(half))),
               tape.constant({B, d}, std::move(mid)));
  }

 private:
  static std::string layer_name(size_t l, const char* kind) {
    return "action.l" + std::to_string(l) + "." + kind;
  }
  ActionNetConfig cfg_;
  ParamSet params_;
};

// ---------------------------------------------------------------------------
// Critic D_theta: LSTM over (x, y) timesteps, two dense layers to one scalar
// score per trajectory.
// ---------------------------------------------------------------------------

struct CriticConfig {
  int input_dim = 0;   // d + 1 (x concatenated with y)
  int hidden_dim = 32; // LSTM state size H
  std::vector<int> dense_dims = {32, 1};
};

class Critic {
 public:
  Critic() = default;
  Critic(const CriticConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.input_dim <= 0 || cfg.hidden_dim <= 0)
      throw std::invalid_argument("Critic: input_dim and hidden_dim must be positive");
    if (cfg.dense_dims.size() != 2 || cfg.dense_dims.back() != 1)
      throw std::invalid_argument("Critic: dense_dims must be two ints ending in 1");
    const int H = cfg.hidden_dim;
    params_.add("critic.wx", {cfg.input_dim, 4 * H}, glorot_init(rng, cfg.input_dim, 4 * H));
    params_.add("critic.wh", {H, 4 * H}, glorot_init(rng, H, 4 * H));
    std::vector<double> b(4 * H, 0.0);
    for (int j = H; j < 2 * H; ++j) b[j] = 1.0;  // forget gate bias
    params_.add("critic.b", {4 * H}, std::move(b));
    const int n1 = cfg.dense_dims[0];
    params_.add("critic.d1.w", {H, n1}, glorot_init(rng, H, n1));
    params_.add("critic.d1.b", {n1}, std::vector<double>(n1, 0.0));
    params_.add("critic.d2.w", {n1, 1}, glorot_init(rng, n1, 1));
    params_.add("critic.d2.b", {1}, std::vector<double>(1, 0.0));
  }

  const CriticConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  /// xs: t tensors of [B, d]; ys: t tensors of [B, 1]. Returns scores [B, 1].
  Tensor forward(Tape& /*tape*/, const MountedParams& p, const std::vector<Tensor>& xs,
                 const std::vector<Tensor>& ys) const {
    if (xs.empty() || xs.size() != ys.size())
      throw std::invalid_argument("Critic: need t >= 1 steps with matching x/y lengths");
    std::vector<Tensor> steps;
    steps.reserve(xs.size());
    for (size_t s = 0; s < xs.size(); ++s) steps.push_back(concat_cols(xs[s], ys[s]));
    Tensor h = lstm_seq(steps, p.at("critic.wx"), p.at("critic.wh"), p.at("critic.b"));
    h = tanh_(add_rowvec(matmul(h, p.at("critic.d1.w")), p.at("critic.d1.b")));
    return add_rowvec(matmul(h, p.at("critic.d2.w")), p.at("critic.d2.b"));
  }

 private:
  CriticConfig cfg_;
  ParamSet params_;
};

// ---------------------------------------------------------------------------
// Reward head: small MLP regression x -> y-hat, the differentiable
// exploitation proxy. Trained with squared error against observations.
// ---------------------------------------------------------------------------

struct RewardHeadConfig {
  int input_dim = 0;
  std::vector<int> hidden_dims = {64, 64};
};

class RewardHead {
 public:
  RewardHead() = default;
  RewardHead(const RewardHeadConfig& cfg, Rng& rng) : cfg_(cfg) {
    if (cfg.input_dim <= 0) throw std::invalid_argument("RewardHead: input_dim must be positive");
    int in = cfg.input_dim;
    for (size_t l = 0; l < cfg.hidden_dims.size(); ++l) {
      const int out = cfg.hidden_dims[l];
      params_.add(layer_name(l, "w"), {in, out}, glorot_init(rng, in, out));
      params_.add(layer_name(l, "b"), {out}, std::vector<double>(out, 0.0));
      in = out;
    }
    const size_t last = cfg.hidden_dims.size();
    params_.add(layer_name(last, "w"), {in, 1}, glorot_init(rng, in, 1));
    params_.add(layer_name(last, "b"), {1}, std::vector<double>(1, 0.0));
  }

  const RewardHeadConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  /// x: [B, d]; returns predictions [B, 1].
  Tensor forward(Tape& /*tape*/, const MountedParams& p, const Tensor& x) const {
    if (x.shape().size() != 2 || x.shape()[1] != cfg_.input_dim)
      throw std::invalid_argument("RewardHead: input must be [B, " +
                                  std::to_string(cfg_.input_dim) + "]");
    Tensor h = x;
    for (size_t l = 0; l < cfg_.hidden_dims.size(); ++l) {
      h = tanh_(add_rowvec(matmul(h, p.at(layer_name(l, "w"))), p.at(layer_name(l, "b"))));
    }
    const size_t last = cfg_.hidden_dims.size();
    return add_rowvec(matmul(h, p.at(layer_name(last, "w"))), p.at(layer_name(last, "b")));
  }

 private:
  static std::string layer_name(size_t l, const char* kind) {
    return "head.l" + std::to_string(l) + "." + kind;
  }
  RewardHeadConfig cfg_;
  ParamSet params_;
};

}  // namespace vbo
