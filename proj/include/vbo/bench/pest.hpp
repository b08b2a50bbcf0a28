#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "vbo/core/rng.hpp"

namespace vbo {

/// Stage-wise pest control: 25 sequential stages, each action is "no
/// treatment" or one of four pesticide strengths. All dynamics constants are
/// frozen here; the categorical interface (25 vars x 5 categories, one-hot
/// width 125) is the part consumed by the optimizers.
struct PestControlSpec {
  static constexpr int n_vars = 25;
  static constexpr int n_categories = 5;
  static constexpr int encoding_width = n_vars * n_categories;  // 125

  // Per-action constants (index 0 = no treatment).
  static constexpr double kill_rate[5] = {0.0, 0.20, 0.35, 0.50, 0.65};
  static constexpr double price[5] = {0.0, 0.5, 0.8, 1.2, 1.8};

  double initial_infestation = 0.3;
  double base_growth = 1.4;
  double growth_jitter = 0.12;  // seeded multiplicative variation per stage
  double damage_cost = 2.0;     // cost per unit infestation per stage
  std::uint64_t seed = 0;
};

/// Negative total cost (price of treatments + infestation damage) of a policy.
inline double pest_control_objective(const std::vector<int>& categories,
                                     const PestControlSpec& spec = {}) {
  if (categories.size() != PestControlSpec::n_vars)
    throw std::invalid_argument("pest_control: need exactly 25 stage actions");
  for (int c : categories)
    if (c < 0 || c >= PestControlSpec::n_categories)
      throw std::invalid_argument("pest_control: action index out of [0,5)");

  Rng rng(spec.seed);
  double z = spec.initial_infestation;
  double cost = 0.0;
  for (int t = 0; t < PestControlSpec::n_vars; ++t) {
    const double growth = spec.base_growth * (1.0 + spec.growth_jitter * rng.uniform(-1.0, 1.0));
    z = std::min(1.0, z * (1.0 - PestControlSpec::kill_rate[categories[t]]) * growth);
    cost += PestControlSpec::price[categories[t]] + spec.damage_cost * z;
  }
  return -cost;
}

/// 25 category indices -> 125-float one-hot vector.
inline std::vector<double> onehot_encode(const std::vector<int>& categories) {
  if (categories.size() != PestControlSpec::n_vars)
    throw std::invalid_argument("onehot_encode: need 25 categories");
  std::vector<double> v(PestControlSpec::encoding_width, 0.0);
  for (int i = 0; i < PestControlSpec::n_vars; ++i) {
    const int c = categories[i];
    if (c < 0 || c >= PestControlSpec::n_categories)
      throw std::invalid_argument("onehot_encode: category index out of [0,5)");
    v[static_cast<size_t>(i) * PestControlSpec::n_categories + c] = 1.0;
  }
  return v;
}

/// Argmax per block; ties broken by the lowest index.
inline std::vector<int> onehot_decode(const std::vector<double>& v) {
  if (v.size() != PestControlSpec::encoding_width)
    throw std::invalid_argument("onehot_decode: need a 125-float vector");
  std::vector<int> categories(PestControlSpec::n_vars);
  for (int i = 0; i < PestControlSpec::n_vars; ++i) {
    int best = 0;
    for (int c = 1; c < PestControlSpec::n_categories; ++c)
      if (v[static_cast<size_t>(i) * PestControlSpec::n_categories + c] >
          v[static_cast<size_t>(i) * PestControlSpec::n_categories + best])
        best = c;
    categories[i] = best;
  }
  return categories;
}

}  // namespace vbo
