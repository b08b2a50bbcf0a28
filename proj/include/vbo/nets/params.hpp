#pragma once

#include <map>
#include <string>

#include "vbo/core/adam.hpp"
#include "vbo/core/checkpoint.hpp"
#include "vbo/core/rng.hpp"
#include "vbo/core/tensor.hpp"

namespace vbo {

/// Named parameter storage plus per-block Adam state. Parameters live outside
/// any tape; a training step mounts them as leaves, runs backward, then
/// applies the gradients here.
struct ParamSet {
  struct Block {
    std::vector<int> shape;
    std::vector<double> value;
    AdamState adam;
  };

  std::map<std::string, Block> blocks;

  Block& add(const std::string& name, std::vector<int> shape, std::vector<double> init) {
    Block b;
    b.shape = std::move(shape);
    b.adam = AdamState(init.size());
    b.value = std::move(init);
    return blocks.emplace(name, std::move(b)).first->second;
  }

  Block& at(const std::string& name) {
    auto it = blocks.find(name);
    if (it == blocks.end()) throw std::invalid_argument("ParamSet: no block named '" + name + "'");
    return it->second;
  }
  const Block& at(const std::string& name) const {
    auto it = blocks.find(name);
    if (it == blocks.end()) throw std::invalid_argument("ParamSet: no block named '" + name + "'");
    return it->second;
  }

  size_t total_params() const {
    size_t n = 0;
    for (const auto& [_, b] : blocks) n += b.value.size();
    return n;
  }

  NamedArrays to_arrays() const {
    NamedArrays out;
    for (const auto& [name, b] : blocks) out[name] = NamedArray{b.shape, b.value};
    return out;
  }
  void from_arrays(const NamedArrays& arrays) {
    for (auto& [name, b] : blocks) {
      auto it = arrays.find(name);
      if (it == arrays.end()) throw std::runtime_error("ParamSet: checkpoint missing block '" + name + "'");
      if (it->second.shape != b.shape)
        throw std::runtime_error("ParamSet: checkpoint shape mismatch for block '" + name + "'");
      b.value = it->second.data;
    }
  }
};

/// Tape leaves for every block of a ParamSet, for one forward/backward pass.
struct MountedParams {
  std::map<std::string, Tensor> tensors;

  const Tensor& at(const std::string& name) const {
    auto it = tensors.find(name);
    if (it == tensors.end()) throw std::invalid_argument("MountedParams: no tensor named '" + name + "'");
    return it->second;
  }
};

inline MountedParams mount(Tape& tape, const ParamSet& params) {
  MountedParams m;
  for (const auto& [name, b] : params.blocks)
    m.tensors.emplace(name, tape.leaf(b.shape, b.value));
  return m;
}

/// Adam update of every block from the gradients accumulated on the mounted leaves.
inline void apply_adam(ParamSet& params, const MountedParams& mounted, double lr) {
  for (auto& [name, b] : params.blocks)
    adam_step(b.value, mounted.at(name).grad(), b.adam, lr, name);
}

/// Glorot-uniform style init for a dense layer.
inline std::vector<double> glorot_init(Rng& rng, int fan_in, int fan_out) {
  const double a = std::sqrt(6.0 / (fan_in + fan_out));
  std::vector<double> w(static_cast<size_t>(fan_in) * fan_out);
  for (auto& v : w) v = rng.uniform(-a, a);
  return w;
}

}  // namespace vbo
