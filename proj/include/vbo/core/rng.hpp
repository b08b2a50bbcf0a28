#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace vbo {

/// Owned per run / per component. Thin wrapper so every random draw in the
/// project goes through one seedable source.
class Rng {
 public:
  explicit Rng(std::uint64_t seed = 0) : engine_(seed) {}

  double normal(double mean = 0.0, double sd = 1.0) {
    return std::normal_distribution<double>(mean, sd)(engine_);
  }
  double uniform(double lo = 0.0, double hi = 1.0) {
    return std::uniform_real_distribution<double>(lo, hi)(engine_);
  }
  int uniform_int(int lo, int hi) {  // inclusive bounds
    return std::uniform_int_distribution<int>(lo, hi)(engine_);
  }

  std::vector<double> normals(size_t n, double sd = 1.0) {
    std::vector<double> out(n);
    for (auto& v : out) v = normal(0.0, sd);
    return out;
  }

  /// Uniformly sampled derangement (no fixed points) via rejection.
  std::vector<int> derangement(int n) {
    if (n < 2) throw std::invalid_argument("derangement: need n >= 2");
    std::vector<int> p(n);
    while (true) {
      for (int i = 0; i < n; ++i) p[i] = i;
      bool ok = true;
      for (int i = n - 1; i > 0; --i) std::swap(p[i], p[uniform_int(0, i)]);
      for (int i = 0; i < n; ++i)
        if (p[i] == i) { ok = false; break; }
      if (ok) return p;
    }
  }

  std::mt19937_64& engine() { return engine_; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace vbo
