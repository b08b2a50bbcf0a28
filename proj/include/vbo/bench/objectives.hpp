#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>

#include "vbo/bench/brusselator.hpp"
#include "vbo/bench/pest.hpp"
#include "vbo/core/rng.hpp"
#include "vbo/nets/networks.hpp"  // Bounds

namespace vbo {

/// Black-box objective under the maximization convention; the standard
/// minimization benchmarks are negated at construction.
struct Objective {
  std::string name;
  int dim = 0;
  Bounds bounds;
  std::function<double(const std::vector<double>&)> evaluate;  // deterministic, noise-free
  double noise_sd = 0.0;
  std::optional<std::pair<std::vector<double>, double>> known_optimum;

  void check_input(const std::vector<double>& x) const {
    if (static_cast<int>(x.size()) != dim)
      throw std::invalid_argument(name + ": expected " + std::to_string(dim) + "-d input");
    for (int j = 0; j < dim; ++j)
      if (x[j] < bounds.lo[j] || x[j] > bounds.hi[j])
        throw std::domain_error(name + ": coordinate " + std::to_string(j) + "=" +
                                std::to_string(x[j]) + " outside [" + std::to_string(bounds.lo[j]) +
                                ", " + std::to_string(bounds.hi[j]) + "]");
  }
};

/// Evaluator adding i.i.d. Gaussian observation noise per call.
class NoisyEvaluator {
 public:
  NoisyEvaluator(const Objective& obj, Rng& rng) : obj_(&obj), rng_(&rng) {}

  double operator()(const std::vector<double>& x) {
    obj_->check_input(x);
    const double f = obj_->evaluate(x);
    if (!std::isfinite(f)) {
      std::string s = obj_->name + ": NaN objective at x = (";
      for (size_t j = 0; j < x.size(); ++j) s += (j ? ", " : "") + std::to_string(x[j]);
      throw std::runtime_error(s + ")");
    }
    return obj_->noise_sd > 0.0 ? f + rng_->normal(0.0, obj_->noise_sd) : f;
  }

 private:
  const Objective* obj_;
  Rng* rng_;
};

// ---- synthetic test functions (negated to maximize) ----

inline Objective make_branin() {
  Objective o;
  o.name = "branin";
  o.dim = 2;
  o.bounds = Bounds{{-5.0, 0.0}, {10.0, 15.0}};
  o.evaluate = [o](const std::vector<double>& x) {
    o.check_input(x);
    constexpr double a = 1.0;
    const double b = 5.1 / (4.0 * M_PI * M_PI);
    const double c = 5.0 / M_PI;
    constexpr double r = 6.0, s = 10.0;
    const double t = 1.0 / (8.0 * M_PI);
    const double q = x[1] - b * x[0] * x[0] + c * x[0] - r;
    return -(a * q * q + s * (1.0 - t) * std::cos(x[0]) + s);
  };
  o.known_optimum = {{M_PI, 2.275}, -0.39788735772973816};
  return o;
}

inline Objective make_hartmann6() {
  Objective o;
  o.name = "hartmann6";
  o.dim = 6;
  o.bounds = Bounds{std::vector<double>(6, 0.0), std::vector<double>(6, 1.0)};
  o.evaluate = [o](const std::vector<double>& x) {
    o.check_input(x);
    static constexpr double alpha[4] = {1.0, 1.2, 3.0, 3.2};
    static constexpr double A[4][6] = {{10, 3, 17, 3.5, 1.7, 8},
                                       {0.05, 10, 17, 0.1, 8, 14},
                                       {3, 3.5, 1.7, 10, 17, 8},
                                       {17, 8, 0.05, 10, 0.1, 14}};
    static constexpr double P[4][6] = {{0.1312, 0.1696, 0.5569, 0.0124, 0.8283, 0.5886},
                                       {0.2329, 0.4135, 0.8307, 0.3736, 0.1004, 0.9991},
                                       {0.2348, 0.1451, 0.3522, 0.2883, 0.3047, 0.6650},
                                       {0.4047, 0.8828, 0.8732, 0.5743, 0.1091, 0.0381}};
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) {
      double inner = 0.0;
      for (int j = 0; j < 6; ++j) {
        const double d = x[j] - P[i][j];
        inner += A[i][j] * d * d;
      }
      sum += alpha[i] * std::exp(-inner);
    }
    return sum;  // standard Hartmann-6 is minimized at -sum; maximize sum
  };
  o.known_optimum = {{0.20169, 0.150011, 0.476874, 0.275332, 0.311652, 0.6573}, 3.32237};
  return o;
}

inline Objective make_ackley(int dim = 10) {
  if (dim <= 0) throw std::invalid_argument("ackley: dim must be positive");
  Objective o;
  o.name = "ackley";
  o.dim = dim;
  o.bounds = Bounds{std::vector<double>(dim, -5.0), std::vector<double>(dim, 10.0)};
  o.evaluate = [o](const std::vector<double>& x) {
    o.check_input(x);
    constexpr double a = 20.0, b = 0.2;
    const double c = 2.0 * M_PI;
    double sq = 0.0, cs = 0.0;
    for (double xi : x) {
      sq += xi * xi;
      cs += std::cos(c * xi);
    }
    const double n = static_cast<double>(x.size());
    return -(-a * std::exp(-b * std::sqrt(sq / n)) - std::exp(cs / n) + a + std::exp(1.0));
  };
  o.known_optimum = {std::vector<double>(dim, 0.0), 0.0};
  return o;
}

inline Objective make_brusselator_objective(BrusselatorConfig cfg = {}) {
  Objective o;
  o.name = "brusselator";
  o.dim = 4;  // (A, B, D_u, D_v)
  o.bounds = Bounds{{0.5, 1.0, 0.01, 0.01}, {2.0, 4.0, 1.0, 1.0}};
  o.evaluate = [o, cfg](const std::vector<double>& x) {
    o.check_input(x);
    return -brusselator_final_variance(x[0], x[1], x[2], x[3], cfg);
  };
  return o;
}

inline Objective make_pest_control_objective(PestControlSpec spec = {}) {
  Objective o;
  o.name = "pest_control";
  o.dim = PestControlSpec::encoding_width;
  o.bounds = Bounds{std::vector<double>(o.dim, 0.0), std::vector<double>(o.dim, 1.0)};
  o.evaluate = [o, spec](const std::vector<double>& x) {
    o.check_input(x);
    return pest_control_objective(onehot_decode(x), spec);
  };
  return o;
}

/// 1-d concave toy used in several desk-scale checks.
inline Objective make_quadratic1d() {
  Objective o;
  o.name = "quadratic1d";
  o.dim = 1;
  o.bounds = Bounds{{-5.0}, {5.0}};
  o.evaluate = [o](const std::vector<double>& x) {
    o.check_input(x);
    return -x[0] * x[0];
  };
  o.known_optimum = {{0.0}, 0.0};
  return o;
}

/// Objective lookup by name string, with optional dimension override for
/// the configurable-dimension functions.
inline Objective make_objective(const std::string& name, int dim_override = 0) {
  if (name == "branin") return make_branin();
  if (name == "hartmann6") return make_hartmann6();
  if (name == "ackley") return make_ackley(dim_override > 0 ? dim_override : 10);
  if (name == "brusselator") return make_brusselator_objective();
  if (name == "pest_control") return make_pest_control_objective();
  if (name == "quadratic1d") return make_quadratic1d();
  throw std::invalid_argument("unknown objective '" + name + "'");
}

}  // namespace vbo
