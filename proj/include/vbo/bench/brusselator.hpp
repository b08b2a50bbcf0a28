#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbo {

/// Brusselator reaction-diffusion on a periodic square grid, explicit Euler.
///   u_t = D_u lap(u) + A - (B+1) u + u^2 v
///   v_t = D_v lap(v) + B u - u^2 v
/// The objective is the negated spatial variance of u at the time horizon.
struct BrusselatorConfig {
  int grid = 32;                 // grid points per side
  double domain_length = 32.0;   // physical side length; spacing = length / grid
  double t_end = 8.0;
  double dt = 0.01;  // also covers the stiff Hopf-unstable corner of the coefficient box
  double perturb_amplitude = 0.1;  // smooth perturbation of the steady state

  double spacing() const { return domain_length / grid; }
};

/// Final-time variance of u. Errors on stability violation before stepping and
/// on NaN during integration (with the step index).
inline double brusselator_final_variance(double a, double b, double d_u, double d_v,
                                         const BrusselatorConfig& cfg = {}) {
  const int n = cfg.grid;
  const double h = cfg.spacing();
  const double dmax = std::max(d_u, d_v);
  const double dt_limit = h * h / (4.0 * dmax);
  if (cfg.dt > dt_limit)
    throw std::invalid_argument("brusselator: dt=" + std::to_string(cfg.dt) +
                                " violates explicit stability limit " + std::to_string(dt_limit));

  // Homogeneous steady state (A, B/A) plus a smooth deterministic perturbation,
  // so grid refinement samples the same field.
  const double two_pi = 2.0 * M_PI;
  std::vector<double> u(static_cast<size_t>(n) * n), v(u.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double x = (i + 0.5) * h / cfg.domain_length;
      const double y = (j + 0.5) * h / cfg.domain_length;
      const double p = std::sin(two_pi * x) * std::sin(two_pi * y) +
                       0.5 * std::sin(2.0 * two_pi * x + 1.0) * std::cos(3.0 * two_pi * y + 2.0);
      u[static_cast<size_t>(i) * n + j] = a + cfg.perturb_amplitude * p;
      v[static_cast<size_t>(i) * n + j] = b / a - cfg.perturb_amplitude * p;
    }

  const long steps = static_cast<long>(std::ceil(cfg.t_end / cfg.dt));
  std::vector<double> un(u.size()), vn(v.size());
  const double inv_h2 = 1.0 / (h * h);
  for (long s = 0; s < steps; ++s) {
    for (int i = 0; i < n; ++i) {
      const int up = (i + 1) % n, dn = (i + n - 1) % n;
      for (int j = 0; j < n; ++j) {
        const int rt = (j + 1) % n, lf = (j + n - 1) % n;
        const size_t k = static_cast<size_t>(i) * n + j;
        const double lap_u = (u[static_cast<size_t>(up) * n + j] + u[static_cast<size_t>(dn) * n + j] +
                              u[static_cast<size_t>(i) * n + rt] + u[static_cast<size_t>(i) * n + lf] -
                              4.0 * u[k]) * inv_h2;
        const double lap_v = (v[static_cast<size_t>(up) * n + j] + v[static_cast<size_t>(dn) * n + j] +
                              v[static_cast<size_t>(i) * n + rt] + v[static_cast<size_t>(i) * n + lf] -
                              4.0 * v[k]) * inv_h2;
        const double uv2 = u[k] * u[k] * v[k];
        un[k] = u[k] + cfg.dt * (d_u * lap_u + a - (b + 1.0) * u[k] + uv2);
        vn[k] = v[k] + cfg.dt * (d_v * lap_v + b * u[k] - uv2);
      }
    }
    u.swap(un);
    v.swap(vn);
    if (!std::isfinite(u[0]))
      throw std::runtime_error("brusselator: NaN during integration at step " + std::to_string(s));
  }
  for (double x : u)
    if (!std::isfinite(x))
      throw std::runtime_error("brusselator: NaN in final state");

  double mean = 0.0;
  for (double x : u) mean += x;
  mean /= static_cast<double>(u.size());
  double var = 0.0;
  for (double x : u) var += (x - mean) * (x - mean);
  return var / static_cast<double>(u.size());
}

}  // namespace vbo
