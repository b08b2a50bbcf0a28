#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <optional>

#include "vbo/core/matrix.hpp"
#include "vbo/core/rng.hpp"
#include "vbo/nets/networks.hpp"  // Bounds

namespace vbo {

/// Squared-exponential kernel with per-dimension lengthscales.
/// Signal variance is capped at 1 so k(x, x) <= 1.
struct RbfKernel {
  std::vector<double> lengthscale;  // one per input dimension
  double signal_variance = 1.0;

  explicit RbfKernel(int dim = 1, double ls = 1.0, double sv = 1.0)
      : lengthscale(dim, ls), signal_variance(std::min(sv, 1.0)) {
    if (ls <= 0.0 || sv <= 0.0) throw std::invalid_argument("RbfKernel: lengthscale and variance must be > 0");
  }

  double operator()(const double* a, const double* b) const {
    double q = 0.0;
    for (size_t j = 0; j < lengthscale.size(); ++j) {
      const double d = (a[j] - b[j]) / lengthscale[j];
      q += d * d;
    }
    return signal_variance * std::exp(-0.5 * q);
  }
};

/// Exact GP with Gaussian observation noise; Cholesky-backed posterior.
class GpModel {
 public:
  GpModel() = default;
  GpModel(RbfKernel kernel, double noise_variance)
      : kernel_(std::move(kernel)), noise_var_(noise_variance) {
    if (noise_variance < 0.0) throw std::invalid_argument("GpModel: negative noise variance");
  }

  const RbfKernel& kernel() const { return kernel_; }
  RbfKernel& kernel() { return kernel_; }
  double noise_variance() const { return noise_var_; }
  int size() const { return x_.rows; }
  const Matrix& train_x() const { return x_; }

  /// Refit on the full dataset. Jitter ladder 1e-10 -> 1e-6 before failing.
  void fit(const Matrix& x, const std::vector<double>& y) {
    if (x.rows != static_cast<int>(y.size()))
      throw std::invalid_argument("GpModel::fit: X/Y length mismatch");
    x_ = x;
    y_ = Eigen::Map<const Eigen::VectorXd>(y.data(), static_cast<Eigen::Index>(y.size()));
    if (x.rows == 0) { fitted_ = true; return; }
    const int n = x.rows;
    Eigen::MatrixXd k(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i; j < n; ++j) k(i, j) = k(j, i) = kernel_(x.row(i), x.row(j));
    for (double jitter = 1e-10; jitter <= 1.1e-6; jitter *= 10.0) {
      Eigen::MatrixXd kn = k;
      kn.diagonal().array() += noise_var_ + jitter;
      llt_.compute(kn);
      if (llt_.info() == Eigen::Success) {
        alpha_ = llt_.solve(y_);
        fitted_ = true;
        return;
      }
    }
    throw std::runtime_error(
        "GpModel::fit: Cholesky failed after max jitter 1e-6 (n=" + std::to_string(n) +
        ", condition likely > 1e16)");
  }

  /// Posterior mean and standard deviation at a query point.
  /// With no data this is the prior (0, sqrt(signal_variance)).
  std::pair<double, double> posterior(const double* x) const {
    require_fitted();
    if (x_.rows == 0) return {0.0, std::sqrt(kernel_.signal_variance)};
    const int n = x_.rows;
    Eigen::VectorXd kx(n);
    for (int i = 0; i < n; ++i) kx(i) = kernel_(x_.row(i), x);
    const double mu = kx.dot(alpha_);
    const Eigen::VectorXd v = llt_.matrixL().solve(kx);
    const double var = std::max(0.0, kernel_(x, x) - v.squaredNorm());
    return {mu, std::sqrt(var)};
  }
  std::pair<double, double> posterior(const std::vector<double>& x) const {
    return posterior(x.data());
  }

  /// log p(Y | X, hyperparameters).
  double log_marginal_likelihood() const {
    require_fitted();
    if (x_.rows == 0) return 0.0;
    const int n = x_.rows;
    double logdet = 0.0;
    for (int i = 0; i < n; ++i) logdet += std::log(llt_.matrixL()(i, i));
    return -0.5 * y_.dot(alpha_) - logdet - 0.5 * n * std::log(2.0 * M_PI);
  }

  void refit() {  // after a kernel hyperparameter change
    std::vector<double> y(y_.data(), y_.data() + y_.size());
    fit(x_, y);
  }

 private:
  void require_fitted() const {
    if (!fitted_) throw std::logic_error("GpModel: call fit() first");
  }

  RbfKernel kernel_{1};
  double noise_var_ = 1e-6;
  Matrix x_;
  Eigen::VectorXd y_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  Eigen::VectorXd alpha_;
  bool fitted_ = false;
};

/// Information gain F = 0.5 * log|I + K / noise_var| in nats, via Cholesky
/// log-determinant.
inline double info_gain(const Matrix& x, const RbfKernel& kernel, double noise_var) {
  if (noise_var <= 0.0) throw std::invalid_argument("info_gain: noise variance must be > 0");
  const int n = x.rows;
  if (n == 0) return 0.0;
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) += kernel(x.row(i), x.row(j)) / noise_var;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  if (llt.info() != Eigen::Success) throw std::runtime_error("info_gain: Cholesky failed");
  double logdet = 0.0;
  for (int i = 0; i < n; ++i) logdet += std::log(llt.matrixL()(i, i));
  return logdet;  // 0.5 * log|M| = sum log L_ii
}

/// Marginal-likelihood ascent by multiplicative coordinate search. Only
/// improving moves are accepted, so the likelihood never decreases.
inline void fit_hyperparameters(GpModel& model, int sweeps = 3, double step = 1.4) {
  if (model.size() == 0) return;
  double best = model.log_marginal_likelihood();
  for (int s = 0; s < sweeps; ++s) {
    auto try_set = [&](double& param, double factor, double cap) {
      const double old = param;
      param = std::min(old * factor, cap);
      if (param <= 0.0 || param == old) { param = old; return; }
      model.refit();
      const double lml = model.log_marginal_likelihood();
      if (lml > best) { best = lml; } else { param = old; model.refit(); }
    };
    for (auto& ls : model.kernel().lengthscale) {
      try_set(ls, step, 1e6);
      try_set(ls, 1.0 / step, 1e6);
    }
    try_set(model.kernel().signal_variance, step, 1.0);  // Assumption: k(x,x) <= 1
    try_set(model.kernel().signal_variance, 1.0 / step, 1.0);
  }
}

struct UcbConfig {
  double beta = 2.0;
  int n_restarts = 10;
  int n_refine_steps = 50;
  int candidate_pool_size = 1024;

  void validate() const {
    if (beta < 0.0) throw std::invalid_argument("UcbConfig: beta must be >= 0");
    if (n_restarts <= 0 || n_refine_steps < 0 || candidate_pool_size <= 0)
      throw std::invalid_argument("UcbConfig: counts must be positive");
  }
};

/// argmax of mu + sqrt(beta) * sigma by random pool + derivative-free
/// coordinate refinement from the top restarts.
inline std::vector<double> ucb_acquire(const GpModel& model, double beta, const Bounds& bounds,
                                       const UcbConfig& cfg, Rng& rng) {
  cfg.validate();
  bounds.validate();
  if (beta < 0.0 || !std::isfinite(beta))
    throw std::invalid_argument("ucb_acquire: beta must be finite and >= 0");
  const int d = bounds.dim();
  const double sqrt_beta = std::sqrt(beta);
  auto score = [&](const std::vector<double>& x) {
    auto [mu, sigma] = model.posterior(x);
    return mu + sqrt_beta * sigma;
  };

  std::vector<std::pair<double, std::vector<double>>> pool;
  pool.reserve(cfg.candidate_pool_size);
  for (int i = 0; i < cfg.candidate_pool_size; ++i) {
    std::vector<double> x(d);
    for (int j = 0; j < d; ++j) x[j] = rng.uniform(bounds.lo[j], bounds.hi[j]);
    pool.emplace_back(score(x), std::move(x));
  }
  const int n_top = std::min<int>(cfg.n_restarts, cfg.candidate_pool_size);
  std::partial_sort(pool.begin(), pool.begin() + n_top, pool.end(),
                    [](const auto& a, const auto& b) { return a.first > b.first; });

  double best_score = pool[0].first;
  std::vector<double> best_x = pool[0].second;
  for (int r = 0; r < n_top; ++r) {
    std::vector<double> x = pool[r].second;
    double fx = pool[r].first;
    std::vector<double> step(d);
    for (int j = 0; j < d; ++j) step[j] = 0.1 * bounds.width(j);
    for (int it = 0; it < cfg.n_refine_steps; ++it) {
      bool improved = false;
      for (int j = 0; j < d; ++j) {
        for (double dir : {1.0, -1.0}) {
          std::vector<double> xt = x;
          xt[j] = std::clamp(xt[j] + dir * step[j], bounds.lo[j], bounds.hi[j]);
          const double ft = score(xt);
          if (ft > fx) { fx = ft; x = xt; improved = true; }
        }
      }
      if (!improved)
        for (auto& s : step) s *= 0.5;
    }
    if (fx > best_score) { best_score = fx; best_x = x; }
  }
  return best_x;
}

/// Row-wise posterior over a batch; the Fig.-3 style ablation hook.
inline std::pair<std::vector<double>, std::vector<double>> ablation_components(
    const GpModel& model, const Matrix& x_batch) {
  std::vector<double> mu(x_batch.rows), sigma(x_batch.rows);
  for (int i = 0; i < x_batch.rows; ++i) {
    auto [m, s] = model.posterior(x_batch.row(i));
    mu[i] = m;
    sigma[i] = s;
  }
  return {mu, sigma};
}

namespace detail {
template <typename Select>
std::vector<double> posterior_fd_jacobian(const GpModel& model, const Matrix& x_batch,
                                          const Bounds& bounds, Select select) {
  const int d = x_batch.cols;
  std::vector<double> jac(static_cast<size_t>(x_batch.rows) * d);
  for (int i = 0; i < x_batch.rows; ++i) {
    std::vector<double> x = x_batch.row_vec(i);
    for (int j = 0; j < d; ++j) {
      const double h = 1e-4 * bounds.width(j);
      const double x0 = x[j];
      x[j] = x0 + h;
      const double up = select(model.posterior(x));
      x[j] = x0 - h;
      const double dn = select(model.posterior(x));
      x[j] = x0;
      jac[static_cast<size_t>(i) * d + j] = (up - dn) / (2.0 * h);
    }
  }
  return jac;
}
}  // namespace detail

/// Central finite differences of the posterior mean w.r.t. each coordinate,
/// h = 1e-4 * domain width per dimension. Feeds gradients of the gp_mean
/// exploitation ablation back to the action network.
inline std::vector<double> posterior_mean_fd_jacobian(const GpModel& model, const Matrix& x_batch,
                                                      const Bounds& bounds) {
  return detail::posterior_fd_jacobian(model, x_batch, bounds,
                                       [](const std::pair<double, double>& p) { return p.first; });
}

/// Same straight-through pass for the posterior standard deviation; feeds the
/// gp_sigma exploration ablation (without it the sigma bonus would be a
/// constant and the ablation would degenerate to exploitation-only).
inline std::vector<double> posterior_sigma_fd_jacobian(const GpModel& model, const Matrix& x_batch,
                                                       const Bounds& bounds) {
  return detail::posterior_fd_jacobian(model, x_batch, bounds,
                                       [](const std::pair<double, double>& p) { return p.second; });
}

}  // namespace vbo
