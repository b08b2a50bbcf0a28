#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <Eigen/Core>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace vbo {

/// Multiply-accumulate counter, partitioned by training phase.
struct MacCounter {
  enum class Phase { CriticUpdate, ActorUpdate, Evaluation };

  std::uint64_t critic_update = 0;
  std::uint64_t actor_update = 0;
  std::uint64_t evaluation = 0;
  Phase phase = Phase::Evaluation;

  void add(std::uint64_t n) {
    switch (phase) {
      case Phase::CriticUpdate: critic_update += n; break;
      case Phase::ActorUpdate: actor_update += n; break;
      case Phase::Evaluation: evaluation += n; break;
    }
  }
  std::uint64_t total() const { return critic_update + actor_update + evaluation; }
  void reset() { critic_update = actor_update = evaluation = 0; }
};

namespace detail {

inline std::string shape_str(const std::vector<int>& s) {
  std::ostringstream os;
  os << "[";
  for (size_t i = 0; i < s.size(); ++i) os << (i ? "x" : "") << s[i];
  os << "]";
  return os.str();
}

inline size_t numel(const std::vector<int>& shape) {
  size_t n = 1;
  for (int d : shape) {
    if (d <= 0) throw std::invalid_argument("tensor shape has non-positive dim " + shape_str(shape));
    n *= static_cast<size_t>(d);
  }
  return n;
}

using MatMap = Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;
using CMatMap = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>;

// c += a * b  where a is m x k, b is k x n.
inline void matmul_accum(const double* a, const double* b, double* c, int m, int k, int n) {
  MatMap(c, m, n).noalias() += CMatMap(a, m, k) * CMatMap(b, k, n);
}

// c += a^T * b  where a is m x k, b is m x n, result k x n.
inline void matmul_at_b_accum(const double* a, const double* b, double* c, int m, int k, int n) {
  MatMap(c, k, n).noalias() += CMatMap(a, m, k).transpose() * CMatMap(b, m, n);
}

// c += a * b^T  where a is m x k, b is n x k, result m x n.
inline void matmul_a_bt_accum(const double* a, const double* b, double* c, int m, int k, int n) {
  MatMap(c, m, n).noalias() += CMatMap(a, m, k) * CMatMap(b, n, k).transpose();
}

}  // namespace detail

class Tape;

/// Handle to a node on a Tape. Cheap to copy; the tape owns the storage.
struct Tensor {
  Tape* tape = nullptr;
  int id = -1;

  const std::vector<int>& shape() const;
  const std::vector<double>& value() const;
  const std::vector<double>& grad() const;
  size_t numel() const;
  double scalar() const;
};

/// Reverse-mode tape. Records primitive ops in topological order; a backward
/// pass visits each recorded op exactly once, in reverse.
class Tape {
 public:
  struct Node {
    std::vector<int> shape;
    std::vector<double> value;
    std::vector<double> grad;
    std::function<void(Tape&)> backward;  // null for leaves/constants
  };

  explicit Tape(MacCounter* macs = nullptr) : macs_(macs) {}

  MacCounter* macs() const { return macs_; }
  void count_macs(std::uint64_t n) { if (macs_) macs_->add(n); }

  Node& node(int id) { return nodes_[static_cast<size_t>(id)]; }
  const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }
  size_t size() const { return nodes_.size(); }

  Tensor leaf(std::vector<int> shape, std::vector<double> data) {
    return make(std::move(shape), std::move(data), nullptr);
  }
  Tensor constant(std::vector<int> shape, std::vector<double> data) {
    return make(std::move(shape), std::move(data), nullptr);
  }
  Tensor scalar_constant(double v) { return constant({1}, {v}); }

  Tensor make(std::vector<int> shape, std::vector<double> data,
              std::function<void(Tape&)> backward) {
    if (detail::numel(shape) != data.size())
      throw std::invalid_argument("tensor data length does not match shape " +
                                  detail::shape_str(shape));
    Node n;
    n.shape = std::move(shape);
    n.grad.assign(data.size(), 0.0);
    n.value = std::move(data);
    n.backward = std::move(backward);
    nodes_.push_back(std::move(n));
    backward_done_ = false;
    return Tensor{this, static_cast<int>(nodes_.size()) - 1};
  }

  /// Seeds grad of `loss` with 1 and propagates through every recorded op
  /// in reverse order. Fan-out accumulates with +=.
  void backward(const Tensor& loss) {
    if (loss.tape != this) throw std::invalid_argument("backward: tensor is detached from this tape");
    if (loss.numel() != 1) throw std::invalid_argument("backward: loss must be scalar");
    if (backward_done_) throw std::logic_error("backward: called twice without recording new ops");
    node(loss.id).grad[0] = 1.0;
    for (int i = loss.id; i >= 0; --i) {
      auto& n = nodes_[static_cast<size_t>(i)];
      if (n.backward) n.backward(*this);
    }
    backward_done_ = true;
  }

 private:
  std::vector<Node> nodes_;
  MacCounter* macs_;
  bool backward_done_ = false;
};

inline const std::vector<int>& Tensor::shape() const { return tape->node(id).shape; }
inline const std::vector<double>& Tensor::value() const { return tape->node(id).value; }
inline const std::vector<double>& Tensor::grad() const { return tape->node(id).grad; }
inline size_t Tensor::numel() const { return value().size(); }
inline double Tensor::scalar() const {
  if (numel() != 1) throw std::logic_error("scalar() on non-scalar tensor");
  return value()[0];
}

namespace detail {

inline void check_same_tape(const char* op, const Tensor& a, const Tensor& b) {
  if (a.tape == nullptr || b.tape == nullptr || a.tape != b.tape)
    throw std::invalid_argument(std::string(op) + ": tensors on different (or no) tapes");
}

inline void check_same_shape(const char* op, const Tensor& a, const Tensor& b) {
  check_same_tape(op, a, b);
  if (a.shape() != b.shape())
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + shape_str(a.shape()) +
                                " vs " + shape_str(b.shape()));
}

}  // namespace detail

// Each op records its result first, then installs a backward closure that
// knows the output id. `record` keeps that two-step pattern in one place.
namespace detail {
template <typename F>
Tensor record(Tape& tape, std::vector<int> shape, std::vector<double> data, F&& make_backward) {
  Tensor out = tape.make(std::move(shape), std::move(data), nullptr);
  tape.node(out.id).backward = make_backward(out.id);
  return out;
}
}  // namespace detail

// ---- elementwise ----

inline Tensor add(const Tensor& a, const Tensor& b) {
  detail::check_same_shape("add", a, b);
  std::vector<double> out(a.numel());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + b.value()[i];
  int ia = a.id, ib = b.id;
  return detail::record(*a.tape, a.shape(), std::move(out), [ia, ib](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      auto& ga = t.node(ia).grad;
      auto& gb = t.node(ib).grad;
      for (size_t i = 0; i < g.size(); ++i) { ga[i] += g[i]; gb[i] += g[i]; }
    };
  });
}

inline Tensor sub(const Tensor& a, const Tensor& b) {
  detail::check_same_shape("sub", a, b);
  std::vector<double> out(a.numel());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] - b.value()[i];
  int ia = a.id, ib = b.id;
  return detail::record(*a.tape, a.shape(), std::move(out), [ia, ib](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      auto& ga = t.node(ia).grad;
      auto& gb = t.node(ib).grad;
      for (size_t i = 0; i < g.size(); ++i) { ga[i] += g[i]; gb[i] -= g[i]; }
    };
  });
}

inline Tensor mul(const Tensor& a, const Tensor& b) {
  detail::check_same_shape("mul", a, b);
  std::vector<double> out(a.numel());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * b.value()[i];
  a.tape->count_macs(out.size());
  int ia = a.id, ib = b.id;
  return detail::record(*a.tape, a.shape(), std::move(out), [ia, ib](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      const auto& va = t.node(ia).value;
      const auto& vb = t.node(ib).value;
      auto& ga = t.node(ia).grad;
      auto& gb = t.node(ib).grad;
      t.count_macs(2 * g.size());
      for (size_t i = 0; i < g.size(); ++i) { ga[i] += g[i] * vb[i]; gb[i] += g[i] * va[i]; }
    };
  });
}

inline Tensor scale(const Tensor& a, double c) {
  std::vector<double> out(a.numel());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] * c;
  a.tape->count_macs(out.size());
  int ia = a.id;
  return detail::record(*a.tape, a.shape(), std::move(out), [ia, c](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      auto& ga = t.node(ia).grad;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * c;
    };
  });
}

inline Tensor add_scalar(const Tensor& a, double c) {
  std::vector<double> out(a.numel());
  for (size_t i = 0; i < out.size(); ++i) out[i] = a.value()[i] + c;
  int ia = a.id;
  return detail::record(*a.tape, a.shape(), std::move(out), [ia](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      auto& ga = t.node(ia).grad;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    };
  });
}

namespace detail {
template <typename FwdFn, typename DerivFromOutFn>
Tensor unary_from_output(const char* /*name*/, const Tensor& a, FwdFn f, DerivFromOutFn dydx_of_y) {
  std::vector<double> out(a.numel());
  for (size_t i = 0; i < out.size(); ++i) out[i] = f(a.value()[i]);
  a.tape->count_macs(out.size());
  int ia = a.id;
  return record(*a.tape, a.shape(), std::move(out), [ia, dydx_of_y](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      const auto& y = t.node(self).value;
      auto& ga = t.node(ia).grad;
      t.count_macs(g.size());
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * dydx_of_y(y[i]);
    };
  });
}
}  // namespace detail

inline Tensor tanh_(const Tensor& a) {
  return detail::unary_from_output("tanh", a, [](double x) { return std::tanh(x); },
                                   [](double y) { return 1.0 - y * y; });
}
inline Tensor sigmoid_(const Tensor& a) {
  return detail::unary_from_output("sigmoid", a,
                                   [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                                   [](double y) { return y * (1.0 - y); });
}
inline Tensor relu_(const Tensor& a) {
  return detail::unary_from_output("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
                                   [](double y) { return y > 0.0 ? 1.0 : 0.0; });
}
inline Tensor exp_(const Tensor& a) {
  return detail::unary_from_output("exp", a, [](double x) { return std::exp(x); },
                                   [](double y) { return y; });
}

inline Tensor log_(const Tensor& a) {
  std::vector<double> out(a.numel());
  for (size_t i = 0; i < out.size(); ++i) out[i] = std::log(a.value()[i]);
  a.tape->count_macs(out.size());
  int ia = a.id;
  return detail::record(*a.tape, a.shape(), std::move(out), [ia](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      const auto& x = t.node(ia).value;
      auto& ga = t.node(ia).grad;
      t.count_macs(g.size());
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i] / x[i];
    };
  });
}

inline Tensor neg(const Tensor& a) { return scale(a, -1.0); }

// ---- linear algebra ----

inline Tensor matmul(const Tensor& a, const Tensor& b) {
  detail::check_same_tape("matmul", a, b);
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[1] != b.shape()[0])
    throw std::invalid_argument("matmul: shape mismatch " + detail::shape_str(a.shape()) +
                                " vs " + detail::shape_str(b.shape()));
  const int m = a.shape()[0], k = a.shape()[1], n = b.shape()[1];
  std::vector<double> out(static_cast<size_t>(m) * n, 0.0);
  detail::matmul_accum(a.value().data(), b.value().data(), out.data(), m, k, n);
  a.tape->count_macs(static_cast<std::uint64_t>(m) * n * k);
  int ia = a.id, ib = b.id;
  return detail::record(*a.tape, {m, n}, std::move(out), [ia, ib, m, k, n](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      t.count_macs(2ull * m * n * k);
      // dA += dC * B^T ; dB += A^T * dC
      detail::matmul_a_bt_accum(g.data(), t.node(ib).value.data(), t.node(ia).grad.data(), m, n, k);
      detail::matmul_at_b_accum(t.node(ia).value.data(), g.data(), t.node(ib).grad.data(), m, k, n);
    };
  });
}

/// [m,n] + [n] row-broadcast bias add.
inline Tensor add_rowvec(const Tensor& a, const Tensor& b) {
  detail::check_same_tape("add_rowvec", a, b);
  if (a.shape().size() != 2 || b.shape().size() != 1 || a.shape()[1] != b.shape()[0])
    throw std::invalid_argument("add_rowvec: shape mismatch " + detail::shape_str(a.shape()) +
                                " vs " + detail::shape_str(b.shape()));
  const int m = a.shape()[0], n = a.shape()[1];
  std::vector<double> out(a.value());
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < n; ++j) out[static_cast<size_t>(i) * n + j] += b.value()[j];
  int ia = a.id, ib = b.id;
  return detail::record(*a.tape, a.shape(), std::move(out), [ia, ib, m, n](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      auto& ga = t.node(ia).grad;
      auto& gb = t.node(ib).grad;
      for (size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) gb[j] += g[static_cast<size_t>(i) * n + j];
    };
  });
}

// ---- reductions ----

inline Tensor mean_all(const Tensor& a) {
  const double n = static_cast<double>(a.numel());
  double s = 0.0;
  for (double v : a.value()) s += v;
  int ia = a.id;
  return detail::record(*a.tape, {1}, {s / n}, [ia, n](int self) {
    return [=](Tape& t) {
      const double g = t.node(self).grad[0] / n;
      auto& ga = t.node(ia).grad;
      for (auto& v : ga) v += g;
    };
  });
}

/// log((1/N) * sum_i exp(v_i)) over all entries, max-shifted for stability.
/// Backward uses the exact softmax-weighted form.
inline Tensor log_mean_exp(const Tensor& a) {
  if (a.numel() == 0) throw std::invalid_argument("log_mean_exp: empty input");
  const auto& v = a.value();
  double m = v[0];
  for (double x : v) m = std::max(m, x);
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  const double lme = m + std::log(s / static_cast<double>(v.size()));
  a.tape->count_macs(2 * v.size());
  int ia = a.id;
  return detail::record(*a.tape, {1}, {lme}, [ia, m, s](int self) {
    return [=](Tape& t) {
      const double g = t.node(self).grad[0];
      const auto& x = t.node(ia).value;
      auto& ga = t.node(ia).grad;
      t.count_macs(2 * x.size());
      for (size_t i = 0; i < x.size(); ++i) ga[i] += g * std::exp(x[i] - m) / s;
    };
  });
}

// ---- structural ----

inline Tensor concat_cols(const Tensor& a, const Tensor& b) {
  detail::check_same_tape("concat_cols", a, b);
  if (a.shape().size() != 2 || b.shape().size() != 2 || a.shape()[0] != b.shape()[0])
    throw std::invalid_argument("concat_cols: shape mismatch " + detail::shape_str(a.shape()) +
                                " vs " + detail::shape_str(b.shape()));
  const int m = a.shape()[0], p = a.shape()[1], q = b.shape()[1];
  std::vector<double> out(static_cast<size_t>(m) * (p + q));
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < p; ++j) out[static_cast<size_t>(i) * (p + q) + j] = a.value()[static_cast<size_t>(i) * p + j];
    for (int j = 0; j < q; ++j) out[static_cast<size_t>(i) * (p + q) + p + j] = b.value()[static_cast<size_t>(i) * q + j];
  }
  int ia = a.id, ib = b.id;
  return detail::record(*a.tape, {m, p + q}, std::move(out), [ia, ib, m, p, q](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      auto& ga = t.node(ia).grad;
      auto& gb = t.node(ib).grad;
      for (int i = 0; i < m; ++i) {
        for (int j = 0; j < p; ++j) ga[static_cast<size_t>(i) * p + j] += g[static_cast<size_t>(i) * (p + q) + j];
        for (int j = 0; j < q; ++j) gb[static_cast<size_t>(i) * q + j] += g[static_cast<size_t>(i) * (p + q) + p + j];
      }
    };
  });
}

/// Row i of the input becomes rows i*k .. i*k+k-1 of the output.
inline Tensor repeat_interleave_rows(const Tensor& a, int k) {
  if (a.shape().size() != 2 || k < 1)
    throw std::invalid_argument("repeat_interleave_rows: need 2-d input and k >= 1");
  const int m = a.shape()[0], n = a.shape()[1];
  std::vector<double> out(static_cast<size_t>(m) * k * n);
  for (int i = 0; i < m; ++i)
    for (int r = 0; r < k; ++r)
      for (int j = 0; j < n; ++j)
        out[(static_cast<size_t>(i) * k + r) * n + j] = a.value()[static_cast<size_t>(i) * n + j];
  int ia = a.id;
  return detail::record(*a.tape, {m * k, n}, std::move(out), [ia, m, n, k](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      auto& ga = t.node(ia).grad;
      for (int i = 0; i < m; ++i)
        for (int r = 0; r < k; ++r)
          for (int j = 0; j < n; ++j)
            ga[static_cast<size_t>(i) * n + j] += g[(static_cast<size_t>(i) * k + r) * n + j];
    };
  });
}

/// The whole matrix is stacked k times.
inline Tensor tile_rows(const Tensor& a, int k) {
  if (a.shape().size() != 2 || k < 1)
    throw std::invalid_argument("tile_rows: need 2-d input and k >= 1");
  const int m = a.shape()[0], n = a.shape()[1];
  std::vector<double> out(static_cast<size_t>(m) * k * n);
  for (int r = 0; r < k; ++r)
    for (size_t i = 0; i < a.numel(); ++i) out[static_cast<size_t>(r) * m * n + i] = a.value()[i];
  int ia = a.id;
  return detail::record(*a.tape, {m * k, n}, std::move(out), [ia, m, n, k](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      auto& ga = t.node(ia).grad;
      for (int r = 0; r < k; ++r)
        for (size_t i = 0; i < ga.size(); ++i) ga[i] += g[static_cast<size_t>(r) * m * n + i];
    };
  });
}

inline Tensor gather_rows(const Tensor& a, std::vector<int> idx) {
  if (a.shape().size() != 2) throw std::invalid_argument("gather_rows: need 2-d input");
  const int m = a.shape()[0], n = a.shape()[1];
  for (int i : idx)
    if (i < 0 || i >= m) throw std::invalid_argument("gather_rows: index out of range");
  std::vector<double> out(idx.size() * static_cast<size_t>(n));
  for (size_t r = 0; r < idx.size(); ++r)
    for (int j = 0; j < n; ++j) out[r * n + j] = a.value()[static_cast<size_t>(idx[r]) * n + j];
  int ia = a.id;
  const int rows = static_cast<int>(idx.size());
  return detail::record(*a.tape, {rows, n}, std::move(out), [ia, n, idx = std::move(idx)](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      auto& ga = t.node(ia).grad;
      for (size_t r = 0; r < idx.size(); ++r)
        for (int j = 0; j < n; ++j) ga[static_cast<size_t>(idx[r]) * n + j] += g[r * n + j];
    };
  });
}

/// Per-row external scalar function with a caller-supplied Jacobian.
/// `values` has one output per row of `a`; `jac[i*n + j]` is d values[i] / d a[i][j].
/// Used to pass gradients through non-tape components (e.g. finite-difference
/// surrogates of a GP posterior mean).
inline Tensor row_function(const Tensor& a, std::vector<double> values, std::vector<double> jac) {
  if (a.shape().size() != 2) throw std::invalid_argument("row_function: need 2-d input");
  const int m = a.shape()[0], n = a.shape()[1];
  if (values.size() != static_cast<size_t>(m) || jac.size() != a.numel())
    throw std::invalid_argument("row_function: values/jacobian size mismatch");
  int ia = a.id;
  return detail::record(*a.tape, {m, 1}, std::move(values), [ia, m, n, jac = std::move(jac)](int self) {
    return [=](Tape& t) {
      const auto& g = t.node(self).grad;
      auto& ga = t.node(ia).grad;
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) ga[static_cast<size_t>(i) * n + j] += g[static_cast<size_t>(i)] * jac[static_cast<size_t>(i) * n + j];
    };
  });
}

/// LSTM over a sequence of [m, in] inputs; returns the final hidden state [m, H].
/// Gate layout in wx/wh/b is [i | f | g | o], each block of width H.
/// Fused so long sequences do not blow up the tape; stores per-step gate
/// activations for the backward pass.
inline Tensor lstm_seq(const std::vector<Tensor>& xs, const Tensor& wx, const Tensor& wh,
                       const Tensor& b) {
  if (xs.empty()) throw std::invalid_argument("lstm_seq: empty input sequence (t must be >= 1)");
  Tape& tape = *wx.tape;
  const int in = wx.shape()[0];
  if (wx.shape().size() != 2 || wx.shape()[1] % 4 != 0)
    throw std::invalid_argument("lstm_seq: wx must be [in, 4H], got " + detail::shape_str(wx.shape()));
  const int H = wx.shape()[1] / 4;
  if (wh.shape() != std::vector<int>{H, 4 * H})
    throw std::invalid_argument("lstm_seq: wh must be [H, 4H], got " + detail::shape_str(wh.shape()));
  if (b.shape() != std::vector<int>{4 * H})
    throw std::invalid_argument("lstm_seq: b must be [4H], got " + detail::shape_str(b.shape()));
  const int m = xs[0].shape()[0];
  for (const auto& x : xs) {
    detail::check_same_tape("lstm_seq", x, wx);
    if (x.shape() != std::vector<int>{m, in})
      throw std::invalid_argument("lstm_seq: step input must be [m, in]=" +
                                  detail::shape_str({m, in}) + ", got " + detail::shape_str(x.shape()));
    for (double v : x.value())
      if (!std::isfinite(v)) throw std::invalid_argument("lstm_seq: non-finite input");
  }

  const size_t T = xs.size();
  const size_t mh = static_cast<size_t>(m) * H;
  // Saved forward state: gates (post-activation) and cell per step, plus cell tanh.
  auto gates = std::make_shared<std::vector<double>>(T * 4 * mh);
  auto cells = std::make_shared<std::vector<double>>(T * mh);
  std::vector<double> h(mh, 0.0), c(mh, 0.0);
  std::vector<double> pre(static_cast<size_t>(m) * 4 * H);

  for (size_t s = 0; s < T; ++s) {
    std::fill(pre.begin(), pre.end(), 0.0);
    detail::matmul_accum(xs[s].value().data(), wx.value().data(), pre.data(), m, in, 4 * H);
    detail::matmul_accum(h.data(), wh.value().data(), pre.data(), m, H, 4 * H);
    tape.count_macs(static_cast<std::uint64_t>(m) * 4 * H * (in + H));
    double* gi = gates->data() + s * 4 * mh;
    double* gf = gi + mh;
    double* gg = gf + mh;
    double* go = gg + mh;
    for (int r = 0; r < m; ++r) {
      const double* p = pre.data() + static_cast<size_t>(r) * 4 * H;
      for (int j = 0; j < H; ++j) {
        const size_t k = static_cast<size_t>(r) * H + j;
        gi[k] = 1.0 / (1.0 + std::exp(-(p[j] + b.value()[j])));
        gf[k] = 1.0 / (1.0 + std::exp(-(p[H + j] + b.value()[H + j])));
        gg[k] = std::tanh(p[2 * H + j] + b.value()[2 * H + j]);
        go[k] = 1.0 / (1.0 + std::exp(-(p[3 * H + j] + b.value()[3 * H + j])));
        c[k] = gf[k] * c[k] + gi[k] * gg[k];
        (*cells)[s * mh + k] = c[k];
        h[k] = go[k] * std::tanh(c[k]);
      }
    }
    tape.count_macs(static_cast<std::uint64_t>(m) * H * 8);
  }

  std::vector<int> xids(T);
  for (size_t s = 0; s < T; ++s) xids[s] = xs[s].id;
  int iwx = wx.id, iwh = wh.id, ib = b.id;

  return detail::record(tape, {m, H}, std::move(h),
                        [=, xids = std::move(xids)](int self) {
    return [=](Tape& t) {
      const int m_ = m, H_ = H, in_ = in;
      const size_t mh_ = static_cast<size_t>(m_) * H_;
      std::vector<double> dh(t.node(self).grad);
      std::vector<double> dc(mh_, 0.0);
      std::vector<double> dpre(static_cast<size_t>(m_) * 4 * H_);
      const auto& vwx = t.node(iwx).value;
      const auto& vwh = t.node(iwh).value;
      auto& gwx = t.node(iwx).grad;
      auto& gwh = t.node(iwh).grad;
      auto& gb = t.node(ib).grad;
      for (size_t s = T; s-- > 0;) {
        const double* gi = gates->data() + s * 4 * mh_;
        const double* gf = gi + mh_;
        const double* gg = gf + mh_;
        const double* go = gg + mh_;
        const double* cs = cells->data() + s * mh_;
        const double* cprev = s > 0 ? cells->data() + (s - 1) * mh_ : nullptr;
        for (size_t k = 0; k < mh_; ++k) {
          const double tc = std::tanh(cs[k]);
          const double dck = dc[k] + dh[k] * go[k] * (1.0 - tc * tc);
          const double cp = cprev ? cprev[k] : 0.0;
          const size_t r = k / H_, j = k % H_;
          double* dp = dpre.data() + r * 4 * H_;
          dp[j] = dck * gg[k] * gi[k] * (1.0 - gi[k]);
          dp[H_ + j] = dck * cp * gf[k] * (1.0 - gf[k]);
          dp[2 * H_ + j] = dck * gi[k] * (1.0 - gg[k] * gg[k]);
          dp[3 * H_ + j] = dh[k] * tc * go[k] * (1.0 - go[k]);
          dc[k] = dck * gf[k];
        }
        t.count_macs(mh_ * 12);
        // bias grad
        for (int r = 0; r < m_; ++r)
          for (int j = 0; j < 4 * H_; ++j) gb[j] += dpre[static_cast<size_t>(r) * 4 * H_ + j];
        // weight grads: gwx += x_s^T dpre ; gwh += h_{s-1}^T dpre
        const auto& xv = t.node(xids[s]).value;
        detail::matmul_at_b_accum(xv.data(), dpre.data(), gwx.data(), m_, in_, 4 * H_);
        // input grad: dx_s += dpre * wx^T
        detail::matmul_a_bt_accum(dpre.data(), vwx.data(), t.node(xids[s]).grad.data(), m_, 4 * H_, in_);
        t.count_macs(2ull * m_ * 4 * H_ * in_);
        if (s > 0) {
          // previous hidden = go_{s-1} * tanh(c_{s-1})
          const double* pgo = gates->data() + (s - 1) * 4 * mh_ + 3 * mh_;
          const double* pc = cells->data() + (s - 1) * mh_;
          std::vector<double> hprev(mh_);
          for (size_t k = 0; k < mh_; ++k) hprev[k] = pgo[k] * std::tanh(pc[k]);
          detail::matmul_at_b_accum(hprev.data(), dpre.data(), gwh.data(), m_, H_, 4 * H_);
          std::fill(dh.begin(), dh.end(), 0.0);
          detail::matmul_a_bt_accum(dpre.data(), vwh.data(), dh.data(), m_, 4 * H_, H_);
          t.count_macs(2ull * m_ * 4 * H_ * H_);
        }
      }
    };
  });
}

}  // namespace vbo
