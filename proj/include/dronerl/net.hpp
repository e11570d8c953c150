#pragma once

// Recurrent actor-critic: tanh MLP encoder -> single LSTM layer -> categorical
// policy head and scalar value head on a shared trunk.
//
// Batched inputs are (obs_dim x steps*batch) matrices laid out time-major:
// column t*batch + b holds step t of sequence b.

#include "dronerl/diff.hpp"
#include "dronerl/errors.hpp"
#include "dronerl/random.hpp"

#include <Eigen/QR>

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace dronerl::net {

using diff::Matrix;
using diff::ParamStore;
using diff::Tape;
using diff::Var;

struct ModelConfig {
  int obs_dim = 17;
  std::vector<int> encoder_widths{128, 128};
  int lstm_hidden = 256;
  int n_actions = 8;
  std::uint64_t seed = 0;

  void validate() const {
    if (obs_dim <= 0) throw ConfigError("model.obs_dim must be positive");
    if (lstm_hidden <= 0) throw ConfigError("model.lstm_hidden must be positive");
    if (n_actions <= 1) throw ConfigError("model.n_actions must be at least 2");
    for (int w : encoder_widths) {
      if (w <= 0) throw ConfigError("model.encoder_widths entries must be positive");
    }
  }

  int trunk_input() const { return encoder_widths.empty() ? obs_dim : encoder_widths.back(); }

  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

inline std::string encoder_weight(std::size_t layer) { return "enc" + std::to_string(layer) + ".w"; }
inline std::string encoder_bias(std::size_t layer) { return "enc" + std::to_string(layer) + ".b"; }

namespace detail {

template <typename Scalar>
Matrix<Scalar> uniform_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols, double bound) {
  Matrix<Scalar> m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      m(i, j) = static_cast<Scalar>((2.0 * uniform01(rng) - 1.0) * bound);
    }
  }
  return m;
}

template <typename Scalar>
Matrix<Scalar> glorot(Rng& rng, Eigen::Index rows, Eigen::Index cols, double gain = 1.0) {
  return uniform_matrix<Scalar>(rng, rows, cols,
                                gain * std::sqrt(6.0 / static_cast<double>(rows + cols)));
}

/// Random orthogonal (n x n) matrix: Q of a Gaussian matrix with the signs
/// of R's diagonal folded in.
template <typename Scalar>
Matrix<Scalar> orthogonal(Rng& rng, Eigen::Index n) {
  Eigen::MatrixXd a(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) a(i, j) = standard_normal(rng);
  }
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
  Eigen::MatrixXd q = qr.householderQ();
  const Eigen::MatrixXd r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (r(i, i) < 0.0) q.col(i) *= -1.0;
  }
  return q.cast<Scalar>();
}

}  // namespace detail

/// Deterministic under config.seed. Parameter order: encoder layers, LSTM,
/// policy head, value head.
template <typename Scalar>
ParamStore<Scalar> init_params(const ModelConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  ParamStore<Scalar> p;
  int fan_in = cfg.obs_dim;
  for (std::size_t l = 0; l < cfg.encoder_widths.size(); ++l) {
    const int width = cfg.encoder_widths[l];
    p.add(encoder_weight(l), detail::glorot<Scalar>(rng, width, fan_in));
    p.add(encoder_bias(l), Matrix<Scalar>::Zero(width, 1));
    fan_in = width;
  }
  const int h = cfg.lstm_hidden;
  Matrix<Scalar> w_ih(4 * h, fan_in);
  Matrix<Scalar> w_hh(4 * h, h);
  for (int gate = 0; gate < 4; ++gate) {
    w_ih.middleRows(gate * h, h) = detail::glorot<Scalar>(rng, h, fan_in);
    w_hh.middleRows(gate * h, h) = detail::orthogonal<Scalar>(rng, h);
  }
  p.add("lstm.w_ih", std::move(w_ih));
  p.add("lstm.w_hh", std::move(w_hh));
  p.add("lstm.b", Matrix<Scalar>::Zero(4 * h, 1));
  // Small policy weights start the policy close to uniform.
  p.add("pi.w", detail::glorot<Scalar>(rng, cfg.n_actions, h, 0.01));
  p.add("pi.b", Matrix<Scalar>::Zero(cfg.n_actions, 1));
  p.add("v.w", detail::glorot<Scalar>(rng, 1, h));
  p.add("v.b", Matrix<Scalar>::Zero(1, 1));
  return p;
}

/// Per-sequence recurrent state; one column per sequence.
template <typename Scalar>
struct HiddenState {
  Matrix<Scalar> h;
  Matrix<Scalar> c;

  static HiddenState zeros(int hidden, int batch) {
    return {Matrix<Scalar>::Zero(hidden, batch), Matrix<Scalar>::Zero(hidden, batch)};
  }
};

/// Parameters bound to a tape.
template <typename Scalar>
struct NetVars {
  std::vector<std::pair<Var<Scalar>, Var<Scalar>>> encoder;
  Var<Scalar> w_ih, w_hh, b;
  Var<Scalar> pi_w, pi_b;
  Var<Scalar> v_w, v_b;
};

namespace detail {

template <typename Scalar, typename Store, typename BindFn>
NetVars<Scalar> bind(Store& store, const ModelConfig& cfg, BindFn&& bind_one) {
  NetVars<Scalar> v;
  for (std::size_t l = 0; l < cfg.encoder_widths.size(); ++l) {
    v.encoder.emplace_back(bind_one(store.index_of(encoder_weight(l))),
                           bind_one(store.index_of(encoder_bias(l))));
  }
  v.w_ih = bind_one(store.index_of("lstm.w_ih"));
  v.w_hh = bind_one(store.index_of("lstm.w_hh"));
  v.b = bind_one(store.index_of("lstm.b"));
  v.pi_w = bind_one(store.index_of("pi.w"));
  v.pi_b = bind_one(store.index_of("pi.b"));
  v.v_w = bind_one(store.index_of("v.w"));
  v.v_b = bind_one(store.index_of("v.b"));
  return v;
}

}  // namespace detail

template <typename Scalar>
NetVars<Scalar> bind_trainable(Tape<Scalar>& tape, ParamStore<Scalar>& store, const ModelConfig& cfg) {
  return detail::bind<Scalar>(store, cfg, [&](std::size_t i) { return tape.parameter(store, i); });
}

template <typename Scalar>
NetVars<Scalar> bind_frozen(Tape<Scalar>& tape, const ParamStore<Scalar>& store, const ModelConfig& cfg) {
  return detail::bind<Scalar>(store, cfg, [&](std::size_t i) { return tape.frozen(store, i); });
}

template <typename Scalar>
struct Unrolled {
  Var<Scalar> logits;  // (n_actions x steps*batch)
  Var<Scalar> values;  // (1 x steps*batch)
  Var<Scalar> h;       // final hidden, (hidden x batch)
  Var<Scalar> c;
};

/// Runs `steps` recurrent steps over `batch` sequences starting from (h0, c0).
template <typename Scalar>
Unrolled<Scalar> unroll(const NetVars<Scalar>& v, const ModelConfig& cfg, const Matrix<Scalar>& obs,
                        int steps, const HiddenState<Scalar>& initial) {
  const Eigen::Index batch = initial.h.cols();
  if (obs.rows() != cfg.obs_dim) {
    throw UsageError("observation length " + std::to_string(obs.rows()) + " does not match obs_dim " +
                     std::to_string(cfg.obs_dim));
  }
  if (steps <= 0 || obs.cols() != steps * batch || initial.h.rows() != cfg.lstm_hidden ||
      initial.c.rows() != cfg.lstm_hidden || initial.c.cols() != batch) {
    throw UsageError("unroll: inconsistent obs/hidden shapes");
  }
  Tape<Scalar>& t = *v.w_ih.tape;
  const Eigen::Index hid = cfg.lstm_hidden;

  Var<Scalar> x = t.constant(obs);
  for (const auto& [w, b] : v.encoder) x = diff::tanh(diff::add(diff::matmul(w, x), b));
  const Var<Scalar> projected = diff::add(diff::matmul(v.w_ih, x), v.b);

  Var<Scalar> h = t.constant(initial.h);
  Var<Scalar> c = t.constant(initial.c);
  std::vector<Var<Scalar>> outputs;
  outputs.reserve(static_cast<std::size_t>(steps));
  for (int s = 0; s < steps; ++s) {
    const Var<Scalar> gates =
        diff::add(diff::slice_cols(projected, s * batch, batch), diff::matmul(v.w_hh, h));
    const Var<Scalar> in_gate = diff::sigmoid(diff::slice_rows(gates, 0, hid));
    const Var<Scalar> forget_gate = diff::sigmoid(diff::slice_rows(gates, hid, hid));
    const Var<Scalar> candidate = diff::tanh(diff::slice_rows(gates, 2 * hid, hid));
    const Var<Scalar> out_gate = diff::sigmoid(diff::slice_rows(gates, 3 * hid, hid));
    c = diff::add(diff::mul(forget_gate, c), diff::mul(in_gate, candidate));
    h = diff::mul(out_gate, diff::tanh(c));
    outputs.push_back(h);
  }
  const Var<Scalar> trunk =
      steps == 1 ? outputs.front() : diff::concat_cols(std::span<const Var<Scalar>>(outputs));
  return {diff::add(diff::matmul(v.pi_w, trunk), v.pi_b), diff::add(diff::matmul(v.v_w, trunk), v.v_b),
          h, c};
}

template <typename Scalar>
struct PolicyOutput {
  Matrix<Scalar> logits;  // (n_actions x batch)
  Matrix<Scalar> value;   // (1 x batch)
  HiddenState<Scalar> next_hidden;
};

/// One inference step for a batch of observations (one column each).
template <typename Scalar>
PolicyOutput<Scalar> forward(const ParamStore<Scalar>& params, const ModelConfig& cfg,
                             const Matrix<Scalar>& obs, const HiddenState<Scalar>& hidden) {
  Tape<Scalar> tape(false);
  const auto vars = bind_frozen(tape, params, cfg);
  const auto out = unroll(vars, cfg, obs, 1, hidden);
  return {out.logits.value(), out.values.value(), {out.h.value(), out.c.value()}};
}

/// Column-wise log-softmax, the same expression the training loss uses.
template <typename Scalar>
Matrix<Scalar> log_probabilities(const Matrix<Scalar>& logits) {
  Matrix<Scalar> shifted = logits.rowwise() - logits.colwise().maxCoeff();
  const Eigen::Matrix<Scalar, 1, Eigen::Dynamic> lse = shifted.array().exp().colwise().sum().log().matrix();
  shifted.rowwise() -= lse;
  return shifted;
}

struct SampledAction {
  int action = 0;
  double log_prob = 0.0;
};

/// Draws from softmax(logits). Non-finite logits raise NumericalError.
template <typename Derived>
SampledAction sample_action(const Eigen::MatrixBase<Derived>& logits, Rng& rng) {
  using Scalar = typename Derived::Scalar;
  if (!logits.allFinite()) throw NumericalError("sample_action: non-finite logits");
  const Matrix<Scalar> logp = log_probabilities<Scalar>(Matrix<Scalar>(logits.col(0)));
  const double u = uniform01(rng);
  double cumulative = 0.0;
  int chosen = static_cast<int>(logp.rows()) - 1;
  for (Eigen::Index i = 0; i < logp.rows(); ++i) {
    cumulative += std::exp(static_cast<double>(logp(i, 0)));
    if (u < cumulative) {
      chosen = static_cast<int>(i);
      break;
    }
  }
  return {chosen, static_cast<double>(logp(chosen, 0))};
}

/// Argmax with lowest-index tie-break.
template <typename Derived>
int greedy_action(const Eigen::MatrixBase<Derived>& logits) {
  int best = 0;
  for (Eigen::Index i = 1; i < logits.rows(); ++i) {
    if (logits(i, 0) > logits(best, 0)) best = static_cast<int>(i);
  }
  return best;
}

/// Warm start: copies every same-named, same-shaped weight from `src`. The
/// first encoder layer may grow extra input columns (single to multi
/// observations); those start at zero so the copied policy is unchanged on
/// the shared inputs. Returns the number of tensors copied.
template <typename Scalar>
std::size_t transfer_weights(const ParamStore<Scalar>& src, ParamStore<Scalar>& dst) {
  std::size_t copied = 0;
  for (auto& e : dst) {
    if (!src.contains(e.name)) continue;
    const auto& from = src.at(e.name).value;
    if (from.rows() == e.value.rows() && from.cols() == e.value.cols()) {
      e.value = from;
      ++copied;
    } else if (e.name == encoder_weight(0) && from.rows() == e.value.rows() && from.cols() < e.value.cols()) {
      e.value.setZero();
      e.value.leftCols(from.cols()) = from;
      ++copied;
    }
  }
  return copied;
}

}  // namespace dronerl::net
