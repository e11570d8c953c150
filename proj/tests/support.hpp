#pragma once

// Shared fixtures for the unit and acceptance binaries.

#include "dronerl/mapgen.hpp"
#include "dronerl/net.hpp"
#include "dronerl/ppo.hpp"
#include "dronerl/random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace dronerl::testing {

/// 769 parameters with single-mode observations.
inline net::ModelConfig tiny_model(std::uint64_t seed = 5) { return net::ModelConfig{17, {8}, 8, 8, seed}; }

inline Suite small_suite(int drones = 1) {
  Suite s;
  s.maps["open"] = parse_map(
      "8 8\n"
      "########\n"
      "#......#\n"
      "#..#...#\n"
      "#......#\n"
      "#...#..#\n"
      "#......#\n"
      "#......#\n"
      "########\n");
  const Position spawns[][2] = {{{1, 1}, {6, 1}}, {{6, 6}, {1, 6}}, {{1, 6}, {6, 6}}};
  const Position targets[] = {{5, 5}, {2, 2}, {6, 2}};
  for (int i = 0; i < 3; ++i) {
    ScenarioInstance sc{"open", targets[i], {}, static_cast<std::uint64_t>(i)};
    for (int d = 0; d < drones; ++d) sc.spawns.push_back(spawns[i][d]);
    s.scenarios.push_back(sc);
  }
  return s;
}

inline ppo::PpoConfig small_ppo() {
  ppo::PpoConfig c;
  c.rollout_len = 48;
  c.n_workers = 3;
  c.chunk_len = 8;
  c.minibatch_chunks = 4;
  c.epochs = 2;
  c.total_env_steps = 3 * 48 * 3;
  c.switch_period = 2;
  return c;
}

inline EnvConfig small_env(Mode mode = Mode::Single) {
  EnvConfig e;
  e.mode = mode;
  e.max_steps = 30;
  return e;
}

/// Random padded minibatch whose old log-probabilities sit near the current
/// policy, so the ratios straddle the clip range.
template <typename Scalar>
ppo::Minibatch<Scalar> random_minibatch(const net::ModelConfig& cfg, const diff::ParamStore<Scalar>& params,
                                        int steps, int batch, Rng& rng) {
  ppo::Minibatch<Scalar> mb;
  mb.steps = steps;
  mb.batch = batch;
  const int n = steps * batch;
  mb.obs.resize(cfg.obs_dim, n);
  for (Eigen::Index i = 0; i < mb.obs.size(); ++i) mb.obs.data()[i] = static_cast<Scalar>(uniform01(rng));
  mb.mask = diff::Matrix<Scalar>::Ones(1, n);
  // The last sequence ends early.
  for (int t = steps - 1; t < steps; ++t) mb.mask(0, t * batch + batch - 1) = 0;
  mb.valid = static_cast<int>(mb.mask.sum());
  mb.actions.resize(static_cast<std::size_t>(n));
  for (auto& a : mb.actions) a = static_cast<int>(uniform_below(rng, cfg.n_actions));
  mb.initial.h = diff::Matrix<Scalar>(cfg.lstm_hidden, batch);
  mb.initial.c = diff::Matrix<Scalar>(cfg.lstm_hidden, batch);
  for (Eigen::Index i = 0; i < mb.initial.h.size(); ++i) {
    mb.initial.h.data()[i] = static_cast<Scalar>(0.5 * standard_normal(rng));
    mb.initial.c.data()[i] = static_cast<Scalar>(0.5 * standard_normal(rng));
  }
  diff::Tape<Scalar> tape(false);
  const auto vars = net::bind_frozen(tape, params, cfg);
  const auto out = net::unroll(vars, cfg, mb.obs, steps, mb.initial);
  const auto logp = net::log_probabilities<Scalar>(out.logits.value());
  mb.log_prob_old.resize(1, n);
  mb.advantages.resize(1, n);
  mb.returns.resize(1, n);
  for (int j = 0; j < n; ++j) {
    mb.log_prob_old(0, j) = logp(mb.actions[static_cast<std::size_t>(j)], j) +
                            static_cast<Scalar>(0.4 * (uniform01(rng) - 0.5));
    mb.advantages(0, j) = static_cast<Scalar>(standard_normal(rng));
    mb.returns(0, j) = static_cast<Scalar>(standard_normal(rng));
  }
  return mb;
}

template <typename To, typename From>
ppo::Minibatch<To> cast_minibatch(const ppo::Minibatch<From>& m) {
  ppo::Minibatch<To> o;
  o.steps = m.steps;
  o.batch = m.batch;
  o.obs = m.obs.template cast<To>();
  o.mask = m.mask.template cast<To>();
  o.actions = m.actions;
  o.log_prob_old = m.log_prob_old.template cast<To>();
  o.advantages = m.advantages.template cast<To>();
  o.returns = m.returns.template cast<To>();
  o.initial = {m.initial.h.template cast<To>(), m.initial.c.template cast<To>()};
  o.valid = m.valid;
  return o;
}

template <typename To, typename From>
diff::ParamStore<To> cast_params(const diff::ParamStore<From>& p) {
  diff::ParamStore<To> o;
  for (const auto& e : p) o.add(e.name, e.value.template cast<To>());
  return o;
}

template <typename Scalar>
double loss_value(const diff::ParamStore<Scalar>& params, const net::ModelConfig& cfg,
                  const ppo::Minibatch<Scalar>& mb, const ppo::PpoConfig& ppo_cfg) {
  diff::Tape<Scalar> tape(false);
  const auto vars = net::bind_frozen(tape, params, cfg);
  return static_cast<double>(diff::item(ppo::ppo_loss(tape, vars, cfg, mb, ppo_cfg).loss));
}

struct GradCheck {
  double max_relative_error = 0.0;
  std::size_t checked = 0;
  std::string worst;
};

/// Analytic gradients of the PPO loss in `Scalar` against central finite
/// differences of the same loss evaluated in double precision. The relative
/// error of each entry is |a - n| / max(|a|, |n|, floor).
template <typename Scalar>
GradCheck check_loss_gradients(const diff::ParamStore<double>& reference, const net::ModelConfig& cfg,
                               const ppo::Minibatch<double>& mb, const ppo::PpoConfig& ppo_cfg,
                               double floor) {
  auto params = cast_params<Scalar>(reference);
  const auto batch = cast_minibatch<Scalar>(mb);
  diff::Tape<Scalar> tape;
  const auto vars = net::bind_trainable(tape, params, cfg);
  tape.backward(ppo::ppo_loss(tape, vars, cfg, batch, ppo_cfg).loss);

  GradCheck out;
  auto probe = reference;
  const double h = 1e-6;
  for (std::size_t k = 0; k < probe.size(); ++k) {
    auto& value = probe[k].value;
    for (Eigen::Index i = 0; i < value.size(); ++i) {
      const double x = value.data()[i];
      value.data()[i] = x + h;
      const double up = loss_value(probe, cfg, mb, ppo_cfg);
      value.data()[i] = x - h;
      const double down = loss_value(probe, cfg, mb, ppo_cfg);
      value.data()[i] = x;
      const double numeric = (up - down) / (2 * h);
      const double analytic = static_cast<double>(params[k].grad.data()[i]);
      const double rel =
          std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
      if (rel > out.max_relative_error) {
        out.max_relative_error = rel;
        out.worst = probe[k].name + "[" + std::to_string(i) + "] analytic " + std::to_string(analytic) +
                    " numeric " + std::to_string(numeric);
      }
      ++out.checked;
    }
  }
  return out;
}

}  // namespace dronerl::testing
