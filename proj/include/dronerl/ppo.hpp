#pragma once

// Recurrent PPO with GAE, truncated-BPTT chunks and full parameter sharing
// across drones (one policy, one hidden state per drone).

#include "dronerl/diff.hpp"
#include "dronerl/env.hpp"
#include "dronerl/mapgen.hpp"
#include "dronerl/net.hpp"
#include "dronerl/random.hpp"

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <span>
#include <vector>

namespace dronerl::ppo {

using Real = float;
using Mat = diff::Matrix<Real>;

struct PpoConfig {
  double gamma = 0.99;
  double gae_lambda = 0.95;
  double clip_eps = 0.2;
  double c1 = 0.5;
  double c2 = 0.01;
  int epochs = 4;
  int rollout_len = 512;
  int chunk_len = 32;
  int minibatch_chunks = 8;
  int n_workers = 8;
  std::int64_t total_env_steps = 2'000'000;
  int switch_period = 50;
  double lr = 3e-4;
  double adam_beta1 = 0.9;
  double adam_beta2 = 0.999;
  double adam_eps = 1e-5;
  double max_grad_norm = 0.5;
  /// Multiplies env rewards before GAE and value regression. Env rewards
  /// themselves are untouched.
  double reward_scale = 0.001;

  void validate() const;
  friend bool operator==(const PpoConfig&, const PpoConfig&) = default;
};

// ---------------------------------------------------------------------------
// Advantage estimation

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// delta_t = r_t + gamma V_{t+1} (1 - done_t) - V_t
/// A_t     = delta_t + gamma lambda (1 - done_t) A_{t+1}
/// V_T is `bootstrap`; returns are A_t + V_t.
GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap, double gamma,
                      double lambda);

/// In-place standardization to mean 0, std 1 (std floored at 1e-8).
void normalize(std::span<double> xs);

// ---------------------------------------------------------------------------
// Rollout storage

/// The time-ordered experience of one drone in one env worker.
struct Stream {
  Mat obs;  // (obs_dim x T)
  std::vector<int> actions;
  std::vector<Real> log_prob_old;
  std::vector<Real> value_old;
  std::vector<double> reward;
  std::vector<std::uint8_t> done;
  Real bootstrap_value = 0;
  std::vector<double> advantages;
  std::vector<double> returns;
};

/// Truncated-BPTT unit: a slice of one stream that never crosses a done.
struct Chunk {
  int stream = 0;
  int start = 0;
  int length = 0;
  Mat h0;  // (hidden x 1)
  Mat c0;
};

struct RolloutBuffer {
  std::vector<Stream> streams;
  std::vector<Chunk> chunks;

  std::size_t transitions() const;
};

/// Splits every stream at done flags and every `chunk_len` steps. Hidden
/// snapshots are taken from `hidden_before`, which holds the recurrent state
/// before each step of each stream: (h, c) of shape (hidden x T).
std::vector<Chunk> make_chunks(const std::vector<Stream>& streams,
                               const std::vector<net::HiddenState<Real>>& hidden_before,
                               int chunk_len);

/// Fills advantages (normalized over the whole buffer) and returns.
void compute_advantages(RolloutBuffer& buffer, const PpoConfig& cfg);

// ---------------------------------------------------------------------------
// Loss

/// A padded, time-major batch of chunks. Column t*batch + b is step t of
/// chunk b; mask is 0 on padding.
template <typename Scalar>
struct Minibatch {
  int steps = 0;
  int batch = 0;
  diff::Matrix<Scalar> obs;
  diff::Matrix<Scalar> mask;
  std::vector<int> actions;
  diff::Matrix<Scalar> log_prob_old;
  diff::Matrix<Scalar> advantages;
  diff::Matrix<Scalar> returns;
  net::HiddenState<Scalar> initial;
  int valid = 0;
};

Minibatch<Real> assemble(const RolloutBuffer& buffer, std::span<const int> chunk_ids,
                         int obs_dim);

struct LossParts {
  double surrogate = 0;  // L_CLIP (maximized)
  double value = 0;      // L_VF
  double entropy = 0;    // S
  double total = 0;      // -(L_CLIP - c1 L_VF + c2 S)
  double approx_kl = 0;
  double clip_fraction = 0;
  double max_ratio_deviation = 0;
};

template <typename Scalar>
struct LossResult {
  diff::Var<Scalar> loss;
  LossParts parts;
};

/// Builds -(L_CLIP - c1 L_VF + c2 S) on `tape` with the network re-unrolled
/// from each chunk's stored hidden state.
template <typename Scalar>
LossResult<Scalar> ppo_loss(diff::Tape<Scalar>& tape, const net::NetVars<Scalar>& vars,
                            const net::ModelConfig& model, const Minibatch<Scalar>& batch,
                            const PpoConfig& cfg);

// ---------------------------------------------------------------------------
// Training loop

struct TrainStats {
  int update = 0;
  std::int64_t env_steps = 0;
  double mean_episode_reward = 0;
  double mean_episode_length = 0;
  double loss_clip = 0;
  double loss_value = 0;
  double entropy = 0;
  double approx_kl = 0;
  double clip_fraction = 0;
  /// Taken on the first minibatch of the update, where theta == theta_old.
  double first_max_ratio_deviation = 0;
  double first_clip_fraction = 0;
};

/// Rotates the active scenario after every `period` episode resets.
struct Curriculum {
  std::size_t size = 1;
  int period = 50;
  std::size_t current = 0;
  int resets = 0;

  /// Registers one reset; returns true when the scenario advanced.
  bool on_reset();
};

class Trainer {
 public:
  Trainer(EnvConfig env, net::ModelConfig model, PpoConfig cfg, Suite curriculum, std::uint64_t seed);

  /// One collection phase followed by one optimization phase.
  TrainStats run_update();

  RolloutBuffer collect();
  TrainStats optimize(RolloutBuffer& buffer);

  bool finished() const { return env_steps_ >= cfg_.total_env_steps; }
  std::int64_t env_steps() const { return env_steps_; }
  int updates() const { return updates_; }

  diff::ParamStore<Real>& params() { return params_; }
  const diff::ParamStore<Real>& params() const { return params_; }
  const net::ModelConfig& model() const { return model_; }
  const EnvConfig& env_config() const { return env_; }
  const PpoConfig& config() const { return cfg_; }
  PpoConfig& config() { return cfg_; }

  /// Replaces the network weights, keeping the rest of the state.
  void set_params(diff::ParamStore<Real> params);

  /// Everything besides parameters that a bit-exact resume needs.
  void save_state(std::ostream& out) const;
  void load_state(std::istream& in);

 private:
  struct Worker {
    EnvState env;
    Curriculum curriculum;
    net::HiddenState<Real> hidden;  // one column per drone
    std::vector<double> episode_reward;
    int episode_length = 0;
  };

  void start_episode(Worker& w);

  EnvConfig env_;
  net::ModelConfig model_;
  PpoConfig cfg_;
  Suite suite_;
  diff::ParamStore<Real> params_;
  Rng rng_;
  std::vector<Worker> workers_;
  std::deque<double> recent_rewards_;
  std::deque<double> recent_lengths_;
  std::int64_t env_steps_ = 0;
  int updates_ = 0;
};

}  // namespace dronerl::ppo
