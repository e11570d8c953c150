#include "dronerl/ppo.hpp"

#include "dronerl/binary_io.hpp"
#include "dronerl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <string>

namespace dronerl::ppo {

namespace {

constexpr std::size_t kStatsWindow = 100;

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void PpoConfig::validate() const {
  require(clip_eps > 0.0 && clip_eps < 1.0, "ppo.clip_eps must lie in (0, 1)");
  require(gamma > 0.0 && gamma <= 1.0, "ppo.gamma must lie in (0, 1]");
  require(gae_lambda > 0.0 && gae_lambda <= 1.0, "ppo.gae_lambda must lie in (0, 1]");
  require(c1 >= 0.0, "ppo.c1 must be non-negative");
  require(c2 >= 0.0, "ppo.c2 must be non-negative");
  require(epochs > 0, "ppo.epochs must be positive");
  require(rollout_len > 0, "ppo.rollout_len must be positive");
  require(chunk_len > 0, "ppo.chunk_len must be positive");
  require(minibatch_chunks > 0, "ppo.minibatch_chunks must be positive");
  require(n_workers > 0, "ppo.n_workers must be positive");
  require(total_env_steps > 0, "ppo.total_env_steps must be positive");
  require(switch_period > 0, "ppo.switch_period must be positive");
  require(lr >= 0.0, "ppo.lr must be non-negative");
  require(max_grad_norm > 0.0, "ppo.max_grad_norm must be positive");
  require(reward_scale > 0.0, "ppo.reward_scale must be positive");
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const std::uint8_t> dones, double bootstrap, double gamma,
                      double lambda) {
  const std::size_t n = rewards.size();
  if (values.size() != n || dones.size() != n) {
    throw UsageError("compute_gae: rewards/values/dones lengths differ (" + std::to_string(n) + ", " +
                     std::to_string(values.size()) + ", " + std::to_string(dones.size()) + ")");
  }
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.returns.assign(n, 0.0);
  double next_advantage = 0.0;
  for (std::size_t k = n; k-- > 0;) {
    const double next_value = k + 1 < n ? values[k + 1] : bootstrap;
    const double live = dones[k] ? 0.0 : 1.0;
    const double delta = rewards[k] + gamma * next_value * live - values[k];
    next_advantage = delta + gamma * lambda * live * next_advantage;
    out.advantages[k] = next_advantage;
    out.returns[k] = next_advantage + values[k];
  }
  return out;
}

void normalize(std::span<double> xs) {
  if (xs.empty()) return;
  const double n = static_cast<double>(xs.size());
  const double mu = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  double var = 0.0;
  for (double x : xs) var += (x - mu) * (x - mu);
  const double sigma = std::max(std::sqrt(var / n), 1e-8);
  for (double& x : xs) x = (x - mu) / sigma;
}

std::size_t RolloutBuffer::transitions() const {
  std::size_t n = 0;
  for (const auto& s : streams) n += s.actions.size();
  return n;
}

std::vector<Chunk> make_chunks(const std::vector<Stream>& streams,
                               const std::vector<net::HiddenState<Real>>& hidden_before,
                               int chunk_len) {
  if (hidden_before.size() != streams.size()) throw UsageError("make_chunks: hidden snapshot count");
  std::vector<Chunk> chunks;
  for (std::size_t s = 0; s < streams.size(); ++s) {
    const auto& st = streams[s];
    const int len = static_cast<int>(st.actions.size());
    int start = 0;
    auto close = [&](int end) {
      if (end <= start) return;
      Chunk c;
      c.stream = static_cast<int>(s);
      c.start = start;
      c.length = end - start;
      c.h0 = hidden_before[s].h.col(start);
      c.c0 = hidden_before[s].c.col(start);
      chunks.push_back(std::move(c));
      start = end;
    };
    for (int t = 1; t <= len; ++t) {
      if (st.done[static_cast<std::size_t>(t - 1)] || t - start == chunk_len || t == len) close(t);
    }
  }
  return chunks;
}

void compute_advantages(RolloutBuffer& buffer, const PpoConfig& cfg) {
  std::vector<double> all;
  for (auto& st : buffer.streams) {
    std::vector<double> rewards(st.reward.size());
    std::vector<double> values(st.value_old.size());
    for (std::size_t t = 0; t < rewards.size(); ++t) {
      rewards[t] = st.reward[t] * cfg.reward_scale;
      values[t] = static_cast<double>(st.value_old[t]);
    }
    auto gae = compute_gae(rewards, values, st.done, static_cast<double>(st.bootstrap_value),
                           cfg.gamma, cfg.gae_lambda);
    st.advantages = std::move(gae.advantages);
    st.returns = std::move(gae.returns);
    all.insert(all.end(), st.advantages.begin(), st.advantages.end());
  }
  if (all.size() > 1) {
    normalize(all);
    std::size_t k = 0;
    for (auto& st : buffer.streams) {
      for (double& a : st.advantages) a = all[k++];
    }
  }
}

Minibatch<Real> assemble(const RolloutBuffer& buffer, std::span<const int> chunk_ids, int obs_dim) {
  if (chunk_ids.empty()) throw UsageError("assemble: empty minibatch");
  Minibatch<Real> mb;
  mb.batch = static_cast<int>(chunk_ids.size());
  for (int id : chunk_ids) mb.steps = std::max(mb.steps, buffer.chunks.at(static_cast<std::size_t>(id)).length);
  const int n = mb.steps * mb.batch;
  const auto hidden = buffer.chunks.at(static_cast<std::size_t>(chunk_ids[0])).h0.rows();
  mb.obs = Mat::Zero(obs_dim, n);
  mb.mask = Mat::Zero(1, n);
  mb.actions.assign(static_cast<std::size_t>(n), 0);
  mb.log_prob_old = Mat::Zero(1, n);
  mb.advantages = Mat::Zero(1, n);
  mb.returns = Mat::Zero(1, n);
  mb.initial = net::HiddenState<Real>::zeros(static_cast<int>(hidden), mb.batch);
  for (int b = 0; b < mb.batch; ++b) {
    const Chunk& c = buffer.chunks[static_cast<std::size_t>(chunk_ids[static_cast<std::size_t>(b)])];
    const Stream& st = buffer.streams[static_cast<std::size_t>(c.stream)];
    mb.initial.h.col(b) = c.h0;
    mb.initial.c.col(b) = c.c0;
    for (int t = 0; t < c.length; ++t) {
      const int col = t * mb.batch + b;
      const auto src = static_cast<std::size_t>(c.start + t);
      mb.obs.col(col) = st.obs.col(static_cast<Eigen::Index>(src));
      mb.mask(0, col) = 1;
      mb.actions[static_cast<std::size_t>(col)] = st.actions[src];
      mb.log_prob_old(0, col) = st.log_prob_old[src];
      mb.advantages(0, col) = static_cast<Real>(st.advantages[src]);
      mb.returns(0, col) = static_cast<Real>(st.returns[src]);
    }
    mb.valid += c.length;
  }
  return mb;
}

template <typename Scalar>
LossResult<Scalar> ppo_loss(diff::Tape<Scalar>& tape, const net::NetVars<Scalar>& vars,
                            const net::ModelConfig& model, const Minibatch<Scalar>& batch,
                            const PpoConfig& cfg) {
  using diff::Var;
  if (batch.valid <= 0 || batch.batch <= 0) throw UsageError("ppo_loss: empty batch");
  const auto eps = static_cast<Scalar>(cfg.clip_eps);
  const auto inv_n = static_cast<Scalar>(1.0 / batch.valid);

  const auto net_out = net::unroll(vars, model, batch.obs, batch.steps, batch.initial);
  const Var<Scalar> log_probs = diff::log_softmax(net_out.logits);
  const Var<Scalar> taken = diff::gather(log_probs, std::span<const int>(batch.actions));
  const Var<Scalar> ratio = diff::exp(diff::sub(taken, tape.constant(batch.log_prob_old)));
  const Var<Scalar> adv = tape.constant(batch.advantages);
  const Var<Scalar> mask = tape.constant(batch.mask);

  const Var<Scalar> unclipped = diff::mul(ratio, adv);
  const Var<Scalar> clipped = diff::mul(diff::clip(ratio, Scalar(1) - eps, Scalar(1) + eps), adv);
  const Var<Scalar> surrogate =
      diff::scale(diff::sum(diff::mul(diff::min(unclipped, clipped), mask)), inv_n);

  const Var<Scalar> value_err = diff::sub(net_out.values, tape.constant(batch.returns));
  const Var<Scalar> value_loss = diff::scale(diff::sum(diff::mul(diff::square(value_err), mask)), inv_n);

  const Var<Scalar> probs = diff::softmax(net_out.logits);
  const Var<Scalar> per_sample_entropy = diff::neg(diff::col_sum(diff::mul(probs, log_probs)));
  const Var<Scalar> entropy = diff::scale(diff::sum(diff::mul(per_sample_entropy, mask)), inv_n);

  const Var<Scalar> objective =
      diff::add(diff::sub(surrogate, diff::scale(value_loss, static_cast<Scalar>(cfg.c1))),
                diff::scale(entropy, static_cast<Scalar>(cfg.c2)));
  LossResult<Scalar> res{diff::neg(objective), {}};

  res.parts.surrogate = static_cast<double>(diff::item(surrogate));
  res.parts.value = static_cast<double>(diff::item(value_loss));
  res.parts.entropy = static_cast<double>(diff::item(entropy));
  res.parts.total = static_cast<double>(diff::item(res.loss));
  double kl = 0.0;
  int clipped_count = 0;
  double max_dev = 0.0;
  const auto& r = ratio.value();
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    if (batch.mask(0, j) == Scalar(0)) continue;
    const double rj = static_cast<double>(r(0, j));
    kl += (rj - 1.0) - std::log(rj);
    if (std::abs(rj - 1.0) > cfg.clip_eps) ++clipped_count;
    max_dev = std::max(max_dev, std::abs(rj - 1.0));
  }
  res.parts.approx_kl = kl / batch.valid;
  res.parts.clip_fraction = static_cast<double>(clipped_count) / batch.valid;
  res.parts.max_ratio_deviation = max_dev;
  return res;
}

template LossResult<float> ppo_loss<float>(diff::Tape<float>&, const net::NetVars<float>&,
                                           const net::ModelConfig&, const Minibatch<float>&,
                                           const PpoConfig&);
template LossResult<double> ppo_loss<double>(diff::Tape<double>&, const net::NetVars<double>&,
                                             const net::ModelConfig&, const Minibatch<double>&,
                                             const PpoConfig&);

bool Curriculum::on_reset() {
  resets += 1;
  if (resets % period != 0 || size <= 1) return false;
  current = (current + 1) % size;
  return true;
}

Trainer::Trainer(EnvConfig env, net::ModelConfig model, PpoConfig cfg, Suite curriculum,
                 std::uint64_t seed)
    : env_(std::move(env)),
      model_(std::move(model)),
      cfg_(cfg),
      suite_(std::move(curriculum)),
      params_(net::init_params<Real>(model_)),
      rng_(seed) {
  env_.validate();
  cfg_.validate();
  if (model_.obs_dim != observation_size(env_)) {
    throw ConfigError("model.obs_dim " + std::to_string(model_.obs_dim) + " does not match " +
                      std::string(to_string(env_.mode)) + " mode observation size " +
                      std::to_string(observation_size(env_)));
  }
  if (suite_.scenarios.empty()) throw ConfigError("training curriculum is empty");
  for (const auto& s : suite_.scenarios) {
    if (static_cast<int>(s.spawns.size()) != env_.drone_count()) {
      throw ConfigError("scenario on map '" + s.map_id + "' has " + std::to_string(s.spawns.size()) +
                        " spawn(s); mode needs " + std::to_string(env_.drone_count()));
    }
  }
  workers_.resize(static_cast<std::size_t>(cfg_.n_workers));
  for (std::size_t w = 0; w < workers_.size(); ++w) {
    workers_[w].curriculum = Curriculum{suite_.scenarios.size(), cfg_.switch_period,
                                        w * suite_.scenarios.size() / workers_.size(), 0};
    start_episode(workers_[w]);
  }
}

void Trainer::set_params(diff::ParamStore<Real> params) {
  if (params.parameter_count() != params_.parameter_count()) {
    throw ConfigError("parameter layout does not match the model configuration");
  }
  params_ = std::move(params);
}

void Trainer::start_episode(Worker& w) {
  const ScenarioInstance& s = suite_.scenarios[w.curriculum.current];
  w.env = reset(env_, suite_.grid_for(s), s.spawns, s.seed);
  const int n = env_.drone_count();
  w.hidden = net::HiddenState<Real>::zeros(model_.lstm_hidden, n);
  w.episode_reward.assign(static_cast<std::size_t>(n), 0.0);
  w.episode_length = 0;
}

RolloutBuffer Trainer::collect() {
  const int drones = env_.drone_count();
  const int n_streams = cfg_.n_workers * drones;
  const int horizon = cfg_.rollout_len;
  const int hid = model_.lstm_hidden;

  RolloutBuffer buf;
  buf.streams.resize(static_cast<std::size_t>(n_streams));
  std::vector<net::HiddenState<Real>> hidden_before(static_cast<std::size_t>(n_streams));
  for (int s = 0; s < n_streams; ++s) {
    auto& st = buf.streams[static_cast<std::size_t>(s)];
    st.obs.resize(model_.obs_dim, horizon);
    hidden_before[static_cast<std::size_t>(s)] = net::HiddenState<Real>::zeros(hid, horizon);
  }

  Mat obs(model_.obs_dim, n_streams);
  net::HiddenState<Real> hidden = net::HiddenState<Real>::zeros(hid, n_streams);
  auto gather_inputs = [&] {
    for (int w = 0; w < cfg_.n_workers; ++w) {
      const Worker& wk = workers_[static_cast<std::size_t>(w)];
      for (int d = 0; d < drones; ++d) {
        const int s = w * drones + d;
        Eigen::VectorXf o(model_.obs_dim);
        observe_into(wk.env, d, o);
        obs.col(s) = o;
        hidden.h.col(s) = wk.hidden.h.col(d);
        hidden.c.col(s) = wk.hidden.c.col(d);
      }
    }
  };

  std::vector<Direction> actions(static_cast<std::size_t>(drones));
  for (int t = 0; t < horizon; ++t) {
    gather_inputs();
    const auto out = net::forward(params_, model_, obs, hidden);
    for (int w = 0; w < cfg_.n_workers; ++w) {
      Worker& wk = workers_[static_cast<std::size_t>(w)];
      for (int d = 0; d < drones; ++d) {
        const int s = w * drones + d;
        auto& st = buf.streams[static_cast<std::size_t>(s)];
        const auto pick = net::sample_action(out.logits.col(s), rng_);
        st.obs.col(t) = obs.col(s);
        st.actions.push_back(pick.action);
        st.log_prob_old.push_back(static_cast<Real>(pick.log_prob));
        st.value_old.push_back(out.value(0, s));
        hidden_before[static_cast<std::size_t>(s)].h.col(t) = hidden.h.col(s);
        hidden_before[static_cast<std::size_t>(s)].c.col(t) = hidden.c.col(s);
        actions[static_cast<std::size_t>(d)] = static_cast<Direction>(pick.action);
        wk.hidden.h.col(d) = out.next_hidden.h.col(s);
        wk.hidden.c.col(d) = out.next_hidden.c.col(s);
      }
      const StepOutcome outcome = step(wk.env, actions);
      wk.episode_length += 1;
      for (int d = 0; d < drones; ++d) {
        auto& st = buf.streams[static_cast<std::size_t>(w * drones + d)];
        st.reward.push_back(outcome.rewards[static_cast<std::size_t>(d)]);
        st.done.push_back(outcome.episode_terminal ? 1 : 0);
        wk.episode_reward[static_cast<std::size_t>(d)] += outcome.rewards[static_cast<std::size_t>(d)];
      }
      if (outcome.episode_terminal) {
        for (double r : wk.episode_reward) {
          recent_rewards_.push_back(r);
          if (recent_rewards_.size() > kStatsWindow) recent_rewards_.pop_front();
        }
        recent_lengths_.push_back(wk.episode_length);
        if (recent_lengths_.size() > kStatsWindow) recent_lengths_.pop_front();
        wk.curriculum.on_reset();
        start_episode(wk);
      }
    }
    env_steps_ += cfg_.n_workers;
  }

  gather_inputs();
  const auto tail = net::forward(params_, model_, obs, hidden);
  for (int s = 0; s < n_streams; ++s) buf.streams[static_cast<std::size_t>(s)].bootstrap_value = tail.value(0, s);

  buf.chunks = make_chunks(buf.streams, hidden_before, cfg_.chunk_len);
  return buf;
}

TrainStats Trainer::optimize(RolloutBuffer& buffer) {
  compute_advantages(buffer, cfg_);
  std::vector<int> order(buffer.chunks.size());
  std::iota(order.begin(), order.end(), 0);

  const diff::AdamConfig adam{cfg_.lr, cfg_.adam_beta1, cfg_.adam_beta2, cfg_.adam_eps};
  TrainStats stats;
  int minibatches = 0;
  for (int epoch = 0; epoch < cfg_.epochs; ++epoch) {
    shuffle(std::span<int>(order), rng_);
    for (std::size_t first = 0; first < order.size(); first += static_cast<std::size_t>(cfg_.minibatch_chunks)) {
      const std::size_t count = std::min(order.size() - first, static_cast<std::size_t>(cfg_.minibatch_chunks));
      const auto batch = assemble(buffer, std::span<const int>(order).subspan(first, count), model_.obs_dim);

      diff::Tape<Real> tape;
      const auto vars = net::bind_trainable(tape, params_, model_);
      const auto res = ppo_loss(tape, vars, model_, batch, cfg_);
      if (!std::isfinite(res.parts.total)) {
        std::ostringstream msg;
        msg << "non-finite PPO loss at update " << updates_ + 1 << ", epoch " << epoch
            << ": surrogate=" << res.parts.surrogate << " value=" << res.parts.value
            << " entropy=" << res.parts.entropy;
        throw NumericalError(msg.str());
      }
      params_.zero_grad();
      tape.backward(res.loss);
      diff::clip_grad_norm(params_, cfg_.max_grad_norm);
      diff::adam_step(params_, adam);

      if (minibatches == 0) {
        stats.first_max_ratio_deviation = res.parts.max_ratio_deviation;
        stats.first_clip_fraction = res.parts.clip_fraction;
      }
      stats.loss_clip += res.parts.surrogate;
      stats.loss_value += res.parts.value;
      stats.entropy += res.parts.entropy;
      stats.approx_kl += res.parts.approx_kl;
      stats.clip_fraction += res.parts.clip_fraction;
      ++minibatches;
    }
  }
  if (minibatches > 0) {
    const double n = minibatches;
    stats.loss_clip /= n;
    stats.loss_value /= n;
    stats.entropy /= n;
    stats.approx_kl /= n;
    stats.clip_fraction /= n;
  }
  updates_ += 1;
  stats.update = updates_;
  stats.env_steps = env_steps_;
  auto mean_of = [](const std::deque<double>& xs) {
    return xs.empty() ? 0.0 : std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  };
  stats.mean_episode_reward = mean_of(recent_rewards_);
  stats.mean_episode_length = mean_of(recent_lengths_);
  return stats;
}

TrainStats Trainer::run_update() {
  RolloutBuffer buffer = collect();
  return optimize(buffer);
}

namespace {

constexpr std::uint32_t kStateTag = 0x54535452;  // "RTST"

void put_env(std::ostream& out, const EnvState& s) {
  io::put_i32(out, s.map.width());
  io::put_i32(out, s.map.height());
  for (CellState c : s.map.cells()) io::put_u8(out, static_cast<std::uint8_t>(c));
  io::put_i32(out, s.map.target.x);
  io::put_i32(out, s.map.target.y);
  io::put_u32(out, static_cast<std::uint32_t>(s.drones.size()));
  for (const auto& d : s.drones) {
    io::put_i32(out, d.id);
    io::put_i32(out, d.position.x);
    io::put_i32(out, d.position.y);
    io::put_f64(out, d.best_distance_so_far);
  }
  io::put_i32(out, s.step_count);
  io::put_u8(out, s.terminal ? 1 : 0);
  io::put_u8(out, s.target_reached ? 1 : 0);
  io::put_i32(out, s.reacher);
  io::put_u64(out, s.seed);
}

EnvState get_env(std::istream& in, const EnvConfig& cfg) {
  EnvState s;
  s.config = cfg;
  const int w = io::get_i32(in);
  const int h = io::get_i32(in);
  if (w <= 0 || h <= 0 || w > 4096 || h > 4096) throw io::FormatError("bad map size in trainer state");
  s.map = GridMap(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const auto c = io::get_u8(in);
      if (c > 4) throw io::FormatError("bad cell state in trainer state");
      s.map.set({x, y}, static_cast<CellState>(c));
    }
  }
  s.map.target.x = io::get_i32(in);
  s.map.target.y = io::get_i32(in);
  s.signal = SignalModel{s.map.target, cfg.r1, cfg.r2, cfg.r3, cfg.max_signal_reward};
  const auto n = io::get_u32(in);
  if (n != static_cast<std::uint32_t>(cfg.drone_count())) throw io::FormatError("drone count mismatch in trainer state");
  for (std::uint32_t i = 0; i < n; ++i) {
    DroneState d;
    d.id = io::get_i32(in);
    d.position.x = io::get_i32(in);
    d.position.y = io::get_i32(in);
    d.best_distance_so_far = io::get_f64(in);
    s.drones.push_back(d);
  }
  s.step_count = io::get_i32(in);
  s.terminal = io::get_u8(in) != 0;
  s.target_reached = io::get_u8(in) != 0;
  s.reacher = io::get_i32(in);
  s.seed = io::get_u64(in);
  return s;
}

void put_deque(std::ostream& out, const std::deque<double>& xs) {
  io::put_u32(out, static_cast<std::uint32_t>(xs.size()));
  for (double x : xs) io::put_f64(out, x);
}

std::deque<double> get_deque(std::istream& in) {
  const auto n = io::get_u32(in);
  if (n > kStatsWindow) throw io::FormatError("stats window too long in trainer state");
  std::deque<double> xs;
  for (std::uint32_t i = 0; i < n; ++i) xs.push_back(io::get_f64(in));
  return xs;
}

}  // namespace

void Trainer::save_state(std::ostream& out) const {
  io::put_u32(out, kStateTag);
  io::put_i64(out, env_steps_);
  io::put_i32(out, updates_);
  std::ostringstream rng_text;
  rng_text << rng_;
  io::put_string(out, rng_text.str());
  io::put_u32(out, static_cast<std::uint32_t>(suite_.scenarios.size()));
  io::put_u32(out, static_cast<std::uint32_t>(workers_.size()));
  for (const Worker& w : workers_) {
    put_env(out, w.env);
    io::put_u64(out, w.curriculum.current);
    io::put_i32(out, w.curriculum.resets);
    io::put_matrix(out, w.hidden.h);
    io::put_matrix(out, w.hidden.c);
    io::put_u32(out, static_cast<std::uint32_t>(w.episode_reward.size()));
    for (double r : w.episode_reward) io::put_f64(out, r);
    io::put_i32(out, w.episode_length);
  }
  put_deque(out, recent_rewards_);
  put_deque(out, recent_lengths_);
}

void Trainer::load_state(std::istream& in) {
  if (io::get_u32(in) != kStateTag) throw io::FormatError("trainer state tag missing");
  env_steps_ = io::get_i64(in);
  updates_ = io::get_i32(in);
  std::istringstream rng_text(io::get_string(in));
  rng_text >> rng_;
  if (!rng_text) throw io::FormatError("bad rng state");
  if (io::get_u32(in) != suite_.scenarios.size()) {
    throw ConfigError("resume: curriculum size differs from the checkpointed run");
  }
  if (io::get_u32(in) != workers_.size()) {
    throw ConfigError("resume: ppo.n_workers differs from the checkpointed run");
  }
  for (Worker& w : workers_) {
    w.env = get_env(in, env_);
    w.curriculum.current = static_cast<std::size_t>(io::get_u64(in));
    w.curriculum.resets = io::get_i32(in);
    if (w.curriculum.current >= suite_.scenarios.size()) throw io::FormatError("bad scenario index");
    w.hidden.h = io::get_matrix<Real>(in);
    w.hidden.c = io::get_matrix<Real>(in);
    const auto n = io::get_u32(in);
    if (n != static_cast<std::uint32_t>(env_.drone_count())) throw io::FormatError("drone count mismatch");
    w.episode_reward.assign(n, 0.0);
    for (auto& r : w.episode_reward) r = io::get_f64(in);
    w.episode_length = io::get_i32(in);
  }
  recent_rewards_ = get_deque(in);
  recent_lengths_ = get_deque(in);
}

}  // namespace dronerl::ppo
