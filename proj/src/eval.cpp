#include "dronerl/eval.hpp"

#include "dronerl/errors.hpp"
#include "dronerl/random.hpp"

#include <algorithm>

namespace dronerl::eval {

namespace {

// Runs an episode with a per-step action chooser.
template <typename Choose>
EpisodeResult roll(const Suite& suite, const ScenarioInstance& scenario, const EnvConfig& env,
                   int max_steps, const StepObserver& observer, Choose&& choose) {
  if (max_steps < 0) throw UsageError("max_steps must be >= 0");
  EnvConfig cfg = env;
  cfg.max_steps = std::max(max_steps, 1);
  EnvState state = reset(cfg, suite.grid_for(scenario), scenario.spawns, scenario.seed);
  if (observer) observer(state, nullptr);

  std::vector<Direction> actions(state.drones.size());
  while (max_steps > 0 && !state.terminal) {
    choose(state, actions);
    const StepOutcome outcome = step(state, actions);
    if (observer) observer(state, &outcome);
  }
  EpisodeResult r;
  r.success = state.target_reached;
  r.steps = state.step_count;
  r.reacher = state.reacher;
  r.cause = state.target_reached ? TerminalCause::TargetReached : TerminalCause::StepLimit;
  for (CellState c : state.map.cells()) r.cell_counts[static_cast<std::size_t>(code(c))] += 1;
  return r;
}

}  // namespace

EpisodeResult run_episode(const Suite& suite, const ScenarioInstance& scenario,
                          const diff::ParamStore<float>& params, const net::ModelConfig& model,
                          const EnvConfig& env, EvalPolicy policy, int max_steps,
                          const StepObserver& observer) {
  if (model.obs_dim != observation_size(env)) {
    throw UsageError("checkpoint expects " + std::to_string(model.obs_dim) +
                     " observation inputs but " + std::string(to_string(env.mode)) +
                     " mode provides " + std::to_string(observation_size(env)));
  }
  const int drones = env.drone_count();
  Rng rng(policy.seed);
  auto hidden = net::HiddenState<float>::zeros(model.lstm_hidden, drones);
  diff::Matrix<float> obs(model.obs_dim, drones);
  Eigen::VectorXf column(model.obs_dim);
  return roll(suite, scenario, env, max_steps, observer,
              [&](const EnvState& state, std::vector<Direction>& actions) {
                for (int d = 0; d < drones; ++d) {
                  observe_into(state, d, column);
                  obs.col(d) = column;
                }
                auto out = net::forward(params, model, obs, hidden);
                for (int d = 0; d < drones; ++d) {
                  const int a = policy.mode == PolicyMode::Greedy
                                    ? net::greedy_action(out.logits.col(d))
                                    : net::sample_action(out.logits.col(d), rng).action;
                  actions[static_cast<std::size_t>(d)] = static_cast<Direction>(a);
                }
                hidden = std::move(out.next_hidden);
              });
}

EpisodeResult baseline_random(const Suite& suite, const ScenarioInstance& scenario,
                              const EnvConfig& env, std::uint64_t seed, int max_steps,
                              const StepObserver& observer) {
  Rng rng(seed);
  return roll(suite, scenario, env, max_steps, observer,
              [&](const EnvState& state, std::vector<Direction>& actions) {
                for (std::size_t d = 0; d < state.drones.size(); ++d) {
                  std::vector<Direction> legal;
                  for (int k = 0; k < kNumDirections; ++k) {
                    const auto dir = static_cast<Direction>(k);
                    if (!state.map.blocked(step_towards(state.drones[d].position, dir))) legal.push_back(dir);
                  }
                  actions[d] = legal.empty() ? Direction::N : legal[uniform_below(rng, legal.size())];
                }
              });
}

int success_count(std::span<const EpisodeResult> results) {
  return static_cast<int>(std::count_if(results.begin(), results.end(),
                                        [](const EpisodeResult& r) { return r.success; }));
}

double success_rate(std::span<const EpisodeResult> results) {
  if (results.empty()) throw UsageError("success_rate of an empty suite");
  return static_cast<double>(success_count(results)) / static_cast<double>(results.size());
}

std::optional<double> average_steps(std::span<const EpisodeResult> results) {
  double total = 0.0;
  int successes = 0;
  for (const auto& r : results) {
    if (!r.success) continue;
    total += r.steps;
    ++successes;
  }
  if (successes == 0) return std::nullopt;
  return total / successes;
}

namespace {

SuiteReport summarize(std::vector<EpisodeResult> results, std::string id) {
  SuiteReport rep;
  rep.checkpoint_id = std::move(id);
  rep.results = std::move(results);
  rep.successes = success_count(rep.results);
  rep.success_rate = success_rate(rep.results);
  rep.average_steps = average_steps(rep.results);
  return rep;
}

}  // namespace

SuiteReport evaluate(const Suite& suite, const diff::ParamStore<float>& params,
                     const net::ModelConfig& model, const EnvConfig& env, EvalPolicy policy,
                     std::string checkpoint_id) {
  std::vector<EpisodeResult> results;
  for (std::size_t i = 0; i < suite.scenarios.size(); ++i) {
    EvalPolicy p = policy;
    p.seed = policy.seed + i;
    results.push_back(run_episode(suite, suite.scenarios[i], params, model, env, p, env.max_steps));
  }
  return summarize(std::move(results), std::move(checkpoint_id));
}

SuiteReport evaluate_random(const Suite& suite, const EnvConfig& env, std::uint64_t seed) {
  std::vector<EpisodeResult> results;
  for (std::size_t i = 0; i < suite.scenarios.size(); ++i) {
    results.push_back(baseline_random(suite, suite.scenarios[i], env, seed * 1000003u + i, env.max_steps));
  }
  return summarize(std::move(results), "random");
}

std::vector<CurvePoint> sweep_checkpoints(
    std::vector<CheckpointRef> checkpoints,
    const std::function<SuiteReport(const CheckpointRef&)>& evaluate_one) {
  if (checkpoints.empty()) throw UsageError("sweep needs at least one checkpoint");
  std::stable_sort(checkpoints.begin(), checkpoints.end(),
                   [](const CheckpointRef& a, const CheckpointRef& b) { return a.env_steps < b.env_steps; });
  std::vector<CurvePoint> curve;
  for (const auto& ref : checkpoints) {
    const SuiteReport rep = evaluate_one(ref);
    curve.push_back(CurvePoint{ref.env_steps, rep.successes, static_cast<int>(rep.results.size()),
                               rep.success_rate, rep.average_steps});
  }
  return curve;
}

}  // namespace dronerl::eval
