#pragma once

// Evaluation protocol: fixed scenario suites, success rate h/n and average
// steps over successful episodes.

#include "dronerl/env.hpp"
#include "dronerl/mapgen.hpp"
#include "dronerl/net.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dronerl::eval {

enum class PolicyMode : std::uint8_t { Greedy, Stochastic };

struct EvalPolicy {
  PolicyMode mode = PolicyMode::Greedy;
  std::uint64_t seed = 0;
};

enum class TerminalCause : std::uint8_t { TargetReached, StepLimit };

struct EpisodeResult {
  bool success = false;
  int steps = 0;
  int reacher = -1;
  TerminalCause cause = TerminalCause::StepLimit;
  /// Cells per visit state at episode end, indexed by CellState code.
  std::array<int, 5> cell_counts{};
};

/// Called after reset (outcome == nullptr) and after every step.
using StepObserver = std::function<void(const EnvState&, const StepOutcome*)>;

/// Rolls one episode with the network policy from zero hidden states.
/// `max_steps` overrides env.max_steps; 0 yields an episode without moves.
EpisodeResult run_episode(const Suite& suite, const ScenarioInstance& scenario,
                          const diff::ParamStore<float>& params, const net::ModelConfig& model,
                          const EnvConfig& env, EvalPolicy policy, int max_steps,
                          const StepObserver& observer = {});

/// Uniform choice among directions whose destination is not an obstacle.
EpisodeResult baseline_random(const Suite& suite, const ScenarioInstance& scenario,
                              const EnvConfig& env, std::uint64_t seed, int max_steps,
                              const StepObserver& observer = {});

/// h / n. Throws UsageError on an empty list.
double success_rate(std::span<const EpisodeResult> results);
int success_count(std::span<const EpisodeResult> results);

/// Total steps of successful episodes over their count; empty when none.
std::optional<double> average_steps(std::span<const EpisodeResult> results);

struct SuiteReport {
  std::string checkpoint_id;
  std::vector<EpisodeResult> results;
  int successes = 0;
  double success_rate = 0.0;
  std::optional<double> average_steps;
};

SuiteReport evaluate(const Suite& suite, const diff::ParamStore<float>& params,
                     const net::ModelConfig& model, const EnvConfig& env, EvalPolicy policy,
                     std::string checkpoint_id = {});

SuiteReport evaluate_random(const Suite& suite, const EnvConfig& env, std::uint64_t seed);

struct CurvePoint {
  std::int64_t env_steps = 0;
  int successes = 0;
  int scenarios = 0;
  double success_rate = 0.0;
  std::optional<double> average_steps;
};

/// Success count per checkpoint, ordered by checkpoint step.
struct CheckpointRef {
  std::int64_t env_steps = 0;
  std::string id;
};

std::vector<CurvePoint> sweep_checkpoints(
    std::vector<CheckpointRef> checkpoints,
    const std::function<SuiteReport(const CheckpointRef&)>& evaluate_one);

}  // namespace dronerl::eval
