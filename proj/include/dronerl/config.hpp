#pragma once

// Run configuration: defaults, then a flat "key = value" file with optional
// [section] headers, then command-line overrides. Later sources win.
//
//   [env]
//   mode = multi
//   max_steps = 200
//   [ppo]
//   total_env_steps = 500000
//
// is equivalent to the keys env.mode, env.max_steps, ppo.total_env_steps.

#include "dronerl/env.hpp"
#include "dronerl/net.hpp"
#include "dronerl/ppo.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace dronerl {

struct RunConfig {
  EnvConfig env;
  net::ModelConfig model;
  ppo::PpoConfig ppo;

  std::string maps_dir = "data/suite/maps";
  /// Empty resolves to the suite file of the configured mode.
  std::string scenarios;
  std::string out_dir = "runs/default";
  std::uint64_t seed = 0;
  /// Checkpoint cadence in updates; the final update is always saved.
  int checkpoint_every = 10;

  /// Applies one setting; unknown keys and bad values raise ConfigError
  /// naming the key.
  void set(std::string_view key, std::string_view value);

  /// Derived fields (model.obs_dim) and cross-field checks.
  void resolve();

  std::vector<std::string> keys() const;
  std::string get(std::string_view key) const;
};

void apply_config_text(RunConfig& cfg, std::string_view text);
void apply_config_file(RunConfig& cfg, const std::filesystem::path& path);

/// Every key with its resolved value, in the file grammar.
std::string to_config_text(const RunConfig& cfg);

}  // namespace dronerl
