#pragma once

// Versioned binary checkpoints.
//
//   magic "DRONERL\0" | u32 version | u64 payload length | payload | u32 CRC-32
//
// All numbers are little-endian; floats are stored as their IEEE-754 bits, so
// a save/load round trip is bit-exact. The CRC covers everything before it.

#include "dronerl/binary_io.hpp"
#include "dronerl/diff.hpp"
#include "dronerl/env.hpp"
#include "dronerl/net.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

namespace dronerl::ppo {
class Trainer;
}

namespace dronerl::ckpt {

inline constexpr std::uint32_t kFormatVersion = 1;

class ChecksumError : public io::FormatError {
 public:
  using io::FormatError::FormatError;
};

class VersionError : public io::FormatError {
 public:
  using io::FormatError::FormatError;
};

struct Checkpoint {
  net::ModelConfig model;
  Mode mode = Mode::Single;
  diff::ParamStore<float> params;
  std::int64_t env_steps = 0;
  int update = 0;
  /// Opaque trainer state for exact resume; absent in export-only files.
  std::optional<std::string> trainer_state;
};

std::string encode(const Checkpoint& c);
Checkpoint decode(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

Checkpoint snapshot(const ppo::Trainer& trainer);
/// Loads weights, optimizer moments and, when present, the trainer state.
void restore(ppo::Trainer& trainer, const Checkpoint& c);

}  // namespace dronerl::ckpt
