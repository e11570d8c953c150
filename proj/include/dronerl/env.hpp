#pragma once

// Grid-world target search for one or more drones that share a single
// exploration map. Sensing is limited to the eight neighbouring cells and a
// coarse signal section around the hidden target.

#include <Eigen/Core>

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace dronerl {

enum class CellState : std::uint8_t {
  Unknown = 0,
  Obstacle = 1,
  VisitedOnce = 2,
  VisitedTwice = 3,
  VisitedThriceOrMore = 4,
};

inline constexpr int code(CellState s) { return static_cast<int>(s); }

/// Next visit state; saturates at VisitedThriceOrMore, Obstacle is fixed.
CellState visited(CellState s);

struct Position {
  int x = 0;
  int y = 0;

  friend auto operator<=>(const Position&, const Position&) = default;
};

/// Row index y grows southwards.
enum class Direction : std::uint8_t { N, NE, E, SE, S, SW, W, NW };

inline constexpr int kNumDirections = 8;

inline constexpr std::array<Position, kNumDirections> kDirectionOffsets = {{
    {0, -1}, {1, -1}, {1, 0}, {1, 1}, {0, 1}, {-1, 1}, {-1, 0}, {-1, -1},
}};

inline Position step_towards(Position p, Direction d) {
  const Position o = kDirectionOffsets[static_cast<std::size_t>(d)];
  return {p.x + o.x, p.y + o.y};
}

double distance(Position a, Position b);
int chebyshev(Position a, Position b);

class GridMap {
 public:
  GridMap() = default;
  GridMap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  bool in_bounds(Position p) const {
    return p.x >= 0 && p.y >= 0 && p.x < width_ && p.y < height_;
  }

  /// Anything outside the grid reads as Obstacle.
  CellState at(Position p) const;
  void set(Position p, CellState s);
  bool blocked(Position p) const { return at(p) == CellState::Obstacle; }

  std::span<const CellState> cells() const { return cells_; }
  int count(CellState s) const;

  /// Hidden from agents; read by the signal model and the terminal check.
  Position target;

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<CellState> cells_;
};

enum class Section : std::uint8_t { NoSignal = 0, Section3 = 1, Section2 = 2, Section1 = 3 };

/// Observation encoding of a section: 0, 1/3, 2/3, 1.
inline float section_strength(Section s) { return static_cast<float>(s) / 3.0f; }

struct SignalModel {
  Position center;
  double r1 = 1.0;
  double r2 = 3.0;
  double r3 = 6.0;
  double max_signal_reward = 250.0;

  void validate() const;
  friend bool operator==(const SignalModel&, const SignalModel&) = default;
};

/// Concentric classification; a distance on a boundary belongs to the
/// stronger section.
Section signal_section(double d, const SignalModel& model);

struct DroneState {
  int id = 0;
  Position position;
  /// Closest approach to the target this episode; never increases.
  double best_distance_so_far = 0.0;

  friend bool operator==(const DroneState&, const DroneState&) = default;
};

namespace reward {
inline constexpr double kUnknown = 2.0;
inline constexpr double kObstacle = -50.0;
inline constexpr double kVisitedOnce = 0.0;
inline constexpr double kVisitedTwice = -1.0;
inline constexpr double kVisitedThriceOrMore = -4.0;
inline constexpr double kNeighbor = -2.0;
inline constexpr double kCollision = -50.0;
inline constexpr double kTargetReached = 1000.0;
}  // namespace reward

/// Reward for entering a cell, given its state before the visit.
double cell_reward(CellState s);

/// Shaping reward paid only when the drone strictly improves its closest
/// approach while inside the weak-signal radius:
///   max * (1 - d/r3)^2 * (best - d) / r3, clamped to [0, max].
/// Updates drone.best_distance_so_far when paid.
double signal_reward(DroneState& drone, double d_new, const SignalModel& model);

enum class Mode : std::uint8_t { Single, Multi };

std::string_view to_string(Mode m);
Mode parse_mode(std::string_view s);

struct EnvConfig {
  Mode mode = Mode::Single;
  int n_drones = 2;  // used in Multi mode only
  int max_steps = 400;
  double r1 = 1.0;
  double r2 = 3.0;
  double r3 = 6.0;
  double max_signal_reward = 250.0;
  int neighbor_detect_radius = 5;
  std::uint64_t rng_seed = 0;

  int drone_count() const { return mode == Mode::Single ? 1 : n_drones; }
  void validate() const;
  friend bool operator==(const EnvConfig&, const EnvConfig&) = default;
};

inline constexpr int kBaseObservationSize = 17;
inline constexpr int kNeighborQuadrants = 4;

int observation_size(Mode mode);
inline int observation_size(const EnvConfig& cfg) { return observation_size(cfg.mode); }

using ObservationVector = Eigen::VectorXf;

struct DroneStepInfo {
  bool blocked = false;
  bool collided = false;
  bool neighbor_nearby = false;
  bool reached_target = false;
  Section section = Section::NoSignal;
  double signal_reward = 0.0;
};

struct StepOutcome {
  std::vector<double> rewards;
  std::vector<bool> drone_terminal;
  bool episode_terminal = false;
  std::vector<DroneStepInfo> info;
};

struct EnvState {
  EnvConfig config;
  GridMap map;
  SignalModel signal;
  std::vector<DroneState> drones;
  int step_count = 0;
  bool terminal = false;
  bool target_reached = false;
  int reacher = -1;
  std::uint64_t seed = 0;

  friend bool operator==(const EnvState&, const EnvState&) = default;
};

/// Starts an episode. `map` supplies obstacles and the target; every other
/// cell is reset to Unknown and the spawn cells are marked visited once.
EnvState reset(const EnvConfig& config, const GridMap& map, std::span<const Position> spawns,
               std::uint64_t seed);

/// Advances all drones simultaneously, one action per drone.
StepOutcome step(EnvState& state, std::span<const Direction> actions);

ObservationVector observe(const EnvState& state, int drone_id);

/// Writes the observation of `drone_id` into `out` (length observation_size).
void observe_into(const EnvState& state, int drone_id, Eigen::Ref<Eigen::VectorXf> out);

}  // namespace dronerl
