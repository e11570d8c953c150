#include "dronerl/env.hpp"

#include "dronerl/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>

namespace dronerl {

CellState visited(CellState s) {
  switch (s) {
    case CellState::Unknown:
      return CellState::VisitedOnce;
    case CellState::VisitedOnce:
      return CellState::VisitedTwice;
    case CellState::VisitedTwice:
    case CellState::VisitedThriceOrMore:
      return CellState::VisitedThriceOrMore;
    case CellState::Obstacle:
      return CellState::Obstacle;
  }
  return s;
}

double distance(Position a, Position b) {
  return std::hypot(static_cast<double>(a.x - b.x), static_cast<double>(a.y - b.y));
}

int chebyshev(Position a, Position b) {
  return std::max(std::abs(a.x - b.x), std::abs(a.y - b.y));
}

GridMap::GridMap(int width, int height) : width_(width), height_(height) {
  if (width <= 0 || height <= 0) {
    throw ConfigError("grid dimensions must be positive, got " + std::to_string(width) + "x" +
                      std::to_string(height));
  }
  cells_.assign(static_cast<std::size_t>(width) * static_cast<std::size_t>(height),
                CellState::Unknown);
}

CellState GridMap::at(Position p) const {
  if (!in_bounds(p)) return CellState::Obstacle;
  return cells_[static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width_) +
                static_cast<std::size_t>(p.x)];
}

void GridMap::set(Position p, CellState s) {
  if (!in_bounds(p)) throw UsageError("GridMap::set out of bounds");
  cells_[static_cast<std::size_t>(p.y) * static_cast<std::size_t>(width_) +
         static_cast<std::size_t>(p.x)] = s;
}

int GridMap::count(CellState s) const {
  return static_cast<int>(std::count(cells_.begin(), cells_.end(), s));
}

void SignalModel::validate() const {
  if (!(0.0 < r1 && r1 < r2 && r2 < r3)) {
    throw ConfigError("signal radii must satisfy 0 < r1 < r2 < r3, got r1=" + std::to_string(r1) +
                      " r2=" + std::to_string(r2) + " r3=" + std::to_string(r3));
  }
  if (!(max_signal_reward >= 0.0)) throw ConfigError("max_signal_reward must be >= 0");
}

Section signal_section(double d, const SignalModel& model) {
  if (d <= model.r1) return Section::Section1;
  if (d <= model.r2) return Section::Section2;
  if (d <= model.r3) return Section::Section3;
  return Section::NoSignal;
}

double cell_reward(CellState s) {
  switch (s) {
    case CellState::Unknown:
      return reward::kUnknown;
    case CellState::Obstacle:
      return reward::kObstacle;
    case CellState::VisitedOnce:
      return reward::kVisitedOnce;
    case CellState::VisitedTwice:
      return reward::kVisitedTwice;
    case CellState::VisitedThriceOrMore:
      return reward::kVisitedThriceOrMore;
  }
  return 0.0;
}

double signal_reward(DroneState& drone, double d_new, const SignalModel& model) {
  if (!(d_new < drone.best_distance_so_far) || d_new > model.r3) return 0.0;
  const double closeness = 1.0 - d_new / model.r3;
  const double gain = (drone.best_distance_so_far - d_new) / model.r3;
  drone.best_distance_so_far = d_new;
  return std::clamp(model.max_signal_reward * closeness * closeness * gain, 0.0,
                    model.max_signal_reward);
}

std::string_view to_string(Mode m) { return m == Mode::Single ? "single" : "multi"; }

Mode parse_mode(std::string_view s) {
  if (s == "single") return Mode::Single;
  if (s == "multi") return Mode::Multi;
  throw ConfigError("mode must be 'single' or 'multi', got '" + std::string(s) + "'");
}

void EnvConfig::validate() const {
  if (max_steps <= 0) throw ConfigError("env.max_steps must be positive");
  if (mode == Mode::Multi && n_drones < 2) throw ConfigError("env.n_drones must be >= 2 in multi mode");
  if (neighbor_detect_radius < 1) throw ConfigError("env.neighbor_detect_radius must be >= 1");
  SignalModel{{}, r1, r2, r3, max_signal_reward}.validate();
}

int observation_size(Mode mode) {
  return mode == Mode::Single ? kBaseObservationSize : kBaseObservationSize + kNeighborQuadrants;
}

namespace {

std::string describe(Position p) {
  return "(" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
}

// Quadrants NE, NW, SW, SE with "up" as positive dy. Points on an axis go to
// the quadrant counter-clockwise of that axis.
int quadrant(Position self, Position other) {
  const int dx = other.x - self.x;
  const int dy = self.y - other.y;
  if (dx > 0 && dy >= 0) return 0;
  if (dx <= 0 && dy > 0) return 1;
  if (dx < 0 && dy <= 0) return 2;
  return 3;
}

bool has_neighbor(const EnvState& state, std::size_t i) {
  for (std::size_t j = 0; j < state.drones.size(); ++j) {
    if (j != i && chebyshev(state.drones[i].position, state.drones[j].position) <=
                      state.config.neighbor_detect_radius) {
      return true;
    }
  }
  return false;
}

}  // namespace

EnvState reset(const EnvConfig& config, const GridMap& map, std::span<const Position> spawns,
               std::uint64_t seed) {
  config.validate();
  EnvState s;
  s.config = config;
  s.seed = seed;
  s.map = map;
  s.signal = SignalModel{map.target, config.r1, config.r2, config.r3, config.max_signal_reward};

  if (!map.in_bounds(map.target)) throw ConfigError("target " + describe(map.target) + " is out of bounds");
  if (map.blocked(map.target)) throw ConfigError("target " + describe(map.target) + " is an obstacle");
  if (static_cast<int>(spawns.size()) != config.drone_count()) {
    throw ConfigError("expected " + std::to_string(config.drone_count()) + " spawn(s), got " +
                      std::to_string(spawns.size()));
  }

  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (!s.map.blocked({x, y})) s.map.set({x, y}, CellState::Unknown);
    }
  }

  for (std::size_t i = 0; i < spawns.size(); ++i) {
    const Position p = spawns[i];
    if (!map.in_bounds(p)) throw ConfigError("spawn " + describe(p) + " is out of bounds");
    if (map.blocked(p)) throw ConfigError("spawn " + describe(p) + " is an obstacle");
    const double d = distance(p, map.target);
    if (signal_section(d, s.signal) == Section::Section1) {
      throw ConfigError("spawn " + describe(p) + " lies inside the target section");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (spawns[j] == p) throw ConfigError("spawn " + describe(p) + " is used twice");
    }
    s.drones.push_back(DroneState{static_cast<int>(i), p, d});
    s.map.set(p, CellState::VisitedOnce);
  }
  return s;
}

StepOutcome step(EnvState& state, std::span<const Direction> actions) {
  const std::size_t n = state.drones.size();
  if (state.terminal) throw UsageError("step called on a finished episode");
  if (actions.size() != n) {
    throw UsageError("expected " + std::to_string(n) + " action(s), got " +
                     std::to_string(actions.size()));
  }

  StepOutcome out;
  out.rewards.assign(n, 0.0);
  out.drone_terminal.assign(n, false);
  out.info.resize(n);

  std::vector<Position> before(n);
  std::vector<Position> after(n);
  for (std::size_t i = 0; i < n; ++i) {
    before[i] = state.drones[i].position;
    const Position proposed = step_towards(before[i], actions[i]);
    if (state.map.blocked(proposed)) {
      out.info[i].blocked = true;
      out.rewards[i] += reward::kObstacle;
      after[i] = before[i];
    } else {
      after[i] = proposed;
    }
  }

  // Same-cell and swap conflicts revert both drones; a revert can expose a
  // new conflict, so iterate to a fixed point.
  for (bool changed = true; changed;) {
    changed = false;
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = i + 1; j < n; ++j) {
        const bool same = after[i] == after[j];
        const bool swap = after[i] == before[j] && after[j] == before[i] && after[i] != before[i];
        if (same || swap) {
          for (std::size_t k : {i, j}) {
            if (!out.info[k].collided) {
              out.info[k].collided = true;
              out.rewards[k] += reward::kCollision;
            }
            if (after[k] != before[k]) {
              after[k] = before[k];
              changed = true;
            }
          }
        }
      }
    }
  }

  for (std::size_t i = 0; i < n; ++i) {
    DroneState& drone = state.drones[i];
    drone.position = after[i];
    const double d = distance(after[i], state.signal.center);
    out.info[i].section = signal_section(d, state.signal);
    if (out.info[i].blocked || out.info[i].collided) continue;

    const CellState prior = state.map.at(after[i]);
    out.rewards[i] += cell_reward(prior);
    state.map.set(after[i], visited(prior));

    const double shaping = signal_reward(drone, d, state.signal);
    out.info[i].signal_reward = shaping;
    out.rewards[i] += shaping;

    if (out.info[i].section == Section::Section1) {
      out.info[i].reached_target = true;
      out.drone_terminal[i] = true;
      out.rewards[i] += reward::kTargetReached;
      if (!state.target_reached) {
        state.target_reached = true;
        state.reacher = static_cast<int>(i);
      }
    }
  }

  if (state.config.mode == Mode::Multi) {
    for (std::size_t i = 0; i < n; ++i) {
      if (has_neighbor(state, i)) {
        out.info[i].neighbor_nearby = true;
        out.rewards[i] += reward::kNeighbor;
      }
    }
  }

  state.step_count += 1;
  state.terminal = state.target_reached || state.step_count >= state.config.max_steps;
  out.episode_terminal = state.terminal;
  return out;
}

void observe_into(const EnvState& state, int drone_id, Eigen::Ref<Eigen::VectorXf> out) {
  if (drone_id < 0 || drone_id >= static_cast<int>(state.drones.size())) {
    throw UsageError("invalid drone id " + std::to_string(drone_id));
  }
  const int size = observation_size(state.config);
  if (out.size() != size) {
    throw UsageError("observation buffer has length " + std::to_string(out.size()) +
                     ", expected " + std::to_string(size));
  }
  const DroneState& drone = state.drones[static_cast<std::size_t>(drone_id)];
  for (int k = 0; k < kNumDirections; ++k) {
    const CellState c = state.map.at(step_towards(drone.position, static_cast<Direction>(k)));
    out[k] = c == CellState::Obstacle ? 1.0f : 0.0f;
    out[kNumDirections + k] = static_cast<float>(code(c)) / 4.0f;
  }
  const double d = distance(drone.position, state.signal.center);
  out[2 * kNumDirections] = section_strength(signal_section(d, state.signal));

  if (state.config.mode == Mode::Multi) {
    auto quadrants = out.segment(kBaseObservationSize, kNeighborQuadrants);
    quadrants.setZero();
    for (const DroneState& other : state.drones) {
      if (other.id == drone.id) continue;
      if (chebyshev(drone.position, other.position) <= state.config.neighbor_detect_radius) {
        quadrants[quadrant(drone.position, other.position)] = 1.0f;
      }
    }
  }
}

ObservationVector observe(const EnvState& state, int drone_id) {
  ObservationVector v(observation_size(state.config));
  observe_into(state, drone_id, v);
  return v;
}

}  // namespace dronerl
