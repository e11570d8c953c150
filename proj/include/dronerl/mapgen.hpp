#pragma once

// Map layouts, scenario instances (target + spawns on a layout) and their
// text formats.
//
// Map file:       "W H\n" followed by H rows of W glyphs, '#' obstacle, '.' free.
// Scenario file:  one instance per line,
//                 "map_id target_x target_y spawn1_x spawn1_y [spawn2_x spawn2_y]".

#include "dronerl/env.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace dronerl {

struct MapSpec {
  int width = 0;
  int height = 0;
  /// Row-major, 1 = obstacle.
  std::vector<std::uint8_t> obstacles;

  MapSpec() = default;
  MapSpec(int w, int h);

  bool is_obstacle(Position p) const;
  void set_obstacle(Position p, bool value);
  int obstacle_count() const;

  /// Free cells in row-major order; every one is a spawn/target candidate.
  std::vector<Position> free_cells() const;

  friend bool operator==(const MapSpec&, const MapSpec&) = default;
};

/// True when the free cells form one 8-connected component.
bool is_connected(const MapSpec& spec);

MapSpec parse_map(std::string_view text);
std::string serialize_map(const MapSpec& spec);

MapSpec random_map(int width, int height, double obstacle_density, std::uint64_t seed);

struct ScenarioInstance {
  std::string map_id;
  Position target;
  std::vector<Position> spawns;
  std::uint64_t seed = 0;

  friend bool operator==(const ScenarioInstance&, const ScenarioInstance&) = default;
};

struct NamedMap {
  std::string id;
  MapSpec spec;
};

struct VariantOptions {
  int n_drones = 1;
  /// Spawns must be strictly farther than this from the target; at least r1.
  double min_spawn_distance = 1.0;
};

/// per_base distinct (target, spawns) placements on each base map.
std::vector<ScenarioInstance> generate_variants(const std::vector<NamedMap>& bases, int per_base,
                                                std::uint64_t seed,
                                                const VariantOptions& options = {});

std::vector<ScenarioInstance> parse_scenarios(std::string_view text);
std::string serialize_scenarios(const std::vector<ScenarioInstance>& scenarios);

/// Obstacle layout plus target, ready for env::reset.
GridMap make_grid_map(const MapSpec& spec, Position target);

/// Maps keyed by id plus the scenarios placed on them.
struct Suite {
  std::map<std::string, MapSpec> maps;
  std::vector<ScenarioInstance> scenarios;

  const MapSpec& map_for(const ScenarioInstance& s) const;
  GridMap grid_for(const ScenarioInstance& s) const;
};

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

/// Loads every "<id>.map" file of a directory.
std::map<std::string, MapSpec> load_map_dir(const std::filesystem::path& dir);
void save_map_dir(const std::filesystem::path& dir, const std::vector<NamedMap>& maps);

/// Loads maps and scenarios and checks every scenario against its map.
Suite load_suite(const std::filesystem::path& map_dir, const std::filesystem::path& scenario_file);

}  // namespace dronerl
