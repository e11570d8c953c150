#include "dronerl/mapgen.hpp"

#include "dronerl/errors.hpp"
#include "dronerl/random.hpp"

#include <algorithm>
#include <deque>
#include <fstream>
#include <set>
#include <sstream>

namespace dronerl {

namespace {

constexpr int kRetryBudget = 1000;

std::string at_location(int row, int col) {
  return "row " + std::to_string(row) + ", column " + std::to_string(col);
}

std::size_t index_of(const MapSpec& m, Position p) {
  return static_cast<std::size_t>(p.y) * static_cast<std::size_t>(m.width) +
         static_cast<std::size_t>(p.x);
}

}  // namespace

MapSpec::MapSpec(int w, int h) : width(w), height(h) {
  if (w <= 0 || h <= 0) throw ConfigError("map dimensions must be positive");
  obstacles.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), 0);
}

bool MapSpec::is_obstacle(Position p) const {
  if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) return true;
  return obstacles[index_of(*this, p)] != 0;
}

void MapSpec::set_obstacle(Position p, bool value) {
  if (p.x < 0 || p.y < 0 || p.x >= width || p.y >= height) {
    throw UsageError("MapSpec::set_obstacle out of bounds");
  }
  obstacles[index_of(*this, p)] = value ? 1 : 0;
}

int MapSpec::obstacle_count() const {
  return static_cast<int>(std::count(obstacles.begin(), obstacles.end(), std::uint8_t{1}));
}

std::vector<Position> MapSpec::free_cells() const {
  std::vector<Position> out;
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (!is_obstacle({x, y})) out.push_back({x, y});
    }
  }
  return out;
}

namespace {

// Cells 8-reachable from `start`, as a row-major mask.
std::vector<std::uint8_t> reachable_from(const MapSpec& spec, Position start) {
  std::vector<std::uint8_t> seen(spec.obstacles.size(), 0);
  std::deque<Position> frontier{start};
  seen[index_of(spec, start)] = 1;
  while (!frontier.empty()) {
    const Position p = frontier.front();
    frontier.pop_front();
    for (const Position o : kDirectionOffsets) {
      const Position q{p.x + o.x, p.y + o.y};
      if (spec.is_obstacle(q) || seen[index_of(spec, q)]) continue;
      seen[index_of(spec, q)] = 1;
      frontier.push_back(q);
    }
  }
  return seen;
}

}  // namespace

bool is_connected(const MapSpec& spec) {
  const auto free = spec.free_cells();
  if (free.empty()) return false;
  const auto seen = reachable_from(spec, free.front());
  return std::all_of(free.begin(), free.end(),
                     [&](Position p) { return seen[index_of(spec, p)] != 0; });
}

MapSpec parse_map(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ParseError("map: missing header line");
  int w = 0;
  int h = 0;
  {
    std::istringstream header(line);
    std::string extra;
    if (!(header >> w >> h) || (header >> extra) || w <= 0 || h <= 0) {
      throw ParseError("map: header must be 'W H' with positive integers, got '" + line + "'");
    }
  }
  MapSpec spec(w, h);
  for (int row = 0; row < h; ++row) {
    if (!std::getline(in, line)) {
      throw ParseError("map: expected " + std::to_string(h) + " rows, found " + std::to_string(row));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<int>(line.size()) != w) {
      throw ParseError("map: ragged row at " + at_location(row + 1, static_cast<int>(line.size()) + 1) +
                       ": expected " + std::to_string(w) + " glyphs, found " +
                       std::to_string(line.size()));
    }
    for (int col = 0; col < w; ++col) {
      const char c = line[static_cast<std::size_t>(col)];
      if (c == '#') {
        spec.set_obstacle({col, row}, true);
      } else if (c != '.') {
        throw ParseError(std::string("map: unknown glyph '") + c + "' at " +
                         at_location(row + 1, col + 1));
      }
    }
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line != "\r") throw ParseError("map: trailing content after row " + std::to_string(h));
  }
  if (!is_connected(spec)) {
    const auto free = spec.free_cells();
    if (free.empty()) throw ParseError("map: no free cells");
    const auto seen = reachable_from(spec, free.front());
    for (const Position p : free) {
      if (!seen[index_of(spec, p)]) {
        throw ParseError("map: free space is disconnected; unreachable cell at " +
                         at_location(p.y + 1, p.x + 1));
      }
    }
  }
  return spec;
}

std::string serialize_map(const MapSpec& spec) {
  std::string out = std::to_string(spec.width) + " " + std::to_string(spec.height) + "\n";
  out.reserve(out.size() + static_cast<std::size_t>((spec.width + 1) * spec.height));
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) out.push_back(spec.is_obstacle({x, y}) ? '#' : '.');
    out.push_back('\n');
  }
  return out;
}

MapSpec random_map(int width, int height, double obstacle_density, std::uint64_t seed) {
  if (width < 3 || height < 3) throw ConfigError("random_map needs at least 3x3 to fit border walls");
  if (!(obstacle_density >= 0.0 && obstacle_density <= 0.4)) {
    throw ConfigError("obstacle density must lie in [0, 0.4]");
  }
  Rng rng(seed);
  for (int attempt = 0; attempt < kRetryBudget; ++attempt) {
    MapSpec spec(width, height);
    for (int y = 0; y < height; ++y) {
      for (int x = 0; x < width; ++x) {
        const bool border = x == 0 || y == 0 || x == width - 1 || y == height - 1;
        if (border || uniform01(rng) < obstacle_density) spec.set_obstacle({x, y}, true);
      }
    }
    if (spec.free_cells().size() >= 2 && is_connected(spec)) return spec;
  }
  throw GenerationError("random_map: no connected layout within " + std::to_string(kRetryBudget) +
                        " attempts");
}

std::vector<ScenarioInstance> generate_variants(const std::vector<NamedMap>& bases, int per_base,
                                                std::uint64_t seed,
                                                const VariantOptions& options) {
  if (per_base < 1) throw ConfigError("per_base must be >= 1");
  if (options.n_drones < 1) throw ConfigError("n_drones must be >= 1");
  Rng rng(seed);
  std::vector<ScenarioInstance> out;
  for (const NamedMap& base : bases) {
    const auto free = base.spec.free_cells();
    std::set<std::vector<int>> used;
    int made = 0;
    const int budget = kRetryBudget * per_base;
    for (int attempt = 0; attempt < budget && made < per_base; ++attempt) {
      ScenarioInstance inst;
      inst.map_id = base.id;
      inst.target = free[uniform_below(rng, free.size())];
      bool ok = true;
      for (int d = 0; d < options.n_drones && ok; ++d) {
        const Position p = free[uniform_below(rng, free.size())];
        ok = distance(p, inst.target) > std::max(options.min_spawn_distance, 0.0) &&
             std::find(inst.spawns.begin(), inst.spawns.end(), p) == inst.spawns.end();
        inst.spawns.push_back(p);
      }
      if (!ok) continue;
      std::vector<int> key{inst.target.x, inst.target.y};
      for (const Position p : inst.spawns) {
        key.push_back(p.x);
        key.push_back(p.y);
      }
      if (!used.insert(key).second) continue;
      inst.seed = rng();
      out.push_back(std::move(inst));
      ++made;
    }
    if (made < per_base) {
      throw GenerationError("base map '" + base.id + "' admits only " + std::to_string(made) +
                            " distinct placements, " + std::to_string(per_base) + " requested");
    }
  }
  return out;
}

std::vector<ScenarioInstance> parse_scenarios(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::vector<ScenarioInstance> out;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::istringstream fields(line);
    ScenarioInstance s;
    std::vector<int> nums;
    fields >> s.map_id;
    std::string tok;
    while (fields >> tok) {
      try {
        std::size_t used = 0;
        const int v = std::stoi(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        nums.push_back(v);
      } catch (const std::exception&) {
        throw ParseError("scenarios: line " + std::to_string(line_no) + ": '" + tok +
                         "' is not an integer");
      }
    }
    if (nums.size() < 4 || nums.size() % 2 != 0) {
      throw ParseError("scenarios: line " + std::to_string(line_no) +
                       ": expected 'map_id tx ty sx sy [sx sy]'");
    }
    s.target = {nums[0], nums[1]};
    for (std::size_t i = 2; i < nums.size(); i += 2) s.spawns.push_back({nums[i], nums[i + 1]});
    s.seed = static_cast<std::uint64_t>(out.size());
    out.push_back(std::move(s));
  }
  return out;
}

std::string serialize_scenarios(const std::vector<ScenarioInstance>& scenarios) {
  std::string out;
  for (const auto& s : scenarios) {
    out += s.map_id + " " + std::to_string(s.target.x) + " " + std::to_string(s.target.y);
    for (const Position p : s.spawns) out += " " + std::to_string(p.x) + " " + std::to_string(p.y);
    out += "\n";
  }
  return out;
}

GridMap make_grid_map(const MapSpec& spec, Position target) {
  GridMap g(spec.width, spec.height);
  for (int y = 0; y < spec.height; ++y) {
    for (int x = 0; x < spec.width; ++x) {
      if (spec.is_obstacle({x, y})) g.set({x, y}, CellState::Obstacle);
    }
  }
  g.target = target;
  return g;
}

const MapSpec& Suite::map_for(const ScenarioInstance& s) const {
  auto it = maps.find(s.map_id);
  if (it == maps.end()) throw ConfigError("scenario refers to unknown map '" + s.map_id + "'");
  return it->second;
}

GridMap Suite::grid_for(const ScenarioInstance& s) const { return make_grid_map(map_for(s), s.target); }

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::map<std::string, MapSpec> load_map_dir(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw ConfigError("maps directory '" + dir.string() + "' does not exist");
  }
  std::map<std::string, MapSpec> out;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (entry.path().extension() != ".map") continue;
    try {
      out.emplace(entry.path().stem().string(), parse_map(read_text_file(entry.path())));
    } catch (const ParseError& e) {
      throw ParseError(entry.path().string() + ": " + e.what());
    }
  }
  return out;
}

void save_map_dir(const std::filesystem::path& dir, const std::vector<NamedMap>& maps) {
  std::filesystem::create_directories(dir);
  for (const auto& m : maps) write_text_file(dir / (m.id + ".map"), serialize_map(m.spec));
}

Suite load_suite(const std::filesystem::path& map_dir, const std::filesystem::path& scenario_file) {
  Suite suite;
  suite.maps = load_map_dir(map_dir);
  if (!std::filesystem::exists(scenario_file)) {
    throw ConfigError("scenario file '" + scenario_file.string() + "' does not exist");
  }
  suite.scenarios = parse_scenarios(read_text_file(scenario_file));
  for (const auto& s : suite.scenarios) {
    const MapSpec& m = suite.map_for(s);
    auto describe = [&](Position p) {
      return s.map_id + " (" + std::to_string(p.x) + ", " + std::to_string(p.y) + ")";
    };
    if (m.is_obstacle(s.target)) throw ConfigError("scenario target on obstacle at " + describe(s.target));
    for (const Position p : s.spawns) {
      if (m.is_obstacle(p)) throw ConfigError("scenario spawn on obstacle at " + describe(p));
    }
  }
  return suite;
}

}  // namespace dronerl
