#include "dronerl/config.hpp"

#include "dronerl/errors.hpp"
#include "dronerl/mapgen.hpp"

#include <charconv>
#include <cstdio>
#include <functional>
#include <map>
#include <sstream>

namespace dronerl {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

[[noreturn]] void bad_value(std::string_view key, std::string_view value, const char* expected) {
  throw ConfigError("config key '" + std::string(key) + "': '" + std::string(value) + "' is not " + expected);
}

template <typename T>
T parse_number(std::string_view key, std::string_view text) {
  const std::string s = trim(text);
  T v{};
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) bad_value(key, text, "a number");
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> parse_int_list(std::string_view key, std::string_view text) {
  std::vector<int> out;
  std::string s = trim(text);
  if (s.empty()) return out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<int>(key, item));
  return out;
}

struct Field {
  std::function<void(RunConfig&, std::string_view key, std::string_view value)> set;
  std::function<std::string(const RunConfig&)> get;
};

template <typename T, typename Access>
Field number_field(Access access) {
  return {[access](RunConfig& c, std::string_view k, std::string_view v) { access(c) = parse_number<T>(k, v); },
          [access](const RunConfig& c) {
            if constexpr (std::is_floating_point_v<T>) {
              return format_double(access(c));
            } else {
              return std::to_string(access(c));
            }
          }};
}

template <typename Access>
Field string_field(Access access) {
  return {[access](RunConfig& c, std::string_view, std::string_view v) { access(c) = trim(v); },
          [access](const RunConfig& c) { return access(c); }};
}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = [] {
    std::map<std::string, Field, std::less<>> f;
    f["env.mode"] = {[](RunConfig& c, std::string_view, std::string_view v) { c.env.mode = parse_mode(trim(v)); },
                     [](const RunConfig& c) { return std::string(to_string(c.env.mode)); }};
    f["env.n_drones"] = number_field<int>([](auto& c) -> auto& { return c.env.n_drones; });
    f["env.max_steps"] = number_field<int>([](auto& c) -> auto& { return c.env.max_steps; });
    f["env.r1"] = number_field<double>([](auto& c) -> auto& { return c.env.r1; });
    f["env.r2"] = number_field<double>([](auto& c) -> auto& { return c.env.r2; });
    f["env.r3"] = number_field<double>([](auto& c) -> auto& { return c.env.r3; });
    f["env.max_signal_reward"] = number_field<double>([](auto& c) -> auto& { return c.env.max_signal_reward; });
    f["env.neighbor_detect_radius"] =
        number_field<int>([](auto& c) -> auto& { return c.env.neighbor_detect_radius; });

    f["model.encoder_widths"] = {
        [](RunConfig& c, std::string_view k, std::string_view v) { c.model.encoder_widths = parse_int_list(k, v); },
        [](const RunConfig& c) {
          std::string s;
          for (std::size_t i = 0; i < c.model.encoder_widths.size(); ++i) {
            if (i > 0) s += ",";
            s += std::to_string(c.model.encoder_widths[i]);
          }
          return s;
        }};
    f["model.lstm_hidden"] = number_field<int>([](auto& c) -> auto& { return c.model.lstm_hidden; });
    f["model.seed"] = number_field<std::uint64_t>([](auto& c) -> auto& { return c.model.seed; });

    f["ppo.gamma"] = number_field<double>([](auto& c) -> auto& { return c.ppo.gamma; });
    f["ppo.gae_lambda"] = number_field<double>([](auto& c) -> auto& { return c.ppo.gae_lambda; });
    f["ppo.clip_eps"] = number_field<double>([](auto& c) -> auto& { return c.ppo.clip_eps; });
    f["ppo.c1"] = number_field<double>([](auto& c) -> auto& { return c.ppo.c1; });
    f["ppo.c2"] = number_field<double>([](auto& c) -> auto& { return c.ppo.c2; });
    f["ppo.epochs"] = number_field<int>([](auto& c) -> auto& { return c.ppo.epochs; });
    f["ppo.rollout_len"] = number_field<int>([](auto& c) -> auto& { return c.ppo.rollout_len; });
    f["ppo.chunk_len"] = number_field<int>([](auto& c) -> auto& { return c.ppo.chunk_len; });
    f["ppo.minibatch_chunks"] = number_field<int>([](auto& c) -> auto& { return c.ppo.minibatch_chunks; });
    f["ppo.n_workers"] = number_field<int>([](auto& c) -> auto& { return c.ppo.n_workers; });
    f["ppo.total_env_steps"] =
        number_field<std::int64_t>([](auto& c) -> auto& { return c.ppo.total_env_steps; });
    f["ppo.switch_period"] = number_field<int>([](auto& c) -> auto& { return c.ppo.switch_period; });
    f["ppo.lr"] = number_field<double>([](auto& c) -> auto& { return c.ppo.lr; });
    f["ppo.adam_beta1"] = number_field<double>([](auto& c) -> auto& { return c.ppo.adam_beta1; });
    f["ppo.adam_beta2"] = number_field<double>([](auto& c) -> auto& { return c.ppo.adam_beta2; });
    f["ppo.adam_eps"] = number_field<double>([](auto& c) -> auto& { return c.ppo.adam_eps; });
    f["ppo.max_grad_norm"] = number_field<double>([](auto& c) -> auto& { return c.ppo.max_grad_norm; });
    f["ppo.reward_scale"] = number_field<double>([](auto& c) -> auto& { return c.ppo.reward_scale; });

    f["run.maps"] = string_field([](auto& c) -> auto& { return c.maps_dir; });
    f["run.scenarios"] = string_field([](auto& c) -> auto& { return c.scenarios; });
    f["run.out"] = string_field([](auto& c) -> auto& { return c.out_dir; });
    f["run.seed"] = number_field<std::uint64_t>([](auto& c) -> auto& { return c.seed; });
    f["run.checkpoint_every"] = number_field<int>([](auto& c) -> auto& { return c.checkpoint_every; });
    return f;
  }();
  return table;
}

}  // namespace

void RunConfig::set(std::string_view key, std::string_view value) {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  try {
    it->second.set(*this, key, value);
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    if (msg.find(key) != std::string::npos) throw;
    throw ConfigError("config key '" + std::string(key) + "': " + msg);
  }
}

std::string RunConfig::get(std::string_view key) const {
  const auto it = fields().find(key);
  if (it == fields().end()) throw ConfigError("unknown config key '" + std::string(key) + "'");
  return it->second.get(*this);
}

std::vector<std::string> RunConfig::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, _] : fields()) out.push_back(k);
  return out;
}

void RunConfig::resolve() {
  if (scenarios.empty()) scenarios = "data/suite/scenarios_" + std::string(to_string(env.mode)) + ".txt";
  model.obs_dim = observation_size(env);
  env.validate();
  model.validate();
  ppo.validate();
  if (checkpoint_every <= 0) throw ConfigError("config key 'run.checkpoint_every' must be positive");
}

void apply_config_text(RunConfig& cfg, std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  std::string section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("config line " + std::to_string(line_no) + ": malformed section");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    std::string key = trim(std::string_view(t).substr(0, eq));
    if (!section.empty()) key = section + "." + key;
    cfg.set(key, std::string_view(t).substr(eq + 1));
  }
}

void apply_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file '" + path.string() + "' does not exist");
  apply_config_text(cfg, read_text_file(path));
}

std::string to_config_text(const RunConfig& cfg) {
  std::string out;
  std::string section;
  for (const auto& [key, field] : fields()) {
    const auto dot = key.find('.');
    const std::string sec = key.substr(0, dot);
    if (sec != section) {
      if (!out.empty()) out += "\n";
      out += "[" + sec + "]\n";
      section = sec;
    }
    out += key.substr(dot + 1) + " = " + field.get(cfg) + "\n";
  }
  return out;
}

}  // namespace dronerl
