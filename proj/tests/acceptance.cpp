// Acceptance runner: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails. Criteria 7 and 8 train full policies through the CLI on
// the suite under data/suite; finished runs under ./acceptance_runs are reused
// unless DRONERL_ACCEPTANCE_FRESH is set.

#include "dronerl/config.hpp"
#include "dronerl/env.hpp"
#include "dronerl/eval.hpp"
#include "dronerl/ppo.hpp"
#include "support.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace dronerl;
using namespace dronerl::testing;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

const fs::path kSource = DRONERL_SOURCE_DIR;
const fs::path kRuns = fs::absolute("acceptance_runs");
constexpr std::uint64_t kSeeds[] = {1, 2, 3};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + DRONERL_CLI + "\" " + args + " >\"" + log.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string suite_args(Mode mode) {
  const std::string m(to_string(mode));
  return "--config \"" + (kSource / ("configs/desk_" + m + ".ini")).string() + "\" --mode " + m +
         " --set run.maps=" + (kSource / "data/suite/maps").string() +
         " --set run.scenarios=" + (kSource / ("data/suite/scenarios_" + m + ".txt")).string();
}

RunConfig desk_config(Mode mode) {
  RunConfig c;
  apply_config_file(c, kSource / ("configs/desk_" + std::string(to_string(mode)) + ".ini"));
  c.env.mode = mode;
  c.maps_dir = (kSource / "data/suite/maps").string();
  c.scenarios = (kSource / ("data/suite/scenarios_" + std::string(to_string(mode)) + ".txt")).string();
  c.resolve();
  return c;
}

// ---------------------------------------------------------------------------

Verdict gradient_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto cfg = tiny_model();
  Rng rng(2);
  auto params = net::init_params<double>(cfg);
  for (auto& e : params) {
    for (Eigen::Index i = 0; i < e.value.size(); ++i) e.value.data()[i] += 0.2 * standard_normal(rng);
  }
  const auto mb = random_minibatch<double>(cfg, params, 3, 2, rng);
  const auto d = check_loss_gradients<double>(params, cfg, mb, ppo::PpoConfig{}, 1e-8);
  const auto f = check_loss_gradients<float>(params, cfg, mb, ppo::PpoConfig{}, 1e-2);
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {d.max_relative_error < 1e-4 && f.max_relative_error < 1e-3 && d.checked <= 1000 && secs < 120,
          fmt("%g params, max rel err double %.2e (< 1e-4), float %.2e (< 1e-3), %.1fs", double(d.checked),
              d.max_relative_error, f.max_relative_error, secs)};
}

Verdict gae_oracle() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(7);
  double worst = 0;
  for (int seq = 0; seq < 1000; ++seq) {
    constexpr int n = 20;
    std::vector<double> r(n), v(n);
    std::vector<std::uint8_t> done(n);
    for (int k = 0; k < n; ++k) {
      r[k] = 100 * standard_normal(rng);
      v[k] = 10 * standard_normal(rng);
      done[k] = uniform01(rng) < 0.1;
    }
    const double boot = 10 * standard_normal(rng);
    const double gamma = 0.9 + 0.1 * uniform01(rng), lambda = uniform01(rng);
    const auto got = ppo::compute_gae(r, v, done, boot, gamma, lambda);
    for (int t = 0; t < n; ++t) {
      double a = 0, w = 1;
      for (int k = t; k < n; ++k) {
        const double next = k + 1 < n ? v[k + 1] : boot;
        a += w * (r[k] + (done[k] ? 0.0 : gamma * next) - v[k]);
        if (done[k]) break;
        w *= gamma * lambda;
      }
      worst = std::max(worst, std::abs(a - got.advantages[t]));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {worst < 1e-10 && secs < 10, fmt("1000 sequences of 20 steps, max abs err %.2e (< 1e-10), %.2fs", worst, secs)};
}

Verdict reward_table() {
  std::vector<std::string> failed;
  auto expect = [&](bool ok, const char* what) {
    if (!ok) failed.emplace_back(what);
  };
  EnvConfig single;
  EnvConfig multi;
  multi.mode = Mode::Multi;
  auto open = [](int w, int h, Position target) {
    GridMap m(w, h);
    m.target = target;
    return m;
  };
  auto one = [](EnvState& s, Direction d) { return step(s, std::span(&d, 1)).rewards[0]; };

  {
    const Position p{2, 2};
    EnvState s = reset(single, open(20, 20, {18, 18}), std::span(&p, 1), 0);
    expect(one(s, Direction::E) == 2.0, "unknown cell +2");
    expect(one(s, Direction::W) == 0.0, "visited once 0");
    one(s, Direction::E);
    expect(one(s, Direction::W) == -1.0, "visited twice -1");
    one(s, Direction::E);
    expect(one(s, Direction::W) == -4.0, "visited three or more -4");
  }
  {
    GridMap m = open(20, 20, {18, 18});
    m.set({3, 2}, CellState::Obstacle);
    const Position p{2, 2};
    EnvState s = reset(single, m, std::span(&p, 1), 0);
    expect(one(s, Direction::E) == -50.0, "obstacle -50");
    expect(s.drones[0].position == p, "obstacle leaves position unchanged");
  }
  {
    const Position sp[] = {{2, 2}, {7, 2}};
    EnvState s = reset(multi, open(30, 30, {28, 28}), sp, 0);
    const Direction a[] = {Direction::S, Direction::S};
    const auto out = step(s, a);
    expect(out.rewards[0] == 0.0 && out.rewards[1] == 0.0, "neighbor vicinity -2 on top of +2");
  }
  {
    const Position sp[] = {{2, 2}, {4, 2}};
    EnvState s = reset(multi, open(30, 30, {28, 28}), sp, 0);
    const Direction a[] = {Direction::E, Direction::W};
    const auto out = step(s, a);
    expect(out.rewards[0] == -52.0 && out.rewards[1] == -52.0, "collision -50 (plus vicinity -2)");
    expect(s.drones[0].position == sp[0] && s.drones[1].position == sp[1], "collision reverts");
  }
  {
    const Position p{2, 2};
    EnvState s = reset(single, open(10, 10, {4, 2}), std::span(&p, 1), 0);
    const double shaping = 250.0 * (1 - 1.0 / 6) * (1 - 1.0 / 6) * (2.0 - 1.0) / 6;
    const Direction d = Direction::E;
    const auto out = step(s, std::span(&d, 1));
    expect(std::abs(out.rewards[0] - (2.0 + shaping + 1000.0)) < 1e-9, "target +1000");
    expect(out.episode_terminal && s.target_reached, "target is terminal");
  }
  std::string detail = failed.empty() ? "all reward rows reproduced" : "failed:";
  for (const auto& f : failed) detail += " [" + f + "]";
  return {failed.empty(), detail};
}

Verdict observation_contract() {
  Rng rng(31);
  int states = 0, bad = 0;
  for (int trial = 0; trial < 400; ++trial) {
    EnvConfig cfg;
    cfg.mode = trial % 2 ? Mode::Multi : Mode::Single;
    const int w = 4 + static_cast<int>(uniform_below(rng, 12)), h = 4 + static_cast<int>(uniform_below(rng, 12));
    GridMap m(w, h);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        if (uniform01(rng) < 0.25) m.set({x, y}, CellState::Obstacle);
      }
    }
    std::vector<Position> spawns;
    while (static_cast<int>(spawns.size()) < cfg.drone_count()) {
      const Position p{static_cast<int>(uniform_below(rng, w)), static_cast<int>(uniform_below(rng, h))};
      if (std::find(spawns.begin(), spawns.end(), p) == spawns.end()) spawns.push_back(p);
    }
    for (const Position p : spawns) m.set(p, CellState::Unknown);
    do {
      m.target = {static_cast<int>(uniform_below(rng, w)), static_cast<int>(uniform_below(rng, h))};
    } while (std::any_of(spawns.begin(), spawns.end(), [&](Position p) { return distance(p, m.target) <= 1.0; }));
    m.set(m.target, CellState::Unknown);
    EnvState s = reset(cfg, m, spawns, trial);
    std::vector<Direction> acts(spawns.size());
    for (int t = 0; t < 30 && !s.terminal; ++t) {
      for (int id = 0; id < cfg.drone_count(); ++id) {
        const auto o = observe(s, id);
        ++states;
        const Position me = s.drones[id].position;
        bool ok = o.size() == (cfg.mode == Mode::Single ? 17 : 21) && o.minCoeff() >= 0.0f && o.maxCoeff() <= 1.0f;
        for (int k = 0; k < 8; ++k) {
          const Position n{me.x + kDirectionOffsets[k].x, me.y + kDirectionOffsets[k].y};
          const bool inside = n.x >= 0 && n.y >= 0 && n.x < w && n.y < h;
          const int c = inside ? code(s.map.at(n)) : 1;
          ok = ok && o[k] == (c == 1 ? 1.0f : 0.0f) && o[8 + k] == static_cast<float>(c) / 4.0f;
        }
        const double d = distance(me, m.target);
        const float sig = d <= 1 ? 1.0f : d <= 3 ? 2.0f / 3 : d <= 6 ? 1.0f / 3 : 0.0f;
        ok = ok && std::abs(o[16] - sig) < 1e-6f;
        if (cfg.mode == Mode::Multi) ok = ok && o.tail<4>().sum() <= 1.0f;
        bad += !ok;
      }
      for (auto& a : acts) a = static_cast<Direction>(uniform_below(rng, 8));
      step(s, acts);
    }
  }
  return {bad == 0, fmt("%g fuzzed observations, %g violations", states, bad)};
}

Verdict ratio_at_start() {
  double worst = 0, clip = 0;
  int updates = 0;
  for (Mode mode : {Mode::Single, Mode::Multi}) {
    const RunConfig c = desk_config(mode);
    auto p = c.ppo;
    p.total_env_steps = 2 * p.rollout_len * p.n_workers;
    ppo::Trainer t(c.env, c.model, p, load_suite(c.maps_dir, c.scenarios), 5);
    while (!t.finished()) {
      const auto s = t.run_update();
      worst = std::max(worst, s.first_max_ratio_deviation);
      clip = std::max(clip, s.first_clip_fraction);
      ++updates;
    }
  }
  return {worst < 1e-5 && clip == 0.0,
          fmt("%g full-size updates, max |r-1| %.2e (< 1e-5), clip fraction %g", updates, worst, clip)};
}

Verdict determinism() {
  const fs::path dir = kRuns / "determinism";
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string common = suite_args(Mode::Single) + " --seed 11 --set run.checkpoint_every=1";
  const std::string three = " --set ppo.total_env_steps=12288";
  const fs::path a = dir / "a", b = dir / "b", c = dir / "c";
  bool ok = cli("train " + common + three + " --out \"" + a.string() + "\"", dir / "a.log") == 0 &&
            cli("train " + common + three + " --out \"" + b.string() + "\"", dir / "b.log") == 0 &&
            cli("train " + common + " --set ppo.total_env_steps=8192 --out \"" + c.string() + "\"", dir / "c.log") == 0;
  if (!ok) return {false, "a training command failed; see " + dir.string()};
  const bool same = slurp(a / "metrics.csv") == slurp(b / "metrics.csv");
  std::size_t rows = 0;
  {
    std::istringstream in(slurp(a / "metrics.csv"));
    for (std::string l; std::getline(in, l);) ++rows;
  }
  ok = cli("train " + common + three + " --out \"" + c.string() + "\" --resume \"" +
               (c / "checkpoints/update_000002.ckpt").string() + "\"",
           dir / "c_resume.log") == 0;
  const bool resumed = ok && slurp(c / "metrics.csv") == slurp(a / "metrics.csv") &&
                       slurp(c / "checkpoints/update_000003.ckpt") == slurp(a / "checkpoints/update_000003.ckpt");
  return {same && resumed && rows - 1 >= 3,
          std::string("3-update runs: metrics ") + (same ? "byte-identical" : "DIFFER") + ", resume after update 2 " +
              (resumed ? "matches metrics and final checkpoint" : "DIFFERS")};
}

struct Trained {
  std::uint64_t seed = 0;
  double success_rate = 0;
  std::optional<double> average_steps;
  double train_seconds = 0;
  bool ok = false;
};

fs::path final_checkpoint(const fs::path& run, const RunConfig& c) {
  const std::int64_t per_update = static_cast<std::int64_t>(c.ppo.rollout_len) * c.ppo.n_workers;
  const int updates = static_cast<int>((c.ppo.total_env_steps + per_update - 1) / per_update);
  char name[64];
  std::snprintf(name, sizeof name, "update_%06d.ckpt", updates);
  return run / "checkpoints" / name;
}

Trained train_and_evaluate(Mode mode, std::uint64_t seed) {
  Trained out;
  out.seed = seed;
  const std::string m(to_string(mode));
  const fs::path run = kRuns / (m + "_seed" + std::to_string(seed));
  const fs::path ckpt = final_checkpoint(run, desk_config(mode));
  if (std::getenv("DRONERL_ACCEPTANCE_FRESH") || !fs::exists(ckpt)) {
    fs::remove_all(run);
    fs::create_directories(run);
    std::cout << "  training " << m << " seed " << seed << " -> " << run.string() << std::endl;
    const auto t0 = std::chrono::steady_clock::now();
    if (cli("train " + suite_args(mode) + " --seed " + std::to_string(seed) + " --out \"" + run.string() + "\"",
            run / "train.log") != 0) {
      return out;
    }
    out.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ofstream(run / "train_seconds.txt") << out.train_seconds << "\n";
  } else {
    std::ifstream(run / "train_seconds.txt") >> out.train_seconds;
  }
  if (cli("eval " + suite_args(mode) + " --checkpoint \"" + ckpt.string() + "\" --out \"" + run.string() + "\"",
          run / "eval.log") != 0) {
    return out;
  }
  std::istringstream in(slurp(run / "eval.csv"));
  for (std::string line; std::getline(in, line);) {
    if (line.rfind("SUMMARY,", 0) != 0) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    if (f.size() != 5) return out;
    out.success_rate = std::stod(f[3]);
    if (f[4] != "NA") out.average_steps = std::stod(f[4]);
    out.ok = true;
  }
  std::cout << "  " << m << " seed " << seed << ": success " << out.success_rate << ", avg steps "
            << (out.average_steps ? std::to_string(*out.average_steps) : "NA") << ", trained in "
            << out.train_seconds << "s" << std::endl;
  return out;
}

std::vector<Trained> single_runs;
std::vector<Trained> multi_runs;

Verdict learning_efficacy() {
  const RunConfig c = desk_config(Mode::Single);
  const Suite suite = load_suite(c.maps_dir, c.scenarios);
  double baseline = 0;
  for (std::uint64_t s = 1; s <= 10; ++s) baseline += eval::evaluate_random(suite, c.env, s).success_rate;
  baseline /= 10;

  bool all_ok = true;
  double mean = 0, worst_time = 0;
  for (std::uint64_t s : kSeeds) {
    single_runs.push_back(train_and_evaluate(Mode::Single, s));
    all_ok = all_ok && single_runs.back().ok;
    mean += single_runs.back().success_rate / std::size(kSeeds);
    worst_time = std::max(worst_time, single_runs.back().train_seconds);
  }
  std::string per_seed;
  for (const auto& r : single_runs) per_seed += fmt(" %.2f", r.success_rate);
  return {all_ok && mean >= 0.80 && baseline <= 0.30 && worst_time <= 7200,
          fmt("trained success %.3f (>= 0.80, mean of 3 seeds:", mean) + per_seed +
              fmt("), random baseline %.3f (<= 0.30, 10 seeds), longest run %.0fs (<= 7200s)", baseline, worst_time)};
}

Verdict two_drone_reduction() {
  bool all_ok = true;
  for (std::uint64_t s : kSeeds) {
    multi_runs.push_back(train_and_evaluate(Mode::Multi, s));
    all_ok = all_ok && multi_runs.back().ok;
  }
  auto summarize = [](const std::vector<Trained>& runs, double& success, double& steps) {
    success = steps = 0;
    bool defined = true;
    for (const auto& r : runs) {
      success += r.success_rate / runs.size();
      if (!r.average_steps) defined = false;
      steps += r.average_steps.value_or(0) / runs.size();
    }
    return defined;
  };
  double s1, st1, s2, st2;
  const bool d1 = summarize(single_runs, s1, st1);
  const bool d2 = summarize(multi_runs, s2, st2);
  if (!all_ok || !d1 || !d2) return {false, "average steps undefined for some run (no successes or failed command)"};
  return {st2 < st1 && s1 >= 0.70 && s2 >= 0.70,
          fmt("avg steps two-drone %.2f vs single %.2f (ratio %.3f, must be < 1)", st2, st1, st2 / st1) +
              fmt(", success two-drone %.2f, single %.2f (>= 0.70), 3 seeds each", s2, s1)};
}

Verdict metric_arithmetic() {
  std::vector<eval::EpisodeResult> r(100);
  for (int i = 0; i < 93; ++i) {
    r[i].success = true;
    r[i].steps = i < 17 ? 183 : 184;
  }
  const double rate = eval::success_rate(r);
  const double avg = *eval::average_steps(r);
  return {std::abs(rate - 0.93) < 1e-12 && std::abs(avg - 183.82) < 0.01,
          fmt("success_rate(93/100) = %.4f, average_steps(17095 over 93) = %.4f (183.82 +- 0.01)", rate, avg)};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional criterion numbers restrict the run.
  std::vector<int> only;
  for (int i = 1; i < argc; ++i) only.push_back(std::atoi(argv[i]));
  const std::vector<std::pair<const char*, std::function<Verdict()>>> criteria = {
      {"gradient correctness", gradient_correctness},
      {"GAE oracle equivalence", gae_oracle},
      {"reward table exactness", reward_table},
      {"observation contract", observation_contract},
      {"ratio-at-start identity", ratio_at_start},
      {"determinism and resume", determinism},
      {"desk-scale learning efficacy", learning_efficacy},
      {"two-drone step reduction", two_drone_reduction},
      {"success rate and average steps arithmetic", metric_arithmetic},
  };
  fs::create_directories(kRuns);
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    if (!only.empty() && std::find(only.begin(), only.end(), static_cast<int>(i + 1)) == only.end()) continue;
    Verdict v;
    try {
      v = criteria[i].second();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::cout << "CRITERION " << i + 1 << " " << (v.pass ? "PASS" : "FAIL") << " " << criteria[i].first << ": "
              << v.detail << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
