// dronerl: train, evaluate and inspect recurrent PPO drone search policies.
//
//   dronerl gen-maps --out data/suite --seed 7
//   dronerl train --config configs/desk_single.ini --seed 1 --out runs/s1
//   dronerl eval  --config configs/desk_single.ini --checkpoint runs/s1/checkpoints/update_000488.ckpt
//   dronerl eval  --config configs/desk_single.ini --sweep runs/s1/checkpoints --svg curve.svg
//   dronerl play  --config configs/desk_single.ini --checkpoint ... --scenario 3 --overlay

#include "dronerl/checkpoint.hpp"
#include "dronerl/config.hpp"
#include "dronerl/errors.hpp"
#include "dronerl/eval.hpp"
#include "dronerl/mapgen.hpp"
#include "dronerl/ppo.hpp"
#include "dronerl/random.hpp"
#include "dronerl/render.hpp"
#include "dronerl/report.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace dronerl;

namespace {

struct CommonOptions {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string mode;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Run configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "Master seed (also seeds the weight initialisation)");
  cmd->add_option("--out", o.out, "Output directory");
  cmd->add_option("--mode", o.mode, "single or multi")->check(CLI::IsMember({"single", "multi"}));
  cmd->add_option("--set", o.overrides, "Override a config key, e.g. --set ppo.lr=1e-4");
}

RunConfig build_config(const CommonOptions& o) {
  RunConfig cfg;
  if (!o.config.empty()) apply_config_file(cfg, o.config);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    cfg.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!o.mode.empty()) cfg.env.mode = parse_mode(o.mode);
  if (o.seed) {
    cfg.seed = *o.seed;
    cfg.model.seed = *o.seed;
  }
  if (!o.out.empty()) cfg.out_dir = o.out;
  cfg.resolve();
  return cfg;
}

Suite load_run_suite(const RunConfig& cfg) { return load_suite(cfg.maps_dir, cfg.scenarios); }

void require_mode(const ckpt::Checkpoint& c, const RunConfig& cfg, const fs::path& path) {
  if (c.model.obs_dim != cfg.model.obs_dim) {
    throw UsageError(path.string() + ": checkpoint expects " + std::to_string(c.model.obs_dim) +
                     "-entry observations (" + std::string(to_string(c.mode)) + " mode) but the run uses " +
                     std::to_string(cfg.model.obs_dim) + " (" + std::string(to_string(cfg.env.mode)) + " mode)");
  }
}

/// Keeps the header and the first `rows` data rows of an existing metrics file.
std::string truncated_metrics(const fs::path& path, int rows) {
  std::string kept = std::string(report::kTrainHeader) + "\n";
  if (!fs::exists(path)) return kept;
  std::istringstream in(read_text_file(path));
  std::string line;
  std::getline(in, line);
  for (int i = 0; i < rows && std::getline(in, line); ++i) kept += line + "\n";
  return kept;
}

std::string checkpoint_name(int update) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "update_%06d.ckpt", update);
  return buf;
}

int cmd_train(const CommonOptions& o, const std::string& resume, const std::string& init_from) {
  const RunConfig cfg = build_config(o);
  Suite suite = load_run_suite(cfg);
  const fs::path out = cfg.out_dir;
  fs::create_directories(out / "checkpoints");
  write_text_file(out / "config.ini", to_config_text(cfg));

  ppo::Trainer trainer(cfg.env, cfg.model, cfg.ppo, std::move(suite), cfg.seed);
  const fs::path metrics_path = out / "metrics.csv";
  std::string metrics = std::string(report::kTrainHeader) + "\n";
  if (!resume.empty()) {
    const auto c = ckpt::load_checkpoint(resume);
    ckpt::restore(trainer, c);
    metrics = truncated_metrics(metrics_path, c.update);
    std::cout << "resumed from " << resume << " at update " << c.update << "\n";
  } else if (!init_from.empty()) {
    const auto c = ckpt::load_checkpoint(init_from);
    auto params = trainer.params();
    const auto copied = net::transfer_weights(c.params, params);
    trainer.set_params(std::move(params));
    std::cout << "initialised " << copied << " tensors from " << init_from << "\n";
  }
  {
    std::ofstream f(metrics_path, std::ios::trunc);
    f << metrics;
  }
  std::ofstream csv(metrics_path, std::ios::app);

  const auto start = std::chrono::steady_clock::now();
  while (!trainer.finished()) {
    const ppo::TrainStats s = trainer.run_update();
    csv << report::train_row(s) << "\n" << std::flush;
    if (s.update % cfg.checkpoint_every == 0 || trainer.finished()) {
      ckpt::save_checkpoint(out / "checkpoints" / checkpoint_name(s.update), ckpt::snapshot(trainer));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("update %d  steps %lld  ep_reward %.1f  ep_len %.1f  entropy %.3f  kl %.4f  %.0fs\n", s.update,
                static_cast<long long>(s.env_steps), s.mean_episode_reward, s.mean_episode_length, s.entropy,
                s.approx_kl, secs);
    std::fflush(stdout);
  }
  return 0;
}

eval::EvalPolicy parse_policy(const std::string& name, std::uint64_t seed) {
  return {name == "stochastic" ? eval::PolicyMode::Stochastic : eval::PolicyMode::Greedy, seed};
}

int cmd_eval(const CommonOptions& o, const std::string& checkpoint, const std::string& sweep_dir,
             const std::string& policy_name, bool random, const std::string& svg) {
  const RunConfig cfg = build_config(o);
  const Suite suite = load_run_suite(cfg);
  const auto policy = parse_policy(policy_name, cfg.seed);
  const fs::path out = o.out.empty() ? fs::path{} : fs::path(cfg.out_dir);
  if (!out.empty()) fs::create_directories(out);

  auto evaluate_file = [&](const fs::path& path) {
    const auto c = ckpt::load_checkpoint(path);
    require_mode(c, cfg, path);
    return std::pair{c.env_steps, eval::evaluate(suite, c.params, c.model, cfg.env, policy, path.string())};
  };

  if (!sweep_dir.empty()) {
    if (!fs::is_directory(sweep_dir)) throw ConfigError("checkpoint directory '" + sweep_dir + "' does not exist");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(sweep_dir)) {
      if (e.path().extension() == ".ckpt") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<eval::CheckpointRef> refs;
    for (const auto& f : files) refs.push_back({ckpt::load_checkpoint(f).env_steps, f.string()});
    const auto curve = eval::sweep_checkpoints(refs, [&](const eval::CheckpointRef& r) {
      return evaluate_file(r.id).second;
    });
    const std::string csv = report::curve_csv(curve);
    if (!out.empty()) write_text_file(out / "curve.csv", csv);
    std::cout << csv << "\n" << report::curve_table(curve);
    if (!svg.empty()) {
      write_text_file(svg, report::curve_svg(curve, "Successful localizations vs env steps (" +
                                                        std::string(to_string(cfg.env.mode)) + ")"));
    }
    return 0;
  }

  eval::SuiteReport rep;
  std::int64_t steps = 0;
  if (random) {
    rep = eval::evaluate_random(suite, cfg.env, cfg.seed);
  } else {
    if (checkpoint.empty()) throw UsageError("eval needs --checkpoint, --sweep or --random");
    std::tie(steps, rep) = evaluate_file(checkpoint);
  }
  const std::string csv = report::eval_csv(rep);
  if (!out.empty()) write_text_file(out / "eval.csv", csv);
  std::cout << csv << "\n";
  const eval::CurvePoint point{steps, rep.successes, static_cast<int>(rep.results.size()), rep.success_rate,
                               rep.average_steps};
  std::cout << report::curve_table(std::span(&point, 1));
  return 0;
}

int cmd_play(const CommonOptions& o, const std::string& checkpoint, std::size_t scenario,
             std::optional<int> max_steps, bool overlay, const std::string& policy_name) {
  const RunConfig cfg = build_config(o);
  const Suite suite = load_run_suite(cfg);
  if (scenario >= suite.scenarios.size()) {
    throw UsageError("scenario index " + std::to_string(scenario) + " out of range (suite has " +
                     std::to_string(suite.scenarios.size()) + ")");
  }
  const int limit = max_steps.value_or(cfg.env.max_steps);
  const auto& sc = suite.scenarios[scenario];

  const eval::StepObserver show = [&](const EnvState& s, const StepOutcome* outcome) {
    std::cout << "step " << s.step_count;
    if (outcome != nullptr) {
      std::cout << "  reward";
      for (double r : outcome->rewards) std::cout << " " << report::format_number(r);
    }
    std::cout << "\n" << frame_text(render_frame(s, overlay)) << "\n";
  };

  eval::EpisodeResult r;
  if (checkpoint.empty()) {
    r = eval::baseline_random(suite, sc, cfg.env, cfg.seed, limit, show);
  } else {
    const auto c = ckpt::load_checkpoint(checkpoint);
    require_mode(c, cfg, checkpoint);
    r = eval::run_episode(suite, sc, c.params, c.model, cfg.env, parse_policy(policy_name, cfg.seed), limit, show);
  }
  std::cout << "result success=" << (r.success ? 1 : 0) << " steps=" << r.steps << " reacher=" << r.reacher
            << " cause=" << (r.cause == eval::TerminalCause::TargetReached ? "target" : "step_limit") << "\n";
  return 0;
}

struct GenOptions {
  int count = 5;
  int variants = 4;
  int width = 15;
  int height = 15;
  int max_width = 0;
  int max_height = 0;
  double density = 0.1;
  double min_spawn_distance = 6.0;
};

int cmd_gen_maps(const CommonOptions& o, const GenOptions& g) {
  const RunConfig cfg = build_config(o);
  const fs::path out = o.out.empty() ? fs::path("data/suite") : fs::path(o.out);
  std::vector<NamedMap> maps;
  for (int i = 0; i < g.count; ++i) {
    char id[16];
    std::snprintf(id, sizeof id, "map%02d", i);
    const std::uint64_t seed = cfg.seed * 7919u + static_cast<unsigned>(i);
    Rng size_rng(seed ^ 0x5157u);
    auto draw = [&](int lo, int hi) {
      return hi > lo ? lo + static_cast<int>(uniform_below(size_rng, static_cast<std::uint64_t>(hi - lo + 1))) : lo;
    };
    const int w = draw(g.width, g.max_width);
    const int h = draw(g.height, g.max_height);
    maps.push_back({id, random_map(w, h, g.density, seed)});
  }
  // Multi-drone placements first; the single-drone suite keeps drone 0 of each.
  VariantOptions opts;
  opts.n_drones = std::max(2, cfg.env.n_drones);
  opts.min_spawn_distance = g.min_spawn_distance;
  const auto multi = generate_variants(maps, g.variants, cfg.seed, opts);
  auto single = multi;
  for (auto& s : single) s.spawns.resize(1);

  save_map_dir(out / "maps", maps);
  write_text_file(out / "scenarios_multi.txt", serialize_scenarios(multi));
  write_text_file(out / "scenarios_single.txt", serialize_scenarios(single));
  std::cout << "wrote " << maps.size() << " maps and " << multi.size() << " scenarios to " << out.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Recurrent PPO drone target search"};
  app.require_subcommand(1);

  int rc = 0;
  CommonOptions common;
  std::string checkpoint, sweep, resume, init_from, policy = "greedy", svg;
  bool random = false, overlay = false;
  std::size_t scenario = 0;
  std::optional<int> max_steps;
  GenOptions gen;

  auto* train = app.add_subcommand("train", "Train a policy");
  add_common(train, common);
  train->add_option("--resume", resume, "Continue from a checkpoint of this run")->check(CLI::ExistingFile);
  train->add_option("--init-from", init_from, "Warm-start weights from a checkpoint")->check(CLI::ExistingFile);
  train->callback([&] { rc = cmd_train(common, resume, init_from); });

  auto* ev = app.add_subcommand("eval", "Evaluate checkpoints on the scenario suite");
  add_common(ev, common);
  ev->add_option("--checkpoint", checkpoint, "Checkpoint file");
  ev->add_option("--sweep", sweep, "Directory of checkpoints to evaluate in step order");
  ev->add_option("--policy", policy, "greedy or stochastic")->check(CLI::IsMember({"greedy", "stochastic"}));
  ev->add_flag("--random", random, "Evaluate the uniform random baseline instead");
  ev->add_option("--svg", svg, "Write the sweep curve as SVG");
  ev->callback([&] { rc = cmd_eval(common, checkpoint, sweep, policy, random, svg); });

  auto* play = app.add_subcommand("play", "Print one ASCII frame per step of an episode");
  add_common(play, common);
  play->add_option("--checkpoint", checkpoint, "Checkpoint file (random policy when omitted)");
  play->add_option("--scenario", scenario, "Scenario index in the suite");
  play->add_option("--max-steps", max_steps, "Step limit for this episode")->check(CLI::NonNegativeNumber);
  play->add_flag("--overlay", overlay, "Show signal sections on unexplored cells");
  play->add_option("--policy", policy, "greedy or stochastic")->check(CLI::IsMember({"greedy", "stochastic"}));
  play->callback([&] { rc = cmd_play(common, checkpoint, scenario, max_steps, overlay, policy); });

  auto* gm = app.add_subcommand("gen-maps", "Generate base maps and scenario files");
  add_common(gm, common);
  gm->add_option("--count", gen.count, "Number of base maps")->check(CLI::PositiveNumber);
  gm->add_option("--variants", gen.variants, "Placements per base map")->check(CLI::PositiveNumber);
  gm->add_option("--width", gen.width)->check(CLI::Range(3, 1000));
  gm->add_option("--height", gen.height)->check(CLI::Range(3, 1000));
  gm->add_option("--max-width", gen.max_width, "Draw widths uniformly from [width, max-width]")
      ->check(CLI::Range(0, 1000));
  gm->add_option("--max-height", gen.max_height, "Draw heights uniformly from [height, max-height]")
      ->check(CLI::Range(0, 1000));
  gm->add_option("--density", gen.density, "Obstacle density in [0, 0.4]");
  gm->add_option("--min-spawn-distance", gen.min_spawn_distance, "Spawns lie strictly farther from the target");
  gm->callback([&] { rc = cmd_gen_maps(common, gen); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
