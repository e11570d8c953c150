#include "dronerl/mapgen.hpp"

#include <doctest.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

const fs::path& scratch() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "dronerl_cli_tests";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

Run cli(const std::string& args) {
  const auto out = scratch() / "stdout.txt";
  const auto err = scratch() / "stderr.txt";
  const std::string cmd =
      std::string("\"") + DRONERL_CLI + "\" " + args + " >\"" + out.string() + "\" 2>\"" + err.string() + "\"";
  const int status = std::system(cmd.c_str());
  Run r;
#ifdef WEXITSTATUS
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
#else
  r.code = status;
#endif
  r.out = slurp(out);
  r.err = slurp(err);
  return r;
}

// A small generated suite and a tiny model so each update takes milliseconds.
const fs::path& fixture() {
  static const fs::path cfg = [] {
    const auto suite = scratch() / "suite";
    const Run g = cli("gen-maps --seed 3 --count 2 --variants 2 --width 10 --height 10 --min-spawn-distance 3 --out \"" +
                      suite.string() + "\"");
    REQUIRE(g.code == 0);
    const auto path = scratch() / "tiny.ini";
    std::ofstream f(path);
    f << "[env]\nmax_steps = 40\n"
      << "[model]\nencoder_widths = 16\nlstm_hidden = 16\n"
      << "[ppo]\nrollout_len = 32\nn_workers = 2\nchunk_len = 8\nminibatch_chunks = 2\nepochs = 1\n"
      << "total_env_steps = 64\n"
      << "[run]\ncheckpoint_every = 1\n"
      << "maps = " << (suite / "maps").string() << "\n";
    return path;
  }();
  return cfg;
}

std::string base(const std::string& mode = "single") {
  const auto suite = scratch() / "suite";
  return "--config \"" + fixture().string() + "\" --mode " + mode + " --set run.scenarios=" +
         (suite / ("scenarios_" + mode + ".txt")).string();
}

}  // namespace

TEST_CASE("gen-maps writes loadable suites") {
  fixture();
  const auto suite = scratch() / "suite";
  const auto single = dronerl::load_suite(suite / "maps", suite / "scenarios_single.txt");
  const auto multi = dronerl::load_suite(suite / "maps", suite / "scenarios_multi.txt");
  CHECK(single.maps.size() == 2);
  CHECK(single.scenarios.size() == 4);
  CHECK(multi.scenarios.size() == 4);
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(single.scenarios[i].spawns.size() == 1);
    CHECK(multi.scenarios[i].spawns.size() == 2);
    CHECK(single.scenarios[i].spawns[0] == multi.scenarios[i].spawns[0]);
  }
}

TEST_CASE("train writes config, metrics and checkpoints") {
  const auto out = scratch() / "train_one";
  const Run r = cli("train " + base() + " --seed 4 --out \"" + out.string() + "\"");
  INFO(r.err);
  REQUIRE(r.code == 0);
  CHECK(fs::exists(out / "config.ini"));
  const auto metrics = lines(slurp(out / "metrics.csv"));
  REQUIRE(metrics.size() == 2);
  CHECK(metrics[0] == "update,env_steps,mean_ep_reward,mean_ep_len,loss_clip,loss_vf,entropy,approx_kl,clip_frac");
  CHECK(metrics[1].rfind("1,64,", 0) == 0);
  CHECK(std::count(metrics[1].begin(), metrics[1].end(), ',') == 8);
  CHECK(fs::exists(out / "checkpoints" / "update_000001.ckpt"));
  const auto written = slurp(out / "config.ini");
  CHECK(written.find("[run]") != std::string::npos);
  CHECK(written.find("seed = 4") != std::string::npos);
}

TEST_CASE("same seed gives identical metrics and resume matches an uninterrupted run") {
  const std::string three = " --set ppo.total_env_steps=192";
  const auto a = scratch() / "det_a";
  const auto b = scratch() / "det_b";
  REQUIRE(cli("train " + base() + three + " --seed 8 --out \"" + a.string() + "\"").code == 0);
  REQUIRE(cli("train " + base() + three + " --seed 8 --out \"" + b.string() + "\"").code == 0);
  CHECK(slurp(a / "metrics.csv") == slurp(b / "metrics.csv"));
  CHECK(lines(slurp(a / "metrics.csv")).size() == 4);

  const auto c = scratch() / "det_c";
  REQUIRE(cli("train " + base() + " --set ppo.total_env_steps=128 --seed 8 --out \"" + c.string() + "\"").code == 0);
  fs::remove(c / "checkpoints" / "update_000002.ckpt");
  const Run resumed = cli("train " + base() + three + " --seed 8 --out \"" + c.string() + "\" --resume \"" +
                          (c / "checkpoints" / "update_000001.ckpt").string() + "\"");
  INFO(resumed.err);
  REQUIRE(resumed.code == 0);
  CHECK(slurp(c / "metrics.csv") == slurp(a / "metrics.csv"));
  CHECK(slurp(c / "checkpoints" / "update_000003.ckpt") == slurp(a / "checkpoints" / "update_000003.ckpt"));

  const auto d = scratch() / "det_d";
  REQUIRE(cli("train " + base() + three + " --seed 9 --out \"" + d.string() + "\"").code == 0);
  CHECK(slurp(d / "metrics.csv") != slurp(a / "metrics.csv"));
}

TEST_CASE("missing inputs fail with a message naming the path") {
  const Run r = cli("train " + base() + " --set run.maps=/no/such/maps --out \"" + (scratch() / "x").string() + "\"");
  CHECK(r.code != 0);
  CHECK(r.err.find("/no/such/maps") != std::string::npos);
  const Run bad_key = cli("train " + base() + " --set ppo.nope=1");
  CHECK(bad_key.code != 0);
  CHECK(bad_key.err.find("ppo.nope") != std::string::npos);
  const Run no_cmd = cli("");
  CHECK(no_cmd.code != 0);
}

TEST_CASE("eval prints one row per scenario and a summary") {
  const auto run = scratch() / "train_one";
  const auto ckpt = run / "checkpoints" / "update_000001.ckpt";
  REQUIRE(fs::exists(ckpt));
  const auto out = scratch() / "eval_out";
  const Run r = cli("eval " + base() + " --checkpoint \"" + ckpt.string() + "\" --out \"" + out.string() + "\"");
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto rows = lines(slurp(out / "eval.csv"));
  REQUIRE(rows.size() == 6);
  CHECK(rows[0] == "scenario,success,steps,reacher");
  int h = 0;
  for (int i = 1; i <= 4; ++i) h += rows[i].rfind(std::to_string(i - 1) + ",1,", 0) == 0;
  CHECK(rows[5].rfind("SUMMARY," + std::to_string(h) + ",4,", 0) == 0);
  CHECK(r.out.find("SUMMARY,") != std::string::npos);

  const Run sweep = cli("eval " + base() + " --sweep \"" + (run / "checkpoints").string() + "\"");
  CHECK(sweep.code == 0);
  CHECK(sweep.out.find("Training Iteration | Success Rate | Average Steps") != std::string::npos);

  const Run mismatch = cli("eval " + base("multi") + " --checkpoint \"" + ckpt.string() + "\"");
  CHECK(mismatch.code != 0);
  CHECK(mismatch.err.find("single") != std::string::npos);
  CHECK(mismatch.err.find("multi") != std::string::npos);

  const Run random = cli("eval " + base("multi") + " --random --seed 2");
  CHECK(random.code == 0);
  CHECK(random.out.find("SUMMARY,") != std::string::npos);
}

TEST_CASE("play with no steps prints the initial frame only") {
  const auto suite = scratch() / "suite";
  const auto loaded = dronerl::load_suite(suite / "maps", suite / "scenarios_single.txt");
  const auto& sc = loaded.scenarios[1];
  const auto& map = loaded.maps.at(sc.map_id);
  const Run r = cli("play " + base() + " --scenario 1 --max-steps 0");
  INFO(r.err);
  REQUIRE(r.code == 0);
  const auto out = lines(r.out);
  REQUIRE(out.size() >= static_cast<std::size_t>(map.height + 2));
  CHECK(out[0].rfind("step 0", 0) == 0);
  int obstacles = 0;
  for (int y = 0; y < map.height; ++y) {
    const auto& row = out[1 + y];
    CHECK(row.size() == static_cast<std::size_t>(map.width));
    obstacles += static_cast<int>(std::count(row.begin(), row.end(), '#'));
  }
  CHECK(obstacles == map.obstacle_count());
  CHECK(r.out.find("step 1") == std::string::npos);
  CHECK(out.back() == "result success=0 steps=0 reacher=-1 cause=step_limit");

  const Run stepped = cli("play " + base() + " --scenario 0 --max-steps 3 --overlay");
  CHECK(stepped.code == 0);
  CHECK(stepped.out.find("step 1  reward") != std::string::npos);
}
