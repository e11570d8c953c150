#include "dronerl/errors.hpp"
#include "dronerl/eval.hpp"
#include "dronerl/report.hpp"
#include "support.hpp"

#include <doctest.h>

#include <sstream>

using namespace dronerl;
using namespace dronerl::eval;
using namespace dronerl::testing;

namespace {

std::vector<EpisodeResult> outcomes(int successes, int total, int steps = 100) {
  std::vector<EpisodeResult> r(static_cast<std::size_t>(total));
  for (int i = 0; i < total; ++i) {
    r[i].success = i < successes;
    r[i].steps = i < successes ? steps : 200;
  }
  return r;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

}  // namespace

TEST_CASE("success rate is h over n") {
  CHECK(success_rate(outcomes(93, 100)) == doctest::Approx(0.93));
  CHECK(success_rate(outcomes(86, 100)) == doctest::Approx(0.86));
  CHECK(success_rate(outcomes(0, 20)) == 0.0);
  CHECK(success_count(outcomes(7, 20)) == 7);
  CHECK_THROWS_AS(success_rate(std::vector<EpisodeResult>{}), UsageError);
}

TEST_CASE("average steps counts successful episodes only") {
  auto r = outcomes(2, 5);
  r[0].steps = 100;
  r[1].steps = 200;
  CHECK(*average_steps(r) == doctest::Approx(150.0));
  CHECK_FALSE(average_steps(outcomes(0, 10)).has_value());

  // 93 of 100 succeed with 17095 steps in total.
  auto big = outcomes(93, 100);
  for (int i = 0; i < 93; ++i) big[i].steps = i < 17 ? 183 : 184;
  CHECK(std::abs(*average_steps(big) - 183.82) < 0.01);

  Rng rng(3);
  const double before = *average_steps(big);
  for (int i = 93; i < 100; ++i) big[i].steps = static_cast<int>(uniform_below(rng, 10000));
  CHECK(*average_steps(big) == before);
}

TEST_CASE("network episodes are deterministic and respect the step budget") {
  const auto suite = small_suite();
  const auto model = tiny_model();
  const auto params = net::init_params<float>(model);
  const auto env = small_env();
  for (const auto& sc : suite.scenarios) {
    const auto a = run_episode(suite, sc, params, model, env, {PolicyMode::Stochastic, 4}, 30);
    const auto b = run_episode(suite, sc, params, model, env, {PolicyMode::Stochastic, 4}, 30);
    CHECK(a.steps == b.steps);
    CHECK(a.cell_counts == b.cell_counts);
    CHECK(a.steps <= 30);
    CHECK(a.success == (a.cause == TerminalCause::TargetReached));
    CHECK((a.success ? a.reacher == 0 : a.reacher == -1));
  }
  int frames = 0;
  const auto none = run_episode(suite, suite.scenarios[0], params, model, env, {}, 0,
                                [&](const EnvState&, const StepOutcome* o) {
                                  CHECK(o == nullptr);
                                  ++frames;
                                });
  CHECK(frames == 1);
  CHECK(none.steps == 0);
  CHECK_FALSE(none.success);
  CHECK_THROWS_AS(run_episode(suite, suite.scenarios[0], params, model, small_env(Mode::Multi), {}, 5),
                  UsageError);
  CHECK_THROWS_AS(run_episode(suite, suite.scenarios[0], params, model, env, {}, -1), UsageError);
}

TEST_CASE("random baseline never picks an obstacle and is seeded") {
  const auto suite = small_suite(2);
  const auto env = small_env(Mode::Multi);
  int steps = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    for (const auto& sc : suite.scenarios) {
      const auto a = baseline_random(suite, sc, env, seed, 30, [&](const EnvState&, const StepOutcome* o) {
        if (!o) return;
        ++steps;
        for (const auto& i : o->info) CHECK_FALSE(i.blocked);
      });
      CHECK(a.steps == baseline_random(suite, sc, env, seed, 30).steps);
    }
  }
  CHECK(steps > 0);
  const auto r1 = evaluate_random(suite, env, 11);
  const auto r2 = evaluate_random(suite, env, 11);
  CHECK(report::eval_csv(r1) == report::eval_csv(r2));
}

TEST_CASE("suite evaluation recounts from its rows") {
  const auto suite = small_suite();
  const auto model = tiny_model();
  const auto params = net::init_params<float>(model);
  const auto rep = evaluate(suite, params, model, small_env(), {}, "init");
  CHECK(rep.results.size() == suite.scenarios.size());
  CHECK(rep.successes == success_count(rep.results));
  CHECK(rep.success_rate == success_rate(rep.results));

  const auto rows = lines_of(report::eval_csv(rep));
  REQUIRE(rows.size() == suite.scenarios.size() + 2);
  CHECK(rows.front() == "scenario,success,steps,reacher");
  int h = 0;
  for (std::size_t i = 1; i + 1 < rows.size(); ++i) h += rows[i].rfind(std::to_string(i - 1) + ",1,", 0) == 0;
  CHECK(rows.back().rfind("SUMMARY," + std::to_string(h) + ",3,", 0) == 0);
}

TEST_CASE("report formats") {
  SuiteReport rep;
  rep.results = outcomes(1, 2, 42);
  rep.results[0].reacher = 1;
  rep.successes = 1;
  rep.success_rate = 0.5;
  rep.average_steps = 42.0;
  CHECK(report::eval_csv(rep) == "scenario,success,steps,reacher\n0,1,42,1\n1,0,200,-1\nSUMMARY,1,2,0.5,42\n");
  rep.average_steps.reset();
  CHECK(lines_of(report::eval_csv(rep)).back() == "SUMMARY,1,2,0.5,NA");

  ppo::TrainStats s;
  s.update = 3;
  s.env_steps = 12288;
  s.mean_episode_reward = -12.5;
  s.entropy = 2.0;
  CHECK(report::train_row(s) == "3,12288,-12.5,0,0,0,2,0,0");
  CHECK(std::string(report::kTrainHeader) ==
        "update,env_steps,mean_ep_reward,mean_ep_len,loss_clip,loss_vf,entropy,approx_kl,clip_frac");
}

TEST_CASE("checkpoint sweep orders by training step") {
  std::vector<CheckpointRef> refs{{300, "c"}, {100, "a"}, {200, "b"}};
  std::vector<std::string> visited;
  const auto curve = sweep_checkpoints(refs, [&](const CheckpointRef& r) {
    visited.push_back(r.id);
    SuiteReport rep;
    rep.results = outcomes(static_cast<int>(r.env_steps / 100), 4);
    rep.successes = success_count(rep.results);
    rep.success_rate = success_rate(rep.results);
    rep.average_steps = average_steps(rep.results);
    return rep;
  });
  CHECK(visited == std::vector<std::string>{"a", "b", "c"});
  REQUIRE(curve.size() == 3);
  CHECK(curve[2].successes == 3);
  CHECK(curve[0].scenarios == 4);
  const auto csv = lines_of(report::curve_csv(curve));
  CHECK(csv[1] == "100,1,4,0.25,100");
  CHECK(report::curve_table(curve).find("Training Iteration | Success Rate | Average Steps") == 0);
  const auto svg = report::curve_svg(curve, "run");
  CHECK(svg.find("<svg") == 0);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK_THROWS_AS(sweep_checkpoints({}, {}), UsageError);
}
