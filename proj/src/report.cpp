#include "dronerl/report.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

namespace dronerl::report {

std::string format_number(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

std::string train_row(const ppo::TrainStats& s) {
  std::string out = std::to_string(s.update) + "," + std::to_string(s.env_steps);
  for (double v : {s.mean_episode_reward, s.mean_episode_length, s.loss_clip, s.loss_value, s.entropy,
                   s.approx_kl, s.clip_fraction}) {
    out += "," + format_number(v);
  }
  return out;
}

std::string eval_csv(const eval::SuiteReport& report) {
  std::string out(kEvalHeader);
  out += "\n";
  for (std::size_t i = 0; i < report.results.size(); ++i) {
    const auto& r = report.results[i];
    out += std::to_string(i) + "," + (r.success ? "1" : "0") + "," + std::to_string(r.steps) + "," +
           std::to_string(r.reacher) + "\n";
  }
  out += "SUMMARY," + std::to_string(report.successes) + "," + std::to_string(report.results.size()) + "," +
         format_number(report.success_rate) + "," +
         (report.average_steps ? format_number(*report.average_steps) : std::string("NA")) + "\n";
  return out;
}

std::string curve_csv(std::span<const eval::CurvePoint> curve) {
  std::string out(kCurveHeader);
  out += "\n";
  for (const auto& p : curve) {
    out += std::to_string(p.env_steps) + "," + std::to_string(p.successes) + "," + std::to_string(p.scenarios) +
           "," + format_number(p.success_rate) + "," +
           (p.average_steps ? format_number(*p.average_steps) : std::string("NA")) + "\n";
  }
  return out;
}

std::string curve_table(std::span<const eval::CurvePoint> curve) {
  std::string out = "Training Iteration | Success Rate | Average Steps\n";
  char buf[128];
  for (const auto& p : curve) {
    if (p.average_steps) {
      std::snprintf(buf, sizeof buf, "%18lld | %11.0f%% | %13.2f\n", static_cast<long long>(p.env_steps),
                    100.0 * p.success_rate, *p.average_steps);
    } else {
      std::snprintf(buf, sizeof buf, "%18lld | %11.0f%% | %13s\n", static_cast<long long>(p.env_steps),
                    100.0 * p.success_rate, "-");
    }
    out += buf;
  }
  return out;
}

std::string curve_svg(std::span<const eval::CurvePoint> curve, std::string_view title) {
  constexpr double W = 640, H = 400, L = 60, R = 20, T = 40, B = 50;
  std::int64_t max_x = 1;
  int max_y = 1;
  for (const auto& p : curve) {
    max_x = std::max(max_x, p.env_steps);
    max_y = std::max(max_y, p.scenarios);
  }
  auto px = [&](double x) { return L + (W - L - R) * x / static_cast<double>(max_x); };
  auto py = [&](double y) { return H - B - (H - T - B) * y / max_y; };

  char buf[1024];
  std::string out;
  std::snprintf(buf, sizeof buf,
                "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"%g\" height=\"%g\" viewBox=\"0 0 %g %g\">\n", W,
                H, W, H);
  out += buf;
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  std::snprintf(buf, sizeof buf, "<text x=\"%g\" y=\"24\" font-family=\"sans-serif\" font-size=\"16\">", L);
  out += buf;
  out += std::string(title) + "</text>\n";
  std::snprintf(buf, sizeof buf,
                "<path d=\"M%g %g V%g H%g\" fill=\"none\" stroke=\"black\"/>\n"
                "<text x=\"%g\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\">env steps (max %lld)</text>\n"
                "<text x=\"10\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\">%d</text>\n"
                "<text x=\"10\" y=\"%g\" font-family=\"sans-serif\" font-size=\"12\">0</text>\n",
                L, T, H - B, W - R, (W + L) / 2 - 60, H - 15, static_cast<long long>(max_x), py(max_y) + 4, max_y,
                py(0) + 4);
  out += buf;
  if (!curve.empty()) {
    out += "<polyline fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\"";
    for (const auto& p : curve) {
      std::snprintf(buf, sizeof buf, "%.1f,%.1f ", px(static_cast<double>(p.env_steps)), py(p.successes));
      out += buf;
    }
    out += "\"/>\n";
  }
  out += "</svg>\n";
  return out;
}

}  // namespace dronerl::report
