#pragma once

// Metrics emission: training CSV, evaluation CSV, success-curve tables and an
// optional SVG line chart.

#include "dronerl/eval.hpp"
#include "dronerl/ppo.hpp"

#include <span>
#include <string>
#include <string_view>

namespace dronerl::report {

inline constexpr std::string_view kTrainHeader =
    "update,env_steps,mean_ep_reward,mean_ep_len,loss_clip,loss_vf,entropy,approx_kl,clip_frac";
inline constexpr std::string_view kEvalHeader = "scenario,success,steps,reacher";
inline constexpr std::string_view kCurveHeader = "env_steps,successes,scenarios,success_rate,avg_steps";

/// Shortest round-trip decimal form; identical doubles give identical text.
std::string format_number(double v);

std::string train_row(const ppo::TrainStats& s);

/// Header, one row per scenario, then "SUMMARY,h,n,r,avg_steps". The average
/// is "NA" when no episode succeeded.
std::string eval_csv(const eval::SuiteReport& report);

std::string curve_csv(std::span<const eval::CurvePoint> curve);

/// "Training Iteration | Success Rate | Average Steps" table.
std::string curve_table(std::span<const eval::CurvePoint> curve);

/// Successes against env steps as a standalone SVG document.
std::string curve_svg(std::span<const eval::CurvePoint> curve, std::string_view title);

}  // namespace dronerl::report
