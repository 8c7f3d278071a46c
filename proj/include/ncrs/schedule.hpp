#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string>
#include <string_view>

#include "ncrs/errors.hpp"

namespace ncrs {

enum class ScheduleKind { constant, theory_constant, cosine_decay };

inline std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::constant: return "constant";
    case ScheduleKind::theory_constant: return "theory_constant";
    case ScheduleKind::cosine_decay: return "cosine_decay";
  }
  return "?";
}

inline ScheduleKind parse_schedule_kind(std::string_view name) {
  if (name == "constant") return ScheduleKind::constant;
  if (name == "theory_constant") return ScheduleKind::theory_constant;
  if (name == "cosine_decay") return ScheduleKind::cosine_decay;
  throw ConfigError("unknown schedule kind '" + std::string(name) + "'");
}

/// Step sizes alpha_t for t = 1..T.
///
/// constant:         alpha0
/// theory_constant:  alpha0 / sqrt(k T)
/// cosine_decay:     max -> min along a half cosine over `decay_steps`, then min
struct StepSchedule {
  ScheduleKind kind = ScheduleKind::theory_constant;
  double alpha0 = 1.0;
  std::uint64_t horizon = 1;
  std::uint64_t intrinsic_k = 1;
  double max_rate = 0.0;
  double min_rate = 0.0;
  std::uint64_t decay_steps = 1;

  static StepSchedule constant(double alpha, std::uint64_t T) {
    return {.kind = ScheduleKind::constant, .alpha0 = alpha, .horizon = T};
  }
  static StepSchedule theory(double alpha0, std::uint64_t k, std::uint64_t T) {
    return {.kind = ScheduleKind::theory_constant, .alpha0 = alpha0, .horizon = T, .intrinsic_k = k};
  }
  static StepSchedule cosine(double max_rate, double min_rate, std::uint64_t decay_steps, std::uint64_t T) {
    return {.kind = ScheduleKind::cosine_decay,
            .horizon = T,
            .max_rate = max_rate,
            .min_rate = min_rate,
            .decay_steps = decay_steps};
  }

  void validate() const {
    if (horizon < 1) throw ConfigError("schedule horizon must be >= 1");
    switch (kind) {
      case ScheduleKind::constant:
      case ScheduleKind::theory_constant:
        if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw ConfigError("alpha0 must be > 0");
        if (kind == ScheduleKind::theory_constant && intrinsic_k < 1) throw ConfigError("schedule needs k >= 1");
        break;
      case ScheduleKind::cosine_decay:
        if (!(max_rate > 0.0) || !(min_rate > 0.0) || min_rate > max_rate) {
          throw ConfigError("cosine schedule needs 0 < min_rate <= max_rate");
        }
        if (decay_steps < 1) throw ConfigError("cosine schedule needs decay_steps >= 1");
        break;
    }
  }

  /// Step size at iteration t (1-based).
  double at(std::uint64_t t) const {
    if (t < 1 || t > horizon) {
      throw ContractViolation("step index " + std::to_string(t) + " outside [1, " + std::to_string(horizon) + "]");
    }
    switch (kind) {
      case ScheduleKind::constant:
        return alpha0;
      case ScheduleKind::theory_constant:
        return alpha0 / std::sqrt(static_cast<double>(intrinsic_k) * static_cast<double>(horizon));
      case ScheduleKind::cosine_decay: {
        if (t >= decay_steps) return min_rate;
        const double frac = static_cast<double>(t) / static_cast<double>(decay_steps);
        return min_rate + 0.5 * (max_rate - min_rate) * (1.0 + std::cos(std::numbers::pi * frac));
      }
    }
    return alpha0;
  }
};

inline double step_at(const StepSchedule& schedule, std::uint64_t t) { return schedule.at(t); }

}  // namespace ncrs
