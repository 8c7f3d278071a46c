#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ncrs/errors.hpp"
#include "ncrs/vec.hpp"

namespace ncrs {

/// Instrumentation values for one iterate, filled by a harness hook.
struct Probe {
  double f = std::numeric_limits<double>::quiet_NaN();
  double grad_norm = std::numeric_limits<double>::quiet_NaN();
};

/// Hook that records nothing.
struct NoInstrument {
  Probe operator()(ConstView) const noexcept { return {}; }
};

/// Row t describes the iterate theta^t, whether step t was accepted, and the
/// cumulative query count after step t.
struct StepRecord {
  std::uint64_t t = 0;
  double f = 0.0;
  double grad_norm = 0.0;
  bool accepted = false;
  std::uint64_t queries = 0;
};

struct Trajectory {
  std::vector<StepRecord> records;
  Vec final_theta;
  std::uint64_t iterations = 0;
  std::uint64_t total_queries = 0;
  std::uint64_t accepted_steps = 0;
};

/// Every iteration is logged below 1e5 iterations, otherwise every ceil(T / 1e4).
constexpr std::uint64_t log_stride(std::uint64_t T) noexcept {
  return T < 100000 ? 1 : (T + 9999) / 10000;
}

constexpr bool is_logged(std::uint64_t t, std::uint64_t T, std::uint64_t stride) noexcept {
  return (t - 1) % stride == 0 || t == T;
}

/// Running (Cesaro) averages of grad_norm over the logged rows.
inline std::vector<double> running_average_grad_norm(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.records.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    sum += traj.records[i].grad_norm;
    out.push_back(sum / static_cast<double>(i + 1));
  }
  return out;
}

/// Same for grad_norm^2.
inline std::vector<double> running_average_sq_grad_norm(const Trajectory& traj) {
  std::vector<double> out;
  out.reserve(traj.records.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < traj.records.size(); ++i) {
    sum += traj.records[i].grad_norm * traj.records[i].grad_norm;
    out.push_back(sum / static_cast<double>(i + 1));
  }
  return out;
}

/// First index i (0-based) of `running` with running[i] <= epsilon.
inline std::optional<std::size_t> first_at_or_below(const std::vector<double>& running, double epsilon) {
  if (!(epsilon > 0.0)) throw DomainError("epsilon must be > 0");
  for (std::size_t i = 0; i < running.size(); ++i) {
    if (running[i] <= epsilon) return i;
  }
  return std::nullopt;
}

/// Smallest logged t whose running-average gradient norm is <= epsilon.
inline std::optional<std::uint64_t> iterations_to_target(const Trajectory& traj, double epsilon) {
  const auto idx = first_at_or_below(running_average_grad_norm(traj), epsilon);
  if (!idx) return std::nullopt;
  return traj.records[*idx].t;
}

}  // namespace ncrs
