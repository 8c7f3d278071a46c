#pragma once

#include <cstdint>
#include <string>

#include "ncrs/errors.hpp"
#include "ncrs/oracles.hpp"
#include "ncrs/rng.hpp"
#include "ncrs/schedule.hpp"
#include "ncrs/trajectory.hpp"
#include "ncrs/vec.hpp"

namespace ncrs {

template <class F>
concept Instrument = requires(F& f, ConstView theta) {
  { f(theta) } -> std::convertible_to<Probe>;
};

namespace detail {

inline void check_run_inputs(std::size_t d, ConstView theta1, std::uint64_t T, const char* where) {
  if (d == 0) throw ConfigError(std::string(where) + ": d must be >= 1");
  if (T < 1) throw ConfigError(std::string(where) + ": T must be >= 1");
  require_same_dim(theta1.size(), d, where);
}

template <class Decide, Instrument Hook>
Trajectory improve_or_stay(std::size_t d, ConstView theta1, std::uint64_t T, RngStream& rng, Hook& instrument,
                           Decide&& decide) {
  Trajectory traj;
  const std::uint64_t stride = log_stride(T);
  traj.records.reserve(static_cast<std::size_t>(T / stride + 1));
  Vec theta(theta1.begin(), theta1.end());
  Vec direction(d);
  Vec candidate(d);
  for (std::uint64_t t = 1; t <= T; ++t) {
    const double alpha = decide.step(t);
    fill_gaussian(rng, direction);
    for (std::size_t i = 0; i < d; ++i) candidate[i] = theta[i] + alpha * direction[i];
    const bool accepted = decide(theta, candidate);
    if (is_logged(t, T, stride)) {
      const Probe probe = instrument(theta);
      traj.records.push_back({t, probe.f, probe.grad_norm, accepted, decide.queries()});
    }
    if (accepted) {
      theta.swap(candidate);
      ++traj.accepted_steps;
    }
  }
  traj.final_theta = std::move(theta);
  traj.iterations = T;
  traj.total_queries = decide.queries();
  return traj;
}

}  // namespace detail

/// Noisy-comparison random search. Each iteration draws s ~ N(0, I_d), asks
/// the oracle once about (theta, theta + alpha_t s) and moves iff the answer
/// is +1. The oracle is the only source of information about the objective.
template <SignComparator Oracle, Instrument Hook = NoInstrument>
Trajectory ncrs_run(Oracle& oracle, std::size_t d, ConstView theta1, const StepSchedule& schedule, std::uint64_t T,
                    RngStream& rng, Hook instrument = {}) {
  detail::check_run_inputs(d, theta1, T, "ncrs_run");
  schedule.validate();
  if (T > schedule.horizon) throw ConfigError("ncrs_run: T exceeds the schedule horizon");
  const std::uint64_t base = oracle.queries();
  struct {
    Oracle& oracle;
    const StepSchedule& schedule;
    std::uint64_t base;
    double step(std::uint64_t t) const { return schedule.at(t); }
    bool operator()(ConstView x, ConstView y) { return oracle.compare(x, y) == 1; }
    std::uint64_t queries() const { return oracle.queries() - base; }
  } decide{oracle, schedule, base};
  return detail::improve_or_stay(d, theta1, T, rng, instrument, decide);
}

/// Random search with a confidence-weighted vote: N scores on the same pair,
/// accept iff their sum is strictly positive.
template <ConfidenceComparator Oracle, Instrument Hook = NoInstrument>
Trajectory ncrs_vote_run(Oracle& oracle, std::size_t d, ConstView theta1, double alpha, std::uint64_t N,
                         std::uint64_t T, RngStream& rng, Hook instrument = {}) {
  detail::check_run_inputs(d, theta1, T, "ncrs_vote_run");
  if (N < 1) throw ConfigError("ncrs_vote_run: N must be >= 1");
  if (!(alpha > 0.0)) throw ConfigError("ncrs_vote_run: alpha must be > 0");
  const std::uint64_t base = oracle.queries();
  struct {
    Oracle& oracle;
    double alpha;
    std::uint64_t votes;
    std::uint64_t base;
    double step(std::uint64_t) const { return alpha; }
    bool operator()(ConstView x, ConstView y) {
      double sum = 0.0;
      for (std::uint64_t n = 0; n < votes; ++n) sum += oracle.compare(x, y);
      return sum > 0.0;
    }
    std::uint64_t queries() const { return oracle.queries() - base; }
  } decide{oracle, alpha, N, base};
  return detail::improve_or_stay(d, theta1, T, rng, instrument, decide);
}

/// Largest step size covered by the two-point descent lemma, 1 / (4 L (k + 2)).
inline double rsgf_max_step(double smoothness, std::size_t k) {
  return 1.0 / (4.0 * smoothness * (static_cast<double>(k) + 2.0));
}

/// Two-point random gradient-free method:
/// theta <- theta - alpha (h(theta + mu s) - h(theta)) / mu * s.
template <ValueQuery Oracle, Instrument Hook = NoInstrument>
Trajectory rsgf_run(Oracle& oracle, std::size_t d, ConstView theta1, double alpha, double mu, std::uint64_t T,
                    RngStream& rng, Hook instrument = {}) {
  detail::check_run_inputs(d, theta1, T, "rsgf_run");
  if (!(mu > 0.0)) throw ConfigError("rsgf_run: mu must be > 0");
  if (!(alpha > 0.0)) throw ConfigError("rsgf_run: alpha must be > 0");
  const std::uint64_t base = oracle.queries();
  Trajectory traj;
  const std::uint64_t stride = log_stride(T);
  traj.records.reserve(static_cast<std::size_t>(T / stride + 1));
  Vec theta(theta1.begin(), theta1.end());
  Vec direction(d);
  Vec probe_point(d);
  for (std::uint64_t t = 1; t <= T; ++t) {
    fill_gaussian(rng, direction);
    for (std::size_t i = 0; i < d; ++i) probe_point[i] = theta[i] + mu * direction[i];
    const double here = oracle.value(theta);
    const double there = oracle.value(probe_point);
    const double slope = (there - here) / mu;
    if (is_logged(t, T, stride)) {
      const Probe probe = instrument(theta);
      traj.records.push_back({t, probe.f, probe.grad_norm, true, oracle.queries() - base});
    }
    axpy(-alpha * slope, direction, theta);
    ++traj.accepted_steps;
  }
  traj.final_theta = std::move(theta);
  traj.iterations = T;
  traj.total_queries = oracle.queries() - base;
  return traj;
}

}  // namespace ncrs
