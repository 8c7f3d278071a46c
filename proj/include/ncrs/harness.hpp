#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "ncrs/algorithms.hpp"
#include "ncrs/config.hpp"
#include "ncrs/errors.hpp"
#include "ncrs/objectives.hpp"
#include "ncrs/oracles.hpp"
#include "ncrs/rng.hpp"
#include "ncrs/subspace.hpp"
#include "ncrs/trajectory.hpp"

namespace ncrs {

// Random streams of a run are keyed by (seed, role) with run index 0, so two
// cells that share a seed use common random numbers for every role.
namespace roles {
inline constexpr std::string_view subspace = "subspace";
inline constexpr std::string_view nuisance = "nuisance";
inline constexpr std::string_view init = "init";
inline constexpr std::string_view directions = "directions";
inline constexpr std::string_view oracle = "oracle";
}  // namespace roles

struct RunSummary {
  std::string cell;
  std::uint64_t seed = 0;
  json config;
  double initial_grad_norm = 0.0;
  double epsilon = 0.0;
  double alpha = 0.0;
  double final_running_avg_grad_norm = 0.0;
  double best_running_avg_grad_norm = 0.0;
  double final_running_avg_sq_grad_norm = 0.0;
  std::optional<std::uint64_t> iterations_to_target;
  std::optional<std::uint64_t> horizon_to_target;
  double final_f = 0.0;
  std::uint64_t iterations = 0;
  std::uint64_t total_queries = 0;
  std::uint64_t accepted_steps = 0;
  std::vector<std::string> warnings;
  double wall_time_s = 0.0;
};

struct RunResult {
  Trajectory trajectory;
  RunSummary summary;
};

/// Objective, starting point and resolved target of one run.
struct ProblemInstance {
  std::shared_ptr<const RidgeObjective> objective;
  Vec theta1;
  double initial_grad_norm = 0.0;
  double epsilon = 0.0;
};

inline ProblemInstance build_problem(const RunConfig& rc, std::uint64_t seed) {
  const auto& p = rc.problem;
  RngStream sub_rng(seed, 0, roles::subspace);
  Subspace active = random_subspace(sub_rng, p.d, p.k);
  std::optional<NuisanceSpec> nuisance;
  if (p.m > 0) {
    RngStream nu_rng(seed, 0, roles::nuisance);
    nuisance = NuisanceSpec{random_complement(nu_rng, active, p.m), p.tau};
  }
  ProblemInstance out;
  out.objective = std::make_shared<const RidgeObjective>(std::move(active), p.inner, std::move(nuisance));
  RngStream init_rng(seed, 0, roles::init);
  const double radius = p.init_radius.value.value_or(default_initial_radius(p.k));
  out.theta1 = sample_initial_point(*out.objective, init_rng, radius);
  out.initial_grad_norm = norm(out.objective->grad(out.theta1));
  out.epsilon = rc.algorithm.epsilon_relative ? rc.algorithm.epsilon * out.initial_grad_norm : rc.algorithm.epsilon;
  return out;
}

/// alpha0 = sqrt(2 (f(theta1) - f*) / L_f): the horizon-free constant that
/// balances the two terms of the random-search rate.
inline double theory_alpha0(const RidgeObjective& obj, ConstView theta1) {
  const double gap = obj.eval(theta1) - obj.lower_bound();
  return std::sqrt(2.0 * std::max(gap, 1e-12) / obj.smoothness_constant());
}

namespace detail {

struct Execution {
  Trajectory trajectory;
  double alpha = 0.0;
  std::vector<std::string> warnings;
};

inline Execution execute(const RunConfig& rc, const ProblemInstance& prob, std::uint64_t seed, std::uint64_t T) {
  const auto& a = rc.algorithm;
  const auto& obj = *prob.objective;
  const std::size_t d = obj.ambient_dim();
  const double k = static_cast<double>(obj.intrinsic_dim());
  RngStream dir_rng(seed, 0, roles::directions);
  RngStream oracle_rng(seed, 0, roles::oracle);
  auto hook = [&obj](ConstView theta) { return Probe{obj.eval(theta), norm(obj.grad(theta))}; };
  Execution ex;
  switch (a.kind) {
    case AlgorithmKind::ncrs: {
      SignOracle oracle(prob.objective, rc.oracle.p, std::move(oracle_rng));
      StepSchedule schedule;
      switch (a.schedule) {
        case ScheduleKind::constant:
          schedule = StepSchedule::constant(*a.alpha0.value, T);
          break;
        case ScheduleKind::theory_constant:
          schedule = StepSchedule::theory(a.alpha0.value.value_or(theory_alpha0(obj, prob.theta1)),
                                          obj.intrinsic_dim(), T);
          break;
        case ScheduleKind::cosine_decay:
          schedule = StepSchedule::cosine(a.max_rate, a.min_rate, a.decay_steps, T);
          break;
      }
      ex.alpha = schedule.at(1);
      ex.trajectory = ncrs_run(oracle, d, prob.theta1, schedule, T, dir_rng, hook);
      break;
    }
    case AlgorithmKind::ncrs_vote: {
      ConfidenceOracle oracle(prob.objective, parse_confidence_kind(rc.oracle.kind), rc.oracle.link,
                              std::move(oracle_rng));
      ex.alpha = a.alpha.value.value_or(2.0 * prob.epsilon /
                                        (9.0 * std::sqrt(2.0 * std::numbers::pi) * obj.smoothness_constant() * k));
      ex.trajectory = ncrs_vote_run(oracle, d, prob.theta1, ex.alpha, rc.oracle.votes, T, dir_rng, hook);
      break;
    }
    case AlgorithmKind::rsgf: {
      ValueOracle oracle(prob.objective);
      const double cap = rsgf_max_step(obj.smoothness_constant(), obj.intrinsic_dim());
      ex.alpha = a.alpha.value.value_or(cap);
      if (ex.alpha > cap) {
        ex.warnings.push_back("rsgf step " + std::to_string(ex.alpha) + " exceeds 1/(4 L (k+2)) = " +
                              std::to_string(cap));
      }
      ex.trajectory = rsgf_run(oracle, d, prob.theta1, ex.alpha, a.mu, T, dir_rng, hook);
      break;
    }
  }
  return ex;
}

inline double final_running_average(const Trajectory& traj) {
  const auto avg = running_average_grad_norm(traj);
  return avg.empty() ? std::numeric_limits<double>::quiet_NaN() : avg.back();
}

/// Horizons T_j = round(T_min 2^(j / s)), strictly increasing, capped at T_max.
inline std::vector<std::uint64_t> horizon_grid(const HorizonSearch& hs) {
  std::vector<std::uint64_t> grid;
  for (std::uint64_t j = 0;; ++j) {
    const double raw = static_cast<double>(hs.T_min) *
                       std::exp2(static_cast<double>(j) / static_cast<double>(hs.steps_per_doubling));
    auto T = static_cast<std::uint64_t>(std::llround(raw));
    if (T >= hs.T_max) {
      if (grid.empty() || grid.back() < hs.T_max) grid.push_back(hs.T_max);
      break;
    }
    if (grid.empty() || T > grid.back()) grid.push_back(T);
  }
  return grid;
}

}  // namespace detail

/// One run: builds the problem from seeded streams, runs the configured
/// optimizer and summarizes the trajectory.
///
/// With horizon search enabled, the run is repeated on a geometric grid of
/// horizons (each a fresh run with the same streams, so the step size
/// alpha0 / sqrt(k T) follows T) and the smallest horizon whose final
/// running-average gradient norm is <= epsilon is reported as
/// horizon_to_target. The grid is probed by doubling, then bisected.
inline RunResult run_one(const RunConfig& rc, std::uint64_t seed) {
  const auto start = std::chrono::steady_clock::now();
  const ProblemInstance prob = build_problem(rc, seed);
  RunResult result;
  auto& s = result.summary;
  s.cell = cell_hash(rc.echo);
  s.seed = seed;
  s.config = rc.echo;
  s.initial_grad_norm = prob.initial_grad_norm;
  s.epsilon = prob.epsilon;

  detail::Execution ex;
  const auto& hs = rc.algorithm.horizon_search;
  if (hs.enabled) {
    const auto grid = detail::horizon_grid(hs);
    std::map<std::size_t, detail::Execution> cache;
    auto passes = [&](std::size_t j) {
      auto it = cache.find(j);
      if (it == cache.end()) it = cache.emplace(j, detail::execute(rc, prob, seed, grid[j])).first;
      return detail::final_running_average(it->second.trajectory) <= prob.epsilon;
    };
    const std::size_t stride = static_cast<std::size_t>(hs.steps_per_doubling);
    std::optional<std::size_t> lo;
    std::optional<std::size_t> hi;
    for (std::size_t j = 0;; j = std::min(j + stride, grid.size() - 1)) {
      if (passes(j)) {
        hi = j;
        break;
      }
      lo = j;
      if (j == grid.size() - 1) break;
    }
    if (hi) {
      std::size_t left = lo ? *lo + 1 : 0;
      std::size_t right = *hi;
      while (left < right) {
        const std::size_t mid = left + (right - left) / 2;
        if (passes(mid)) {
          right = mid;
        } else {
          left = mid + 1;
        }
      }
      s.horizon_to_target = grid[right];
      ex = std::move(cache.at(right));
    } else {
      ex = std::move(cache.at(grid.size() - 1));
    }
  } else {
    ex = detail::execute(rc, prob, seed, rc.algorithm.T);
  }

  const Trajectory& traj = ex.trajectory;
  const auto avg = running_average_grad_norm(traj);
  const auto avg_sq = running_average_sq_grad_norm(traj);
  s.alpha = ex.alpha;
  s.warnings = std::move(ex.warnings);
  s.final_running_avg_grad_norm = avg.back();
  s.best_running_avg_grad_norm = *std::min_element(avg.begin(), avg.end());
  s.final_running_avg_sq_grad_norm = avg_sq.back();
  s.iterations_to_target = iterations_to_target(traj, prob.epsilon);
  s.final_f = prob.objective->eval(traj.final_theta);
  s.iterations = traj.iterations;
  s.total_queries = traj.total_queries;
  s.accepted_steps = traj.accepted_steps;
  result.trajectory = std::move(ex.trajectory);
  s.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

inline json optional_to_json(const std::optional<std::uint64_t>& v) { return v ? json(*v) : json(nullptr); }

/// Summary as JSON; `with_timing` adds the non-deterministic wall time.
inline json summary_to_json(const RunSummary& s, bool with_timing) {
  json j = {
      {"cell", s.cell},
      {"seed", s.seed},
      {"initial_grad_norm", s.initial_grad_norm},
      {"epsilon", s.epsilon},
      {"alpha", s.alpha},
      {"final_running_avg_grad_norm", s.final_running_avg_grad_norm},
      {"best_running_avg_grad_norm", s.best_running_avg_grad_norm},
      {"final_running_avg_sq_grad_norm", s.final_running_avg_sq_grad_norm},
      {"iterations_to_target", optional_to_json(s.iterations_to_target)},
      {"horizon_to_target", optional_to_json(s.horizon_to_target)},
      {"final_f", s.final_f},
      {"iterations", s.iterations},
      {"total_queries", s.total_queries},
      {"accepted_steps", s.accepted_steps},
      {"warnings", s.warnings},
  };
  if (with_timing) {
    j["config"] = s.config;
    j["wall_time_s"] = s.wall_time_s;
  }
  return j;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

/// `t,f,grad_norm,accepted,queries`, LF line endings, 17 significant digits.
inline void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& traj) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "t,f,grad_norm,accepted,queries\n";
  for (const auto& r : traj.records) {
    out << r.t << ',' << format_double(r.f) << ',' << format_double(r.grad_norm) << ',' << (r.accepted ? 1 : 0)
        << ',' << r.queries << '\n';
  }
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

inline std::filesystem::path trajectory_path(const std::filesystem::path& outdir, const RunSummary& s) {
  return outdir / s.cell / (std::to_string(s.seed) + ".csv");
}

struct SweepRun {
  std::size_t cell_index = 0;
  std::uint64_t seed = 0;
  std::optional<RunSummary> summary;
  std::string error;
};

struct SweepResult {
  std::vector<SweepRun> runs;
  json aggregate;
};

namespace detail {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t n = 0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  out.n = xs.size();
  if (xs.empty()) return out;
  double sum = 0.0;
  for (const double x : xs) sum += x;
  out.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (const double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return out;
}

inline json stat_json(const std::vector<double>& xs) {
  const auto ms = mean_stderr(xs);
  if (ms.n == 0) return {{"mean", nullptr}, {"stderr", nullptr}, {"n", 0}};
  return {{"mean", ms.mean}, {"stderr", ms.stderr_}, {"n", ms.n}};
}

}  // namespace detail

/// Per-cell mean and standard error of the run metrics.
inline json aggregate_runs(const SweepPlan& plan, const std::vector<SweepRun>& runs) {
  json cells = json::array();
  for (std::size_t c = 0; c < plan.cells.size(); ++c) {
    std::vector<double> itt, htt, final_avg, best_avg, final_sq, final_f, queries;
    json per_run = json::array();
    json failures = json::array();
    for (const auto& r : runs) {
      if (r.cell_index != c) continue;
      if (!r.summary) {
        failures.push_back({{"seed", r.seed}, {"error", r.error}});
        continue;
      }
      const auto& s = *r.summary;
      if (s.iterations_to_target) itt.push_back(static_cast<double>(*s.iterations_to_target));
      if (s.horizon_to_target) htt.push_back(static_cast<double>(*s.horizon_to_target));
      final_avg.push_back(s.final_running_avg_grad_norm);
      best_avg.push_back(s.best_running_avg_grad_norm);
      final_sq.push_back(s.final_running_avg_sq_grad_norm);
      final_f.push_back(s.final_f);
      queries.push_back(static_cast<double>(s.total_queries));
      per_run.push_back(summary_to_json(s, false));
    }
    cells.push_back({
        {"cell", plan.cells[c].hash},
        {"config", plan.cells[c].config},
        {"runs", per_run},
        {"failures", failures},
        {"metrics",
         {
             {"iterations_to_target", detail::stat_json(itt)},
             {"horizon_to_target", detail::stat_json(htt)},
             {"final_running_avg_grad_norm", detail::stat_json(final_avg)},
             {"best_running_avg_grad_norm", detail::stat_json(best_avg)},
             {"final_running_avg_sq_grad_norm", detail::stat_json(final_sq)},
             {"final_f", detail::stat_json(final_f)},
             {"total_queries", detail::stat_json(queries)},
         }},
    });
  }
  return {{"seeds", plan.seeds}, {"cells", cells}};
}

/// Runs every (cell, seed) pair on `workers` threads. Results are placed by
/// run index (cell-major, then seed), so the aggregate does not depend on the
/// worker count. A failing run is recorded and the sweep continues. When
/// `outdir` is set, writes `<outdir>/<cell>/<seed>.csv` per run and
/// `<outdir>/aggregate.json`.
inline SweepResult run_sweep(const SweepPlan& plan, unsigned workers,
                             const std::optional<std::filesystem::path>& outdir = std::nullopt) {
  std::vector<RunConfig> configs;
  configs.reserve(plan.cells.size());
  for (const auto& cell : plan.cells) configs.push_back(parse_run_config(cell.config));

  SweepResult result;
  result.runs.resize(plan.cells.size() * plan.seeds.size());
  for (std::size_t c = 0; c < plan.cells.size(); ++c) {
    for (std::size_t s = 0; s < plan.seeds.size(); ++s) {
      auto& r = result.runs[c * plan.seeds.size() + s];
      r.cell_index = c;
      r.seed = plan.seeds[s];
    }
  }
  if (outdir) std::filesystem::create_directories(*outdir);

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= result.runs.size()) return;
      auto& r = result.runs[i];
      try {
        RunResult rr = run_one(configs[r.cell_index], r.seed);
        if (outdir) {
          const auto path = trajectory_path(*outdir, rr.summary);
          std::filesystem::create_directories(path.parent_path());
          write_trajectory_csv(path, rr.trajectory);
        }
        r.summary = std::move(rr.summary);
      } catch (const std::exception& e) {
        r.error = e.what();
      }
    }
  };
  const unsigned n_threads = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(result.runs.size())));
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < n_threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  result.aggregate = aggregate_runs(plan, result.runs);
  if (outdir) {
    std::ofstream out(*outdir / "aggregate.json", std::ios::binary);
    out << result.aggregate.dump(2) << '\n';
  }
  return result;
}

}  // namespace ncrs
