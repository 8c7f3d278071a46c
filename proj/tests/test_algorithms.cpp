#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "ncrs/algorithms.hpp"
#include "ncrs/oracles.hpp"
#include "ncrs/schedule.hpp"
#include "ncrs/trajectory.hpp"
#include "ncrs/vote_params.hpp"

using namespace ncrs;

namespace {

struct ConstantSign {
  int answer;
  std::uint64_t n = 0;
  int compare(ConstView, ConstView) {
    ++n;
    return answer;
  }
  std::uint64_t queries() const { return n; }
};

struct ScriptedScores {
  std::vector<double> script;
  std::uint64_t n = 0;
  double compare(ConstView, ConstView) { return script[n++ % script.size()]; }
  std::uint64_t queries() const { return n; }
};

struct ConstantValue {
  std::uint64_t n = 0;
  double value(ConstView) {
    ++n;
    return 3.0;
  }
  std::uint64_t queries() const { return n; }
};

/// Records every iterate handed to the hook.
struct Recorder {
  std::shared_ptr<std::vector<Vec>> seen = std::make_shared<std::vector<Vec>>();
  Probe operator()(ConstView theta) const {
    seen->emplace_back(theta.begin(), theta.end());
    return {0.0, 0.0};
  }
};

struct Metric {
  std::shared_ptr<const RidgeObjective> obj;
  Probe operator()(ConstView theta) const { return {obj->eval(theta), norm(obj->grad(theta))}; }
};

std::shared_ptr<const RidgeObjective> objective(InnerKind kind, std::size_t d, std::size_t k, std::uint64_t seed = 1) {
  RngStream rng(seed, 0, "alg-test");
  const double a = kind == InnerKind::quadratic_cosine ? 1.0 : 0.0;
  return std::make_shared<const RidgeObjective>(random_subspace(rng, d, k), InnerFunction{kind, a, 3.0});
}

}  // namespace

TEST(Schedule, Examples) {
  EXPECT_DOUBLE_EQ(step_at(StepSchedule::theory(1.0, 4, 100), 1), 0.05);
  EXPECT_DOUBLE_EQ(step_at(StepSchedule::theory(1.0, 4, 100), 100), 0.05);
  const auto c = StepSchedule::constant(0.01, 1000);
  for (std::uint64_t t : {1u, 500u, 1000u}) EXPECT_EQ(step_at(c, t), 0.01);
  const auto cos = StepSchedule::cosine(4e-2, 4e-3, 480, 1000);
  EXPECT_DOUBLE_EQ(step_at(cos, 480), 4e-3);
  EXPECT_DOUBLE_EQ(step_at(cos, 1000), 4e-3);
  EXPECT_NEAR(step_at(cos, 240), 0.5 * (4e-2 + 4e-3), 1e-15);
  EXPECT_LT(step_at(cos, 1), 4e-2);
  EXPECT_GT(step_at(cos, 1), step_at(cos, 2));
}

TEST(Schedule, OutOfRangeAndInvalid) {
  const auto s = StepSchedule::theory(1.0, 4, 100);
  EXPECT_THROW(step_at(s, 0), ContractViolation);
  EXPECT_THROW(step_at(s, 101), ContractViolation);
  EXPECT_THROW(StepSchedule::constant(0.0, 10).validate(), ConfigError);
  EXPECT_THROW(StepSchedule::cosine(1e-3, 1e-2, 10, 10).validate(), ConfigError);
  EXPECT_EQ(parse_schedule_kind("cosine_decay"), ScheduleKind::cosine_decay);
  EXPECT_THROW(parse_schedule_kind("linear"), ConfigError);
}

TEST(Ncrs, RejectingOracleNeverMoves) {
  ConstantSign oracle{-1};
  RngStream rng(1, 1);
  const Vec theta1{1.0, -2.0, 3.0};
  const auto traj = ncrs_run(oracle, 3, theta1, StepSchedule::constant(0.1, 200), 200, rng);
  EXPECT_EQ(traj.final_theta, theta1);
  EXPECT_EQ(traj.accepted_steps, 0u);
  EXPECT_EQ(traj.total_queries, 200u);
}

TEST(Ncrs, AcceptingOracleIsRandomWalk) {
  ConstantSign oracle{+1};
  RngStream rng(2, 2);
  RngStream replay(2, 2);
  const std::size_t d = 4;
  Vec expected(d, 0.5);
  const auto sched = StepSchedule::cosine(0.1, 0.01, 30, 50);
  const auto traj = ncrs_run(oracle, d, expected, sched, 50, rng);
  for (std::uint64_t t = 1; t <= 50; ++t) {
    const Vec s = gaussian_vector(replay, d);
    for (std::size_t i = 0; i < d; ++i) expected[i] = expected[i] + sched.at(t) * s[i];
  }
  EXPECT_EQ(traj.final_theta, expected);
  EXPECT_EQ(traj.accepted_steps, 50u);
}

TEST(Ncrs, MatchesStraightLineReference) {
  const std::size_t d = 10;
  const auto obj = objective(InnerKind::pure_quadratic, d, 10);
  const std::uint64_t T = 10000;
  const auto sched = StepSchedule::theory(1.0, 10, T);
  RngStream init(3, 0, "init");
  const Vec theta1 = sample_initial_point(*obj, init, default_initial_radius(10));

  SignOracle oracle(obj, 0.5, RngStream(3, 0, "oracle"));
  RngStream dirs(3, 0, "directions");
  const auto traj = ncrs_run(oracle, d, theta1, sched, T, dirs, Metric{obj});

  // independent implementation: perfect comparisons, same direction stream
  RngStream ref_dirs(3, 0, "directions");
  Vec theta = theta1;
  double sum = 0.0;
  std::uint64_t accepted = 0;
  const double alpha = 1.0 / std::sqrt(10.0 * T);
  for (std::uint64_t t = 1; t <= T; ++t) {
    Vec cand(d);
    for (std::size_t i = 0; i < d; ++i) cand[i] = theta[i] + alpha * ref_dirs.normal();
    double gn = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double gi = obj->grad(theta)[i];
      gn += gi * gi;
    }
    sum += std::sqrt(gn);
    if (obj->eval(cand) < obj->eval(theta)) {
      theta = cand;
      ++accepted;
    }
  }
  EXPECT_EQ(traj.final_theta, theta);
  EXPECT_EQ(traj.accepted_steps, accepted);
  const auto avg = running_average_grad_norm(traj);
  EXPECT_NEAR(avg.back(), sum / T, 1e-9 * sum / T);
  EXPECT_LE(avg.back(), 0.5 * avg.front());
}

TEST(Ncrs, ImproveOrStayStructure) {
  const std::size_t d = 6;
  const auto obj = objective(InnerKind::quadratic_cosine, d, 3);
  SignOracle oracle(obj, 0.2, RngStream(4, 4));
  RngStream rng(4, 5);
  RngStream replay(4, 5);
  Recorder rec;
  const std::uint64_t T = 300;
  const auto sched = StepSchedule::constant(0.3, T);
  const Vec theta1(d, 1.0);
  const auto traj = ncrs_run(oracle, d, theta1, sched, T, rng, rec);
  ASSERT_EQ(rec.seen->size(), T);
  auto& seen = *rec.seen;
  seen.push_back(traj.final_theta);
  for (std::uint64_t t = 0; t < T; ++t) {
    const Vec s = gaussian_vector(replay, d);
    Vec moved = seen[t];
    for (std::size_t i = 0; i < d; ++i) moved[i] = seen[t][i] + 0.3 * s[i];
    const bool stayed = seen[t + 1] == seen[t];
    const bool stepped = seen[t + 1] == moved;
    EXPECT_TRUE(stayed || stepped) << "t=" << t + 1;
    EXPECT_EQ(traj.records[t].accepted, stepped);
    EXPECT_EQ(traj.records[t].queries, t + 1);
  }
}

TEST(Ncrs, PerfectOracleNeverIncreasesF) {
  const auto obj = objective(InnerKind::quadratic_cosine, 20, 5);
  SignOracle oracle(obj, 0.5, RngStream(5, 5));
  RngStream rng(5, 6);
  RngStream init(5, 7);
  const Vec theta1 = sample_initial_point(*obj, init, 5.0);
  const auto traj = ncrs_run(oracle, 20, theta1, StepSchedule::constant(0.2, 3000), 3000, rng, Metric{obj});
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    EXPECT_LE(traj.records[i].f, traj.records[i - 1].f + 1e-12);
    if (traj.records[i - 1].accepted) { EXPECT_LT(traj.records[i].f, traj.records[i - 1].f); }
  }
}

TEST(Ncrs, RejectsBadInputs) {
  ConstantSign oracle{1};
  RngStream rng(0, 0);
  EXPECT_THROW(ncrs_run(oracle, 3, Vec(2, 0.0), StepSchedule::constant(0.1, 5), 5, rng), ContractViolation);
  EXPECT_THROW(ncrs_run(oracle, 3, Vec(3, 0.0), StepSchedule::constant(0.1, 5), 0, rng), ConfigError);
  EXPECT_THROW(ncrs_run(oracle, 3, Vec(3, 0.0), StepSchedule::constant(0.1, 5), 6, rng), ConfigError);
}

TEST(Ncrs, AmbientBlindnessIdentity) {
  // f(x + a s) = f(x + a P s) for ridge objectives, so every comparison, and
  // hence every acceptance decision, depends on s only through P s
  RngStream rng(6, 6);
  for (const auto kind : {InnerKind::pure_quadratic, InnerKind::quadratic_cosine, InnerKind::bounded_well}) {
    const auto obj = objective(kind, 40, 6, 6);
    for (int i = 0; i < 2000; ++i) {
      const Vec x = gaussian_vector(rng, 40);
      const Vec s = gaussian_vector(rng, 40);
      const double a = std::pow(10.0, -3.0 + 3.0 * rng.uniform());
      const Vec ps = obj->active().project(s);
      Vec y1 = x;
      Vec y2 = x;
      axpy(a, s, y1);
      axpy(a, ps, y2);
      const double f0 = obj->eval(x);
      const double d1 = obj->eval(y1) - f0;
      const double d2 = obj->eval(y2) - f0;
      EXPECT_NEAR(d1, d2, 1e-12 * (1.0 + std::abs(f0)));
      if (std::abs(d1) > 1e-9 * (1.0 + std::abs(f0))) { EXPECT_EQ(d1 > 0, d2 > 0); }
    }
  }
}

TEST(Ncrs, ZeroPaddedEmbeddingMakesSameDecisions) {
  // the same g on U and on U padded with zeros in a larger ambient space
  RngStream rng(7, 7);
  const Subspace small = random_subspace(rng, 8, 3);
  std::vector<Vec> padded_rows;
  for (std::size_t i = 0; i < 3; ++i) {
    Vec row(small.row(i).begin(), small.row(i).end());
    row.resize(20, 0.0);
    padded_rows.push_back(row);
  }
  const InnerFunction g{InnerKind::quadratic_cosine, 1.0, 3.0};
  const RidgeObjective f_small(small, g);
  const RidgeObjective f_big(Subspace::from_rows(padded_rows), g);
  Vec x_small = gaussian_vector(rng, 8);
  Vec x_big = x_small;
  x_big.resize(20, 0.0);
  for (int i = 0; i < 2000; ++i) {
    const Vec s = gaussian_vector(rng, 8);
    Vec s_big = s;
    s_big.resize(20);
    for (std::size_t j = 8; j < 20; ++j) s_big[j] = rng.normal();
    Vec c_small = x_small;
    Vec c_big = x_big;
    axpy(0.1, s, c_small);
    axpy(0.1, s_big, c_big);
    const bool accept_small = f_small.eval(c_small) < f_small.eval(x_small);
    const bool accept_big = f_big.eval(c_big) < f_big.eval(x_big);
    ASSERT_EQ(accept_small, accept_big);
    if (accept_small) {
      x_small = c_small;
      x_big = c_big;
    }
  }
}

TEST(Vote, UnanimousPositiveAccepts) {
  ScriptedScores oracle{{1.0}};
  RngStream rng(8, 8);
  const auto traj = ncrs_vote_run(oracle, 3, Vec(3, 0.0), 0.1, 5, 40, rng);
  EXPECT_EQ(traj.accepted_steps, 40u);
  EXPECT_EQ(traj.total_queries, 200u);
}

TEST(Vote, ZeroSumStays) {
  ScriptedScores oracle{{1.0, -1.0}};
  RngStream rng(9, 9);
  const Vec theta1{0.3, 0.2};
  const auto traj = ncrs_vote_run(oracle, 2, theta1, 0.1, 2, 25, rng);
  EXPECT_EQ(traj.accepted_steps, 0u);
  EXPECT_EQ(traj.final_theta, theta1);
  ScriptedScores abstain{{0.0}};
  const auto traj2 = ncrs_vote_run(abstain, 2, theta1, 0.1, 3, 25, rng);
  EXPECT_EQ(traj2.accepted_steps, 0u);
}

TEST(Vote, DeterministicLinkNeverAscends) {
  const auto obj = objective(InnerKind::quadratic_cosine, 15, 4);
  ConfidenceOracle oracle(obj, ConfidenceKind::deterministic_link, LinkFunction{LinkKind::arctan, 2.0},
                          RngStream(10, 10));
  RngStream rng(10, 11);
  RngStream init(10, 12);
  const Vec theta1 = sample_initial_point(*obj, init, 4.0);
  const auto traj = ncrs_vote_run(oracle, 15, theta1, 0.2, 1, 2000, rng, Metric{obj});
  EXPECT_GT(traj.accepted_steps, 0u);
  for (std::size_t i = 1; i < traj.records.size(); ++i) {
    EXPECT_LE(traj.records[i].f, traj.records[i - 1].f);
    if (traj.records[i - 1].accepted) { EXPECT_LT(traj.records[i].f, traj.records[i - 1].f); }
  }
}

TEST(Vote, QueryBudgetAndImproveOrStay) {
  const auto obj = objective(InnerKind::bounded_well, 10, 3);
  ConfidenceOracle oracle(obj, ConfidenceKind::noisy_engage, LinkFunction{}, RngStream(11, 11));
  RngStream rng(11, 12);
  RngStream replay(11, 12);
  Recorder rec;
  const auto traj = ncrs_vote_run(oracle, 10, Vec(10, 0.7), 0.25, 7, 120, rng, rec);
  EXPECT_EQ(traj.total_queries, 7u * 120u);
  EXPECT_EQ(oracle.queries(), 7u * 120u);
  auto& seen = *rec.seen;
  seen.push_back(traj.final_theta);
  for (std::size_t t = 0; t < 120; ++t) {
    const Vec s = gaussian_vector(replay, 10);
    Vec moved = seen[t];
    for (std::size_t i = 0; i < 10; ++i) moved[i] = seen[t][i] + 0.25 * s[i];
    EXPECT_TRUE(seen[t + 1] == seen[t] || seen[t + 1] == moved);
    EXPECT_EQ(traj.records[t].queries, 7u * (t + 1));
  }
  ScriptedScores any{{1.0}};
  EXPECT_THROW(ncrs_vote_run(any, 2, Vec(2, 0.0), 0.1, 0, 5, rng), ConfigError);
}

TEST(Rsgf, FlatObjectiveDoesNotMove) {
  ConstantValue oracle;
  RngStream rng(12, 12);
  const Vec theta1{1.0, 2.0};
  const auto traj = rsgf_run(oracle, 2, theta1, 0.1, 1e-3, 100, rng);
  EXPECT_EQ(traj.final_theta, theta1);
  EXPECT_EQ(traj.total_queries, 200u);
}

TEST(Rsgf, OneStepUpdateIsUnbiasedForGradient) {
  const std::size_t d = 5;
  const auto obj = objective(InnerKind::pure_quadratic, d, d);
  RngStream rng(13, 13);
  const Vec theta{1.0, -0.5, 0.25, 2.0, -1.0};
  const Vec g = obj->grad(theta);
  const double alpha = 0.01;
  Vec mean(d, 0.0);
  constexpr int n = 100000;
  for (int i = 0; i < n; ++i) {
    ValueOracle oracle(obj);
    const auto traj = rsgf_run(oracle, d, theta, alpha, 1e-6, 1, rng);
    for (std::size_t j = 0; j < d; ++j) mean[j] += (traj.final_theta[j] - theta[j]) / n;
  }
  Vec expected = g;
  scale(expected, -alpha);
  EXPECT_LE(norm(sub(mean, expected)), 0.02 * norm(expected));
}

TEST(Rsgf, StepCapAndBudget) {
  EXPECT_DOUBLE_EQ(rsgf_max_step(10.0, 10), 1.0 / 480.0);
  const auto obj = objective(InnerKind::quadratic_cosine, 12, 4);
  ValueOracle oracle(obj);
  RngStream rng(14, 14);
  const auto traj = rsgf_run(oracle, 12, Vec(12, 0.3), 0.01, 1e-4, 333, rng);
  EXPECT_EQ(traj.total_queries, 666u);
  EXPECT_EQ(traj.records.back().queries, 666u);
  EXPECT_THROW(rsgf_run(oracle, 12, Vec(12, 0.3), 0.01, 0.0, 3, rng), ConfigError);
}

TEST(VoteParams, WorkedExample) {
  const auto vp = vote_params(0.1, 1.0, 4.0, 10.0, 1.0, 1.0, 0.5);
  EXPECT_NEAR(vp.alpha, 0.2 / (36.0 * std::sqrt(2.0 * std::numbers::pi)), 1e-18);
  EXPECT_NEAR(vp.alpha, 2.2157e-3, 1e-6);
  // ceil(54 pi 4 10 / 0.01) = ceil(678584.0132...)
  EXPECT_EQ(vp.T, 678585u);
  EXPECT_NEAR(vp.l_cC, 1.22627, 1e-5);
  // ceil(54 pi 4 1.2262648 / 0.01) = ceil(83212.36...)
  EXPECT_EQ(vp.n_rate, 83213u);
  EXPECT_EQ(vp.n_gamma, 5u);
  EXPECT_EQ(vp.N, 83213u);
  EXPECT_EQ(vp.total_comparisons(), vp.N * vp.T);
}

TEST(VoteParams, Monotonicity) {
  const auto base = vote_params(0.1, 2.0, 3.0, 5.0, 0.5, 1.0, 0.3);
  EXPECT_GT(vote_params(0.1, 2.0, 3.0, 5.0, 0.5, 2.0, 0.3).N, base.N);
  EXPECT_LT(vote_params(0.1, 2.0, 3.0, 5.0, 1.0, 1.0, 0.3).N, base.N);
  const auto doubled = vote_params(0.2, 2.0, 3.0, 5.0, 0.5, 1.0, 0.3);
  EXPECT_NEAR(static_cast<double>(doubled.T), base.T / 4.0, 1.0);
  EXPECT_NEAR(static_cast<double>(doubled.N), base.N / 4.0, 1.0);
  EXPECT_DOUBLE_EQ(doubled.alpha, 2.0 * base.alpha);
}

TEST(VoteParams, GammaThresholdCanDominate) {
  const auto vp = vote_params(0.9, 0.01, 1.0, 1.0, 100.0, 1.0, 1e-3);
  EXPECT_EQ(vp.N, vp.n_gamma);
  EXPECT_GT(vp.n_gamma, vp.n_rate);
  EXPECT_LE(vote_failure_bound(static_cast<double>(vp.N), 1e-3, 1.0), 0.5);
}

TEST(VoteParams, DomainErrors) {
  EXPECT_THROW(vote_params(1.5, 1, 4, 10, 1, 1, 0.5), DomainError);
  EXPECT_THROW(vote_params(1.0, 1, 4, 10, 1, 1, 0.5), DomainError);
  EXPECT_THROW(vote_params(0.0, 1, 4, 10, 1, 1, 0.5), DomainError);
  EXPECT_THROW(vote_params(0.1, -1, 4, 10, 1, 1, 0.5), DomainError);
  EXPECT_THROW(vote_params(0.1, 1, 0, 10, 1, 1, 0.5), DomainError);
  EXPECT_THROW(vote_params(0.1, 1, 4, 10, 1, 0.5, 0.5), DomainError);
  EXPECT_THROW(vote_params(0.1, 1, 4, 10, 1, 1, 1.5), DomainError);
}

TEST(VoteParams, FailureBoundExample) {
  EXPECT_NEAR(vote_failure_bound(50, 0.2, 1.0), std::exp(-3.0), 1e-15);
  EXPECT_NEAR(vote_bernstein_factor(2.0), 16.0 / 3.0, 1e-15);
}

TEST(Trajectory, LogCadence) {
  EXPECT_EQ(log_stride(1), 1u);
  EXPECT_EQ(log_stride(99999), 1u);
  EXPECT_EQ(log_stride(100000), 10u);
  EXPECT_EQ(log_stride(1000001), 101u);
  const std::uint64_t T = 123457;
  const std::uint64_t stride = log_stride(T);
  std::uint64_t logged = 0;
  for (std::uint64_t t = 1; t <= T; ++t) logged += is_logged(t, T, stride);
  EXPECT_TRUE(is_logged(T, T, stride));
  EXPECT_TRUE(is_logged(1, T, stride));
  EXPECT_LE(logged, 10001u);
  ConstantSign oracle{-1};
  RngStream rng(15, 15);
  const auto traj = ncrs_run(oracle, 2, Vec(2, 0.0), StepSchedule::constant(0.1, T), T, rng);
  EXPECT_EQ(traj.records.size(), logged);
  EXPECT_EQ(traj.records.back().t, T);
  EXPECT_EQ(traj.records.back().queries, T);
}

TEST(Trajectory, FirstAtOrBelowExamples) {
  const std::vector<double> running{5.0, 3.0, 1.0, 0.5};
  EXPECT_EQ(first_at_or_below(running, 1.0), 2u);  // 0-based: t = 3
  EXPECT_EQ(first_at_or_below(running, 6.0), 0u);  // t = 1
  EXPECT_FALSE(first_at_or_below(running, 0.1).has_value());
  EXPECT_THROW(first_at_or_below(running, 0.0), DomainError);
}

TEST(Trajectory, IterationsToTargetUsesLoggedT) {
  Trajectory traj;
  // grad norms 5, 1, 1, 1 give running averages 5, 3, 7/3, 2
  std::uint64_t t = 1;
  for (double g : {5.0, 1.0, 1.0, 1.0}) {
    traj.records.push_back({t, 0.0, g, false, t});
    t += 10;
  }
  EXPECT_EQ(iterations_to_target(traj, 3.0), 11u);
  EXPECT_EQ(iterations_to_target(traj, 2.0), 31u);
  EXPECT_EQ(iterations_to_target(traj, 10.0), 1u);
  EXPECT_FALSE(iterations_to_target(traj, 1.5).has_value());
  const auto sq = running_average_sq_grad_norm(traj);
  EXPECT_DOUBLE_EQ(sq[1], 13.0);
}
