#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include "ncrs/errors.hpp"
#include "ncrs/links.hpp"
#include "ncrs/objectives.hpp"
#include "ncrs/oracles.hpp"
#include "ncrs/rng.hpp"
#include "ncrs/vec.hpp"
#include "ncrs/vote_params.hpp"

// Monte Carlo and deterministic certificates for the identities and one-step
// inequalities the optimizers rely on.
//
// Tolerance rules:
//   equalities      |estimate - theory| <= 4 SE
//   one-sided       estimate <= bound + 3 SE (descent inequalities use 4 SE)
//   deterministic   absolute 1e-12

namespace ncrs {

struct CheckReport {
  std::string name;
  std::vector<double> estimates;
  std::vector<double> theory;
  std::vector<double> std_errors;
  std::uint64_t n_samples = 0;
  bool pass = false;
  std::string rule;
  std::string note;
};

namespace diag {

inline constexpr double kEqualityBand = 4.0;
inline constexpr double kOneSidedBand = 3.0;
inline constexpr double kDescentBand = 4.0;
inline constexpr double kExactTol = 1e-12;

/// Welford mean / variance.
class Accumulator {
 public:
  void add(double x) noexcept {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }
  std::uint64_t count() const noexcept { return n_; }
  double mean() const noexcept { return mean_; }
  double variance() const noexcept { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
  double std_error() const noexcept { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

inline void require_samples(std::uint64_t n, const char* where) {
  if (n < 2) throw ContractViolation(std::string(where) + ": need at least 2 samples");
}

inline bool within_band(double estimate, double theory, double se, double band) {
  return std::abs(estimate - theory) <= band * se;
}

}  // namespace diag

/// E|Ps|^2, E|Ps|^4, E|Ps|^6 for s ~ N(0, I_d) against k, k(k+2), k(k+2)(k+4).
inline CheckReport check_projector_moments(const Subspace& s, std::uint64_t n, RngStream& rng) {
  diag::require_samples(n, "check_projector_moments");
  const double k = static_cast<double>(s.rank());
  diag::Accumulator m2;
  diag::Accumulator m4;
  diag::Accumulator m6;
  Vec g(s.ambient_dim());
  for (std::uint64_t i = 0; i < n; ++i) {
    fill_gaussian(rng, g);
    const double q = norm2(s.coords(g));
    m2.add(q);
    m4.add(q * q);
    m6.add(q * q * q);
  }
  CheckReport r;
  r.name = "projector_moments[d=" + std::to_string(s.ambient_dim()) + ",k=" + std::to_string(s.rank()) + "]";
  r.estimates = {m2.mean(), m4.mean(), m6.mean()};
  r.theory = {k, k * (k + 2), k * (k + 2) * (k + 4)};
  r.std_errors = {m2.std_error(), m4.std_error(), m6.std_error()};
  r.n_samples = n;
  r.pass = true;
  for (std::size_t j = 0; j < 3; ++j) {
    r.pass = r.pass && diag::within_band(r.estimates[j], r.theory[j], r.std_errors[j], diag::kEqualityBand);
  }
  r.rule = "|est - theory| <= 4 SE for each moment";
  return r;
}

/// E[(a's)^2 |Ps|^2] against k|a|^2 + 2 a'Pa.
inline CheckReport check_cross_moment(const Subspace& s, ConstView a, std::uint64_t n, RngStream& rng) {
  diag::require_samples(n, "check_cross_moment");
  detail::require_same_dim(a.size(), s.ambient_dim(), "check_cross_moment");
  const double k = static_cast<double>(s.rank());
  const Vec pa = s.project(a);
  const double target = k * norm2(a) + 2.0 * dot(a, pa);
  diag::Accumulator acc;
  Vec g(s.ambient_dim());
  for (std::uint64_t i = 0; i < n; ++i) {
    fill_gaussian(rng, g);
    const double as = dot(a, g);
    acc.add(as * as * norm2(s.coords(g)));
  }
  CheckReport r;
  r.name = "cross_moment[k=" + std::to_string(s.rank()) + ",|a|=" + std::to_string(norm(a)) +
           ",|Pa|=" + std::to_string(norm(pa)) + "]";
  r.estimates = {acc.mean()};
  r.theory = {target};
  r.std_errors = {acc.std_error()};
  r.n_samples = n;
  r.pass = diag::within_band(acc.mean(), target, acc.std_error(), diag::kEqualityBand);
  r.rule = "|est - theory| <= 4 SE";
  return r;
}

/// E|<g, s>| against sqrt(2/pi) |g|.
inline CheckReport check_halfnormal(ConstView g, std::uint64_t n, RngStream& rng) {
  diag::require_samples(n, "check_halfnormal");
  const double target = std::sqrt(2.0 / std::numbers::pi) * norm(g);
  diag::Accumulator acc;
  Vec s(g.size());
  for (std::uint64_t i = 0; i < n; ++i) {
    fill_gaussian(rng, s);
    acc.add(std::abs(dot(g, s)));
  }
  CheckReport r;
  r.name = "halfnormal[|g|=" + std::to_string(norm(g)) + "]";
  r.estimates = {acc.mean()};
  r.theory = {target};
  r.std_errors = {acc.std_error()};
  r.n_samples = n;
  r.pass = diag::within_band(acc.mean(), target, acc.std_error(), diag::kEqualityBand);
  r.rule = "|est - theory| <= 4 SE";
  return r;
}

/// One-step expected descent of the uniform-margin random search at a fixed
/// theta:  p alpha sqrt(2/pi) |grad f| <= E[f(theta) - f(theta')] + L k alpha^2 / 2
/// (+ 2 tau alpha sqrt(m) when the objective carries a nuisance term).
inline CheckReport check_descent_ncrs(std::shared_ptr<const RidgeObjective> obj, double p, ConstView theta,
                                      double alpha, std::uint64_t n, RngStream& rng) {
  diag::require_samples(n, "check_descent_ncrs");
  if (!(alpha > 0.0)) throw ContractViolation("check_descent_ncrs: alpha must be > 0");
  const std::size_t d = obj->ambient_dim();
  detail::require_same_dim(theta.size(), d, "check_descent_ncrs");
  SignOracle oracle(obj, p, rng.split("oracle"));
  const double f0 = obj->eval(theta);
  diag::Accumulator drop;
  Vec s(d);
  Vec cand(d);
  for (std::uint64_t i = 0; i < n; ++i) {
    fill_gaussian(rng, s);
    for (std::size_t j = 0; j < d; ++j) cand[j] = theta[j] + alpha * s[j];
    const double f1 = obj->eval(cand);
    drop.add(oracle.label_for_gap(f0 - f1) == 1 ? f0 - f1 : 0.0);
  }
  const double k = static_cast<double>(obj->intrinsic_dim());
  const double lhs = p * alpha * std::sqrt(2.0 / std::numbers::pi) * norm(obj->grad(theta));
  double slack = obj->smoothness_constant() * k * alpha * alpha / 2.0;
  std::string form = "ridge";
  if (obj->nuisance()) {
    slack += 2.0 * obj->nuisance()->tau * alpha * std::sqrt(static_cast<double>(obj->nuisance()->dim()));
    form = "nearly_ridge";
  }
  CheckReport r;
  r.name = "descent_ncrs[" + form + ",p=" + std::to_string(p) + ",alpha=" + std::to_string(alpha) + "]";
  r.estimates = {lhs, drop.mean()};
  r.theory = {drop.mean() + slack};
  r.std_errors = {drop.std_error()};
  r.n_samples = n;
  r.pass = lhs <= drop.mean() + slack + diag::kDescentBand * drop.std_error();
  r.rule = "p a sqrt(2/pi)|grad f| <= mean drop + slack + 4 SE";
  if (lhs < 1e-9) r.note = "degenerate step size, both sides near zero";
  return r;
}

namespace detail {

struct VoteConstants {
  double C;
  double c;
  double r;
  double gamma;
  double penalty;
};

inline VoteConstants vote_constants(const ConfidenceOracle& oracle, double n_votes) {
  const LocalLinearity ll = oracle.local_linearity();
  const double C = oracle.second_moment_constant();
  return {C, ll.c, ll.r, vote_failure_bound(n_votes, oracle.certified_rho(ll.r), C),
          vote_bernstein_factor(C) / (std::numbers::e * ll.c * n_votes)};
}

}  // namespace detail

/// One-step descent of the vote variant at a fixed theta:
///   alpha/sqrt(2 pi) (1 - gamma) |grad f|
///     <= E[f(theta) - f(theta')] + L k (1 + gamma) alpha^2 / 2 + (2C + 4/3) / (e c N)
inline CheckReport check_descent_vote(std::shared_ptr<const RidgeObjective> obj, ConfidenceKind kind,
                                      LinkFunction link, std::uint64_t votes, ConstView theta, double alpha,
                                      std::uint64_t n, RngStream& rng) {
  diag::require_samples(n, "check_descent_vote");
  if (votes < 1) throw ContractViolation("check_descent_vote: N must be >= 1");
  const std::size_t d = obj->ambient_dim();
  detail::require_same_dim(theta.size(), d, "check_descent_vote");
  ConfidenceOracle oracle(obj, kind, link, rng.split("oracle"));
  const auto vc = detail::vote_constants(oracle, static_cast<double>(votes));
  const double f0 = obj->eval(theta);
  diag::Accumulator drop;
  Vec s(d);
  Vec cand(d);
  for (std::uint64_t i = 0; i < n; ++i) {
    fill_gaussian(rng, s);
    for (std::size_t j = 0; j < d; ++j) cand[j] = theta[j] + alpha * s[j];
    const double f1 = obj->eval(cand);
    double sum = 0.0;
    for (std::uint64_t v = 0; v < votes; ++v) sum += oracle.score_for_gap(f0 - f1);
    drop.add(sum > 0.0 ? f0 - f1 : 0.0);
  }
  const double k = static_cast<double>(obj->intrinsic_dim());
  const double lhs = alpha / std::sqrt(2.0 * std::numbers::pi) * (1.0 - vc.gamma) * norm(obj->grad(theta));
  const double slack = obj->smoothness_constant() * k * (1.0 + vc.gamma) * alpha * alpha / 2.0 + vc.penalty;
  CheckReport r;
  r.name = "descent_vote[" + std::string(to_string(kind)) + ",N=" + std::to_string(votes) +
           ",alpha=" + std::to_string(alpha) + "]";
  r.estimates = {lhs, drop.mean()};
  r.theory = {drop.mean() + slack};
  r.std_errors = {drop.std_error()};
  r.n_samples = n;
  r.pass = lhs <= drop.mean() + slack + diag::kDescentBand * drop.std_error();
  r.rule = "a/sqrt(2pi)(1-gamma)|grad f| <= mean drop + slack + 4 SE";
  return r;
}

/// Ranking-error term of the vote variant at a fixed theta:
///   |E[D (1{S>0} - 1{D<0})]| <= gamma (a sqrt(2/pi)|grad f| + L k a^2 / 2) + (2C + 4/3)/(e c N)
/// with D = f(theta + a s) - f(theta).
inline CheckReport check_rank_penalty(std::shared_ptr<const RidgeObjective> obj, ConfidenceKind kind,
                                      LinkFunction link, std::uint64_t votes, ConstView theta, double alpha,
                                      std::uint64_t n, RngStream& rng) {
  diag::require_samples(n, "check_rank_penalty");
  if (votes < 1) throw ContractViolation("check_rank_penalty: N must be >= 1");
  const std::size_t d = obj->ambient_dim();
  detail::require_same_dim(theta.size(), d, "check_rank_penalty");
  ConfidenceOracle oracle(obj, kind, link, rng.split("oracle"));
  const auto vc = detail::vote_constants(oracle, static_cast<double>(votes));
  const double f0 = obj->eval(theta);
  diag::Accumulator err;
  Vec s(d);
  Vec cand(d);
  for (std::uint64_t i = 0; i < n; ++i) {
    fill_gaussian(rng, s);
    for (std::size_t j = 0; j < d; ++j) cand[j] = theta[j] + alpha * s[j];
    const double delta = obj->eval(cand) - f0;
    double sum = 0.0;
    for (std::uint64_t v = 0; v < votes; ++v) sum += oracle.score_for_gap(-delta);
    const double accept = sum > 0.0 ? 1.0 : 0.0;
    const double improve = delta < 0.0 ? 1.0 : 0.0;
    err.add(delta * (accept - improve));
  }
  const double k = static_cast<double>(obj->intrinsic_dim());
  const double bound =
      vc.gamma * (alpha * std::sqrt(2.0 / std::numbers::pi) * norm(obj->grad(theta)) +
                  obj->smoothness_constant() * k * alpha * alpha / 2.0) +
      vc.penalty;
  CheckReport r;
  r.name = "rank_penalty[" + std::string(to_string(kind)) + ",N=" + std::to_string(votes) +
           ",alpha=" + std::to_string(alpha) + "]";
  r.estimates = {std::abs(err.mean())};
  r.theory = {bound};
  r.std_errors = {err.std_error()};
  r.n_samples = n;
  r.pass = std::abs(err.mean()) <= bound + diag::kOneSidedBand * err.std_error();
  r.rule = "|mean| <= bound + 3 SE";
  return r;
}

/// Frequency with which sign(sum of N scores) disagrees with the true
/// preference on a frozen pair of gap `gap`, against exp(-N rho / (2C + 4/3)).
inline CheckReport check_vote_error(ConfidenceOracle& oracle, double gap, std::uint64_t votes,
                                    std::uint64_t trials) {
  if (gap == 0.0 || !std::isfinite(gap)) throw ContractViolation("check_vote_error: gap must be nonzero");
  if (votes < 1) throw ContractViolation("check_vote_error: N must be >= 1");
  diag::require_samples(trials, "check_vote_error");
  const bool candidate_better = gap > 0.0;
  std::uint64_t wrong = 0;
  for (std::uint64_t i = 0; i < trials; ++i) {
    double sum = 0.0;
    for (std::uint64_t v = 0; v < votes; ++v) sum += oracle.score_for_gap(gap);
    if ((sum > 0.0) != candidate_better) ++wrong;
  }
  const double freq = static_cast<double>(wrong) / static_cast<double>(trials);
  const double se = std::sqrt(freq * (1.0 - freq) / static_cast<double>(trials));
  const double rho_gap = oracle.certified_rho(std::abs(gap));
  const double bound = vote_failure_bound(static_cast<double>(votes), rho_gap, oracle.second_moment_constant());
  CheckReport r;
  r.name = "vote_error[" + std::string(to_string(oracle.kind())) + ",rho=" + std::to_string(rho_gap) +
           ",N=" + std::to_string(votes) + "]";
  r.estimates = {freq};
  r.theory = {bound};
  r.std_errors = {se};
  r.n_samples = trials;
  r.pass = freq <= bound + diag::kOneSidedBand * se;
  r.rule = "freq <= exp(-N rho/(2C+4/3)) + 3 SE";
  return r;
}

/// Deterministic link identities on a grid of gaps:
///   sign(D)(2 sigma(D) - 1) = rho(|D|),  sigma(-u) = 1 - sigma(u),
///   rho nondecreasing,  rho(t) >= c t on [0, r].
inline CheckReport check_link_reduction(const LinkFunction& link, const std::vector<double>& grid) {
  if (grid.empty()) throw ContractViolation("check_link_reduction: grid must be nonempty");
  link.validate();
  double reduction_err = 0.0;
  double antisym_err = 0.0;
  for (const double u : grid) {
    const double sign = u > 0.0 ? 1.0 : (u < 0.0 ? -1.0 : 0.0);
    const double lhs = sign * (2.0 * link.sigma(u) - 1.0);
    reduction_err = std::max(reduction_err, std::abs(lhs - link.rho(std::abs(u))));
    antisym_err = std::max(antisym_err, std::abs(link.sigma(-u) - (1.0 - link.sigma(u))));
  }
  std::vector<double> abs_grid;
  abs_grid.reserve(grid.size());
  for (const double u : grid) abs_grid.push_back(std::abs(u));
  std::sort(abs_grid.begin(), abs_grid.end());
  double monotone_violation = 0.0;
  for (std::size_t i = 1; i < abs_grid.size(); ++i) {
    monotone_violation = std::max(monotone_violation, link.rho(abs_grid[i - 1]) - link.rho(abs_grid[i]));
  }
  const LocalLinearity ll = local_linearity_constants(link);
  double linear_violation = 0.0;
  for (int i = 0; i <= 1000; ++i) {
    const double t = ll.r * i / 1000.0;
    linear_violation = std::max(linear_violation, ll.c * t - link.rho(t));
  }
  CheckReport r;
  r.name = "link_reduction[" + std::string(to_string(link.kind)) + ",scale=" + std::to_string(link.scale) + "]";
  r.estimates = {reduction_err, antisym_err, monotone_violation, linear_violation, ll.c, ll.r};
  r.theory = {0.0, 0.0, 0.0, 0.0};
  r.std_errors = {};
  r.n_samples = grid.size();
  r.pass = reduction_err <= diag::kExactTol && antisym_err <= diag::kExactTol && monotone_violation <= 0.0 &&
           linear_violation <= 0.0 && ll.r > 0.0;
  r.rule = "identities within 1e-12, rho monotone, rho(t) >= c t on [0, r]";
  return r;
}

/// Central differences with step h against the analytic gradient at random
/// points; error is |g_fd - g| / max(1, |g|).
inline CheckReport check_grad_fd(const RidgeObjective& obj, std::uint64_t points, double h, RngStream& rng) {
  if (!(h >= 1e-7 && h <= 1e-3)) throw ContractViolation("check_grad_fd: h must lie in [1e-7, 1e-3]");
  if (points < 1) throw ContractViolation("check_grad_fd: need at least one point");
  const std::size_t d = obj.ambient_dim();
  double worst = 0.0;
  Vec x(d);
  Vec fd(d);
  for (std::uint64_t i = 0; i < points; ++i) {
    fill_gaussian(rng, x);
    scale(x, 2.0);
    for (std::size_t j = 0; j < d; ++j) {
      const double keep = x[j];
      x[j] = keep + h;
      const double up = obj.eval(x);
      x[j] = keep - h;
      const double down = obj.eval(x);
      x[j] = keep;
      fd[j] = (up - down) / (2.0 * h);
    }
    const Vec g = obj.grad(x);
    worst = std::max(worst, norm(sub(fd, g)) / std::max(1.0, norm(g)));
  }
  CheckReport r;
  r.name = "grad_fd[" + std::string(to_string(obj.inner().kind)) +
           (obj.nuisance() ? ",tau=" + std::to_string(obj.nuisance()->tau) : std::string()) + "]";
  r.estimates = {worst};
  r.theory = {1e-4};
  r.n_samples = points;
  r.pass = worst <= 1e-4;
  r.rule = "max relative error <= 1e-4";
  return r;
}

}  // namespace ncrs
