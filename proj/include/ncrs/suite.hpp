#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "json.hpp"
#include "ncrs/diagnostics.hpp"
#include "ncrs/links.hpp"
#include "ncrs/objectives.hpp"
#include "ncrs/oracles.hpp"
#include "ncrs/rng.hpp"
#include "ncrs/subspace.hpp"

// The default diagnostic suite driven by `ncrs validate`. Every check draws
// from its own stream keyed by (seed, check label), so any single report can
// be reproduced in isolation.

namespace ncrs {

struct SuiteOptions {
  double scale = 1.0;
  std::uint64_t seed = 0;
};

namespace suite {

inline std::uint64_t scaled(double base, double scale) {
  return std::max<std::uint64_t>(2, static_cast<std::uint64_t>(std::llround(base * scale)));
}

inline RngStream stream(const SuiteOptions& opt, std::string_view label) {
  return RngStream(opt.seed, stream_id(0, label));
}

inline std::shared_ptr<const RidgeObjective> make_objective(RngStream& rng, std::size_t d, std::size_t k,
                                                            InnerFunction inner, double tau = 0.0,
                                                            std::size_t m = 0) {
  Subspace active = random_subspace(rng, d, k);
  std::optional<NuisanceSpec> nuisance;
  if (m > 0) nuisance = NuisanceSpec{random_complement(rng, active, m), tau};
  return std::make_shared<const RidgeObjective>(std::move(active), inner, std::move(nuisance));
}

/// Random test point: active coordinates ~ 1.5 N(0, I_k) plus 0.5 N(0, I_d).
inline Vec random_point(const RidgeObjective& obj, RngStream& rng) {
  Vec z = gaussian_vector(rng, obj.intrinsic_dim());
  scale(z, 1.5);
  Vec x = obj.active().lift(z);
  axpy(0.5, gaussian_vector(rng, obj.ambient_dim()), x);
  return x;
}

/// log-uniform step size in [1e-3, 10^-0.5].
inline double random_step(RngStream& rng) { return std::pow(10.0, -3.0 + 2.5 * rng.uniform()); }

inline std::vector<double> symmetric_grid(double half_width, int points) {
  std::vector<double> grid;
  for (int i = 0; i < points; ++i) grid.push_back(-half_width + 2.0 * half_width * i / (points - 1));
  return grid;
}

}  // namespace suite

/// Gaussian moment identities, half-normal identity, link reductions and
/// finite-difference gradient checks.
inline std::vector<CheckReport> identity_checks(const SuiteOptions& opt) {
  std::vector<CheckReport> out;
  const std::uint64_t n = suite::scaled(1e6, opt.scale);

  for (const std::size_t k : {1u, 2u, 7u}) {
    auto rng = suite::stream(opt, "projector_moments/" + std::to_string(k));
    const Subspace s = random_subspace(rng, 50, k);
    out.push_back(check_projector_moments(s, n, rng));
  }

  {
    auto rng = suite::stream(opt, "cross_moment/setup");
    const Subspace s = random_subspace(rng, 20, 3);
    const Subspace perp = random_complement(rng, s, 1);
    const Vec inside(s.row(0).begin(), s.row(0).end());
    const Vec outside(perp.row(0).begin(), perp.row(0).end());
    Vec mixed = inside;
    axpy(1.0, outside, mixed);
    const Vec zero(20, 0.0);
    int idx = 0;
    for (const Vec* a : {&inside, &outside, &zero, static_cast<const Vec*>(&mixed)}) {
      auto check_rng = suite::stream(opt, "cross_moment/" + std::to_string(idx++));
      out.push_back(check_cross_moment(s, *a, n, check_rng));
    }
  }

  {
    auto rng = suite::stream(opt, "halfnormal/setup");
    Vec g = gaussian_vector(rng, 10);
    scale(g, 1.0 / norm(g));
    auto r1 = suite::stream(opt, "halfnormal/unit");
    out.push_back(check_halfnormal(g, n, r1));
    auto r0 = suite::stream(opt, "halfnormal/zero");
    out.push_back(check_halfnormal(Vec(10, 0.0), n, r0));
  }

  const auto grid = suite::symmetric_grid(20.0, 2001);
  for (const LinkFunction link : {LinkFunction{LinkKind::logistic, 1.0}, LinkFunction{LinkKind::probit, 2.0},
                                  LinkFunction{LinkKind::arctan, 1.0}}) {
    out.push_back(check_link_reduction(link, grid));
  }

  struct FdCase {
    const char* label;
    InnerFunction inner;
    double tau;
    std::size_t m;
  };
  const FdCase cases[] = {
      {"pure_quadratic", {InnerKind::pure_quadratic, 0.0, 1.0}, 0.0, 0},
      {"quadratic_cosine", {InnerKind::quadratic_cosine, 1.0, 3.0}, 0.0, 0},
      {"bounded_well", {InnerKind::bounded_well, 0.0, 1.0}, 0.0, 0},
      {"nuisance", {InnerKind::quadratic_cosine, 1.0, 3.0}, 0.3, 3},
  };
  for (const auto& c : cases) {
    auto rng = suite::stream(opt, std::string("grad_fd/") + c.label);
    const auto obj = suite::make_objective(rng, 20, 5, c.inner, c.tau, c.m);
    out.push_back(check_grad_fd(*obj, 100, 1e-5, rng));
  }
  return out;
}

/// One-step descent of the uniform-margin search at `configs` random
/// (theta, alpha) pairs on quadratic_cosine, for p in {0.1, 0.5}; then the
/// nearly-ridge form for tau in {0.1, 0.3}.
inline std::vector<CheckReport> descent_checks(const SuiteOptions& opt, int configs = 20) {
  std::vector<CheckReport> out;
  const std::uint64_t n = suite::scaled(1e5, opt.scale);
  const InnerFunction qc{InnerKind::quadratic_cosine, 1.0, 3.0};
  struct Model {
    std::string label;
    double tau;
    std::size_t m;
  };
  for (const Model& model : {Model{"ridge", 0.0, 0}, Model{"tau=0.1", 0.1, 3}, Model{"tau=0.3", 0.3, 3}}) {
    auto setup = suite::stream(opt, "descent/" + model.label + "/setup");
    const auto obj = suite::make_objective(setup, 20, 5, qc, model.tau, model.m);
    for (int i = 0; i < configs; ++i) {
      const Vec theta = suite::random_point(*obj, setup);
      const double alpha = suite::random_step(setup);
      for (const double p : {0.1, 0.5}) {
        auto rng = suite::stream(opt, "descent/" + model.label + "/" + std::to_string(i) + "/" + std::to_string(p));
        out.push_back(check_descent_ncrs(obj, p, theta, alpha, n, rng));
      }
    }
  }
  return out;
}

/// Wrong-decision frequency of the N-vote aggregate on frozen pairs.
inline std::vector<CheckReport> vote_error_checks(const SuiteOptions& opt) {
  std::vector<CheckReport> out;
  const std::uint64_t trials = suite::scaled(1e5, opt.scale);
  const LinkFunction link{LinkKind::logistic, 1.0};
  for (const double target_rho : {0.05, 0.2}) {
    const double gap = link.rho_inverse(target_rho);
    for (const std::uint64_t votes : {1u, 5u, 25u, 125u}) {
      ConfidenceOracle oracle(nullptr, ConfidenceKind::engage_abstain, link,
                              suite::stream(opt, "vote_error/" + std::to_string(target_rho) + "/" +
                                                     std::to_string(votes)));
      out.push_back(check_vote_error(oracle, gap, votes, trials));
    }
  }
  {
    ConfidenceOracle oracle(nullptr, ConfidenceKind::deterministic_link, link,
                            suite::stream(opt, "vote_error/deterministic"));
    out.push_back(check_vote_error(oracle, -link.rho_inverse(0.2), 1, trials));
  }
  {
    ConfidenceOracle oracle(nullptr, ConfidenceKind::noisy_engage, link, suite::stream(opt, "vote_error/noisy"));
    out.push_back(check_vote_error(oracle, link.rho_inverse(0.4), 25, trials));
  }
  return out;
}

/// One-step descent and ranking-penalty bounds of the vote variant.
inline std::vector<CheckReport> vote_descent_checks(const SuiteOptions& opt) {
  std::vector<CheckReport> out;
  const std::uint64_t n = suite::scaled(2e4, opt.scale);
  const InnerFunction qc{InnerKind::quadratic_cosine, 1.0, 3.0};
  const LinkFunction link{LinkKind::logistic, 1.0};
  auto setup = suite::stream(opt, "vote_descent/setup");
  const auto obj = suite::make_objective(setup, 20, 5, qc);
  for (const ConfidenceKind kind :
       {ConfidenceKind::deterministic_link, ConfidenceKind::engage_abstain, ConfidenceKind::noisy_engage}) {
    for (const std::uint64_t votes : {1u, 16u}) {
      for (int i = 0; i < 3; ++i) {
        const Vec theta = suite::random_point(*obj, setup);
        const double alpha = suite::random_step(setup);
        const std::string label = std::string(to_string(kind)) + "/" + std::to_string(votes) + "/" + std::to_string(i);
        auto rng = suite::stream(opt, "vote_descent/" + label);
        out.push_back(check_descent_vote(obj, kind, link, votes, theta, alpha, n, rng));
        auto rng2 = suite::stream(opt, "rank_penalty/" + label);
        out.push_back(check_rank_penalty(obj, kind, link, votes, theta, alpha, n, rng2));
      }
    }
  }
  return out;
}

inline std::vector<CheckReport> run_validation_suite(const SuiteOptions& opt) {
  std::vector<CheckReport> all = identity_checks(opt);
  for (auto&& group : {descent_checks(opt), vote_error_checks(opt), vote_descent_checks(opt)}) {
    all.insert(all.end(), group.begin(), group.end());
  }
  return all;
}

inline nlohmann::json report_to_json(const CheckReport& r) {
  return {{"name", r.name},         {"estimates", r.estimates}, {"theory", r.theory},
          {"std_errors", r.std_errors}, {"n_samples", r.n_samples}, {"pass", r.pass},
          {"rule", r.rule},         {"note", r.note}};
}

}  // namespace ncrs
