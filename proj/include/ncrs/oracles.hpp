#pragma once

#include <concepts>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "ncrs/errors.hpp"
#include "ncrs/links.hpp"
#include "ncrs/objectives.hpp"
#include "ncrs/rng.hpp"
#include "ncrs/vec.hpp"

namespace ncrs {

// Interfaces seen by the optimizers. None of them exposes f or grad f.

template <class O>
concept SignComparator = requires(O& o, ConstView x, ConstView y) {
  { o.compare(x, y) } -> std::same_as<int>;
  { o.queries() } -> std::convertible_to<std::uint64_t>;
};

template <class O>
concept ConfidenceComparator = requires(O& o, ConstView x, ConstView y) {
  { o.compare(x, y) } -> std::same_as<double>;
  { o.queries() } -> std::convertible_to<std::uint64_t>;
};

template <class O>
concept ValueQuery = requires(O& o, ConstView x) {
  { o.value(x) } -> std::same_as<double>;
  { o.queries() } -> std::convertible_to<std::uint64_t>;
};

/// Uniform-margin comparator: returns sign(f(x) - f(y)) with probability
/// exactly 1/2 + p and the opposite sign otherwise. +1 means y is preferred.
/// Ties are a fair coin.
class SignOracle {
 public:
  SignOracle(std::shared_ptr<const RidgeObjective> objective, double advantage, RngStream rng)
      : objective_(std::move(objective)), advantage_(advantage), rng_(std::move(rng)) {
    if (!(advantage > 0.0 && advantage <= 0.5)) throw ConfigError("oracle advantage p must lie in (0, 1/2]");
  }

  int compare(ConstView x, ConstView y) { return label_for_gap(objective_->eval(x) - objective_->eval(y)); }

  /// Oracle answer for a pair whose true gap f(x) - f(y) is `gap`. Counts as one query.
  int label_for_gap(double gap) {
    ++queries_;
    if (gap == 0.0) return rng_.bernoulli(0.5) ? 1 : -1;
    const int truth = gap > 0.0 ? 1 : -1;
    return rng_.bernoulli(0.5 + advantage_) ? truth : -truth;
  }

  double advantage() const noexcept { return advantage_; }
  std::uint64_t queries() const noexcept { return queries_; }

 private:
  std::shared_ptr<const RidgeObjective> objective_;
  double advantage_;
  RngStream rng_;
  std::uint64_t queries_ = 0;
};

enum class ConfidenceKind { deterministic_link, engage_abstain, noisy_engage };

inline std::string_view to_string(ConfidenceKind kind) {
  switch (kind) {
    case ConfidenceKind::deterministic_link: return "deterministic_link";
    case ConfidenceKind::engage_abstain: return "engage_abstain";
    case ConfidenceKind::noisy_engage: return "noisy_engage";
  }
  return "?";
}

inline ConfidenceKind parse_confidence_kind(std::string_view name) {
  if (name == "deterministic_link") return ConfidenceKind::deterministic_link;
  if (name == "engage_abstain") return ConfidenceKind::engage_abstain;
  if (name == "noisy_engage") return ConfidenceKind::noisy_engage;
  throw ConfigError("unknown confidence oracle kind '" + std::string(name) + "'");
}

/// Gap-dependent confidence comparator returning scores in [-1, 1].
///
///   deterministic_link  sign(D) rho(|D|) = 2 sigma(D) - 1          rho_eff = rho,   C = 1
///   engage_abstain      sign(D) w.p. rho(|D|), else 0                rho_eff = rho,   C = 1
///   noisy_engage        sign(D) B w.p. rho(|D|), else 0,
///                       B = +1 w.p. 3/4 and -1 w.p. 1/4              rho_eff = rho/2, C = 2
///
/// with D = f(x) - f(y). A zero gap always scores 0.
class ConfidenceOracle {
 public:
  ConfidenceOracle(std::shared_ptr<const RidgeObjective> objective, ConfidenceKind kind, LinkFunction link,
                   RngStream rng)
      : objective_(std::move(objective)), kind_(kind), link_(link), rng_(std::move(rng)) {
    link_.validate();
  }

  double compare(ConstView x, ConstView y) { return score_for_gap(objective_->eval(x) - objective_->eval(y)); }

  /// Oracle answer for a pair whose true gap is `gap`. Counts as one query.
  double score_for_gap(double gap) {
    ++queries_;
    if (gap == 0.0) return 0.0;
    const double sign = gap > 0.0 ? 1.0 : -1.0;
    const double strength = link_.rho(std::abs(gap));
    switch (kind_) {
      case ConfidenceKind::deterministic_link:
        return sign * strength;
      case ConfidenceKind::engage_abstain:
        return rng_.bernoulli(strength) ? sign : 0.0;
      case ConfidenceKind::noisy_engage:
        if (!rng_.bernoulli(strength)) return 0.0;
        return rng_.bernoulli(0.75) ? sign : -sign;
    }
    return 0.0;
  }

  /// rho_eff(t): certified lower bound on E[sign(D) R | |D| = t].
  double certified_rho(double t) const noexcept {
    const double base = link_.rho(t);
    return kind_ == ConfidenceKind::noisy_engage ? 0.5 * base : base;
  }

  /// C with E[R^2] <= C rho_eff(|D|).
  double second_moment_constant() const noexcept { return kind_ == ConfidenceKind::noisy_engage ? 2.0 : 1.0; }

  /// (c, r) with rho_eff(t) >= c t on [0, r].
  LocalLinearity local_linearity() const {
    LocalLinearity base = local_linearity_constants(link_);
    if (kind_ == ConfidenceKind::noisy_engage) base.c *= 0.5;
    return base;
  }

  ConfidenceKind kind() const noexcept { return kind_; }
  const LinkFunction& link() const noexcept { return link_; }
  std::uint64_t queries() const noexcept { return queries_; }

 private:
  std::shared_ptr<const RidgeObjective> objective_;
  ConfidenceKind kind_;
  LinkFunction link_;
  RngStream rng_;
  std::uint64_t queries_ = 0;
};

/// Exact function values with query accounting, for the two-point baseline.
class ValueOracle {
 public:
  explicit ValueOracle(std::shared_ptr<const RidgeObjective> objective) : objective_(std::move(objective)) {}

  double value(ConstView x) {
    ++queries_;
    return objective_->eval(x);
  }

  std::uint64_t queries() const noexcept { return queries_; }

 private:
  std::shared_ptr<const RidgeObjective> objective_;
  std::uint64_t queries_ = 0;
};

static_assert(SignComparator<SignOracle>);
static_assert(ConfidenceComparator<ConfidenceOracle>);
static_assert(ValueQuery<ValueOracle>);

}  // namespace ncrs
