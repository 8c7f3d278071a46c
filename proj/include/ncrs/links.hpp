#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include "ncrs/errors.hpp"

namespace ncrs {

enum class LinkKind { logistic, probit, arctan };

inline std::string_view to_string(LinkKind kind) {
  switch (kind) {
    case LinkKind::logistic: return "logistic";
    case LinkKind::probit: return "probit";
    case LinkKind::arctan: return "arctan";
  }
  return "?";
}

inline LinkKind parse_link_kind(std::string_view name) {
  if (name == "logistic") return LinkKind::logistic;
  if (name == "probit") return LinkKind::probit;
  if (name == "arctan") return LinkKind::arctan;
  throw ConfigError("unknown link kind '" + std::string(name) + "'");
}

/// Pair (c, r) with rho(t) >= c t on [0, r].
struct LocalLinearity {
  double c = 0.0;
  double r = 0.0;
};

/// Preference probability sigma(u) as a function of the gap u = f(x) - f(y).
/// `scale` is tau for logistic and arctan and sigma_0 for probit.
struct LinkFunction {
  LinkKind kind = LinkKind::logistic;
  double scale = 1.0;

  void validate() const {
    if (!(scale > 0.0) || !std::isfinite(scale)) throw ConfigError("link scale must be > 0");
  }

  double sigma(double u) const noexcept {
    switch (kind) {
      case LinkKind::logistic: return 1.0 / (1.0 + std::exp(-u / scale));
      case LinkKind::probit: return 0.5 * std::erfc(-u / (scale * std::numbers::sqrt2));
      case LinkKind::arctan: return 0.5 + std::atan(u / scale) / std::numbers::pi;
    }
    return 0.5;
  }

  /// rho(t) = 2 sigma(t) - 1 in closed form.
  double rho(double t) const noexcept {
    switch (kind) {
      case LinkKind::logistic: return std::tanh(t / (2.0 * scale));
      case LinkKind::probit: return std::erf(t / (scale * std::numbers::sqrt2));
      case LinkKind::arctan: return 2.0 / std::numbers::pi * std::atan(t / scale);
    }
    return 0.0;
  }

  /// sigma'(0).
  double slope_at_zero() const noexcept {
    switch (kind) {
      case LinkKind::logistic: return 1.0 / (4.0 * scale);
      case LinkKind::probit: return 1.0 / (scale * std::sqrt(2.0 * std::numbers::pi));
      case LinkKind::arctan: return 1.0 / (std::numbers::pi * scale);
    }
    return 0.0;
  }

  /// Smallest t >= 0 with rho(t) >= y, for y in [0, 1).
  double rho_inverse(double y) const {
    if (!(y >= 0.0 && y < 1.0)) throw DomainError("rho_inverse needs y in [0, 1)");
    if (kind == LinkKind::logistic) return 2.0 * scale * std::atanh(y);
    if (kind == LinkKind::arctan) return scale * std::tan(y * std::numbers::pi / 2.0);
    double lo = 0.0;
    double hi = scale;
    while (rho(hi) < y) hi *= 2.0;
    for (int i = 0; i < 200 && hi - lo > 1e-15 * hi; ++i) {
      const double mid = 0.5 * (lo + hi);
      (rho(mid) < y ? lo : hi) = mid;
    }
    return hi;
  }
};

inline double rho(const LinkFunction& link, double t) {
  if (!(t >= 0.0)) throw DomainError("rho is defined for t >= 0");
  return link.rho(t);
}

namespace detail {

/// rho(t) >= c t at the 1000 grid points r/1000, 2r/1000, ..., r.
inline bool linear_lower_bound_holds(const LinkFunction& link, double c, double r) {
  constexpr int kGrid = 1000;
  for (int i = 1; i <= kGrid; ++i) {
    const double t = r * static_cast<double>(i) / kGrid;
    if (link.rho(t) < c * t) return false;
  }
  return true;
}

}  // namespace detail

/// c = sigma'(0) and the largest grid-certified r with rho(t) >= c t on [0, r],
/// located by doubling then bisection.
inline LocalLinearity local_linearity_constants(const LinkFunction& link) {
  link.validate();
  const double c = link.slope_at_zero();
  double good = link.scale;
  while (!detail::linear_lower_bound_holds(link, c, good)) good *= 0.5;
  double bad = 2.0 * good;
  while (detail::linear_lower_bound_holds(link, c, bad)) {
    good = bad;
    bad *= 2.0;
    if (bad > 1e300) return {c, good};
  }
  for (int i = 0; i < 60; ++i) {
    const double mid = 0.5 * (good + bad);
    (detail::linear_lower_bound_holds(link, c, mid) ? good : bad) = mid;
  }
  return {c, good};
}

}  // namespace ncrs
