#pragma once

#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "ncrs/errors.hpp"
#include "ncrs/subspace.hpp"
#include "ncrs/vec.hpp"

namespace ncrs {

enum class InnerKind { pure_quadratic, quadratic_cosine, bounded_well };

inline std::string_view to_string(InnerKind kind) {
  switch (kind) {
    case InnerKind::pure_quadratic: return "pure_quadratic";
    case InnerKind::quadratic_cosine: return "quadratic_cosine";
    case InnerKind::bounded_well: return "bounded_well";
  }
  return "?";
}

inline InnerKind parse_inner_kind(std::string_view name) {
  if (name == "pure_quadratic") return InnerKind::pure_quadratic;
  if (name == "quadratic_cosine") return InnerKind::quadratic_cosine;
  if (name == "bounded_well") return InnerKind::bounded_well;
  throw ConfigError("unknown inner function kind '" + std::string(name) + "'");
}

/// Inner function g: R^k -> R of a ridge objective.
///
///   pure_quadratic    g(z) = 1/2 |z|^2                         L = 1,        g* = 0
///   quadratic_cosine  g(z) = 1/2 |z|^2 + a sum_i cos(w z_i)    L = 1 + a w^2, g* >= -a k
///   bounded_well      g(z) = sum_i z_i^2 / (1 + z_i^2)         L = 2,        g* = 0
struct InnerFunction {
  InnerKind kind = InnerKind::quadratic_cosine;
  double amplitude = 1.0;
  double frequency = 3.0;

  void validate() const {
    if (kind == InnerKind::quadratic_cosine) {
      if (!(amplitude >= 0.0) || !std::isfinite(amplitude)) throw ConfigError("amplitude must be >= 0");
      if (!(frequency > 0.0) || !std::isfinite(frequency)) throw ConfigError("frequency must be > 0");
    }
  }

  double value(ConstView z) const {
    double acc = 0.0;
    switch (kind) {
      case InnerKind::pure_quadratic:
        return 0.5 * norm2(z);
      case InnerKind::quadratic_cosine:
        for (const double zi : z) acc += 0.5 * zi * zi + amplitude * std::cos(frequency * zi);
        return acc;
      case InnerKind::bounded_well:
        for (const double zi : z) acc += zi * zi / (1.0 + zi * zi);
        return acc;
    }
    return acc;
  }

  Vec gradient(ConstView z) const {
    Vec g(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) {
      const double zi = z[i];
      switch (kind) {
        case InnerKind::pure_quadratic:
          g[i] = zi;
          break;
        case InnerKind::quadratic_cosine:
          g[i] = zi - amplitude * frequency * std::sin(frequency * zi);
          break;
        case InnerKind::bounded_well: {
          const double q = 1.0 + zi * zi;
          g[i] = 2.0 * zi / (q * q);
          break;
        }
      }
    }
    return g;
  }

  /// Global bound on the Hessian spectral norm.
  double smoothness() const noexcept {
    switch (kind) {
      case InnerKind::pure_quadratic: return 1.0;
      case InnerKind::quadratic_cosine: return 1.0 + amplitude * frequency * frequency;
      case InnerKind::bounded_well: return 2.0;
    }
    return 0.0;
  }

  /// Lower bound on g over R^k.
  double lower_bound(std::size_t k) const noexcept {
    return kind == InnerKind::quadratic_cosine ? -amplitude * static_cast<double>(k) : 0.0;
  }
};

/// Leakage term eta(x) = (tau / sqrt(m)) sum_j sin(<w_j, x>) along a nuisance
/// subspace W orthogonal to the active one. grad eta lies in W and has norm <= tau.
struct NuisanceSpec {
  Subspace directions;
  double tau = 0.0;

  std::size_t dim() const noexcept { return directions.rank(); }

  double weight() const noexcept { return tau / std::sqrt(static_cast<double>(dim())); }
};

inline double nuisance_eta(const NuisanceSpec& spec, ConstView x) {
  const Vec proj = spec.directions.coords(x);
  double acc = 0.0;
  for (const double v : proj) acc += std::sin(v);
  return spec.weight() * acc;
}

inline Vec nuisance_eta_gradient(const NuisanceSpec& spec, ConstView x) {
  Vec proj = spec.directions.coords(x);
  for (double& v : proj) v = spec.weight() * std::cos(v);
  return spec.directions.lift(proj);
}

/// f(x) = g(U x) [+ eta(x)] with known smoothness constant and lower bound.
class RidgeObjective {
 public:
  RidgeObjective(Subspace active, InnerFunction inner, std::optional<NuisanceSpec> nuisance = std::nullopt)
      : active_(std::move(active)), inner_(inner), nuisance_(std::move(nuisance)) {
    inner_.validate();
    if (nuisance_) {
      if (!(nuisance_->tau >= 0.0) || !std::isfinite(nuisance_->tau)) throw ConfigError("tau must be >= 0");
      if (nuisance_->directions.ambient_dim() != active_.ambient_dim()) {
        throw ConfigError("nuisance subspace lives in a different ambient dimension");
      }
      for (std::size_t j = 0; j < nuisance_->dim(); ++j) {
        for (std::size_t i = 0; i < active_.rank(); ++i) {
          if (std::abs(dot(nuisance_->directions.row(j), active_.row(i))) > 1e-9) {
            throw ConfigError("nuisance directions must be orthogonal to the active subspace");
          }
        }
      }
    }
  }

  std::size_t ambient_dim() const noexcept { return active_.ambient_dim(); }
  std::size_t intrinsic_dim() const noexcept { return active_.rank(); }
  const Subspace& active() const noexcept { return active_; }
  const InnerFunction& inner() const noexcept { return inner_; }
  const std::optional<NuisanceSpec>& nuisance() const noexcept { return nuisance_; }

  double eval(ConstView x) const {
    detail::require_same_dim(x.size(), ambient_dim(), "RidgeObjective::eval");
    double v = inner_.value(active_.coords(x));
    if (nuisance_) v += nuisance_eta(*nuisance_, x);
    return v;
  }

  Vec grad(ConstView x) const {
    detail::require_same_dim(x.size(), ambient_dim(), "RidgeObjective::grad");
    Vec g = active_.lift(inner_.gradient(active_.coords(x)));
    if (nuisance_) axpy(1.0, nuisance_eta_gradient(*nuisance_, x), g);
    return g;
  }

  /// L_g, plus tau when a nuisance term is present (Hessian of eta has norm <= tau / sqrt(m)).
  double smoothness_constant() const noexcept {
    return inner_.smoothness() + (nuisance_ ? nuisance_->tau : 0.0);
  }

  double lower_bound() const noexcept {
    double lb = inner_.lower_bound(intrinsic_dim());
    if (nuisance_) lb -= nuisance_->tau * std::sqrt(static_cast<double>(nuisance_->dim()));
    return lb;
  }

 private:
  Subspace active_;
  InnerFunction inner_;
  std::optional<NuisanceSpec> nuisance_;
};

inline double smoothness_constant(const RidgeObjective& obj) noexcept { return obj.smoothness_constant(); }

/// Uniform point on the sphere of the given radius inside the active subspace.
inline Vec sample_initial_point(const RidgeObjective& obj, RngStream& rng, double radius) {
  Vec z = gaussian_vector(rng, obj.intrinsic_dim());
  scale(z, radius / norm(z));
  return obj.active().lift(z);
}

/// Default starting radius 3 sqrt(k).
inline double default_initial_radius(std::size_t k) noexcept { return 3.0 * std::sqrt(static_cast<double>(k)); }

}  // namespace ncrs
