#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "ncrs/rng.hpp"

namespace ncrs {

/// Dense coordinate vector. Length is the ambient dimension of its context.
using Vec = std::vector<double>;
using ConstView = std::span<const double>;
using MutView = std::span<double>;

inline double dot(ConstView a, ConstView b) noexcept {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

inline double norm2(ConstView a) noexcept { return dot(a, a); }
inline double norm(ConstView a) noexcept { return std::sqrt(norm2(a)); }

/// y += alpha * x
inline void axpy(double alpha, ConstView x, MutView y) noexcept {
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void scale(MutView x, double alpha) noexcept {
  for (double& v : x) v *= alpha;
}

inline Vec sub(ConstView a, ConstView b) {
  Vec out(a.begin(), a.end());
  axpy(-1.0, b, out);
  return out;
}

inline double max_abs(ConstView a) noexcept {
  double m = 0.0;
  for (const double v : a) m = std::max(m, std::abs(v));
  return m;
}

inline bool all_finite(ConstView a) noexcept {
  for (const double v : a) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

/// Fills `out` with i.i.d. standard normals.
inline void fill_gaussian(RngStream& rng, MutView out) noexcept {
  for (double& v : out) v = rng.normal();
}

/// d i.i.d. standard normal draws.
inline Vec gaussian_vector(RngStream& rng, std::size_t d) {
  Vec v(d);
  fill_gaussian(rng, v);
  return v;
}

}  // namespace ncrs
