#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "ncrs/errors.hpp"

namespace ncrs {

/// Step size, horizon and votes per iteration that drive the vote variant to
/// a Cesaro-average gradient norm of at most epsilon.
struct VoteParams {
  double epsilon = 0.0;
  double alpha = 0.0;
  std::uint64_t T = 0;
  std::uint64_t N = 0;
  double l_cC = 0.0;
  /// ceil(54 pi L k l / eps^2)
  std::uint64_t n_rate = 0;
  /// ceil((2C + 4/3) ln 2 / rho(r)), enough for gamma_{N,r} <= 1/2
  std::uint64_t n_gamma = 0;

  std::uint64_t total_comparisons() const noexcept { return N * T; }
};

/// (2C + 4/3): the Bernstein denominator for scores bounded by 1.
constexpr double vote_bernstein_factor(double C) noexcept { return 2.0 * C + 4.0 / 3.0; }

/// exp(-N rho / (2C + 4/3)).
inline double vote_failure_bound(double n_votes, double rho, double C) {
  return std::exp(-n_votes * rho / vote_bernstein_factor(C));
}

namespace detail {

inline std::uint64_t ceil_count(double x) {
  if (!(x < 1.8e19)) throw DomainError("parameter recipe overflows a 64-bit count");
  return static_cast<std::uint64_t>(std::ceil(x));
}

}  // namespace detail

inline VoteParams vote_params(double epsilon, double smoothness, double k, double delta_f, double c, double C,
                              double rho_r) {
  if (!(epsilon > 0.0 && epsilon < 1.0)) throw DomainError("epsilon must lie in (0, 1)");
  if (!(smoothness > 0.0) || !(k > 0.0) || !(delta_f > 0.0) || !(c > 0.0)) {
    throw DomainError("L_f, k, delta_f and c must be positive");
  }
  if (!(C >= 1.0)) throw DomainError("C must be >= 1");
  if (!(rho_r > 0.0 && rho_r <= 1.0)) throw DomainError("rho(r) must lie in (0, 1]");
  if (!std::isfinite(smoothness * k * delta_f * C / c)) throw DomainError("non-finite input");

  VoteParams out;
  out.epsilon = epsilon;
  const double eps2 = epsilon * epsilon;
  const double pi = std::numbers::pi;
  out.alpha = 2.0 * epsilon / (9.0 * std::sqrt(2.0 * pi) * smoothness * k);
  out.T = detail::ceil_count(54.0 * pi * smoothness * k * delta_f / eps2);
  out.l_cC = vote_bernstein_factor(C) / (std::numbers::e * c);
  out.n_rate = detail::ceil_count(54.0 * pi * smoothness * k * out.l_cC / eps2);
  out.n_gamma = detail::ceil_count(vote_bernstein_factor(C) * std::numbers::ln2 / rho_r);
  out.N = std::max(out.n_rate, out.n_gamma);
  return out;
}

}  // namespace ncrs
