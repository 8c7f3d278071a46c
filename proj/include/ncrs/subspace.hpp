#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "ncrs/errors.hpp"
#include "ncrs/rng.hpp"
#include "ncrs/vec.hpp"

namespace ncrs {

/// A k-dimensional subspace of R^d held as a row-orthonormal k x d basis U.
///
/// The orthogonal projector onto the span of the rows is P = U^T U, applied as
/// U^T (U v) without ever forming the d x d matrix.
class Subspace {
 public:
  /// Builds from explicit rows. Rows must be orthonormal to within `tol`.
  static Subspace from_rows(const std::vector<Vec>& rows, double tol = 1e-10) {
    if (rows.empty()) throw ConfigError("subspace needs at least one row");
    const std::size_t d = rows.front().size();
    if (d == 0) throw ConfigError("subspace ambient dimension must be positive");
    if (rows.size() > d) throw ConfigError("subspace rank exceeds ambient dimension");
    Subspace s(d, rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      detail::require_same_dim(rows[i].size(), d, "Subspace::from_rows");
      std::copy(rows[i].begin(), rows[i].end(), s.basis_.begin() + static_cast<std::ptrdiff_t>(i * d));
    }
    if (s.orthonormality_error() > tol) throw ConfigError("subspace rows are not orthonormal");
    return s;
  }

  std::size_t ambient_dim() const noexcept { return dim_; }
  std::size_t rank() const noexcept { return rank_; }

  ConstView row(std::size_t i) const noexcept { return {basis_.data() + i * dim_, dim_}; }

  /// Coordinates U v in R^k.
  Vec coords(ConstView v) const {
    detail::require_same_dim(v.size(), dim_, "Subspace::coords");
    Vec z(rank_);
    for (std::size_t i = 0; i < rank_; ++i) z[i] = dot(row(i), v);
    return z;
  }

  /// U^T z in R^d.
  Vec lift(ConstView z) const {
    detail::require_same_dim(z.size(), rank_, "Subspace::lift");
    Vec v(dim_, 0.0);
    for (std::size_t i = 0; i < rank_; ++i) axpy(z[i], row(i), v);
    return v;
  }

  /// P v = U^T (U v).
  Vec project(ConstView v) const { return lift(coords(v)); }

  /// max_ij |(U U^T - I)_ij|
  double orthonormality_error() const noexcept {
    double err = 0.0;
    for (std::size_t i = 0; i < rank_; ++i) {
      for (std::size_t j = 0; j < rank_; ++j) {
        const double target = i == j ? 1.0 : 0.0;
        err = std::max(err, std::abs(dot(row(i), row(j)) - target));
      }
    }
    return err;
  }

  const std::vector<double>& data() const noexcept { return basis_; }

 private:
  Subspace(std::size_t d, std::size_t k) : dim_(d), rank_(k), basis_(d * k, 0.0) {}

  friend Subspace random_subspace(RngStream&, std::size_t, std::size_t);
  friend Subspace random_complement(RngStream&, const Subspace&, std::size_t);
  friend Subspace draw_orthonormal_rows(RngStream&, std::size_t, std::size_t, const Subspace*);

  std::size_t dim_;
  std::size_t rank_;
  std::vector<double> basis_;
};

namespace detail {

/// Removes the components of `v` along each row of `s` (one Gram-Schmidt sweep).
inline void orthogonalize_against(MutView v, const Subspace& s) {
  for (std::size_t i = 0; i < s.rank(); ++i) axpy(-dot(s.row(i), v), s.row(i), v);
}

}  // namespace detail

/// Gaussian rows orthonormalized by modified Gram-Schmidt with one
/// re-orthogonalization pass. A row that collapses below 1e-12 of its
/// original norm is redrawn. When `exclude` is given, rows are also made
/// orthogonal to it.
inline Subspace draw_orthonormal_rows(RngStream& rng, std::size_t d, std::size_t k,
                                      const Subspace* exclude) {
  const std::size_t taken = exclude ? exclude->rank() : 0;
  if (d == 0 || k == 0) throw ConfigError("subspace dimensions must be positive");
  if (k + taken > d) {
    throw ConfigError("requested rank " + std::to_string(k) + " does not fit in dimension " +
                      std::to_string(d) + (taken ? " after excluding " + std::to_string(taken) : ""));
  }
  Subspace out(d, k);
  Vec g(d);
  for (std::size_t i = 0; i < k; ++i) {
    for (;;) {
      fill_gaussian(rng, g);
      const double before = norm(g);
      for (int pass = 0; pass < 2; ++pass) {
        if (exclude) detail::orthogonalize_against(g, *exclude);
        for (std::size_t j = 0; j < i; ++j) axpy(-dot(out.row(j), g), out.row(j), g);
      }
      const double after = norm(g);
      if (after > 1e-12 * before) {
        scale(g, 1.0 / after);
        std::copy(g.begin(), g.end(), out.basis_.begin() + static_cast<std::ptrdiff_t>(i * d));
        break;
      }
    }
  }
  return out;
}

/// Rotation-invariant random k-dimensional subspace of R^d.
inline Subspace random_subspace(RngStream& rng, std::size_t d, std::size_t k) {
  return draw_orthonormal_rows(rng, d, k, nullptr);
}

/// Random m-dimensional subspace orthogonal to `active`.
inline Subspace random_complement(RngStream& rng, const Subspace& active, std::size_t m) {
  return draw_orthonormal_rows(rng, active.ambient_dim(), m, &active);
}

/// P v with P the projector of `s`.
inline Vec project(const Subspace& s, ConstView v) { return s.project(v); }

}  // namespace ncrs
