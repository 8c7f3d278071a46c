#pragma once

#include <cmath>
#include <vector>

#include "ncrs/errors.hpp"

namespace ncrs {

struct ScalingCell {
  double x = 0.0;
  double mean = 0.0;
  double stderr_ = 0.0;
};

struct ScalingFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

/// Ordinary least squares of log(mean) on log(x).
inline ScalingFit fit_scaling(const std::vector<ScalingCell>& cells) {
  if (cells.size() < 3) throw DomainError("fit_scaling needs at least 3 cells");
  double sx = 0.0;
  double sy = 0.0;
  for (const auto& c : cells) {
    if (!(c.x > 0.0) || !(c.mean > 0.0)) throw DomainError("fit_scaling needs positive x and mean");
    sx += std::log(c.x);
    sy += std::log(c.mean);
  }
  const double n = static_cast<double>(cells.size());
  const double mx = sx / n;
  const double my = sy / n;
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (const auto& c : cells) {
    const double dx = std::log(c.x) - mx;
    const double dy = std::log(c.mean) - my;
    sxx += dx * dx;
    sxy += dx * dy;
    syy += dy * dy;
  }
  if (sxx == 0.0) throw DomainError("fit_scaling needs at least two distinct x values");
  ScalingFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = syy == 0.0 ? 1.0 : (sxy * sxy) / (sxx * syy);
  return fit;
}

}  // namespace ncrs
