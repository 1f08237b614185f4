#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace orbitmatch {

/// Ordinary least squares y = slope * x + intercept.
struct SlopeFit {
  double slope = 0;
  double intercept = 0;
  double window_lo = 0;   // range of the fitted variable, in the caller's units
  double window_hi = 0;
  double residual = 0;    // root-mean-square residual
  std::size_t n_points = 0;
};

/// Needs at least 3 points with distinct x; throws FitError otherwise.
SlopeFit fit_line(std::span<const double> x, std::span<const double> y);

/// Indices of the points whose x lies in the upper half of the x-range
/// (x >= (x_min + x_max) / 2). Falls back to the last three points.
std::vector<std::size_t> upper_half(std::span<const double> x);

}  // namespace orbitmatch
