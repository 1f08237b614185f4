#include "orbitmatch/fit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "orbitmatch/error.hpp"

namespace orbitmatch {

SlopeFit fit_line(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("fit_line: x and y differ in length");
  const std::size_t n = x.size();
  if (n < 3) throw FitError("fit_line needs >= 3 points, got " + std::to_string(n), n);

  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (!(sxx > 0)) throw FitError("fit_line: all x values coincide", n);

  SlopeFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.n_points = n;
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  fit.window_lo = *lo;
  fit.window_hi = *hi;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double r = y[i] - (fit.slope * x[i] + fit.intercept);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

std::vector<std::size_t> upper_half(std::span<const double> x) {
  std::vector<std::size_t> idx;
  if (x.empty()) return idx;
  auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  const double mid = 0.5 * (*lo + *hi);
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] >= mid) idx.push_back(i);
  }
  if (idx.size() < 3 && x.size() >= 3) {
    idx.clear();
    for (std::size_t i = x.size() - 3; i < x.size(); ++i) idx.push_back(i);
  }
  return idx;
}

}  // namespace orbitmatch
