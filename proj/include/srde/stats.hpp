#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace srde {

inline double binomial_se(double p_hat, long n) {
  return n > 0 ? std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) / double(n)) : 0.0;
}

/// Agresti-Coull adjusted standard error: stays positive at p_hat in {0,1}.
inline double adjusted_se(long successes, long n) {
  const double pt = (double(successes) + 2.0) / (double(n) + 4.0);
  return std::sqrt(pt * (1.0 - pt) / (double(n) + 4.0));
}

struct Interval {
  double lo, hi;
};

/// Wilson score interval at z standard deviations.
inline Interval wilson_interval(long successes, long n, double z = 1.96) {
  if (n <= 0) return {0.0, 1.0};
  const double p = double(successes) / double(n);
  const double z2 = z * z;
  const double denom = 1.0 + z2 / double(n);
  const double centre = (p + z2 / (2.0 * double(n))) / denom;
  const double half =
      z * std::sqrt(p * (1.0 - p) / double(n) + z2 / (4.0 * double(n) * double(n))) / denom;
  return {std::max(0.0, centre - half), std::min(1.0, centre + half)};
}

/// Quantile of an unsorted sample by linear interpolation.
inline double quantile(std::vector<double> v, double q) {
  if (v.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(v.begin(), v.end());
  const double pos = q * double(v.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double w = pos - double(lo);
  return (1.0 - w) * v[lo] + w * v[hi];
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  long points = 0;
};

/// Ordinary least squares through (x_i, y_i).
inline LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("fit_line: need >= 2 matched points");
  const double n = double(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double denom = n * sxx - sx * sx;
  if (denom == 0.0) throw std::invalid_argument("fit_line: degenerate abscissae");
  LineFit f;
  f.slope = (n * sxy - sx * sy) / denom;
  f.intercept = (sy - f.slope * sx) / n;
  f.points = long(x.size());
  return f;
}

}  // namespace srde
