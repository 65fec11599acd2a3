#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <vector>

#include "fracslow/core/error.hpp"

namespace fracslow::stats {

inline double mean(std::span<const double> x) {
  if (x.empty()) throw ParameterError("mean of empty sample");
  // Kahan keeps ensemble means reproducible to the last bits across sizes.
  double s = 0.0, c = 0.0;
  for (double v : x) {
    const double y = v - c;
    const double t = s + y;
    c = (t - s) - y;
    s = t;
  }
  return s / static_cast<double>(x.size());
}

/// Unbiased sample variance.
inline double variance(std::span<const double> x) {
  if (x.size() < 2) return 0.0;
  const double m = mean(x);
  double s = 0.0;
  for (double v : x) s += (v - m) * (v - m);
  return s / static_cast<double>(x.size() - 1);
}

inline double stddev(std::span<const double> x) { return std::sqrt(variance(x)); }

/// Standard error of the sample mean.
inline double standard_error(std::span<const double> x) {
  return x.size() < 2 ? 0.0 : std::sqrt(variance(x) / static_cast<double>(x.size()));
}

/// Sample covariance of paired observations.
inline double covariance(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw ParameterError("covariance: need equal sizes >= 2");
  const double ma = mean(a), mb = mean(b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - ma) * (b[i] - mb);
  return s / static_cast<double>(a.size() - 1);
}

/// Standard error of the sample covariance, estimated from the products.
inline double covariance_se(std::span<const double> a, std::span<const double> b) {
  const double ma = mean(a), mb = mean(b);
  std::vector<double> prod(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) prod[i] = (a[i] - ma) * (b[i] - mb);
  return standard_error(prod);
}

/// Standard error of the unbiased sample variance via the fourth central moment.
inline double variance_se(std::span<const double> x) {
  const double n = static_cast<double>(x.size());
  const double m = mean(x);
  double m2 = 0.0, m4 = 0.0;
  for (double v : x) {
    const double d = (v - m) * (v - m);
    m2 += d;
    m4 += d * d;
  }
  m2 /= n;
  m4 /= n;
  return std::sqrt(std::max(0.0, (m4 - m2 * m2 * (n - 3.0) / (n - 1.0)) / n));
}

/// Linear-interpolated quantile (type 7), q in [0, 1].
inline double quantile(std::vector<double> x, double q) {
  if (x.empty()) throw ParameterError("quantile of empty sample");
  std::sort(x.begin(), x.end());
  const double pos = q * static_cast<double>(x.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - static_cast<double>(lo)) * (x[hi] - x[lo]);
}

inline double median(std::vector<double> x) { return quantile(std::move(x), 0.5); }

}  // namespace fracslow::stats
