#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "fracslow/core/error.hpp"
#include "fracslow/core/sample_path.hpp"

namespace fracslow::noise {

enum class SeminormKind { holder, omega };

struct SeminormReport {
  SeminormKind kind = SeminormKind::holder;
  double alpha = 0.0;
  double value = 0.0;
  /// Holder: the pair (s, t) attaining the maximum. Omega: arg of the
  /// first-derivative term in arg_s and of the second-derivative term in arg_t.
  double arg_s = 0.0;
  double arg_t = 0.0;
};

/// Discrete Omega_alpha seminorm
/// sup_{t>=1} t^alpha |f'(t)| + sup_{t>=1} t^{1+alpha} |f''(t)|
/// with second-order central differences at interior grid points.
inline SeminormReport omega_seminorm(const SamplePath& path, double alpha) {
  if (!(alpha > 0.0)) throw ParameterError("omega_seminorm: alpha must be positive");
  if (!(path.t_end() > 1.0) || path.n_points() < 3)
    throw ParameterError("omega_seminorm: path must extend beyond t = 1");
  const double dt = path.dt();
  SeminormReport r{SeminormKind::omega, alpha, 0.0, 0.0, 0.0};
  double first = 0.0, second = 0.0;
  bool any = false;
  for (std::size_t i = 1; i + 1 < path.n_points(); ++i) {
    const double t = path.time(i);
    if (t < 1.0 - 1e-12) continue;
    any = true;
    const double d1 = ((path.row(i + 1) - path.row(i - 1)) / (2.0 * dt)).norm();
    const double d2 = ((path.row(i + 1) - 2.0 * path.row(i) + path.row(i - 1)) / (dt * dt)).norm();
    const double a = std::pow(t, alpha) * d1;
    const double b = std::pow(t, 1.0 + alpha) * d2;
    if (a > first) {
      first = a;
      r.arg_s = t;
    }
    if (b > second) {
      second = b;
      r.arg_t = t;
    }
  }
  if (!any) throw ParameterError("omega_seminorm: no interior grid point with t >= 1");
  r.value = first + second;
  return r;
}

/// Discrete alpha-Holder seminorm max |f(t)-f(s)| / |t-s|^alpha.
///
/// Exact over all pairs for up to 2048 points. Longer paths use every lag up
/// to stride_cap and geometrically spaced lags beyond it, each lag scanned
/// over all start points.
inline SeminormReport holder_seminorm(const SamplePath& path, double alpha, std::size_t stride_cap = 64) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ParameterError("holder_seminorm: alpha must lie in (0,1)");
  const std::size_t n = path.n_points();
  SeminormReport r{SeminormKind::holder, alpha, 0.0, path.t0(), path.t0()};
  if (n < 2) return r;
  std::vector<std::size_t> lags;
  if (n <= 2048) {
    for (std::size_t l = 1; l < n; ++l) lags.push_back(l);
  } else {
    const std::size_t cap = std::max<std::size_t>(1, std::min(stride_cap, n - 1));
    for (std::size_t l = 1; l <= cap; ++l) lags.push_back(l);
    double next = static_cast<double>(cap);
    while (true) {
      next *= 1.05;
      const auto l = static_cast<std::size_t>(std::ceil(next));
      if (l >= n) break;
      if (l > lags.back()) lags.push_back(l);
    }
    if (lags.back() != n - 1) lags.push_back(n - 1);
  }
  for (std::size_t l : lags) {
    const double denom = std::pow(static_cast<double>(l) * path.dt(), alpha);
    for (std::size_t i = 0; i + l < n; ++i) {
      const double q = (path.row(i + l) - path.row(i)).norm() / denom;
      if (q > r.value) {
        r.value = q;
        r.arg_s = path.time(i);
        r.arg_t = path.time(i + l);
      }
    }
  }
  return r;
}

}  // namespace fracslow::noise
