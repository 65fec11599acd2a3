#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <string>

#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "fracslow/core/error.hpp"

namespace fracslow::noise {

inline void validate_hurst(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0))
    throw ParameterError("Hurst index must lie in (0,1), got " + std::to_string(hurst));
}

/// Autocovariance of unit-step fractional Gaussian noise at lag k:
/// 0.5 (|k+1|^{2H} - 2|k|^{2H} + |k-1|^{2H}).
inline double fgn_covariance(long long k, double hurst) {
  validate_hurst(hurst);
  if (k < 0) throw ParameterError("fgn_covariance: lag must be non-negative");
  const double h2 = 2.0 * hurst;
  const double kd = static_cast<double>(k);
  return 0.5 * (std::pow(kd + 1.0, h2) - 2.0 * std::pow(kd, h2) + std::pow(std::abs(kd - 1.0), h2));
}

namespace detail {

inline double mvn_inverse_alpha_squared(double hurst) {
  const double e = hurst - 0.5;
  if (e == 0.0) return 1.0;
  auto integrand = [e](double s) {
    const double d = std::pow(1.0 + s, e) - std::pow(s, e);
    return d * d;
  };
  // Beyond s = 1 the difference cancels badly and decays only like s^{2H-3}:
  // write it as s^e expm1(e log1p(1/s)) and integrate in x = log s.
  auto tail_integrand = [e](double x) {
    const double m = std::abs(std::expm1(e * std::log1p(std::exp(-x))));
    if (m == 0.0) return 0.0;
    return std::exp(2.0 * std::log(m) + (2.0 * e + 1.0) * x);
  };
  boost::math::quadrature::tanh_sinh<double> near;
  boost::math::quadrature::exp_sinh<double> far;
  const double tol = 1e-14;
  const double head = near.integrate(integrand, 0.0, 1.0, tol);
  const double tail = far.integrate(tail_integrand, 0.0, std::numeric_limits<double>::infinity(), tol);
  return head + tail + 1.0 / (2.0 * hurst);
}

}  // namespace detail

/// Normalisation constant alpha_H of the moving-average (Mandelbrot-van Ness)
/// representation, chosen so that Var(B_1) = 1. Computed by quadrature once
/// per Hurst index and cached.
inline double mvn_alpha(double hurst) {
  validate_hurst(hurst);
  static std::mutex m;
  static std::map<double, double> cache;
  std::lock_guard lock(m);
  if (auto it = cache.find(hurst); it != cache.end()) return it->second;
  const double a = 1.0 / std::sqrt(detail::mvn_inverse_alpha_squared(hurst));
  cache.emplace(hurst, a);
  return a;
}

}  // namespace fracslow::noise
