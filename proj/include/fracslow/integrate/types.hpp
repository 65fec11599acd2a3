#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracslow/core/error.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/core/sample_path.hpp"
#include "fracslow/drift/drift.hpp"
#include "fracslow/noise/fbm.hpp"

namespace fracslow::integrate {

/// Componentwise slow coefficient
///   h_i(x, y) = c + wx x_i + wy y_i + wy2 y_i^2 + wsin sin x_i + wcos cos x_i.
/// Covers the test systems; y enters only through the i-th fast coordinate.
struct CoefficientSpec {
  double c = 0.0;
  double wx = 0.0;
  double wy = 0.0;
  double wy2 = 0.0;
  double wsin = 0.0;
  double wcos = 0.0;

  double operator()(double x, double y) const noexcept {
    return c + wx * x + wy * y + wy2 * y * y + wsin * std::sin(x) + wcos * std::cos(x);
  }

  /// The y-free part, h_i(x, 0) - wy*0 - wy2*0.
  double x_part(double x) const noexcept { return c + wx * x + wsin * std::sin(x) + wcos * std::cos(x); }

  bool depends_on_y() const noexcept { return wy != 0.0 || wy2 != 0.0; }
  bool is_zero() const noexcept { return c == 0 && wx == 0 && wy == 0 && wy2 == 0 && wsin == 0 && wcos == 0; }
  double lipschitz_x() const noexcept { return std::abs(wx) + std::abs(wsin) + std::abs(wcos); }

  static CoefficientSpec constant(double v) {
    CoefficientSpec s;
    s.c = v;
    return s;
  }
};

inline nlohmann::json to_json(const CoefficientSpec& s) {
  return {{"c", s.c}, {"wx", s.wx}, {"wy", s.wy}, {"wy2", s.wy2}, {"wsin", s.wsin}, {"wcos", s.wcos}};
}

inline CoefficientSpec coefficient_from_json(const nlohmann::json& j) {
  if (j.is_number()) return CoefficientSpec::constant(j.get<double>());
  if (!j.is_object()) throw SchemaError("coefficient: expected a number or an object");
  static const std::vector<std::string> keys{"c", "wx", "wy", "wy2", "wsin", "wcos"};
  for (const auto& [k, v] : j.items())
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) throw SchemaError("coefficient: unknown key '" + k + "'");
  CoefficientSpec s;
  s.c = j.value("c", 0.0);
  s.wx = j.value("wx", 0.0);
  s.wy = j.value("wy", 0.0);
  s.wy2 = j.value("wy2", 0.0);
  s.wsin = j.value("wsin", 0.0);
  s.wcos = j.value("wcos", 0.0);
  return s;
}

/// Full statement of the slow-fast system
///   dX = f(X, Y) dt + g(X, Y) dB,             B of Hurst index H
///   dY = b(X, Y) dt / eps + eps^{-H_hat} sigma dB_hat,  B_hat of Hurst index H_hat
struct SlowFastConfig {
  double epsilon = 0.1;
  double hurst = 0.7;
  double hurst_fast = 0.6;
  CoefficientSpec f;
  CoefficientSpec g;
  drift::DriftSpec b;
  Matrix sigma = Matrix::Identity(1, 1);
  Vector x0 = Vector::Zero(1);
  Vector y0 = Vector::Zero(1);
  double T = 1.0;
  double dt_slow = 1e-3;
  /// 0 selects epsilon / fast_resolution.
  double dt_fast = 0.0;
  std::size_t fast_resolution = 32;
  std::uint64_t seed = 0;
  noise::FbmMethod method = noise::FbmMethod::circulant_embedding;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(x0.size()); }
  std::size_t n_slow() const { return static_cast<std::size_t>(std::llround(T / dt_slow)); }

  /// Fast substeps per slow step: enough that dt_fast <= eps / fast_resolution
  /// (or <= the explicit dt_fast).
  std::size_t substeps() const {
    const double target = dt_fast > 0.0 ? dt_fast : epsilon / static_cast<double>(fast_resolution);
    return std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(dt_slow / target * (1.0 - 1e-12))));
  }
  double effective_dt_fast() const { return dt_slow / static_cast<double>(substeps()); }

  void validate() const {
    if (!(epsilon > 0.0)) throw ParameterError("SlowFastConfig: epsilon must be positive");
    if (!(hurst > 0.5 && hurst < 1.0)) throw ParameterError("SlowFastConfig: H must lie in (1/2, 1)");
    if (!(hurst_fast > 1.0 - hurst && hurst_fast < 1.0)) throw ParameterError("SlowFastConfig: H_hat must lie in (1 - H, 1)");
    if (x0.size() < 1) throw ParameterError("SlowFastConfig: empty slow state");
    if (static_cast<std::size_t>(y0.size()) != b.dim_y) throw DimensionError("SlowFastConfig: y0 does not match drift dimension");
    if (b.dim_x != dim()) throw DimensionError("SlowFastConfig: drift dim_x does not match x0");
    if ((f.depends_on_y() || g.depends_on_y()) && b.dim_y != dim())
      throw DimensionError("SlowFastConfig: y-dependent coefficients need dim_y == dim_x");
    if (sigma.rows() != y0.size() || sigma.cols() != y0.size()) throw DimensionError("SlowFastConfig: sigma must be n x n");
    if (std::abs(sigma.determinant()) < 1e-12) throw ParameterError("SlowFastConfig: sigma must be invertible");
    if (!(T > 0.0) || !(dt_slow > 0.0) || dt_slow > T) throw ParameterError("SlowFastConfig: need 0 < dt_slow <= T");
    if (std::abs(static_cast<double>(n_slow()) * dt_slow - T) > 1e-9 * T) throw ParameterError("SlowFastConfig: T must be a multiple of dt_slow");
    if (fast_resolution < 1) throw ParameterError("SlowFastConfig: fast_resolution must be positive");
    b.validate();
    if (!x0.allFinite() || !y0.allFinite()) throw ParameterError("SlowFastConfig: initial data must be finite");
  }
};

/// External adversary path sigma(t) with sigma(0) = 0, optionally carrying the
/// power-law form sigma'(t) = scale (1+t)^{-decay} e used by the battery.
struct AdversaryPath {
  SamplePath path;
  std::optional<double> decay;
  double scale = 0.0;

  explicit AdversaryPath(SamplePath p, std::optional<double> decay_exponent = std::nullopt, double s = 0.0)
      : path(std::move(p)), decay(decay_exponent), scale(s) {
    if (path.row(0).norm() != 0.0) throw ParameterError("AdversaryPath: path must start at 0");
  }

  static AdversaryPath zero(std::size_t dim, double dt, std::size_t n_steps) {
    return AdversaryPath(SamplePath::zeros(0.0, dt, n_steps + 1, dim));
  }

  /// sigma(t) = scale ((1+t)^{1-a} - 1) / (1-a) e, so |sigma'(t)| = scale (1+t)^{-a}.
  static AdversaryPath power_law(double scale, double a, const Vector& direction, double dt, std::size_t n_steps) {
    if (!(a > 0.0) || a == 1.0) throw ParameterError("AdversaryPath::power_law: exponent must be positive and != 1");
    const Vector e = direction.normalized();
    RowMatrix v(static_cast<Eigen::Index>(n_steps + 1), e.size());
    for (std::size_t i = 0; i <= n_steps; ++i) {
      const double t = static_cast<double>(i) * dt;
      v.row(static_cast<Eigen::Index>(i)) = (scale * (std::pow(1.0 + t, 1.0 - a) - 1.0) / (1.0 - a)) * e.transpose();
    }
    return AdversaryPath(SamplePath(0.0, dt, std::move(v)), a, scale);
  }

  std::size_t dim() const noexcept { return path.dim(); }
};

/// Piecewise-constant control: values[j] on (breakpoints[j], breakpoints[j+1]]
/// (the first piece also includes its left end).
struct ControlSchedule {
  std::vector<double> breakpoints;
  std::vector<Vector> values;

  ControlSchedule() = default;
  ControlSchedule(std::vector<double> bps, std::vector<Vector> vals) : breakpoints(std::move(bps)), values(std::move(vals)) {
    if (breakpoints.size() != values.size() + 1 || values.empty()) throw ParameterError("ControlSchedule: need k+1 breakpoints for k pieces");
    for (std::size_t i = 1; i < breakpoints.size(); ++i)
      if (!(breakpoints[i] > breakpoints[i - 1])) throw ParameterError("ControlSchedule: breakpoints must increase");
    for (const auto& v : values)
      if (v.size() != values.front().size()) throw DimensionError("ControlSchedule: pieces differ in dimension");
  }

  static ControlSchedule zero(std::size_t dim, double t0, double t1) {
    return ControlSchedule({t0, t1}, {Vector::Zero(static_cast<Eigen::Index>(dim))});
  }

  std::size_t dim() const noexcept { return values.empty() ? 0 : static_cast<std::size_t>(values.front().size()); }
  double start() const { return breakpoints.front(); }
  double end() const { return breakpoints.back(); }

  double sup_norm() const {
    double m = 0.0;
    for (const auto& v : values) m = std::max(m, v.norm());
    return m;
  }

  /// Jumps of the control extended by zero after end(): value changes at
  /// interior breakpoints plus the return to zero when the last piece is nonzero.
  std::size_t n_discontinuities() const {
    std::size_t n = 0;
    for (std::size_t j = 1; j < values.size(); ++j) n += (values[j] - values[j - 1]).norm() != 0.0;
    n += values.back().norm() != 0.0;
    return n;
  }

  Vector value_at(double t) const {
    if (t < start() || t > end()) return Vector::Zero(static_cast<Eigen::Index>(dim()));
    for (std::size_t j = 0; j < values.size(); ++j)
      if (t <= breakpoints[j + 1]) return values[j];
    return values.back();
  }

  /// Exact integral of the control over [start(), t] (zero outside the support).
  Vector integral(double t) const {
    Vector acc = Vector::Zero(static_cast<Eigen::Index>(dim()));
    for (std::size_t j = 0; j < values.size(); ++j) {
      const double a = breakpoints[j], b = std::min(breakpoints[j + 1], t);
      if (b <= a) break;
      acc += (b - a) * values[j];
    }
    return acc;
  }

  /// The same schedule moved by dt in time.
  ControlSchedule shifted(double dt) const {
    auto bps = breakpoints;
    for (auto& b : bps) b += dt;
    return ControlSchedule(std::move(bps), values);
  }

  /// Every value multiplied by k.
  ControlSchedule scaled(double k) const {
    auto vals = values;
    for (auto& v : vals) v *= k;
    return ControlSchedule(breakpoints, std::move(vals));
  }
};

/// FNV-1a over the raw bytes of the increments consumed from `noise` on
/// steps [first, last); equal checksums mean identical noise samples.
inline std::uint64_t noise_checksum(const SamplePath& noise, std::size_t first = 0, std::size_t last = 0) {
  if (last == 0) last = noise.n_steps();
  std::uint64_t h = 1469598103934665603ull;
  for (std::size_t i = first; i < last; ++i)
    for (std::size_t c = 0; c < noise.dim(); ++c) {
      const double d = noise(i + 1, c) - noise(i, c);
      unsigned char bytes[sizeof(double)];
      std::memcpy(bytes, &d, sizeof(double));
      for (unsigned char byte : bytes) {
        h ^= byte;
        h *= 1099511628211ull;
      }
    }
  return h;
}

}  // namespace fracslow::integrate
