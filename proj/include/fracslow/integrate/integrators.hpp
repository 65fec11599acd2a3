#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "fracslow/core/error.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/core/sample_path.hpp"
#include "fracslow/drift/drift.hpp"
#include "fracslow/integrate/types.hpp"
#include "fracslow/noise/fbm.hpp"

namespace fracslow::integrate {

/// Vector field of the averaged (effective) slow equation; the diffusion
/// field acts componentwise on dB.
using SlowField = std::function<Vector(const Vector&)>;

namespace detail {

inline void guard_state(const Vector& s, double scale, double t) {
  if (!s.allFinite() || s.norm() > 1e6 * scale)
    throw BlowUpError("integration blow-up at t = " + std::to_string(t) + " (|state| above 1e6 (1 + |x0|))", t);
}

inline void guard_scalar(double s, double scale, double t) {
  if (!std::isfinite(s) || std::abs(s) > 1e6 * scale)
    throw BlowUpError("integration blow-up at t = " + std::to_string(t) + " (|state| above 1e6 (1 + |x0|))", t);
}

// Index stride k with fine.dt() * k == coarse dt, or an error.
inline std::size_t grid_ratio(double coarse, double fine, const char* what) {
  const double r = coarse / fine;
  const auto k = static_cast<std::size_t>(std::llround(r));
  if (k < 1 || std::abs(r - static_cast<double>(k)) > 1e-9 * r)
    throw ParameterError(std::string(what) + ": noise grid does not divide the integration step");
  return k;
}

// Noise restricted to the integration grid.
inline SamplePath on_grid(const SamplePath& noise, double dt, std::size_t n_steps, const char* what) {
  const std::size_t k = grid_ratio(dt, noise.dt(), what);
  if (k * n_steps > noise.n_steps()) throw ParameterError(std::string(what) + ": noise path too short");
  return k == 1 ? noise : noise.subsample(k);
}

}  // namespace detail

/// Lipschitz constant used by the stiffness rule; the cubic drift is bounded
/// on a ball around the initial state.
inline double stiffness_lipschitz(const drift::DriftSpec& b, const Vector& y0) {
  const double L = drift::lipschitz_bound(b);
  if (std::isfinite(L)) return L;
  return drift::lipschitz_on_ball(b, std::max(2.0, 2.0 * y0.norm()));
}

/// Explicit Euler needs dt Lip(b) / eps <= 1.
inline void check_stiffness(const drift::DriftSpec& b, const Vector& y0, double dt, double epsilon) {
  const double L = stiffness_lipschitz(b, y0);
  if (L > 0.0 && dt * L / epsilon > 1.0 + 1e-12) {
    const double required = epsilon / L;
    throw StiffnessError("fast step dt = " + std::to_string(dt) + " does not resolve the 1/eps drift; need dt <= " +
                             std::to_string(required),
                         required);
  }
}

/// Fast dynamics with frozen slow input x:
///   dY = b(x, Y) dt / eps + eps^{-H_hat} sigma dB_hat
/// on the grid of `noise` over [noise.t0(), noise.t0() + span]; explicit
/// Euler with the raw noise increments added exactly.
inline SamplePath integrate_fast_frozen(const Vector& x, const drift::DriftSpec& b, const Matrix& sigma, double epsilon,
                                        double hurst_fast, const SamplePath& noise, const Vector& y0, double span) {
  if (!(epsilon > 0.0)) throw ParameterError("integrate_fast_frozen: epsilon must be positive");
  if (static_cast<std::size_t>(y0.size()) != b.dim_y || noise.dim() != b.dim_y)
    throw DimensionError("integrate_fast_frozen: y0 / noise dimension mismatch");
  if (sigma.rows() != y0.size() || sigma.cols() != y0.size()) throw DimensionError("integrate_fast_frozen: sigma must be n x n");
  const double dt = noise.dt();
  const auto n = static_cast<std::size_t>(std::llround(span / dt));
  if (n > noise.n_steps()) throw ParameterError("integrate_fast_frozen: span exceeds the noise path");
  check_stiffness(b, y0, dt, epsilon);
  const double noise_scale = std::pow(epsilon, -hurst_fast);
  const double scale = 1.0 + y0.norm();
  RowMatrix out(static_cast<Eigen::Index>(n + 1), y0.size());
  out.row(0) = y0.transpose();
  if (b.dim_y == 1 && b.dim_x == 1) {
    const double xs = x(0), s = sigma(0, 0) * noise_scale;
    double y = y0(0);
    for (std::size_t k = 0; k < n; ++k) {
      y += drift::drift_scalar(b, xs, y) * dt / epsilon;
      y += s * (noise(k + 1) - noise(k));
      detail::guard_scalar(y, scale, noise.time(k + 1));
      out(static_cast<Eigen::Index>(k + 1), 0) = y;
    }
  } else {
    Vector y = y0;
    for (std::size_t k = 0; k < n; ++k) {
      y += drift::evaluate_drift(b, x, y) * (dt / epsilon);
      y += noise_scale * (sigma * noise.increment(k));
      detail::guard_state(y, scale, noise.time(k + 1));
      out.row(static_cast<Eigen::Index>(k + 1)) = y.transpose();
    }
  }
  return SamplePath(noise.t0(), dt, std::move(out));
}

/// Left-point Young-Euler scheme for dX = fbar(X) dt + gbar(X) dB, where gbar
/// acts componentwise. `noise` may be finer than dt by an integer factor.
inline SamplePath integrate_young(const SlowField& fbar, const SlowField& gbar, const SamplePath& noise, const Vector& x0,
                                  double T, double dt) {
  if (!(dt > 0.0) || !(T > 0.0)) throw ParameterError("integrate_young: T and dt must be positive");
  const auto n = static_cast<std::size_t>(std::llround(T / dt));
  if (std::abs(static_cast<double>(n) * dt - T) > 1e-9 * T) throw ParameterError("integrate_young: T must be a multiple of dt");
  if (noise.dim() != static_cast<std::size_t>(x0.size())) throw DimensionError("integrate_young: noise dimension mismatch");
  const SamplePath B = detail::on_grid(noise, dt, n, "integrate_young");
  const double scale = 1.0 + x0.norm();
  RowMatrix out(static_cast<Eigen::Index>(n + 1), x0.size());
  out.row(0) = x0.transpose();
  Vector x = x0;
  for (std::size_t k = 0; k < n; ++k) {
    const Vector drift_term = fbar(x) * dt;
    const Vector diff_term = gbar(x).cwiseProduct(B.increment(k));
    x += drift_term;
    x += diff_term;
    detail::guard_state(x, scale, static_cast<double>(k + 1) * dt);
    out.row(static_cast<Eigen::Index>(k + 1)) = x.transpose();
  }
  return SamplePath(0.0, dt, std::move(out));
}

struct SlowFastResult {
  SamplePath X;
  /// Fast component sampled on the slow grid.
  SamplePath Y;
  std::size_t substeps = 1;
  /// Checksum of the slow-noise increments consumed.
  std::uint64_t slow_noise_checksum = 0;
};

/// Noise source for one slow-fast configuration: B (Hurst H, dim d) on the
/// slow grid and B_hat (Hurst H_hat, dim n) on the fast grid, with streams
/// derived from (seed, role, path index).
class SlowFastNoise {
 public:
  explicit SlowFastNoise(const SlowFastConfig& c)
      : seed_(c.seed),
        slow_(c.hurst, c.dim(), c.n_slow(), c.dt_slow, c.method),
        fast_(c.hurst_fast, c.b.dim_y, c.n_slow() * c.substeps(), c.effective_dt_fast(), c.method) {}

  SamplePath slow(std::size_t path) const { return slow_.sample(seed_, derive_seed(label_of("slow-noise"), {path})); }
  SamplePath fast(std::size_t path) const { return fast_.sample(seed_, derive_seed(label_of("fast-noise"), {path})); }

 private:
  std::uint64_t seed_;
  noise::FbmGenerator slow_;
  noise::FbmGenerator fast_;
};

/// Coupled slow-fast solver. Over each slow step [t_n, t_{n+1}] the slow
/// state is frozen at X_n while Y takes `substeps` Euler steps:
///   Y_{k+1} = Y_k + b(X_n, Y_k) dt_f / eps + eps^{-H_hat} sigma dB_hat_k
///   X_{n+1} = X_n + sum_k f(X_n, Y_k) dt_f + g(X_n, Y_n) dB_n   (left-point Young)
/// B and B_hat may be given on finer grids (integer ratios); they are subsampled.
inline SlowFastResult integrate_slow_fast(const SlowFastConfig& c, const SamplePath& B, const SamplePath& B_hat) {
  c.validate();
  const std::size_t n = c.n_slow(), m = c.substeps();
  const double dtf = c.effective_dt_fast();
  check_stiffness(c.b, c.y0, dtf, c.epsilon);
  if (B.dim() != c.dim() || B_hat.dim() != c.b.dim_y) throw DimensionError("integrate_slow_fast: noise dimension mismatch");
  const SamplePath Bs = detail::on_grid(B, c.dt_slow, n, "integrate_slow_fast (slow noise)");
  const SamplePath Bf = detail::on_grid(B_hat, dtf, n * m, "integrate_slow_fast (fast noise)");
  const double noise_scale = std::pow(c.epsilon, -c.hurst_fast);
  const double scale = 1.0 + c.x0.norm();
  const auto d = static_cast<Eigen::Index>(c.dim());
  const auto dy = static_cast<Eigen::Index>(c.b.dim_y);
  RowMatrix xs(static_cast<Eigen::Index>(n + 1), d), ys(static_cast<Eigen::Index>(n + 1), dy);
  xs.row(0) = c.x0.transpose();
  ys.row(0) = c.y0.transpose();
  const bool scalar = d == 1 && dy == 1;
  Vector x = c.x0, y = c.y0, fsum(d);
  for (std::size_t i = 0; i < n; ++i) {
    const double t_next = static_cast<double>(i + 1) * c.dt_slow;
    const Vector y_left = y;
    fsum.setZero();
    if (scalar) {
      const double xv = x(0), s = c.sigma(0, 0) * noise_scale;
      double yv = y(0), acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t j = i * m + k;
        acc += c.f(xv, yv);
        yv += drift::drift_scalar(c.b, xv, yv) * dtf / c.epsilon;
        yv += s * (Bf(j + 1) - Bf(j));
      }
      detail::guard_scalar(yv, scale + std::abs(c.y0(0)), t_next);
      fsum(0) = acc;
      y(0) = yv;
    } else {
      for (std::size_t k = 0; k < m; ++k) {
        const std::size_t j = i * m + k;
        for (Eigen::Index a = 0; a < d; ++a) fsum(a) += c.f(x(a), dy == d ? y(a) : 0.0);
        y += drift::evaluate_drift(c.b, x, y) * (dtf / c.epsilon);
        y += noise_scale * (c.sigma * Bf.increment(j));
      }
      detail::guard_state(y, scale + c.y0.norm(), t_next);
    }
    Vector dx(d);
    for (Eigen::Index a = 0; a < d; ++a) {
      const double ya = dy == d ? y_left(a) : 0.0;
      dx(a) = fsum(a) * dtf + c.g(x(a), ya) * (Bs(i + 1, static_cast<std::size_t>(a)) - Bs(i, static_cast<std::size_t>(a)));
    }
    x += dx;
    detail::guard_state(x, scale, t_next);
    xs.row(static_cast<Eigen::Index>(i + 1)) = x.transpose();
    ys.row(static_cast<Eigen::Index>(i + 1)) = y.transpose();
  }
  return {SamplePath(0.0, c.dt_slow, std::move(xs)), SamplePath(0.0, c.dt_slow, std::move(ys)), m,
          noise_checksum(Bs, 0, n)};
}

/// Path `path_index` of the configuration's own noise streams.
inline SlowFastResult integrate_slow_fast(const SlowFastConfig& c, std::size_t path_index = 0) {
  c.validate();
  const SlowFastNoise noise(c);
  return integrate_slow_fast(c, noise.slow(path_index), noise.fast(path_index));
}

/// Euler path of the adversary-driven flow
///   dY = b(x, Y) dt + d sigma_t + sigma dB_tilde_t
/// over grid indices [first, last] of the shared grid, started from y0 at
/// index `first`. Restarting from an intermediate state reproduces the
/// long run exactly.
inline SamplePath integrate_adversary_flow(const drift::DriftSpec& b, const Vector& x, const Matrix& sigma,
                                           const AdversaryPath& adversary, const SamplePath& rough, const Vector& y0,
                                           std::size_t first = 0, std::size_t last = std::numeric_limits<std::size_t>::max()) {
  const SamplePath& a = adversary.path;
  if (a.dt() != rough.dt() || a.n_points() != rough.n_points() || a.t0() != rough.t0())
    throw ParameterError("integrate_adversary_flow: adversary and noise grids differ");
  if (a.dim() != b.dim_y || rough.dim() != b.dim_y || static_cast<std::size_t>(y0.size()) != b.dim_y)
    throw DimensionError("integrate_adversary_flow: dimension mismatch");
  if (last == std::numeric_limits<std::size_t>::max()) last = a.n_steps();
  if (first > last || last > a.n_steps()) throw ParameterError("integrate_adversary_flow: bad index range");
  const double dt = a.dt();
  const double scale = 1.0 + y0.norm();
  RowMatrix out(static_cast<Eigen::Index>(last - first + 1), y0.size());
  out.row(0) = y0.transpose();
  if (b.dim_y == 1 && b.dim_x == 1) {
    const double xs = x(0), s = sigma(0, 0);
    double y = y0(0);
    for (std::size_t k = first; k < last; ++k) {
      y += drift::drift_scalar(b, xs, y) * dt;
      y += a(k + 1) - a(k);
      y += s * (rough(k + 1) - rough(k));
      detail::guard_scalar(y, scale, a.time(k + 1));
      out(static_cast<Eigen::Index>(k + 1 - first), 0) = y;
    }
  } else {
    Vector y = y0;
    for (std::size_t k = first; k < last; ++k) {
      y += drift::evaluate_drift(b, x, y) * dt;
      y += a.increment(k);
      y += sigma * rough.increment(k);
      detail::guard_state(y, scale, a.time(k + 1));
      out.row(static_cast<Eigen::Index>(k + 1 - first)) = y.transpose();
    }
  }
  return SamplePath(a.time(first), dt, std::move(out));
}

/// Euler path of the controlled ODE dx = b(x) dt + u dt + d sigma on [0, T]
/// (grid of the adversary); the control enters through its exact integral
/// over each step.
inline SamplePath integrate_controlled_ode(const drift::DriftSpec& b, const Vector& x, const AdversaryPath& adversary,
                                          const ControlSchedule& control, const Vector& x0, double T = 1.0) {
  const SamplePath& a = adversary.path;
  const double dt = a.dt();
  const auto n = static_cast<std::size_t>(std::llround(T / dt));
  if (n > a.n_steps()) throw ParameterError("integrate_controlled_ode: horizon exceeds the adversary path");
  if (control.dim() != b.dim_y || a.dim() != b.dim_y || static_cast<std::size_t>(x0.size()) != b.dim_y)
    throw DimensionError("integrate_controlled_ode: dimension mismatch");
  const double scale = 1.0 + x0.norm();
  RowMatrix out(static_cast<Eigen::Index>(n + 1), x0.size());
  out.row(0) = x0.transpose();
  Vector y = x0;
  Vector U_prev = control.integral(a.time(0));
  const bool scalar = b.dim_y == 1 && b.dim_x == 1;
  for (std::size_t k = 0; k < n; ++k) {
    const Vector U_next = control.integral(a.time(k + 1));
    // same operation order as integrate_adversary_flow, so u = 0 reproduces it bit for bit
    if (scalar)
      y(0) += drift::drift_scalar(b, x(0), y(0)) * dt;
    else
      y += drift::evaluate_drift(b, x, y) * dt;
    y += a.increment(k);
    y += U_next - U_prev;
    U_prev = U_next;
    detail::guard_state(y, scale, a.time(k + 1));
    out.row(static_cast<Eigen::Index>(k + 1)) = y.transpose();
  }
  return SamplePath(a.t0(), dt, std::move(out));
}

}  // namespace fracslow::integrate
