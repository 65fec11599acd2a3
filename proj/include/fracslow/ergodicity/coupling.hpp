#pragma once

#include <cmath>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "fracslow/core/error.hpp"
#include "fracslow/core/sample_path.hpp"
#include "fracslow/drift/drift.hpp"

namespace fracslow::ergodicity {

struct GirsanovOptions {
  double dt = 1e-4;
  /// Grid time at which the pair is handed over.
  double t_start = 0.0;
  /// Slow input of the drift; empty means the zero vector.
  Vector x;
  /// Shared driving noise; increments noise_first, noise_first+1, ... are
  /// consumed and the grid step must equal dt. Null means no noise.
  const SamplePath* noise = nullptr;
  std::size_t noise_first = 0;
  bool throw_on_violation = true;
};

/// Outcome of one coupled unit interval.
struct CouplingRecord {
  double t_start = 0.0;
  double initial_gap = 0.0;
  double terminal_gap = 0.0;
  bool coalesced = false;
  /// First grid time at which the pair merged (NaN if it never did).
  double coalescence_time = std::numeric_limits<double>::quiet_NaN();
  double sup_phi = 0.0;
  /// Finite-difference sup of the time derivative of phi, not counting the
  /// switch-off at coalescence.
  double sup_phi_dot = 0.0;
  std::size_t envelope_violations = 0;
  /// Largest sqrt|X_s - Z_s| - (1 - (s - t)) sqrt|X_t - Z_t| seen on the grid.
  double worst_envelope_excess = -std::numeric_limits<double>::infinity();
  Vector x_end;
  Vector z_end;

  /// Pinsker bound on the TV cost of the drift change, 1/2 (|phi|^2 + |phi'|^2)^{1/2}.
  double pinsker_cost() const { return 0.5 * std::sqrt(sup_phi * sup_phi + sup_phi_dot * sup_phi_dot); }
  bool envelope_held() const noexcept { return envelope_violations == 0; }
};

/// Couples X and Z over [t, t+1]:
///   dX = b(X) ds + sigma dB,
///   dZ = b(Z) ds + sigma dB + sigma phi(s) ds,
///   phi(s) = (4 |X_t - Z_t|^{1/2} / |X_s - Z_s|^{1/2} + lambda) sigma^{-1} (X_s - Z_s).
/// For b in S(kappa, R, lambda) the gap satisfies
/// d/ds |X_s - Z_s|^{1/2} <= -2 |X_t - Z_t|^{1/2}, so the pair merges before t + 1/2.
/// Explicit Euler; a step that would carry the gap through zero is taken as
/// the merge, after which phi = 0 and Z = X.
inline CouplingRecord girsanov_coupling_run(const drift::DriftSpec& b, const Matrix& sigma, double lambda, const Vector& x_state,
                                            const Vector& z_state, const GirsanovOptions& opt = {}) {
  b.validate();
  const auto n = static_cast<Eigen::Index>(b.dim_y);
  if (x_state.size() != n || z_state.size() != n) throw DimensionError("girsanov_coupling_run: state dimension mismatch");
  if (sigma.rows() != n || sigma.cols() != n) throw DimensionError("girsanov_coupling_run: sigma must be n x n");
  if (!x_state.allFinite() || !z_state.allFinite()) throw ParameterError("girsanov_coupling_run: states must be finite");
  if (!(opt.dt > 0.0) || opt.dt > 0.5) throw ParameterError("girsanov_coupling_run: dt must lie in (0, 1/2]");
  if (!(lambda >= 0.0)) throw ParameterError("girsanov_coupling_run: lambda must be >= 0");
  Eigen::FullPivLU<Matrix> lu(sigma);
  if (!lu.isInvertible()) throw ParameterError("girsanov_coupling_run: sigma must be invertible");
  const Matrix sigma_inv = lu.inverse();
  const Vector x = opt.x.size() > 0 ? opt.x : Vector::Zero(static_cast<Eigen::Index>(b.dim_x));

  const auto steps = static_cast<std::size_t>(std::llround(1.0 / opt.dt));
  if (opt.noise) {
    if (std::abs(opt.noise->dt() - opt.dt) > 1e-12 * opt.dt) throw ParameterError("girsanov_coupling_run: noise grid differs from dt");
    if (opt.noise->dim() != b.dim_y) throw DimensionError("girsanov_coupling_run: noise dimension mismatch");
    if (opt.noise_first + steps > opt.noise->n_steps()) throw ParameterError("girsanov_coupling_run: noise path too short");
  }

  CouplingRecord rec;
  rec.t_start = opt.t_start;
  Vector X = x_state, Z = z_state;
  const double r0 = (X - Z).norm();
  const double sqrt_r0 = std::sqrt(r0);
  rec.initial_gap = r0;
  if (r0 == 0.0) {
    rec.coalesced = true;
    rec.coalescence_time = opt.t_start;
  }
  const double tol = opt.dt * sqrt_r0 + 1e-12;
  Vector phi_prev;
  for (std::size_t k = 0; k < steps; ++k) {
    const Vector dB = opt.noise ? opt.noise->increment(opt.noise_first + k) : Vector::Zero(n);
    const Vector shared = sigma * dB;
    const Vector bX = drift::evaluate_drift(b, x, X);
    if (rec.coalesced) {
      X += bX * opt.dt + shared;
      Z = X;
      continue;
    }
    const Vector d = X - Z;
    const double r = d.norm();
    const Vector phi = (4.0 * sqrt_r0 / std::sqrt(r) + lambda) * (sigma_inv * d);
    rec.sup_phi = std::max(rec.sup_phi, phi.norm());
    if (phi_prev.size() > 0) rec.sup_phi_dot = std::max(rec.sup_phi_dot, (phi - phi_prev).norm() / opt.dt);
    phi_prev = phi;

    const Vector X_new = X + bX * opt.dt + shared;
    Vector Z_new = Z + drift::evaluate_drift(b, x, Z) * opt.dt + shared + sigma * phi * opt.dt;
    const double s = static_cast<double>(k + 1) * opt.dt;
    if ((X_new - Z_new).dot(d) <= 0.0) {
      Z_new = X_new;
      rec.coalesced = true;
      rec.coalescence_time = opt.t_start + s;
    }
    X = X_new;
    Z = Z_new;
    const double excess = std::sqrt((X - Z).norm()) - (1.0 - s) * sqrt_r0;
    rec.worst_envelope_excess = std::max(rec.worst_envelope_excess, excess);
    if (excess > tol) ++rec.envelope_violations;
  }
  rec.terminal_gap = (X - Z).norm();
  rec.x_end = X;
  rec.z_end = Z;
  if (rec.envelope_violations > 0 && opt.throw_on_violation)
    throw CouplingError("girsanov_coupling_run: square-root envelope violated at " + std::to_string(rec.envelope_violations) +
                            " grid points (worst excess " + std::to_string(rec.worst_envelope_excess) + "); reduce dt",
                        rec.worst_envelope_excess);
  return rec;
}

inline nlohmann::json to_json(const CouplingRecord& r) {
  return {{"t_start", r.t_start},
          {"initial_gap", r.initial_gap},
          {"terminal_gap", r.terminal_gap},
          {"coalesced", r.coalesced},
          {"coalescence_time", std::isnan(r.coalescence_time) ? nlohmann::json(nullptr) : nlohmann::json(r.coalescence_time)},
          {"sup_phi", r.sup_phi},
          {"sup_phi_dot", r.sup_phi_dot},
          {"pinsker_cost", r.pinsker_cost()},
          {"envelope_violations", r.envelope_violations},
          {"worst_envelope_excess", r.worst_envelope_excess}};
}

}  // namespace fracslow::ergodicity
