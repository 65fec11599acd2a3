#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracslow/core/error.hpp"
#include "fracslow/core/parallel.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/core/sample_path.hpp"
#include "fracslow/drift/drift.hpp"
#include "fracslow/integrate/integrators.hpp"
#include "fracslow/integrate/types.hpp"
#include "fracslow/noise/decomposition.hpp"

namespace fracslow::ergodicity {

using integrate::AdversaryPath;
using integrate::ControlSchedule;

/// Magnitude (2 R_bar + 1) / ((1 - 2 eta) delta) of the universal control, delta = 1/(2N).
inline double universal_control_magnitude(double R_bar, double eta, std::size_t N) {
  if (!(eta > 0.0 && eta < 0.5)) throw ParameterError("universal control: eta must lie in (0, 1/2)");
  if (N < 1) throw ParameterError("universal control: N must be >= 1");
  if (!(R_bar >= 0.0)) throw ParameterError("universal control: R_bar must be >= 0");
  const double delta = 1.0 / (2.0 * static_cast<double>(N));
  return (2.0 * R_bar + 1.0) / ((1.0 - 2.0 * eta) * delta);
}

/// Two-piece control +m e on [0, delta], -m e on (delta, 2 delta]. Its
/// integral is a triangle that returns to zero at 2 delta = 1/N.
inline ControlSchedule build_universal_control(double R_bar, double eta, std::size_t N, const Vector& unit_vector) {
  const double m = universal_control_magnitude(R_bar, eta, N);
  if (unit_vector.size() < 1 || !(unit_vector.norm() > 0.0)) throw ParameterError("universal control: direction must be nonzero");
  const Vector e = unit_vector.normalized();
  const double delta = 1.0 / (2.0 * static_cast<double>(N));
  return ControlSchedule({0.0, delta, 2.0 * delta}, {Vector(m * e), Vector(-m * e)});
}

/// Left side of the smallness condition on N:
/// (2 sqrt(C) / (3 N^{3/2})) (1 + 2 (2 R_bar + 1) N / (1 - 2 eta)).
inline double control_smallness_lhs(double C, double R_bar, double eta, std::size_t N) {
  const double n = static_cast<double>(N);
  return 2.0 * std::sqrt(C) / (3.0 * std::pow(n, 1.5)) * (1.0 + 2.0 * (2.0 * R_bar + 1.0) * n / (1.0 - 2.0 * eta));
}

/// Smallest N with control_smallness_lhs < 1 / Lip(b). C is the constant of
/// the a-priori bound |x^u - x|^2 <= C (1 + |u|^2) t, i.e. max(2D, 1/kappa_tilde)
/// from the off-diagonal contraction <b(x)-b(y), x-y> <= D - kappa_tilde |x-y|^2.
inline std::size_t control_smallness_N(double C, double R_bar, double eta, double lipschitz) {
  if (!(eta > 0.0 && eta < 0.5)) throw ParameterError("control_smallness_N: eta must lie in (0, 1/2)");
  if (!(C > 0.0) || !(lipschitz > 0.0)) throw ParameterError("control_smallness_N: C and Lip(b) must be positive");
  // lhs ~ N^{-1/2}; double until satisfied, then bisect.
  std::size_t hi = 1;
  while (!(control_smallness_lhs(C, R_bar, eta, hi) < 1.0 / lipschitz)) {
    if (hi > (std::size_t{1} << 40)) throw ParameterError("control_smallness_N: no admissible N");
    hi *= 2;
  }
  std::size_t lo = hi / 2;  // fails (or 0)
  while (hi - lo > 1) {
    const std::size_t mid = lo + (hi - lo) / 2;
    (control_smallness_lhs(C, R_bar, eta, mid) < 1.0 / lipschitz ? hi : lo) = mid;
  }
  return hi;
}

struct ControlOptions {
  /// Multiplies the universal control (1 is the construction itself).
  double magnitude_scale = 1.0;
  /// Direction e; empty means the first basis vector.
  Vector direction;
  /// Slow input of the drift; empty means zero.
  Vector x;
  std::size_t workers = 0;
};

struct ControlRun {
  /// Lebesgue measure of {t in [0,1] : |x(t)| > R_bar}, right-point rule on the grid.
  double occupation = 0.0;
  std::size_t n_triggered = 0;
  bool success = false;
  /// |u|_inf + number of discontinuities of the concatenated control.
  double control_size = 0.0;
};

struct ControlReport {
  double R_bar = 0.0;
  double eta = 0.0;
  std::size_t N = 0;
  double magnitude = 0.0;
  std::vector<ControlRun> runs;

  std::size_t n_success() const {
    std::size_t k = 0;
    for (const auto& r : runs) k += r.success;
    return k;
  }
  double min_occupation() const {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& r : runs) m = std::min(m, r.occupation);
    return m;
  }
};

namespace detail {

// Adversary restricted to grid indices [first, first + m], re-based to start at 0.
inline AdversaryPath adversary_piece(const AdversaryPath& a, std::size_t first, std::size_t m) {
  RowMatrix v = a.path.values().middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(m + 1));
  const Eigen::RowVectorXd base = v.row(0);
  v.rowwise() -= base;
  return AdversaryPath(SamplePath(0.0, a.path.dt(), std::move(v)));
}

inline double occupation_outside(const SamplePath& x, double R_bar) {
  double occ = 0.0;
  for (std::size_t k = 1; k < x.n_points(); ++k)
    if (x.row(k).norm() > R_bar) occ += x.dt();
  return occ;
}

}  // namespace detail

/// One subinterval of the construction.
struct ControlStep {
  double occupation = 0.0;
  bool triggered = false;
  Vector end_state;
};

/// Subinterval step of the trigger logic: the uncontrolled solution is tried
/// first; if it spends less than `threshold` outside B_{R_bar}, u_hat is
/// spliced in. `piece` is the adversary re-based at the subinterval start.
inline ControlStep control_step(const drift::DriftSpec& b, const Vector& x, const AdversaryPath& piece, const Vector& state,
                                double R_bar, double threshold, const ControlSchedule& u_hat) {
  const double span = piece.path.t_end();
  const ControlSchedule u_zero = ControlSchedule::zero(b.dim_y, 0.0, span);
  SamplePath traj = integrate::integrate_controlled_ode(b, x, piece, u_zero, state, span);
  ControlStep step;
  step.occupation = detail::occupation_outside(traj, R_bar);
  if (step.occupation < threshold) {
    traj = integrate::integrate_controlled_ode(b, x, piece, u_hat, state, span);
    step.occupation = detail::occupation_outside(traj, R_bar);
    step.triggered = true;
  }
  step.end_state = traj.state(traj.n_steps());
  return step;
}

/// Steps per subinterval of length 1/N on the adversary grid.
inline std::size_t steps_per_subinterval(const AdversaryPath& adv, std::size_t N) {
  const double per = 1.0 / (static_cast<double>(N) * adv.path.dt());
  const auto m = static_cast<std::size_t>(std::llround(per));
  if (m < 2 || std::abs(per - static_cast<double>(m)) > 1e-9 * per)
    throw ParameterError("control_experiment: adversary grid must split 1/N into an integer number (>= 2) of steps");
  if (m * N > adv.path.n_steps()) throw ParameterError("control_experiment: adversary must cover [0, 1]");
  return m;
}

/// Runs control_step over the N subintervals of [0, 1] for each
/// (adversary, x0) pair, restarting from the previous end state with the
/// shifted adversary. Failures are reported, not thrown.
inline ControlReport control_experiment(const drift::DriftSpec& b, double R_bar, double eta, std::size_t N,
                                        const std::vector<AdversaryPath>& adversaries, const std::vector<Vector>& x0_list,
                                        const ControlOptions& opt = {}) {
  b.validate();
  if (adversaries.size() != x0_list.size()) throw DimensionError("control_experiment: adversaries and x0_list differ in length");
  const std::size_t n = b.dim_y;
  Vector e = opt.direction.size() > 0 ? opt.direction : Vector::Unit(static_cast<Eigen::Index>(n), 0);
  if (static_cast<std::size_t>(e.size()) != n) throw DimensionError("control_experiment: direction dimension mismatch");
  const ControlSchedule u_hat = build_universal_control(R_bar, eta, N, e).scaled(opt.magnitude_scale);
  const Vector x = opt.x.size() > 0 ? opt.x : Vector::Zero(static_cast<Eigen::Index>(b.dim_x));
  const double threshold = eta / static_cast<double>(N);

  ControlReport rep;
  rep.R_bar = R_bar;
  rep.eta = eta;
  rep.N = N;
  rep.magnitude = u_hat.sup_norm();
  rep.runs.resize(adversaries.size());
  parallel_for(
      adversaries.size(),
      [&](std::size_t i) {
        const auto& adv = adversaries[i];
        const std::size_t m = steps_per_subinterval(adv, N);
        if (static_cast<std::size_t>(x0_list[i].size()) != n) throw DimensionError("control_experiment: x0 dimension mismatch");
        ControlRun run;
        Vector state = x0_list[i];
        for (std::size_t k = 0; k < N; ++k) {
          const auto step = control_step(b, x, detail::adversary_piece(adv, k * m, m), state, R_bar, threshold, u_hat);
          run.occupation += step.occupation;
          run.n_triggered += step.triggered;
          state = step.end_state;
        }
        // tolerance for summing N grid-rounded pieces
        run.success = run.occupation >= eta - 1e-9;
        run.control_size = (run.n_triggered > 0 ? u_hat.sup_norm() : 0.0) + 2.0 * static_cast<double>(run.n_triggered);
        rep.runs[i] = run;
      },
      opt.workers);
  return rep;
}

/// Standard one-dimensional battery on [0, 1] with `steps` grid steps: three in five members
/// are smooth parts of fBm increments (the Wiener-past component, truncated
/// at `depth`) and the rest power-law adversaries with exponent 0.4 or 0.7;
/// scales cycle through 1, 10, 100.
inline std::vector<AdversaryPath> adversary_battery(std::size_t count, double hurst, std::size_t steps, std::uint64_t seed,
                                                    double depth = 4.0) {
  if (steps < 1) throw ParameterError("adversary_battery: steps must be positive");
  const double dt = 1.0 / static_cast<double>(steps);
  static constexpr double kScales[] = {1.0, 10.0, 100.0};
  std::vector<AdversaryPath> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double scale = kScales[(i / 5) % 3];
    if (i % 5 < 3) {
      Rng rng(seed, derive_seed(label_of("adversary-battery"), {i}));
      auto dec = noise::draw_increment_decomposition(hurst, 0.0, 1.0, dt, rng, depth);
      RowMatrix v = dec.smooth.values() * scale;
      out.emplace_back(SamplePath(0.0, dt, std::move(v)), std::nullopt, scale);
    } else {
      const double a = i % 5 == 3 ? 0.4 : 0.7;
      const double sign = (i / 15) % 2 == 0 ? 1.0 : -1.0;
      out.push_back(AdversaryPath::power_law(scale, a, Vector::Constant(1, sign), dt, steps));
    }
  }
  return out;
}

inline nlohmann::json to_json(const ControlReport& r) {
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& run : r.runs)
    runs.push_back({{"occupation", run.occupation}, {"n_triggered", run.n_triggered}, {"success", run.success},
                    {"control_size", run.control_size}});
  return {{"R_bar", r.R_bar},         {"eta", r.eta},
          {"N", r.N},                 {"magnitude", r.magnitude},
          {"n_runs", r.runs.size()},  {"n_success", r.n_success()},
          {"min_occupation", r.runs.empty() ? 0.0 : r.min_occupation()},
          {"runs", runs}};
}

}  // namespace fracslow::ergodicity
