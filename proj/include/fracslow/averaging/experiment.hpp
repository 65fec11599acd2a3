#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracslow/averaging/coefficients.hpp"
#include "fracslow/core/error.hpp"
#include "fracslow/core/format.hpp"
#include "fracslow/core/parallel.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/core/stats.hpp"
#include "fracslow/ergodicity/decay.hpp"
#include "fracslow/integrate/integrators.hpp"
#include "fracslow/noise/fbm.hpp"
#include "fracslow/noise/seminorms.hpp"

namespace fracslow::averaging {

using ergodicity::RateFit;

enum class CoefficientRoute { automatic, analytic, table };

inline std::string to_string(CoefficientRoute r) {
  switch (r) {
    case CoefficientRoute::automatic: return "automatic";
    case CoefficientRoute::analytic: return "analytic";
    case CoefficientRoute::table: return "table";
  }
  return "automatic";
}

inline CoefficientRoute coefficient_route_from_string(const std::string& s) {
  for (auto r : {CoefficientRoute::automatic, CoefficientRoute::analytic, CoefficientRoute::table})
    if (to_string(r) == s) return r;
  throw ParameterError("unknown coefficient route '" + s + "'");
}

struct AveragingOptions {
  /// automatic uses the closed form when it exists, else `table`.
  CoefficientRoute route = CoefficientRoute::automatic;
  const measures::AveragedCoefficientTable* table = nullptr;
  /// dt_fast = eps / fast_resolution (capped at dt_slow).
  std::size_t fast_resolution = 32;
  std::size_t n_boot = 500;
  std::size_t workers = 0;
};

/// Error statistics at one epsilon.
struct EpsilonRow {
  double epsilon = 0.0;
  double median_sup = 0.0, q25_sup = 0.0, q75_sup = 0.0;
  /// 95% percentile-bootstrap interval of the median.
  double sup_ci_low = 0.0, sup_ci_high = 0.0;
  double median_holder = 0.0, q25_holder = 0.0, q75_holder = 0.0;
  double holder_ci_low = 0.0, holder_ci_high = 0.0;
  std::size_t n_effective = 0;
  std::size_t n_blowup = 0;
  std::size_t substeps = 1;
  /// Per-path errors of the surviving paths, in path order.
  std::vector<double> sup_errors;
  std::vector<double> holder_errors;
};

struct AveragingReport {
  std::vector<double> epsilons;
  std::size_t n_paths = 0;
  double alpha = 0.0;
  double hurst = 0.0;
  double hurst_fast = 0.0;
  double T = 0.0;
  double dt_slow = 0.0;
  std::string route;
  std::vector<EpsilonRow> rows;
  /// X^eps and X_bar consumed the same slow increments in every job.
  bool noise_shared = true;
  /// Paths on which X_bar itself blew up (excluded at every epsilon).
  std::vector<std::size_t> excluded_paths;
  RateFit sup_fit;
  RateFit holder_fit;
  std::string warning;

  /// Medians decrease along the ladder, except where consecutive bootstrap
  /// intervals overlap.
  bool decreasing_within_ci(bool holder = false) const {
    for (std::size_t i = 1; i < rows.size(); ++i) {
      const auto &a = rows[i - 1], &b = rows[i];
      const double ma = holder ? a.median_holder : a.median_sup, mb = holder ? b.median_holder : b.median_sup;
      const double hi_a = holder ? a.holder_ci_high : a.sup_ci_high, lo_b = holder ? b.holder_ci_low : b.sup_ci_low;
      if (!(mb < ma) && lo_b > hi_a) return false;
    }
    return true;
  }

  bool strictly_decreasing(bool holder = false) const {
    for (std::size_t i = 1; i < rows.size(); ++i)
      if (!((holder ? rows[i].median_holder : rows[i].median_sup) < (holder ? rows[i - 1].median_holder : rows[i - 1].median_sup)))
        return false;
    return true;
  }

  /// median(eps_max) / median(eps_min).
  double reduction_factor(bool holder = false) const {
    if (rows.empty()) return 0.0;
    const double first = holder ? rows.front().median_holder : rows.front().median_sup;
    const double last = holder ? rows.back().median_holder : rows.back().median_sup;
    return last > 0.0 ? first / last : std::numeric_limits<double>::infinity();
  }
};

/// Default Holder exponent (1 - H_hat + H) / 2, kept below H.
inline double default_alpha(double hurst, double hurst_fast) {
  const double a = 0.5 * (1.0 - hurst_fast + hurst);
  return std::min(a, 0.99 * hurst);
}

namespace detail {

struct MedianSummary {
  double median = 0.0, q25 = 0.0, q75 = 0.0, ci_low = 0.0, ci_high = 0.0;
};

inline MedianSummary summarize(const std::vector<double>& v, std::size_t n_boot, std::uint64_t seed, std::uint64_t stream) {
  MedianSummary s;
  if (v.empty()) {
    s.median = s.q25 = s.q75 = s.ci_low = s.ci_high = std::numeric_limits<double>::quiet_NaN();
    return s;
  }
  s.median = stats::median(v);
  s.q25 = stats::quantile(v, 0.25);
  s.q75 = stats::quantile(v, 0.75);
  if (n_boot < 2) {
    s.ci_low = s.ci_high = s.median;
    return s;
  }
  std::vector<double> reps(n_boot), pick(v.size());
  for (std::size_t r = 0; r < n_boot; ++r) {
    Rng rng(seed, derive_seed(stream, {r}));
    for (auto& p : pick) p = v[rng.index(v.size())];
    reps[r] = stats::median(pick);
  }
  s.ci_low = stats::quantile(reps, 0.025);
  s.ci_high = stats::quantile(reps, 0.975);
  return s;
}

inline void resolve_fields(const integrate::SlowFastConfig& c, const AveragingOptions& opt, SlowField& fbar, SlowField& gbar,
                           std::string& route) {
  const bool analytic_ok = has_analytic_averages(c);
  const bool use_table = opt.route == CoefficientRoute::table || (opt.route == CoefficientRoute::automatic && !analytic_ok);
  if (use_table) {
    if (!opt.table) throw ParameterError("averaging_experiment: table route selected but no coefficient table given");
    if (c.dim() != 1) throw DimensionError("averaging_experiment: tabulated coefficients are one-dimensional");
    fbar = table_fbar(*opt.table);
    gbar = table_gbar(*opt.table);
    route = "table";
    return;
  }
  if (!analytic_ok) throw ParameterError("averaging_experiment: no closed-form averages for this system; supply a table");
  const auto a = analytic_averages(c);
  fbar = a.fbar();
  gbar = a.gbar();
  route = "analytic";
}

}  // namespace detail

/// Log-log least squares of the median error against epsilon. The slope is
/// reported as RateFit::slope() (1 for errors proportional to epsilon); the
/// fit is a diagnostic and carries a warning when the medians are not
/// strictly decreasing along the ladder.
inline RateFit rate_fit_error_vs_epsilon(const AveragingReport& r, bool holder = false) {
  if (r.rows.size() < 3) throw ParameterError("rate_fit_error_vs_epsilon: need at least three epsilons");
  ergodicity::DecayCurve c;
  c.metric = holder ? "holder" : "sup";
  for (auto it = r.rows.rbegin(); it != r.rows.rend(); ++it) {
    c.times.push_back(it->epsilon);
    const double m = holder ? it->median_holder : it->median_sup;
    c.distances.push_back(std::isfinite(m) ? m : 0.0);
    c.se.push_back(0.0);
  }
  auto fit = ergodicity::fit_rate(c, ergodicity::RateModel::algebraic);
  if (!r.strictly_decreasing(holder)) {
    const std::string w = "median errors are not strictly decreasing along the ladder";
    fit.warning = fit.warning.empty() ? w : fit.warning + "; " + w;
  }
  return fit;
}

/// Integrates X^eps (for each eps on the ladder) and X_bar against the same
/// slow noise B per path and records sup |X^eps - X_bar| and the
/// alpha-Holder seminorm of the difference. Paths that blow up are excluded
/// and counted. `config.epsilon`, `dt_fast` and `fast_resolution` are
/// replaced per rung; `config.seed` is the master seed.
inline AveragingReport averaging_experiment(const integrate::SlowFastConfig& config, const std::vector<double>& epsilons,
                                            std::size_t n_paths, double alpha = 0.0, const AveragingOptions& opt = {}) {
  config.validate();
  if (epsilons.empty()) throw ParameterError("averaging_experiment: empty epsilon ladder");
  for (std::size_t i = 0; i < epsilons.size(); ++i) {
    if (!(epsilons[i] > 0.0)) throw ParameterError("averaging_experiment: epsilons must be positive");
    if (i > 0 && !(epsilons[i] < epsilons[i - 1])) throw ParameterError("averaging_experiment: ladder must be strictly decreasing");
  }
  if (n_paths < 1) throw ParameterError("averaging_experiment: n_paths must be positive");
  if (opt.fast_resolution < 1) throw ParameterError("averaging_experiment: fast_resolution must be positive");
  if (alpha == 0.0) alpha = default_alpha(config.hurst, config.hurst_fast);
  if (!(alpha > 0.0 && alpha < config.hurst)) throw ParameterError("averaging_experiment: need 0 < alpha < H");

  AveragingReport rep;
  rep.epsilons = epsilons;
  rep.n_paths = n_paths;
  rep.alpha = alpha;
  rep.hurst = config.hurst;
  rep.hurst_fast = config.hurst_fast;
  rep.T = config.T;
  rep.dt_slow = config.dt_slow;
  SlowField fbar, gbar;
  detail::resolve_fields(config, opt, fbar, gbar, rep.route);

  const std::size_t n = config.n_slow();
  const noise::FbmGenerator slow_gen(config.hurst, config.dim(), n, config.dt_slow, config.method);
  const auto slow_noise = [&](std::size_t p) { return slow_gen.sample(config.seed, derive_seed(label_of("averaging-slow"), {p})); };

  // Averaged path per noise realization.
  std::vector<SamplePath> xbar(n_paths);
  std::vector<std::uint64_t> xbar_checksum(n_paths);
  std::vector<char> xbar_ok(n_paths, 1);
  parallel_for(
      n_paths,
      [&](std::size_t p) {
        const auto B = slow_noise(p);
        xbar_checksum[p] = integrate::noise_checksum(B, 0, n);
        try {
          xbar[p] = integrate::integrate_young(fbar, gbar, B, config.x0, config.T, config.dt_slow);
        } catch (const BlowUpError&) {
          xbar_ok[p] = 0;
        }
      },
      opt.workers);
  for (std::size_t p = 0; p < n_paths; ++p)
    if (!xbar_ok[p]) rep.excluded_paths.push_back(p);

  // (eps, path) jobs; NaN marks an excluded job.
  const std::size_t n_eps = epsilons.size();
  const double nan = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> sup(n_eps * n_paths, nan), hol(n_eps * n_paths, nan);
  std::vector<char> shared(n_eps * n_paths, 1);
  std::vector<std::size_t> substeps(n_eps);
  std::vector<integrate::SlowFastConfig> rung(n_eps, config);
  for (std::size_t e = 0; e < n_eps; ++e) {
    rung[e].epsilon = epsilons[e];
    rung[e].dt_fast = 0.0;
    rung[e].fast_resolution = opt.fast_resolution;
    substeps[e] = rung[e].substeps();
    integrate::check_stiffness(rung[e].b, rung[e].y0, rung[e].effective_dt_fast(), epsilons[e]);
  }
  parallel_for(
      n_eps * n_paths,
      [&](std::size_t job) {
        const std::size_t e = job / n_paths, p = job % n_paths;
        if (!xbar_ok[p]) return;
        const auto& c = rung[e];
        const noise::FbmGenerator fast_gen(c.hurst_fast, c.b.dim_y, n * substeps[e], c.effective_dt_fast(), c.method);
        const auto B = slow_noise(p);
        const auto B_hat = fast_gen.sample(config.seed, derive_seed(label_of("averaging-fast"), {e, p}));
        try {
          const auto res = integrate::integrate_slow_fast(c, B, B_hat);
          shared[job] = res.slow_noise_checksum == xbar_checksum[p];
          const SamplePath diff(0.0, c.dt_slow, RowMatrix(res.X.values() - xbar[p].values()));
          double s = 0.0;
          for (std::size_t k = 0; k < diff.n_points(); ++k) s = std::max(s, diff.row(k).norm());
          sup[job] = s;
          hol[job] = noise::holder_seminorm(diff, alpha).value;
        } catch (const BlowUpError&) {
        }
      },
      opt.workers);

  for (std::size_t e = 0; e < n_eps; ++e) {
    EpsilonRow row;
    row.epsilon = epsilons[e];
    row.substeps = substeps[e];
    for (std::size_t p = 0; p < n_paths; ++p) {
      const std::size_t job = e * n_paths + p;
      if (!xbar_ok[p]) continue;
      if (std::isnan(sup[job])) {
        ++row.n_blowup;
        continue;
      }
      rep.noise_shared = rep.noise_shared && shared[job];
      row.sup_errors.push_back(sup[job]);
      row.holder_errors.push_back(hol[job]);
    }
    row.n_effective = row.sup_errors.size();
    const auto s = detail::summarize(row.sup_errors, opt.n_boot, config.seed, derive_seed(label_of("averaging-bootstrap"), {e, 0}));
    const auto h = detail::summarize(row.holder_errors, opt.n_boot, config.seed, derive_seed(label_of("averaging-bootstrap"), {e, 1}));
    row.median_sup = s.median;
    row.q25_sup = s.q25;
    row.q75_sup = s.q75;
    row.sup_ci_low = s.ci_low;
    row.sup_ci_high = s.ci_high;
    row.median_holder = h.median;
    row.q25_holder = h.q25;
    row.q75_holder = h.q75;
    row.holder_ci_low = h.ci_low;
    row.holder_ci_high = h.ci_high;
    rep.rows.push_back(std::move(row));
  }
  if (rep.rows.size() >= 3) {
    rep.sup_fit = rate_fit_error_vs_epsilon(rep, false);
    rep.holder_fit = rate_fit_error_vs_epsilon(rep, true);
  }
  if (!rep.excluded_paths.empty())
    rep.warning = std::to_string(rep.excluded_paths.size()) + " paths excluded (averaged equation blew up)";
  if (!rep.noise_shared) rep.warning += std::string(rep.warning.empty() ? "" : "; ") + "slow noise checksums differ";
  return rep;
}

/// Self-convergence scale of the averaged-equation integrator: the median over
/// n_paths of sup |X_bar(dt) - X_bar(2 dt)| on the experiment's slow noise.
/// Errors below this are indistinguishable from discretization noise.
inline double self_convergence_tolerance(const integrate::SlowFastConfig& config, std::size_t n_paths,
                                         const AveragingOptions& opt = {}) {
  config.validate();
  if (config.n_slow() % 2 != 0) throw ParameterError("self_convergence_tolerance: need an even number of slow steps");
  SlowField fbar, gbar;
  std::string route;
  detail::resolve_fields(config, opt, fbar, gbar, route);
  const std::size_t n = config.n_slow();
  const noise::FbmGenerator gen(config.hurst, config.dim(), n, config.dt_slow, config.method);
  std::vector<double> gaps(n_paths);
  parallel_for(
      n_paths,
      [&](std::size_t p) {
        const auto B = gen.sample(config.seed, derive_seed(label_of("averaging-slow"), {p}));
        const auto fine = integrate::integrate_young(fbar, gbar, B, config.x0, config.T, config.dt_slow);
        const auto coarse = integrate::integrate_young(fbar, gbar, B, config.x0, config.T, 2.0 * config.dt_slow);
        double s = 0.0;
        for (std::size_t k = 0; k < coarse.n_points(); ++k) s = std::max(s, (fine.row(2 * k) - coarse.row(k)).norm());
        gaps[p] = s;
      },
      opt.workers);
  return stats::median(gaps);
}

inline nlohmann::json to_json(const AveragingReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  const auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  for (const auto& row : r.rows)
    rows.push_back({{"epsilon", row.epsilon},
                    {"median_sup", num(row.median_sup)},
                    {"q25_sup", num(row.q25_sup)},
                    {"q75_sup", num(row.q75_sup)},
                    {"sup_ci", {num(row.sup_ci_low), num(row.sup_ci_high)}},
                    {"median_holder", num(row.median_holder)},
                    {"q25_holder", num(row.q25_holder)},
                    {"q75_holder", num(row.q75_holder)},
                    {"holder_ci", {num(row.holder_ci_low), num(row.holder_ci_high)}},
                    {"n_effective", row.n_effective},
                    {"n_blowup", row.n_blowup},
                    {"substeps", row.substeps}});
  nlohmann::json sup_fit = ergodicity::to_json(r.sup_fit), holder_fit = ergodicity::to_json(r.holder_fit);
  sup_fit["diagnostic"] = true;
  holder_fit["diagnostic"] = true;
  return {{"epsilons", r.epsilons},
          {"n_paths", r.n_paths},
          {"alpha", r.alpha},
          {"hurst", r.hurst},
          {"hurst_fast", r.hurst_fast},
          {"T", r.T},
          {"dt_slow", r.dt_slow},
          {"route", r.route},
          {"noise_shared", r.noise_shared},
          {"excluded_paths", r.excluded_paths},
          {"rows", rows},
          {"sup_fit", sup_fit},
          {"holder_fit", holder_fit},
          {"decreasing_within_ci", {{"sup", r.decreasing_within_ci(false)}, {"holder", r.decreasing_within_ci(true)}}},
          {"warning", r.warning}};
}

inline void write_report_csv(std::ostream& os, const AveragingReport& r) {
  os << "epsilon,median_sup,q25,q75,median_holder,n_effective\n";
  for (const auto& row : r.rows)
    os << format_double(row.epsilon) << ',' << format_double(row.median_sup) << ',' << format_double(row.q25_sup) << ','
       << format_double(row.q75_sup) << ',' << format_double(row.median_holder) << ',' << row.n_effective << '\n';
}

}  // namespace fracslow::averaging
