#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracslow/core/error.hpp"
#include "fracslow/core/parallel.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/core/sample_path.hpp"
#include "fracslow/core/stats.hpp"
#include "fracslow/drift/certify.hpp"
#include "fracslow/drift/drift.hpp"
#include "fracslow/ergodicity/coupling.hpp"
#include "fracslow/ergodicity/decay.hpp"
#include "fracslow/integrate/integrators.hpp"
#include "fracslow/measures/distances.hpp"
#include "fracslow/measures/empirical.hpp"
#include "fracslow/noise/fbm.hpp"
#include "fracslow/noise/riemann_liouville.hpp"
#include "fracslow/noise/seminorms.hpp"

namespace fracslow::ergodicity {

/// Contractivity check an experiment runs before doing any work.
struct CertificationRequest {
  double kappa = 1.0;
  double R = 0.0;
  double lambda = 0.0;
  std::size_t n_samples = 4096;
  /// 0 picks max(4 (R + 1), 8).
  double box = 0.0;
  std::uint64_t seed = 0;
  drift::CertVariant variant = drift::CertVariant::both_outside;
};

/// Runs the certificate; refuses with CertificationError unless `force`.
inline drift::ContractivityCertificate certify_or_refuse(const drift::DriftSpec& b, const Vector& x, const CertificationRequest& req,
                                                          bool force) {
  const double box = req.box > 0.0 ? req.box : std::max(4.0 * (req.R + 1.0), 8.0);
  auto cert = drift::check_semi_contractive(b, x, req.kappa, req.R, req.lambda, req.n_samples, box, req.seed, req.variant);
  if (!cert.passed() && !force)
    throw CertificationError("drift " + b.id() + " fails S(kappa=" + format_double(req.kappa) + ", R=" + format_double(req.R) +
                             ", lambda=" + format_double(req.lambda) + ") with " + std::to_string(cert.violations.size()) +
                             " violations; pass force to run anyway");
  return cert;
}

namespace detail {

inline Vector slow_input(const Vector& x, const drift::DriftSpec& b) {
  return x.size() > 0 ? x : Vector::Zero(static_cast<Eigen::Index>(b.dim_x));
}

inline std::vector<std::size_t> grid_indices(const std::vector<double>& t_grid, double dt, const char* what) {
  if (t_grid.empty()) throw ParameterError(std::string(what) + ": empty time grid");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < t_grid.size(); ++i) {
    const double t = t_grid[i];
    if (!(t >= 0.0) || (i > 0 && !(t > t_grid[i - 1]))) throw ParameterError(std::string(what) + ": times must be >= 0 and increasing");
    const double k = t / dt;
    if (std::abs(k - std::round(k)) > 1e-6) throw ParameterError(std::string(what) + ": times must lie on the dt grid");
    idx.push_back(static_cast<std::size_t>(std::llround(k)));
  }
  return idx;
}

inline RowMatrix pick_rows(const RowMatrix& m, const std::vector<std::size_t>& idx) {
  RowMatrix out(static_cast<Eigen::Index>(idx.size()), m.cols());
  for (std::size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

// W^p between clouds: exact in 1D, sliced otherwise.
inline double cloud_distance(const RowMatrix& a, const RowMatrix& b, double p, std::uint64_t seed) {
  if (a.cols() == 1) {
    return measures::wasserstein_1d(std::vector<double>(a.data(), a.data() + a.rows()),
                                    std::vector<double>(b.data(), b.data() + b.rows()), p, seed);
  }
  return measures::sliced_wasserstein(measures::EmpiricalMeasure(a), measures::EmpiricalMeasure(b), p, 64, seed);
}

inline std::vector<std::size_t> resample(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  for (auto& i : idx) i = rng.index(n);
  return idx;
}

// Bootstrap SE of a two-cloud statistic. Paired resampling keeps the coupling
// (same path indices on both sides); otherwise the clouds are resampled independently.
template <class Stat>
double bootstrap_se(const RowMatrix& a, const RowMatrix& b, bool paired, std::size_t n_boot, std::uint64_t seed, Stat&& stat) {
  if (n_boot < 2) return 0.0;
  std::vector<double> reps(n_boot);
  for (std::size_t r = 0; r < n_boot; ++r) {
    Rng rng(seed, derive_seed(label_of("decay-bootstrap"), {r}));
    const auto ia = resample(static_cast<std::size_t>(a.rows()), rng);
    const auto ib = paired ? ia : resample(static_cast<std::size_t>(b.rows()), rng);
    reps[r] = stat(pick_rows(a, ia), pick_rows(b, ib));
  }
  return stats::stddev(reps);
}

inline std::string metric_name(std::size_t dim, double p, const char* base = "W") {
  return std::string(dim > 1 ? "S" : "") + base + format_double(p);
}

}  // namespace detail

struct WassersteinOptions {
  std::uint64_t seed = 0;
  double dt = 1.0 / 64;
  std::size_t workers = 0;
  std::size_t n_boot = 200;
  Vector x;
  std::optional<CertificationRequest> certification;
  bool force = false;
};

struct DecayResult {
  DecayCurve curve;
  /// Fit of the model the experiment targets (exponential or algebraic).
  RateFit fit;
  ModelComparison comparison;
  std::optional<drift::ContractivityCertificate> certificate;
  std::string warning;
};

/// Synchronous coupling of two ensembles started at y0_a and y0_b: path i of
/// both ensembles is driven by the same fBm sample. Distance per grid time is
/// the empirical W^p (sliced in dim > 1) with a paired-bootstrap SE; the
/// target model is exponential.
inline DecayResult wasserstein_decay_experiment(const drift::DriftSpec& b, const Matrix& sigma, double hurst, const Vector& y0_a,
                                                const Vector& y0_b, const std::vector<double>& t_grid, std::size_t n_paths,
                                                double p = 1.0, const WassersteinOptions& opt = {}) {
  b.validate();
  if (n_paths < 2) throw ParameterError("wasserstein_decay_experiment: need at least two paths");
  const Vector x = detail::slow_input(opt.x, b);
  DecayResult res;
  if (opt.certification) {
    res.certificate = certify_or_refuse(b, x, *opt.certification, opt.force);
    if (!res.certificate->passed()) res.warning = "drift not certified (forced)";
  }
  const auto idx = detail::grid_indices(t_grid, opt.dt, "wasserstein_decay_experiment");
  const std::size_t n_steps = std::max<std::size_t>(idx.back(), 1);
  const auto n = static_cast<Eigen::Index>(b.dim_y);
  const noise::FbmGenerator gen(hurst, b.dim_y, n_steps, opt.dt);
  const auto zero = integrate::AdversaryPath::zero(b.dim_y, opt.dt, n_steps);
  std::vector<RowMatrix> A(idx.size(), RowMatrix(static_cast<Eigen::Index>(n_paths), n)), B = A;
  parallel_for(
      n_paths,
      [&](std::size_t i) {
        const auto W = gen.sample(opt.seed, derive_seed(label_of("wasserstein-decay"), {i}));
        const auto ya = integrate::integrate_adversary_flow(b, x, sigma, zero, W, y0_a);
        const auto yb = integrate::integrate_adversary_flow(b, x, sigma, zero, W, y0_b);
        for (std::size_t j = 0; j < idx.size(); ++j) {
          A[j].row(static_cast<Eigen::Index>(i)) = ya.row(idx[j]);
          B[j].row(static_cast<Eigen::Index>(i)) = yb.row(idx[j]);
        }
      },
      opt.workers);

  res.curve.metric = detail::metric_name(b.dim_y, p);
  res.curve.times = t_grid;
  res.curve.ensemble_size = n_paths;
  res.curve.distances.resize(idx.size());
  res.curve.se.resize(idx.size());
  parallel_for(
      idx.size(),
      [&](std::size_t j) {
        const std::uint64_t s = derive_seed(opt.seed, {label_of("distance"), j});
        auto stat = [&](const RowMatrix& a, const RowMatrix& bb) { return detail::cloud_distance(a, bb, p, s); };
        res.curve.distances[j] = stat(A[j], B[j]);
        res.curve.se[j] = detail::bootstrap_se(A[j], B[j], true, opt.n_boot, s, stat);
      },
      opt.workers);
  res.fit = fit_rate(res.curve, RateModel::exponential);
  res.comparison = compare_models(res.curve);
  return res;
}

struct TvOptions {
  std::uint64_t seed = 0;
  double dt = 1.0 / 256;
  /// The stationary copy starts at 0 this long before time 0.
  double burn_in = 10.0;
  std::size_t workers = 0;
  std::size_t n_boot = 100;
  /// Rate c in delta(t) = exp(-c t / 2); absent means fitted from the
  /// synchronous coupling distance.
  std::optional<double> delta_rate;
  double lambda = 0.0;
  Vector x;
  measures::BinRule bins = measures::BinRule::freedman_diaconis();
  std::optional<CertificationRequest> certification;
  bool force = false;
};

struct TvDecayResult {
  /// Coupling upper bound on TV at t + 1 for every grid time t.
  DecayCurve bound;
  /// Histogram TV between the two ensembles at the same times.
  DecayCurve histogram;
  /// Mean synchronous gap E|X_t - Z_t| on the grid, the source of delta.
  DecayCurve gap;
  RateFit fit;
  RateFit gap_fit;
  double delta_rate = 0.0;
  std::vector<std::size_t> n_coupled;
  std::size_t envelope_violations = 0;
  std::optional<drift::ContractivityCertificate> certificate;
  std::string warning;
};

/// Two-stage coupling estimate of TV(law X_{t+1}, pi). X starts at y0 at
/// time 0; Z starts at 0 at time -burn_in so it is (nearly) stationary and
/// carries the noise past. Both use the same fBm. At grid time t the pairs
/// with |X_t - Z_t| <= delta(t) are handed to girsanov_coupling_run over
/// [t, t+1]; each contributes min(1, Pinsker cost) and every other pair
/// contributes 1. The bound is the ensemble mean, with its standard error.
inline TvDecayResult tv_decay_experiment(const drift::DriftSpec& b, const Matrix& sigma, double hurst, const Vector& y0,
                                         const std::vector<double>& t_grid, std::size_t n_paths, const TvOptions& opt = {}) {
  b.validate();
  if (n_paths < 2) throw ParameterError("tv_decay_experiment: need at least two paths");
  if (!(opt.burn_in >= 0.0)) throw ParameterError("tv_decay_experiment: burn_in must be >= 0");
  const Vector x = detail::slow_input(opt.x, b);
  TvDecayResult res;
  if (opt.certification) {
    res.certificate = certify_or_refuse(b, x, *opt.certification, opt.force);
    if (!res.certificate->passed()) res.warning = "drift not certified (forced)";
  }
  const auto idx = detail::grid_indices(t_grid, opt.dt, "tv_decay_experiment");
  const auto unit = static_cast<std::size_t>(std::llround(1.0 / opt.dt));
  if (std::abs(static_cast<double>(unit) * opt.dt - 1.0) > 1e-9) throw ParameterError("tv_decay_experiment: 1/dt must be an integer");
  const auto i0 = static_cast<std::size_t>(std::llround(opt.burn_in / opt.dt));
  const std::size_t n_total = i0 + idx.back() + unit;
  const auto n = static_cast<Eigen::Index>(b.dim_y);
  const noise::FbmGenerator gen(hurst, b.dim_y, n_total, opt.dt);
  const auto zero = integrate::AdversaryPath::zero(b.dim_y, opt.dt, n_total);
  const Vector origin = Vector::Zero(n);
  auto path_noise = [&](std::size_t i) { return gen.sample(opt.seed, derive_seed(label_of("tv-decay"), {i})); };

  // Pass 1: synchronous runs.
  const std::size_t T = idx.size();
  std::vector<RowMatrix> Xt(T, RowMatrix(static_cast<Eigen::Index>(n_paths), n)), Zt = Xt, X1 = Xt, Z1 = Xt;
  parallel_for(
      n_paths,
      [&](std::size_t i) {
        const auto W = path_noise(i);
        const auto Z = integrate::integrate_adversary_flow(b, x, sigma, zero, W, origin);
        const auto X = integrate::integrate_adversary_flow(b, x, sigma, zero, W, y0, i0);
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < T; ++j) {
          Xt[j].row(r) = X.row(idx[j]);
          Zt[j].row(r) = Z.row(i0 + idx[j]);
          X1[j].row(r) = X.row(idx[j] + unit);
          Z1[j].row(r) = Z.row(i0 + idx[j] + unit);
        }
      },
      opt.workers);

  res.gap.metric = "mean-gap";
  res.gap.times = t_grid;
  res.gap.ensemble_size = n_paths;
  for (std::size_t j = 0; j < T; ++j) {
    std::vector<double> g(n_paths);
    for (std::size_t i = 0; i < n_paths; ++i) g[i] = (Xt[j].row(static_cast<Eigen::Index>(i)) - Zt[j].row(static_cast<Eigen::Index>(i))).norm();
    res.gap.distances.push_back(stats::mean(g));
    res.gap.se.push_back(stats::standard_error(g));
  }
  res.gap_fit = fit_rate(res.gap, RateModel::exponential);
  res.delta_rate = opt.delta_rate.value_or(res.gap_fit.rate);
  if (!(res.delta_rate > 0.0)) {
    res.warning += res.warning.empty() ? "" : "; ";
    res.warning += "non-positive delta rate; delta fixed at 1";
  }

  // Pass 2: Girsanov stage on the pairs within delta, same noise.
  std::vector<std::vector<double>> contrib(T, std::vector<double>(n_paths, 1.0));
  std::vector<std::vector<unsigned char>> coupled(T, std::vector<unsigned char>(n_paths, 0));
  std::vector<std::size_t> violations(n_paths, 0);
  parallel_for(
      n_paths,
      [&](std::size_t i) {
        std::optional<SamplePath> W;
        const auto r = static_cast<Eigen::Index>(i);
        for (std::size_t j = 0; j < T; ++j) {
          const double delta = res.delta_rate > 0.0 ? std::exp(-0.5 * res.delta_rate * t_grid[j]) : 1.0;
          const Vector xs = Xt[j].row(r).transpose(), zs = Zt[j].row(r).transpose();
          if ((xs - zs).norm() > delta) continue;
          if (!W) W = path_noise(i);
          GirsanovOptions g;
          g.dt = opt.dt;
          g.t_start = t_grid[j];
          g.x = x;
          g.noise = &*W;
          g.noise_first = i0 + idx[j];
          g.throw_on_violation = false;
          const auto rec = girsanov_coupling_run(b, sigma, opt.lambda, xs, zs, g);
          contrib[j][i] = std::min(1.0, rec.pinsker_cost());
          coupled[j][i] = 1;
          violations[i] += rec.envelope_violations > 0;
        }
      },
      opt.workers);
  for (auto v : violations) res.envelope_violations += v;

  res.bound.metric = "TV-bound";
  res.histogram.metric = "TV-histogram";
  for (auto* c : {&res.bound, &res.histogram}) c->ensemble_size = n_paths;
  for (std::size_t j = 0; j < T; ++j) {
    const double t1 = t_grid[j] + 1.0;
    res.bound.times.push_back(t1);
    res.bound.distances.push_back(stats::mean(contrib[j]));
    res.bound.se.push_back(stats::standard_error(contrib[j]));
    std::size_t k = 0;
    for (auto c : coupled[j]) k += c;
    res.n_coupled.push_back(k);

    auto hist = [&](const RowMatrix& a, const RowMatrix& bb) {
      return measures::tv_histogram(measures::EmpiricalMeasure(a), measures::EmpiricalMeasure(bb), opt.bins);
    };
    res.histogram.times.push_back(t1);
    res.histogram.distances.push_back(hist(X1[j], Z1[j]));
    res.histogram.se.push_back(
        detail::bootstrap_se(X1[j], Z1[j], false, opt.n_boot, derive_seed(opt.seed, {label_of("tv-histogram"), j}), hist));
  }
  res.fit = fit_rate(res.bound, RateModel::exponential);
  return res;
}

/// Power-law adversary with sigma'(t) = scale (1+t)^{-decay} direction; scale 0 is no adversary.
struct QuenchedAdversary {
  double scale = 0.0;
  double decay = 0.4;
  Vector direction;
};

struct QuenchedOptions {
  std::uint64_t seed = 0;
  double dt = 1.0 / 32;
  std::size_t workers = 0;
  std::size_t n_boot = 200;
  /// Size of the stationary reference cloud; 0 means n_paths.
  std::size_t invariant_samples = 0;
  /// Burn-in of the reference cloud; 0 uses the default rule.
  double invariant_burn_in = 0.0;
  double p = 1.0;
  Vector x;
  std::optional<CertificationRequest> certification;
  bool force = false;
};

struct QuenchedResult : DecayResult {
  /// Omega_beta seminorm of the adversary at beta = its decay exponent (0 without adversary).
  double adversary_seminorm = 0.0;
};

/// Initial condition: a point, or a cloud sampled cyclically by path index.
using InitialCondition = std::variant<Vector, measures::EmpiricalMeasure>;

/// Conditioned dynamics dY = b(Y) dt + d sigma_t + sigma dB~ with B~ the
/// Riemann-Liouville process (the Wiener past switched off), compared per
/// grid time with the stationary cloud of the genuine fBm dynamics. W^p with
/// an independent-bootstrap SE; the target model is algebraic.
inline QuenchedResult quenched_decay_experiment(const drift::DriftSpec& b, const Matrix& sigma, double hurst,
                                                const QuenchedAdversary& adversary, const InitialCondition& initial,
                                                const std::vector<double>& t_grid, std::size_t n_paths,
                                                const QuenchedOptions& opt = {}) {
  b.validate();
  if (n_paths < 2) throw ParameterError("quenched_decay_experiment: need at least two paths");
  if (adversary.scale != 0.0 && !(adversary.decay > 0.0)) throw ParameterError("quenched_decay_experiment: adversary decay must be positive");
  const Vector x = detail::slow_input(opt.x, b);
  QuenchedResult res;
  std::optional<double> kappa;
  if (opt.certification) {
    res.certificate = certify_or_refuse(b, x, *opt.certification, opt.force);
    if (res.certificate->passed()) kappa = opt.certification->kappa;
    else res.warning = "drift not certified (forced)";
  }
  const auto idx = detail::grid_indices(t_grid, opt.dt, "quenched_decay_experiment");
  const std::size_t n_steps = std::max<std::size_t>(idx.back(), 2);
  const auto n = static_cast<Eigen::Index>(b.dim_y);

  const auto adv = [&] {
    if (adversary.scale == 0.0) return integrate::AdversaryPath::zero(b.dim_y, opt.dt, n_steps);
    const Vector dir = adversary.direction.size() > 0 ? adversary.direction : Vector::Ones(n);
    if (dir.size() != n) throw DimensionError("quenched_decay_experiment: adversary direction dimension mismatch");
    return integrate::AdversaryPath::power_law(adversary.scale, adversary.decay, dir, opt.dt, n_steps);
  }();
  if (adversary.scale != 0.0 && adv.path.t_end() > 1.0) res.adversary_seminorm = noise::omega_seminorm(adv.path, adversary.decay).value;

  const noise::RiemannLiouvilleGenerator gen(hurst, b.dim_y, n_steps, opt.dt);
  std::vector<RowMatrix> Y(idx.size(), RowMatrix(static_cast<Eigen::Index>(n_paths), n));
  parallel_for(
      n_paths,
      [&](std::size_t i) {
        const auto W = gen.sample(opt.seed, derive_seed(label_of("quenched-noise"), {i}));
        Vector y0;
        if (const auto* v = std::get_if<Vector>(&initial)) y0 = *v;
        else {
          const auto& cloud = std::get<measures::EmpiricalMeasure>(initial);
          y0 = cloud.sample(i % cloud.size());
        }
        const auto y = integrate::integrate_adversary_flow(b, x, sigma, adv, W, y0);
        for (std::size_t j = 0; j < idx.size(); ++j) Y[j].row(static_cast<Eigen::Index>(i)) = y.row(idx[j]);
      },
      opt.workers);

  measures::InvariantOptions inv;
  inv.n_samples = opt.invariant_samples > 0 ? opt.invariant_samples : n_paths;
  inv.seed = derive_seed(opt.seed, {label_of("quenched-reference")});
  inv.dt = opt.dt;
  inv.burn_in = opt.invariant_burn_in;
  inv.certified_kappa = kappa;
  inv.workers = opt.workers;
  const auto pi = measures::estimate_invariant_measure(b, x, sigma, hurst, inv);

  res.curve.metric = detail::metric_name(b.dim_y, opt.p);
  res.curve.times = t_grid;
  res.curve.ensemble_size = n_paths;
  res.curve.distances.resize(idx.size());
  res.curve.se.resize(idx.size());
  parallel_for(
      idx.size(),
      [&](std::size_t j) {
        const std::uint64_t s = derive_seed(opt.seed, {label_of("distance"), j});
        auto stat = [&](const RowMatrix& a, const RowMatrix& bb) { return detail::cloud_distance(a, bb, opt.p, s); };
        res.curve.distances[j] = stat(Y[j], pi.samples());
        res.curve.se[j] = detail::bootstrap_se(Y[j], pi.samples(), false, opt.n_boot, s, stat);
      },
      opt.workers);
  res.fit = fit_rate(res.curve, RateModel::algebraic);
  res.comparison = compare_models(res.curve);
  return res;
}

inline nlohmann::json to_json(const DecayResult& r) {
  nlohmann::json j{{"curve", to_json(r.curve)},
                   {"fit", to_json(r.fit)},
                   {"exponential", to_json(r.comparison.exponential)},
                   {"algebraic", to_json(r.comparison.algebraic)},
                   {"best_model", to_string(r.comparison.best())},
                   {"warning", r.warning}};
  if (r.certificate) j["certificate"] = drift::to_json(*r.certificate);
  return j;
}

inline nlohmann::json to_json(const QuenchedResult& r) {
  auto j = to_json(static_cast<const DecayResult&>(r));
  j["adversary_seminorm"] = r.adversary_seminorm;
  return j;
}

inline nlohmann::json to_json(const TvDecayResult& r) {
  nlohmann::json j{{"bound", to_json(r.bound)},
                   {"histogram", to_json(r.histogram)},
                   {"gap", to_json(r.gap)},
                   {"fit", to_json(r.fit)},
                   {"gap_fit", to_json(r.gap_fit)},
                   {"delta_rate", r.delta_rate},
                   {"n_coupled", r.n_coupled},
                   {"envelope_violations", r.envelope_violations},
                   {"warning", r.warning}};
  if (r.certificate) j["certificate"] = drift::to_json(*r.certificate);
  return j;
}

}  // namespace fracslow::ergodicity
