#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracslow/averaging/coefficients.hpp"
#include "fracslow/averaging/experiment.hpp"
#include "fracslow/cli/config.hpp"
#include "fracslow/core/error.hpp"
#include "fracslow/core/format.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/core/stats.hpp"
#include "fracslow/drift/certify.hpp"
#include "fracslow/drift/drift.hpp"
#include "fracslow/ergodicity/control.hpp"
#include "fracslow/ergodicity/decay.hpp"
#include "fracslow/ergodicity/experiments.hpp"
#include "fracslow/measures/empirical.hpp"
#include "fracslow/noise/fbm.hpp"
#include "fracslow/noise/validate.hpp"

namespace fracslow::cli {

namespace fs = std::filesystem;

/// Process exit codes of `run`.
enum ExitCode : int { kOk = 0, kError = 1, kSchema = 2, kBlowUp = 3, kAcceptance = 4 };

struct OutputFile {
  std::string name;
  std::string content;
};

struct AcceptanceCheck {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct KindResult {
  json result = json::object();
  std::vector<OutputFile> files;
  std::vector<AcceptanceCheck> checks;

  bool accepted() const {
    for (const auto& c : checks)
      if (!c.passed) return false;
    return true;
  }
  void check(std::string name, bool ok, std::string detail) { checks.push_back({std::move(name), ok, std::move(detail)}); }
};

// ---------------------------------------------------------------------------
// Typed parameter access on a resolved config.

class Params {
 public:
  explicit Params(const json& p) : p_(p) {}

  double num(const std::string& k) const { return p_.at(k).get<double>(); }
  std::optional<double> opt_num(const std::string& k) const {
    return p_.at(k).is_null() ? std::nullopt : std::optional<double>(p_.at(k).get<double>());
  }
  std::size_t count(const std::string& k) const { return p_.at(k).get<std::size_t>(); }
  std::optional<std::size_t> opt_count(const std::string& k) const {
    return p_.at(k).is_null() ? std::nullopt : std::optional<std::size_t>(p_.at(k).get<std::size_t>());
  }
  bool flag(const std::string& k) const { return p_.at(k).get<bool>(); }
  std::string str(const std::string& k) const { return p_.at(k).get<std::string>(); }
  std::vector<double> list(const std::string& k) const { return p_.at(k).get<std::vector<double>>(); }
  Vector vec(const std::string& k) const {
    const auto v = list(k);
    return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
  }
  drift::DriftSpec drift(const std::string& k = "drift") const { return drift::drift_from_json(p_.at(k)); }
  integrate::CoefficientSpec coefficient(const std::string& k) const { return integrate::coefficient_from_json(p_.at(k)); }

  Matrix matrix(const std::string& k, std::size_t n) const {
    const auto& v = p_.at(k);
    const auto d = static_cast<Eigen::Index>(n);
    if (v.is_number()) return v.get<double>() * Matrix::Identity(d, d);
    if (v.size() != n) throw DimensionError(k + ": expected a " + std::to_string(n) + " x " + std::to_string(n) + " matrix");
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = v[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
    return m;
  }

 private:
  const json& p_;
};

namespace detail {

inline std::string csv_banner(const std::string& hash) { return "# fracslow " + library_version() + " config=" + hash + "\n"; }

inline std::string curve_csv(const ergodicity::DecayCurve& c, const std::string& hash) {
  std::ostringstream os;
  os << csv_banner(hash);
  ergodicity::write_curve_csv(os, c);
  return os.str();
}

inline std::optional<ergodicity::CertificationRequest> certification(const Params& p, std::uint64_t seed) {
  if (!p.flag("certify")) return std::nullopt;
  ergodicity::CertificationRequest r;
  r.kappa = p.num("kappa");
  r.R = p.num("R");
  r.lambda = p.num("cert_lambda");
  r.seed = derive_seed(seed, {label_of("certificate")});
  return r;
}

inline Vector slow_input(const Params& p, const drift::DriftSpec& b, const char* key = "x") {
  const Vector x = p.vec(key);
  if (x.size() == 0) return Vector::Zero(static_cast<Eigen::Index>(b.dim_x));
  if (static_cast<std::size_t>(x.size()) != b.dim_x) throw DimensionError(std::string(key) + ": does not match drift dim_x");
  return x;
}

inline Vector fast_point(const Params& p, const drift::DriftSpec& b, const char* key) {
  const Vector y = p.vec(key);
  if (static_cast<std::size_t>(y.size()) != b.dim_y) throw DimensionError(std::string(key) + ": does not match drift dim_y");
  return y;
}

inline bool non_increasing(const std::vector<double>& v) {
  for (std::size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[i - 1]) return false;
  return true;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Kind runners. Each is a pure function of (config, workers).

inline KindResult run_noise_validate(const ExperimentConfig& c, std::size_t workers) {
  const Params p(c.params);
  noise::LawCheckOptions opt;
  opt.n_paths = p.count("n_paths");
  opt.n_steps = p.count("n_steps");
  opt.dt = p.num("dt");
  opt.lags.clear();
  for (double l : p.list("lags")) {
    if (!(l >= 1.0) || l != std::floor(l)) throw ParameterError("noise-validate: lags must be positive whole numbers");
    opt.lags.push_back(static_cast<std::size_t>(l));
  }
  opt.method = noise::fbm_method_from_string(p.str("method"));
  opt.workers = workers;
  const double z_max = p.num("z_max"), cov_z_max = p.num("cov_z_max");

  KindResult r;
  std::ostringstream csv;
  csv << detail::csv_banner(c.hash()) << "hurst,statistic,lag,empirical,expected,se,z\n";
  json per = json::array(), residuals = json::array();
  double worst_var = 0.0, worst_cov = 0.0;
  for (double h : p.list("hurst")) {
    opt.seed = derive_seed(c.seed, {label_of("noise-validate"), static_cast<std::uint64_t>(std::llround(h * 1e6))});
    const auto rows = noise::variance_law_check(h, opt);
    double wv = 0.0, wc = 0.0;
    for (const auto& row : rows) {
      const double z = row.z();
      csv << format_double(h) << ',' << row.statistic << ',' << row.lag << ',' << format_double(row.empirical) << ','
          << format_double(row.expected) << ',' << format_double(row.se) << ',' << format_double(z) << '\n';
      residuals.push_back({{"hurst", h}, {"statistic", row.statistic}, {"lag", row.lag}, {"empirical", row.empirical},
                           {"expected", row.expected}, {"se", row.se}, {"z", z}});
      double& worst = row.statistic == "variance" ? wv : wc;
      worst = std::max(worst, std::abs(z));
    }
    per.push_back({{"hurst", h}, {"max_abs_z_variance", wv}, {"abs_z_lag1_covariance", wc}});
    worst_var = std::max(worst_var, wv);
    worst_cov = std::max(worst_cov, wc);
  }
  r.result = {{"per_hurst", per},
              {"max_abs_z_variance", worst_var},
              {"max_abs_z_lag1_covariance", worst_cov},
              {"residuals", residuals}};
  r.files.push_back({"residuals.csv", csv.str()});
  r.check("variance law within z_max", worst_var <= z_max, "max |z| = " + format_double(worst_var));
  r.check("lag-1 covariance within cov_z_max", worst_cov <= cov_z_max, "max |z| = " + format_double(worst_cov));
  return r;
}

inline KindResult run_certify_drift(const ExperimentConfig& c, std::size_t) {
  const Params p(c.params);
  const auto b = p.drift();
  const Vector x = detail::slow_input(p, b);
  const double R = p.num("R");
  const double box = p.num("box") > 0.0 ? p.num("box") : std::max(4.0 * (R + 1.0), 8.0);
  const std::string v = p.str("variant");
  if (v != "both-outside" && v != "one-outside") throw ParameterError("certify-drift: variant must be both-outside or one-outside");
  const auto cert = drift::check_semi_contractive(b, x, p.num("kappa"), R, p.num("lambda"), p.count("n_samples"), box,
                                                  derive_seed(c.seed, {label_of("certificate")}),
                                                  v == "both-outside" ? drift::CertVariant::both_outside : drift::CertVariant::one_outside);
  KindResult r;
  r.result = drift::to_json(cert);
  r.files.push_back({"certificate.json", r.result.dump(2) + "\n"});
  r.check("certificate passed", cert.passed(), std::to_string(cert.violations.size()) + " violations");
  return r;
}

inline KindResult run_wasserstein_decay(const ExperimentConfig& c, std::size_t workers) {
  const Params p(c.params);
  const auto b = p.drift();
  ergodicity::WassersteinOptions opt;
  opt.seed = c.seed;
  opt.dt = p.num("dt");
  opt.workers = workers;
  opt.n_boot = p.count("n_boot");
  opt.x = detail::slow_input(p, b);
  opt.certification = detail::certification(p, c.seed);
  opt.force = p.flag("force");
  const auto res = ergodicity::wasserstein_decay_experiment(b, p.matrix("sigma", b.dim_y), p.num("hurst"), detail::fast_point(p, b, "y0_a"),
                                                            detail::fast_point(p, b, "y0_b"), p.list("t_grid"), p.count("n_paths"),
                                                            p.num("p"), opt);
  KindResult r;
  r.result = ergodicity::to_json(res);
  r.files.push_back({"curve.csv", detail::curve_csv(res.curve, c.hash())});
  const auto& e = res.comparison.exponential;
  if (auto lo = p.opt_num("rate_min")) r.check("rate >= rate_min", e.rate >= *lo, "rate = " + format_double(e.rate));
  if (auto hi = p.opt_num("rate_max")) r.check("rate <= rate_max", e.rate <= *hi, "rate = " + format_double(e.rate));
  if (auto r2 = p.opt_num("min_r_squared")) r.check("exponential r^2", e.r_squared > *r2, "r^2 = " + format_double(e.r_squared));
  if (p.flag("require_exponential"))
    r.check("exponential beats algebraic", res.comparison.best() == ergodicity::RateModel::exponential,
            "r^2 " + format_double(e.r_squared) + " vs " + format_double(res.comparison.algebraic.r_squared));
  return r;
}

inline KindResult run_tv_decay(const ExperimentConfig& c, std::size_t workers) {
  const Params p(c.params);
  const auto b = p.drift();
  ergodicity::TvOptions opt;
  opt.seed = c.seed;
  opt.dt = p.num("dt");
  opt.burn_in = p.num("burn_in");
  opt.workers = workers;
  opt.n_boot = p.count("n_boot");
  opt.delta_rate = p.opt_num("delta_rate");
  opt.lambda = p.num("lambda");
  opt.x = detail::slow_input(p, b);
  opt.certification = detail::certification(p, c.seed);
  opt.force = p.flag("force");
  const auto res = ergodicity::tv_decay_experiment(b, p.matrix("sigma", b.dim_y), p.num("hurst"), detail::fast_point(p, b, "y0"),
                                                   p.list("t_grid"), p.count("n_paths"), opt);
  KindResult r;
  r.result = ergodicity::to_json(res);
  r.files.push_back({"bound.csv", detail::curve_csv(res.bound, c.hash())});
  r.files.push_back({"histogram.csv", detail::curve_csv(res.histogram, c.hash())});
  r.files.push_back({"gap.csv", detail::curve_csv(res.gap, c.hash())});
  if (p.flag("require_decreasing")) r.check("bound non-increasing", detail::non_increasing(res.bound.distances), "");
  if (p.flag("require_dominates")) {
    std::size_t bad = 0;
    for (std::size_t j = 0; j < res.bound.size(); ++j) bad += res.bound.distances[j] < res.histogram.distances[j];
    r.check("bound >= histogram TV", bad == 0, std::to_string(bad) + " grid times below");
  }
  return r;
}

inline KindResult run_quenched_decay(const ExperimentConfig& c, std::size_t workers) {
  const Params p(c.params);
  const auto b = p.drift();
  const Matrix sigma = p.matrix("sigma", b.dim_y);
  const double hurst = p.num("hurst");
  ergodicity::QuenchedOptions opt;
  opt.seed = c.seed;
  opt.dt = p.num("dt");
  opt.workers = workers;
  opt.n_boot = p.count("n_boot");
  opt.invariant_samples = p.count("invariant_samples");
  opt.invariant_burn_in = p.num("invariant_burn_in");
  opt.p = p.num("p");
  opt.x = detail::slow_input(p, b);
  opt.certification = detail::certification(p, c.seed);
  opt.force = p.flag("force");
  const std::size_t n_paths = p.count("n_paths");

  ergodicity::InitialCondition init;
  const std::string kind = p.str("initial");
  if (kind == "point") init = detail::fast_point(p, b, "y0");
  else if (kind == "invariant") {
    // a cloud independent of the reference cloud the experiment draws itself
    measures::InvariantOptions io;
    io.n_samples = n_paths;
    io.seed = derive_seed(c.seed, {label_of("quenched-initial")});
    io.dt = opt.dt;
    io.burn_in = opt.invariant_burn_in;
    io.workers = workers;
    init = measures::estimate_invariant_measure(b, opt.x, sigma, hurst, io);
  } else
    throw ParameterError("quenched-decay: initial must be point or invariant");
  const ergodicity::QuenchedAdversary adv{p.num("adversary_scale"), p.num("adversary_decay"), Vector()};
  const auto res = ergodicity::quenched_decay_experiment(b, sigma, hurst, adv, init, p.list("t_grid"), n_paths, opt);
  KindResult r;
  r.result = ergodicity::to_json(res);
  r.files.push_back({"curve.csv", detail::curve_csv(res.curve, c.hash())});
  const auto& a = res.comparison.algebraic;
  if (auto s = p.opt_num("max_slope")) r.check("algebraic slope <= max_slope", a.slope() <= *s, "slope = " + format_double(a.slope()));
  if (p.flag("require_algebraic"))
    r.check("algebraic beats exponential", res.comparison.best() == ergodicity::RateModel::algebraic,
            "r^2 " + format_double(a.r_squared) + " vs " + format_double(res.comparison.exponential.r_squared));
  return r;
}

inline KindResult run_control(const ExperimentConfig& c, std::size_t workers) {
  const Params p(c.params);
  const auto b = p.drift();
  if (b.dim_y != 1) throw DimensionError("control: the adversary battery is one-dimensional");
  const double R = p.num("R"), eta = p.num("eta");
  const double R_bar = p.opt_num("R_bar").value_or(
      drift::enlarge_radius(p.num("kappa"), p.num("kappa_bar"), R, drift::lipschitz_on_ball(b, R + 1.0)));
  const std::size_t N = p.opt_count("N").value_or(ergodicity::control_smallness_N(p.num("C"), R_bar, eta, drift::lipschitz_bound(b)));
  const std::size_t M = p.count("steps_per_subinterval"), n_runs = p.count("n_runs");
  if (N < 1 || M < 2) throw ParameterError("control: need N >= 1 and at least two steps per subinterval");
  const auto battery = ergodicity::adversary_battery(n_runs, p.num("hurst"), N * M, derive_seed(c.seed, {label_of("battery")}), p.num("depth"));
  const double lo = p.num("x0_min"), hi = p.num("x0_max");
  std::vector<Vector> x0;
  for (std::size_t i = 0; i < n_runs; ++i)
    x0.push_back(Vector::Constant(1, n_runs > 1 ? lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_runs - 1) : lo));
  ergodicity::ControlOptions opt;
  opt.magnitude_scale = p.num("magnitude_scale");
  opt.workers = workers;
  const auto rep = ergodicity::control_experiment(b, R_bar, eta, N, battery, x0, opt);

  KindResult r;
  r.result = ergodicity::to_json(rep);
  const double formula = ergodicity::universal_control_magnitude(R_bar, eta, N) * opt.magnitude_scale;
  r.result["magnitude_formula"] = formula;
  std::ostringstream csv;
  csv << detail::csv_banner(c.hash()) << "run,x0,occupation,n_triggered,success,control_size\n";
  for (std::size_t i = 0; i < rep.runs.size(); ++i) {
    const auto& run = rep.runs[i];
    csv << i << ',' << format_double(x0[i](0)) << ',' << format_double(run.occupation) << ',' << run.n_triggered << ','
        << (run.success ? 1 : 0) << ',' << format_double(run.control_size) << '\n';
  }
  r.files.push_back({"runs.csv", csv.str()});
  if (p.flag("require_all"))
    r.check("every run reaches eta", rep.n_success() == rep.runs.size(),
            std::to_string(rep.n_success()) + "/" + std::to_string(rep.runs.size()));
  return r;
}

inline integrate::SlowFastConfig slow_fast_config(const ExperimentConfig& c) {
  const Params p(c.params);
  integrate::SlowFastConfig s;
  s.f = p.coefficient("f");
  s.g = p.coefficient("g");
  s.b = p.drift();
  s.sigma = p.matrix("sigma", s.b.dim_y);
  s.hurst = p.num("hurst");
  s.hurst_fast = p.num("hurst_fast");
  s.x0 = p.vec("x0");
  s.y0 = p.vec("y0");
  s.T = p.num("T");
  s.dt_slow = p.num("dt_slow");
  s.fast_resolution = p.count("fast_resolution");
  s.seed = c.seed;
  s.method = noise::fbm_method_from_string(p.str("method"));
  s.epsilon = p.list("epsilons").empty() ? 0.1 : p.list("epsilons").front();
  s.validate();
  return s;
}

inline KindResult run_averaging(const ExperimentConfig& c, std::size_t workers) {
  const Params p(c.params);
  const auto config = slow_fast_config(c);
  averaging::AveragingOptions opt;
  opt.route = averaging::coefficient_route_from_string(p.str("route"));
  opt.fast_resolution = p.count("fast_resolution");
  opt.n_boot = p.count("n_boot");
  opt.workers = workers;

  KindResult r;
  std::optional<measures::AveragedCoefficientTable> table;
  const bool need_table =
      opt.route == averaging::CoefficientRoute::table ||
      (opt.route == averaging::CoefficientRoute::automatic && !averaging::has_analytic_averages(config));
  if (need_table) {
    const std::size_t nodes = p.count("table_nodes");
    if (nodes < 2) throw ParameterError("averaging: table_nodes must be >= 2");
    std::vector<double> grid(nodes);
    const double lo = p.num("table_x_min"), hi = p.num("table_x_max");
    for (std::size_t i = 0; i < nodes; ++i) grid[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(nodes - 1);
    averaging::TableOptions to;
    to.seed = derive_seed(c.seed, {label_of("averaging-table")});
    to.certification.seed = derive_seed(c.seed, {label_of("certificate")});
    to.workers = workers;
    table = averaging::build_averaged_coefficients(config.f, config.g, config.b, config.sigma, config.hurst_fast, grid,
                                                   p.count("table_samples"), to);
    opt.table = &*table;
    std::ostringstream os;
    os << detail::csv_banner(c.hash());
    measures::write_table_csv(os, *table);
    r.files.push_back({"table.csv", os.str()});
  }
  const auto rep = averaging::averaging_experiment(config, p.list("epsilons"), p.count("n_paths"), p.opt_num("alpha").value_or(0.0), opt);
  r.result = averaging::to_json(rep);
  r.result["sup_reduction_factor"] = rep.reduction_factor(false);
  r.result["holder_reduction_factor"] = rep.reduction_factor(true);
  std::ostringstream csv;
  csv << detail::csv_banner(c.hash());
  averaging::write_report_csv(csv, rep);
  r.files.push_back({"report.csv", csv.str()});

  if (p.flag("require_decreasing")) {
    r.check("median sup error decreasing within CI", rep.decreasing_within_ci(false), "");
    r.check("median Holder error decreasing within CI", rep.decreasing_within_ci(true), "");
  }
  if (auto m = p.opt_num("min_ratio"))
    r.check("sup error ratio >= min_ratio", rep.reduction_factor(false) >= *m, "ratio = " + format_double(rep.reduction_factor(false)));
  if (p.flag("within_self_convergence")) {
    const double tol = averaging::self_convergence_tolerance(config, p.count("n_paths"), opt);
    r.result["self_convergence_tolerance"] = tol;
    double worst = 0.0;
    for (const auto& row : rep.rows) worst = std::max(worst, row.median_sup);
    r.check("median sup error <= self-convergence tolerance", worst <= tol,
            format_double(worst) + " vs " + format_double(tol));
  }
  return r;
}

inline KindResult run_invariant_measure(const ExperimentConfig& c, std::size_t workers) {
  const Params p(c.params);
  const auto b = p.drift();
  const Matrix sigma = p.matrix("sigma", b.dim_y);
  const double hurst = p.num("hurst");
  measures::InvariantOptions io;
  io.burn_in = p.num("burn_in");
  io.n_samples = p.count("n_samples");
  io.seed = derive_seed(c.seed, {label_of("invariant-measure")});
  io.dt = p.num("dt");
  io.certified_kappa = p.opt_num("certified_kappa");
  io.workers = workers;
  io.method = noise::fbm_method_from_string(p.str("method"));
  const auto m = measures::estimate_invariant_measure(b, detail::slow_input(p, b), sigma, hurst, io);

  KindResult r;
  json comps = json::array();
  for (std::size_t k = 0; k < m.dim(); ++k) {
    const auto col = m.column(k);
    comps.push_back({{"mean", stats::mean(col)},
                     {"mean_se", stats::standard_error(col)},
                     {"variance", stats::variance(col)},
                     {"variance_se", stats::variance_se(col)}});
  }
  r.result = {{"n_samples", m.size()}, {"drift_id", m.provenance().drift_id}, {"burn_in", m.provenance().burn_in},
              {"warning", m.provenance().warning}, {"components", comps}};
  std::ostringstream csv;
  csv << detail::csv_banner(c.hash());
  measures::write_measure_csv(csv, m);
  r.files.push_back({"samples.csv", csv.str()});

  if (auto z_max = p.opt_num("oracle_z_max")) {
    if (b.kind != drift::DriftKind::linear || b.dim_y != 1 || !(b.rate > 0.0))
      throw ParameterError("invariant-measure: the variance oracle needs a contracting one-dimensional linear drift");
    const double oracle = sigma(0, 0) * sigma(0, 0) * std::pow(b.rate, -2.0 * hurst) * measures::fou_oracle(hurst);
    const double var = comps[0]["variance"].get<double>(), se = comps[0]["variance_se"].get<double>();
    const double z = se > 0.0 ? (var - oracle) / se : INFINITY;
    r.result["oracle_variance"] = oracle;
    r.result["oracle_z"] = z;
    r.check("variance matches the closed form", std::abs(z) <= *z_max, "z = " + format_double(z));
  }
  return r;
}

inline KindResult run_kind(const ExperimentConfig& c, std::size_t workers) {
  if (c.kind == "noise-validate") return run_noise_validate(c, workers);
  if (c.kind == "certify-drift") return run_certify_drift(c, workers);
  if (c.kind == "wasserstein-decay") return run_wasserstein_decay(c, workers);
  if (c.kind == "tv-decay") return run_tv_decay(c, workers);
  if (c.kind == "quenched-decay") return run_quenched_decay(c, workers);
  if (c.kind == "control") return run_control(c, workers);
  if (c.kind == "averaging") return run_averaging(c, workers);
  if (c.kind == "invariant-measure") return run_invariant_measure(c, workers);
  find_kind(c.kind);  // throws with a suggestion
  throw SchemaError("kind '" + c.kind + "' has no runner");
}

// ---------------------------------------------------------------------------
// Output handling.

inline std::string content_hash(const std::string& s) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(fracslow::detail::fnv1a(s)));
  return buf;
}

/// Write-then-rename inside `dir`, so readers never see a half-written file.
inline void write_atomic(const fs::path& dir, const std::string& name, const std::string& content) {
  const fs::path tmp = dir / ("." + name + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed: " + tmp.string());
  }
  fs::rename(tmp, dir / name);
}

inline constexpr const char* kFailedMarker = "FAILED";

struct RunOptions {
  /// Overrides the config's output and the default root.
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
};

struct RunOutcome {
  int exit_code = kOk;
  fs::path dir;
  std::string message;
  std::string config_hash;
};

inline std::string default_output_root() {
  const char* env = std::getenv("FRACSLOW_OUT");
  return env && *env ? env : "results";
}

inline fs::path output_dir(const ExperimentConfig& c, const RunOptions& opt) {
  if (!opt.out.empty()) return opt.out;
  if (!c.output.empty()) return c.output;
  return fs::path(default_output_root()) / (c.name + "-" + c.hash().substr(0, 8));
}

inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const ParameterError*>(&e) || dynamic_cast<const DimensionError*>(&e) ||
      dynamic_cast<const StiffnessError*>(&e) || dynamic_cast<const json::exception*>(&e))
    return kSchema;
  if (dynamic_cast<const BlowUpError*>(&e)) return kBlowUp;
  if (dynamic_cast<const CertificationError*>(&e)) return kAcceptance;
  return kError;
}

/// Runs a validated config. Result files, result.json and replay.json are
/// written atomically into one directory; a FAILED marker covers the run
/// until everything is in place and stays behind (with the reason) on error.
inline RunOutcome run_experiment(ExperimentConfig c, const RunOptions& opt = {}) {
  if (opt.seed) c.seed = *opt.seed;
  if (opt.workers) c.workers = *opt.workers;
  RunOutcome out;
  out.config_hash = c.hash();
  out.dir = output_dir(c, opt);
  fs::create_directories(out.dir);
  write_atomic(out.dir, kFailedMarker, "incomplete: run in progress\n");
  try {
    auto kr = run_kind(c, c.workers);
    json acceptance = json::array();
    for (const auto& ch : kr.checks) acceptance.push_back({{"check", ch.name}, {"passed", ch.passed}, {"detail", ch.detail}});
    json files = json::object();
    for (const auto& f : kr.files) {
      write_atomic(out.dir, f.name, f.content);
      files[f.name] = content_hash(f.content);
    }
    const json result{{"kind", c.kind},
                      {"name", c.name},
                      {"config_hash", out.config_hash},
                      {"version", library_version()},
                      {"seed", c.seed},
                      {"result", kr.result},
                      {"acceptance", {{"checks", acceptance}, {"passed", kr.accepted()}}}};
    const std::string result_text = result.dump(2) + "\n";
    write_atomic(out.dir, "result.json", result_text);
    files["result.json"] = content_hash(result_text);
    const json replay{{"format", "fracslow-replay"},
                      {"version", library_version()},
                      {"config", c.to_json()},
                      {"config_hash", out.config_hash},
                      {"files", files}};
    write_atomic(out.dir, "replay.json", replay.dump(2) + "\n");
    fs::remove(out.dir / kFailedMarker);
    if (kr.accepted()) {
      out.message = "ok";
    } else {
      out.exit_code = kAcceptance;
      out.message = "acceptance failed:";
      for (const auto& ch : kr.checks)
        if (!ch.passed) out.message += " [" + ch.name + (ch.detail.empty() ? "" : ": " + ch.detail) + "]";
    }
  } catch (const std::exception& e) {
    out.exit_code = exit_code_for(e);
    out.message = e.what();
    write_atomic(out.dir, kFailedMarker, "exit " + std::to_string(out.exit_code) + ": " + out.message + "\n");
  }
  return out;
}

/// Loads (schema errors exit 2 before any output is created) and runs.
inline RunOutcome run_config_file(const std::string& path, const RunOptions& opt = {}) {
  ExperimentConfig c;
  try {
    c = load_config(path);
  } catch (const std::exception& e) {
    RunOutcome out;
    out.exit_code = exit_code_for(e);
    out.message = e.what();
    return out;
  }
  return run_experiment(std::move(c), opt);
}

}  // namespace fracslow::cli
