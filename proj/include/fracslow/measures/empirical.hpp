#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "fracslow/core/error.hpp"
#include "fracslow/core/format.hpp"
#include "fracslow/core/parallel.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/core/sample_path.hpp"
#include "fracslow/core/stats.hpp"
#include "fracslow/drift/drift.hpp"
#include "fracslow/integrate/integrators.hpp"
#include "fracslow/noise/fbm.hpp"

namespace fracslow::measures {

struct Provenance {
  std::string drift_id;
  double time = 0.0;
  double burn_in = 0.0;
  std::uint64_t seed = 0;
  /// Non-empty when the estimate was produced without a contractivity certificate
  /// or with a burn-in shorter than the default rule.
  std::string warning;
};

/// Sample cloud, one row per sample.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  explicit EmpiricalMeasure(RowMatrix samples, Provenance prov = {}) : samples_(std::move(samples)), prov_(std::move(prov)) {
    if (samples_.rows() < 1 || samples_.cols() < 1) throw ParameterError("EmpiricalMeasure: need at least one sample");
    if (!samples_.allFinite()) throw ParameterError("EmpiricalMeasure: samples must be finite");
  }

  static EmpiricalMeasure from_values(const std::vector<double>& v, Provenance prov = {}) {
    RowMatrix m(static_cast<Eigen::Index>(v.size()), 1);
    for (std::size_t i = 0; i < v.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = v[i];
    return EmpiricalMeasure(std::move(m), std::move(prov));
  }

  std::size_t size() const noexcept { return static_cast<std::size_t>(samples_.rows()); }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(samples_.cols()); }
  const RowMatrix& samples() const noexcept { return samples_; }
  const Provenance& provenance() const noexcept { return prov_; }
  Provenance& provenance() noexcept { return prov_; }

  Vector sample(std::size_t i) const { return samples_.row(static_cast<Eigen::Index>(i)).transpose(); }

  std::vector<double> column(std::size_t c = 0) const {
    std::vector<double> v(size());
    for (std::size_t i = 0; i < size(); ++i) v[i] = samples_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    return v;
  }

  double mean(std::size_t c = 0) const { return stats::mean(column(c)); }
  double variance(std::size_t c = 0) const { return stats::variance(column(c)); }

 private:
  RowMatrix samples_;
  Provenance prov_;
};

inline void write_measure_csv(std::ostream& os, const EmpiricalMeasure& m) {
  const auto& p = m.provenance();
  os << "# drift_id=" << p.drift_id << "\n# time=" << format_double(p.time) << "\n# burn_in=" << format_double(p.burn_in)
     << "\n# seed=" << p.seed << "\n# warning=" << p.warning << "\n";
  for (std::size_t c = 0; c < m.dim(); ++c) os << (c ? "," : "") << "y" << c;
  os << "\n";
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t c = 0; c < m.dim(); ++c)
      os << (c ? "," : "") << format_double(m.samples()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
    os << "\n";
  }
}

inline EmpiricalMeasure read_measure_csv(std::istream& is) {
  Provenance p;
  std::string line;
  std::vector<std::vector<double>> rows;
  bool header_seen = false;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find('=');
      if (eq == std::string::npos) continue;
      const std::string key = line.substr(2, eq - 2), val = line.substr(eq + 1);
      if (key == "drift_id") p.drift_id = val;
      else if (key == "time") p.time = std::stod(val);
      else if (key == "burn_in") p.burn_in = std::stod(val);
      else if (key == "seed") p.seed = std::stoull(val);
      else if (key == "warning") p.warning = val;
      continue;
    }
    if (!header_seen) {
      header_seen = true;
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
    if (!rows.empty() && row.size() != rows.front().size()) throw SchemaError("measure CSV: ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw SchemaError("measure CSV: no samples");
  RowMatrix m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t c = 0; c < rows[i].size(); ++c) m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  return EmpiricalMeasure(std::move(m), std::move(p));
}

/// Burn-in rule: contraction at the certified rate leaves a bias below e^{-10}.
inline double default_burn_in(double kappa) {
  if (!(kappa > 0.0)) return 10.0;
  return std::max(10.0 / kappa, 10.0);
}

struct InvariantOptions {
  /// 0 selects default_burn_in(certified_kappa).
  double burn_in = 0.0;
  std::size_t n_samples = 1000;
  std::uint64_t seed = 0;
  double dt = 1.0 / 256;
  /// Contraction rate from a passing certificate; absent means uncertified.
  std::optional<double> certified_kappa;
  std::size_t workers = 0;
  noise::FbmMethod method = noise::FbmMethod::circulant_embedding;
};

/// Independent draws of Y_{burn_in} for dY = b(x, Y) dt + sigma dB^H started
/// at 0, one noise realization per sample.
inline EmpiricalMeasure estimate_invariant_measure(const drift::DriftSpec& b, const Vector& x, const Matrix& sigma,
                                                   double hurst, const InvariantOptions& opt) {
  b.validate();
  if (opt.n_samples < 1) throw ParameterError("estimate_invariant_measure: n_samples must be positive");
  if (!(opt.dt > 0.0)) throw ParameterError("estimate_invariant_measure: dt must be positive");
  const double rule = default_burn_in(opt.certified_kappa.value_or(0.0));
  const double burn_in = opt.burn_in > 0.0 ? opt.burn_in : rule;
  Provenance prov{b.id(), burn_in, burn_in, opt.seed, ""};
  if (!opt.certified_kappa) prov.warning = "drift not certified";
  else if (burn_in < rule) prov.warning = "burn-in below default rule";
  const auto n_steps = static_cast<std::size_t>(std::ceil(burn_in / opt.dt - 1e-9));
  const std::size_t n = b.dim_y;
  const noise::FbmGenerator gen(hurst, n, n_steps, opt.dt, opt.method);
  const Vector y0 = Vector::Zero(static_cast<Eigen::Index>(n));
  RowMatrix out(static_cast<Eigen::Index>(opt.n_samples), static_cast<Eigen::Index>(n));
  parallel_for(
      opt.n_samples,
      [&](std::size_t i) {
        const auto B = gen.sample(opt.seed, derive_seed(label_of("invariant-sample"), {i}));
        const auto y = integrate::integrate_fast_frozen(x, b, sigma, 1.0, hurst, B, y0, static_cast<double>(n_steps) * opt.dt);
        out.row(static_cast<Eigen::Index>(i)) = y.row(y.n_steps());
      },
      opt.workers);
  return EmpiricalMeasure(std::move(out), std::move(prov));
}

inline EmpiricalMeasure estimate_invariant_measure(const drift::DriftSpec& b, const Vector& x, const Matrix& sigma,
                                                   double hurst, double burn_in, std::size_t n_samples, std::uint64_t seed) {
  InvariantOptions opt;
  opt.burn_in = burn_in;
  opt.n_samples = n_samples;
  opt.seed = seed;
  return estimate_invariant_measure(b, x, sigma, hurst, opt);
}

/// Stationary variance of the fractional OU process dY = -Y dt + dB^H, i.e.
/// Var(int_{-inf}^0 e^s dB_s) = int int e^{s+t} R(s, t) ds dt over the negative
/// quadrant with R the fBm covariance. The |s|^{2H} and |t|^{2H} terms give
/// Gamma(2H+1); the |t-s|^{2H} term collapses along the diagonal to
/// Gamma(2H+1)/2. Both reduce to int_0^inf u^{2H} e^{-u} du, evaluated by
/// exp-sinh quadrature.
inline double fou_oracle(double hurst) {
  if (!(hurst > 0.0 && hurst < 1.0)) throw ParameterError("fou_oracle: hurst must lie in (0, 1)");
  if (hurst == 0.5) return 0.5;
  boost::math::quadrature::exp_sinh<double> integrator;
  const double e = 2.0 * hurst;
  const double moment = integrator.integrate([e](double u) { return u > 0.0 ? std::exp(e * std::log(u) - u) : 0.0; }, 0.0,
                                             std::numeric_limits<double>::infinity());
  return 0.5 * moment;
}

struct AverageEstimate {
  double value = 0.0;
  double standard_error = 0.0;
};

/// Monte-Carlo average of h(x, y) over the cloud pi_x.
inline AverageEstimate average_coefficient(const std::function<double(const Vector&, const Vector&)>& h, const Vector& x,
                                           const EmpiricalMeasure& pi_x) {
  if (pi_x.size() == 0) throw ParameterError("average_coefficient: empty measure");
  std::vector<double> v(pi_x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = h(x, pi_x.sample(i));
  return {stats::mean(v), stats::standard_error(v)};
}

/// Componentwise coefficient: h(x_i, y_i) for component i.
inline AverageEstimate average_coefficient(const integrate::CoefficientSpec& h, const Vector& x, const EmpiricalMeasure& pi_x,
                                           std::size_t component = 0) {
  const auto i = static_cast<Eigen::Index>(component);
  return average_coefficient(
      [&h, i](const Vector& xv, const Vector& y) { return h(xv(i), y.size() > i ? y(i) : 0.0); }, x, pi_x);
}

}  // namespace fracslow::measures
