#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "fracslow/core/error.hpp"
#include "fracslow/core/parallel.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/drift/certify.hpp"
#include "fracslow/drift/drift.hpp"
#include "fracslow/ergodicity/experiments.hpp"
#include "fracslow/integrate/integrators.hpp"
#include "fracslow/integrate/types.hpp"
#include "fracslow/measures/averaged_table.hpp"
#include "fracslow/measures/empirical.hpp"

namespace fracslow::averaging {

using integrate::CoefficientSpec;
using integrate::SlowField;

/// Closed-form averaged coefficients, available when f and g do not depend on
/// y (then f_bar = f) or when the frozen fast equation is linear with additive
/// noise: b = -r (y - m(x)) (mean-field) or b = -r y + c (linear), r > 0.
/// Then pi^x = N(m(x), Sigma) with Sigma_ii = (sigma sigma^T)_ii r^{-2 H_hat} v(H_hat),
/// v = fou_oracle.
struct AnalyticAverages {
  CoefficientSpec f;
  CoefficientSpec g;
  drift::DriftSpec b;
  Vector second_moment_offset;  // Sigma_ii per component

  /// Stationary mean of component i of pi^x.
  double mean_y(const Vector& x, Eigen::Index i) const {
    if (b.kind == drift::DriftKind::linear) return b.offset / b.rate;
    return drift::apply_mean(b.mean, b.dim_x == 1 ? x(0) : x(i));
  }

  double average(const CoefficientSpec& h, const Vector& x, Eigen::Index i) const {
    if (!h.depends_on_y()) return h.x_part(x(i));
    const double m = mean_y(x, i);
    return h.x_part(x(i)) + h.wy * m + h.wy2 * (m * m + second_moment_offset(i));
  }

  SlowField fbar() const {
    return [a = *this](const Vector& x) {
      Vector out(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = a.average(a.f, x, i);
      return out;
    };
  }
  SlowField gbar() const {
    return [a = *this](const Vector& x) {
      Vector out(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) out(i) = a.average(a.g, x, i);
      return out;
    };
  }
};

inline bool has_analytic_averages(const integrate::SlowFastConfig& c) {
  if (!c.f.depends_on_y() && !c.g.depends_on_y()) return true;
  const auto& b = c.b;
  if (!(b.rate > 0.0)) return false;
  if (b.kind == drift::DriftKind::linear) return true;
  return b.kind == drift::DriftKind::mean_field;
}

inline AnalyticAverages analytic_averages(const integrate::SlowFastConfig& c) {
  if (!has_analytic_averages(c)) throw ParameterError("analytic averages need a contracting linear or mean-field fast drift");
  AnalyticAverages a{c.f, c.g, c.b, Vector::Zero(static_cast<Eigen::Index>(c.b.dim_y))};
  if (c.f.wy2 != 0.0 || c.g.wy2 != 0.0) {
    const Matrix cov = c.sigma * c.sigma.transpose();
    const double v = measures::fou_oracle(c.hurst_fast) * std::pow(c.b.rate, -2.0 * c.hurst_fast);
    for (Eigen::Index i = 0; i < cov.rows(); ++i) a.second_moment_offset(i) = cov(i, i) * v;
  }
  return a;
}

struct TableOptions {
  std::uint64_t seed = 0;
  /// Contraction check run at the first, middle and last node.
  ergodicity::CertificationRequest certification;
  bool force = false;
  /// 0 selects the burn-in rule at the certified rate.
  double burn_in = 0.0;
  double dt = 1.0 / 256;
  /// Nodes whose SE (of f_bar or g_bar) exceeds this are flagged.
  double se_tolerance = 0.05;
  std::size_t workers = 0;
};

/// Monte-Carlo f_bar and g_bar on a one-dimensional slow grid: at each node
/// the frozen fast equation is sampled by estimate_invariant_measure and f,
/// g are averaged over the cloud. Nodes draw independent noise.
inline measures::AveragedCoefficientTable build_averaged_coefficients(const CoefficientSpec& f, const CoefficientSpec& g,
                                                                      const drift::DriftSpec& b, const Matrix& sigma,
                                                                      double hurst_fast, const std::vector<double>& x_grid,
                                                                      std::size_t samples_per_node, const TableOptions& opt = {}) {
  b.validate();
  if (b.dim_x != 1 || b.dim_y != 1) throw DimensionError("build_averaged_coefficients: tables are one-dimensional");
  if (x_grid.size() < 2) throw ParameterError("build_averaged_coefficients: need at least two nodes");
  for (std::size_t i = 1; i < x_grid.size(); ++i)
    if (!(x_grid[i] > x_grid[i - 1])) throw ParameterError("build_averaged_coefficients: grid must be strictly increasing");
  if (samples_per_node < 2) throw ParameterError("build_averaged_coefficients: need at least two samples per node");

  double kappa = opt.certification.kappa;
  for (std::size_t node : {std::size_t{0}, x_grid.size() / 2, x_grid.size() - 1}) {
    const auto cert = ergodicity::certify_or_refuse(b, Vector::Constant(1, x_grid[node]), opt.certification, opt.force);
    if (!cert.passed()) kappa = 0.0;
  }

  const std::size_t n = x_grid.size();
  std::vector<double> fv(n), fse(n), gv(n), gse(n);
  parallel_for(
      n,
      [&](std::size_t i) {
        measures::InvariantOptions io;
        io.burn_in = opt.burn_in;
        io.n_samples = samples_per_node;
        io.seed = derive_seed(opt.seed, {label_of("averaged-table"), i});
        io.dt = opt.dt;
        if (kappa > 0.0) io.certified_kappa = kappa;
        io.workers = 1;
        const Vector x = Vector::Constant(1, x_grid[i]);
        const auto pi_x = measures::estimate_invariant_measure(b, x, sigma, hurst_fast, io);
        const auto fe = measures::average_coefficient(f, x, pi_x);
        const auto ge = measures::average_coefficient(g, x, pi_x);
        fv[i] = fe.value;
        fse[i] = fe.standard_error;
        gv[i] = ge.value;
        gse[i] = ge.standard_error;
      },
      opt.workers);
  measures::AveragedCoefficientTable table(x_grid, fv, fse, gv, gse);
  for (std::size_t i = 0; i < n; ++i)
    if (fse[i] > opt.se_tolerance || gse[i] > opt.se_tolerance) table.flagged_nodes().push_back(i);
  return table;
}

/// Slow fields backed by a table; values outside the hull are held at the
/// boundary nodes.
inline SlowField table_fbar(const measures::AveragedCoefficientTable& t) {
  return [&t](const Vector& x) { return Vector::Constant(1, t.f_clamped(x(0))); };
}
inline SlowField table_gbar(const measures::AveragedCoefficientTable& t) {
  return [&t](const Vector& x) { return Vector::Constant(1, t.g_clamped(x(0))); };
}

}  // namespace fracslow::averaging
