#pragma once

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "fracslow/core/error.hpp"
#include "fracslow/core/format.hpp"

namespace fracslow::measures {

/// Second-difference check of a tabulated coefficient. A node is flagged when
/// its second difference is within two standard errors of zero, i.e. the
/// curvature estimate is dominated by Monte-Carlo noise.
struct CurvatureDiagnostic {
  double max_abs_second_derivative = 0.0;
  std::size_t n_interior = 0;
  std::size_t n_se_dominated = 0;
  bool se_dominated() const noexcept { return n_interior > 0 && n_se_dominated == n_interior; }
};

/// f_bar and g_bar on a 1D slow grid with Monte-Carlo errors; linear interpolation.
class AveragedCoefficientTable {
 public:
  AveragedCoefficientTable() = default;
  AveragedCoefficientTable(std::vector<double> x, std::vector<double> fbar, std::vector<double> fbar_se, std::vector<double> gbar,
                           std::vector<double> gbar_se)
      : x_(std::move(x)), f_(std::move(fbar)), fse_(std::move(fbar_se)), g_(std::move(gbar)), gse_(std::move(gbar_se)) {
    const std::size_t n = x_.size();
    if (n < 2) throw ParameterError("AveragedCoefficientTable: need at least two nodes");
    if (f_.size() != n || fse_.size() != n || g_.size() != n || gse_.size() != n)
      throw DimensionError("AveragedCoefficientTable: column lengths differ");
    for (std::size_t i = 1; i < n; ++i)
      if (!(x_[i] > x_[i - 1])) throw ParameterError("AveragedCoefficientTable: grid must be strictly increasing");
  }

  const std::vector<double>& x() const noexcept { return x_; }
  const std::vector<double>& fbar() const noexcept { return f_; }
  const std::vector<double>& fbar_se() const noexcept { return fse_; }
  const std::vector<double>& gbar() const noexcept { return g_; }
  const std::vector<double>& gbar_se() const noexcept { return gse_; }
  std::vector<std::size_t>& flagged_nodes() noexcept { return flagged_; }
  const std::vector<std::size_t>& flagged_nodes() const noexcept { return flagged_; }

  bool in_hull(double x) const noexcept { return x >= x_.front() && x <= x_.back(); }

  /// Linear interpolant; throws outside the grid hull.
  double f(double x) const { return interp(f_, x, false); }
  double g(double x) const { return interp(g_, x, false); }
  /// Interpolant extended by the boundary values outside the hull.
  double f_clamped(double x) const { return interp(f_, x, true); }
  double g_clamped(double x) const { return interp(g_, x, true); }

  CurvatureDiagnostic curvature(bool of_g = true) const {
    const auto& v = of_g ? g_ : f_;
    const auto& se = of_g ? gse_ : fse_;
    CurvatureDiagnostic d;
    for (std::size_t i = 1; i + 1 < x_.size(); ++i) {
      const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
      // non-uniform three-point second derivative
      const double wl = 2.0 / (hl * (hl + hr)), wc = -2.0 / (hl * hr), wr = 2.0 / (hr * (hl + hr));
      const double d2 = wl * v[i - 1] + wc * v[i] + wr * v[i + 1];
      const double d2_se = std::sqrt(wl * wl * se[i - 1] * se[i - 1] + wc * wc * se[i] * se[i] + wr * wr * se[i + 1] * se[i + 1]);
      d.max_abs_second_derivative = std::max(d.max_abs_second_derivative, std::abs(d2));
      ++d.n_interior;
      if (d2_se > 0.0 && std::abs(d2) < 2.0 * d2_se) ++d.n_se_dominated;
    }
    return d;
  }

 private:
  double interp(const std::vector<double>& v, double x, bool clamp) const {
    if (!in_hull(x)) {
      if (!clamp) throw ParameterError("AveragedCoefficientTable: x = " + format_double(x) + " outside the grid hull");
      return x < x_.front() ? v.front() : v.back();
    }
    const auto it = std::upper_bound(x_.begin(), x_.end(), x);
    const std::size_t j = std::min<std::size_t>(static_cast<std::size_t>(it - x_.begin()), x_.size() - 1);
    const std::size_t i = j - 1;
    const double w = (x - x_[i]) / (x_[j] - x_[i]);
    return (1.0 - w) * v[i] + w * v[j];
  }

  std::vector<double> x_, f_, fse_, g_, gse_;
  std::vector<std::size_t> flagged_;
};

inline void write_table_csv(std::ostream& os, const AveragedCoefficientTable& t) {
  os << "x,fbar,fbar_se,gbar,gbar_se\n";
  for (std::size_t i = 0; i < t.x().size(); ++i)
    os << format_double(t.x()[i]) << ',' << format_double(t.fbar()[i]) << ',' << format_double(t.fbar_se()[i]) << ','
       << format_double(t.gbar()[i]) << ',' << format_double(t.gbar_se()[i]) << '\n';
}

inline AveragedCoefficientTable read_table_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,fbar", 0) != 0) throw SchemaError("table CSV: missing header");
  std::vector<double> cols[5];
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string cell;
    int c = 0;
    while (std::getline(ss, cell, ',')) {
      if (c >= 5) throw SchemaError("table CSV: too many columns");
      cols[c++].push_back(std::stod(cell));
    }
    if (c != 5) throw SchemaError("table CSV: expected 5 columns");
  }
  return AveragedCoefficientTable(cols[0], cols[1], cols[2], cols[3], cols[4]);
}

}  // namespace fracslow::measures
