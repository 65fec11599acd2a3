#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fracslow/core/error.hpp"
#include "fracslow/core/format.hpp"

namespace fracslow::ergodicity {

/// Distance between two laws as a function of time.
struct DecayCurve {
  std::string metric = "W1";
  std::vector<double> times;
  std::vector<double> distances;
  std::vector<double> se;
  std::size_t ensemble_size = 0;

  std::size_t size() const noexcept { return times.size(); }

  void validate() const {
    if (distances.size() != times.size() || se.size() != times.size()) throw DimensionError("DecayCurve: column lengths differ");
    for (std::size_t i = 1; i < times.size(); ++i)
      if (!(times[i] > times[i - 1])) throw ParameterError("DecayCurve: times must increase strictly");
    for (double d : distances)
      if (!(d >= 0.0)) throw ParameterError("DecayCurve: distances must be >= 0");
  }
};

enum class RateModel { exponential, algebraic };

inline std::string to_string(RateModel m) { return m == RateModel::exponential ? "exponential" : "algebraic"; }

/// distance ~ C exp(-rate t) (exponential) or C t^{-rate} (algebraic), by
/// least squares on log(distance).
struct RateFit {
  RateModel model = RateModel::exponential;
  double C = 0.0;
  double rate = 0.0;
  double r_squared = 0.0;
  double t_first = 0.0;
  double t_last = 0.0;
  std::size_t n_points = 0;
  /// Points removed because their SE exceeded 25% of the value (or the value was 0).
  std::size_t n_dropped = 0;
  std::string warning;

  /// Slope of the fitted line: -rate (per unit time, or per unit log t).
  double slope() const noexcept { return -rate; }
};

struct ModelComparison {
  RateFit exponential;
  RateFit algebraic;
  RateModel best() const noexcept {
    return algebraic.r_squared > exponential.r_squared ? RateModel::algebraic : RateModel::exponential;
  }
  const RateFit& best_fit() const noexcept { return best() == RateModel::exponential ? exponential : algebraic; }
};

inline constexpr double kSeDominatedFraction = 0.25;

namespace detail {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
  double r2 = 0.0;
};

inline LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  f.r2 = syy > 0.0 ? std::clamp(sxy * sxy / (sxx * syy), 0.0, 1.0) : (sxx > 0.0 ? 1.0 : 0.0);
  return f;
}

}  // namespace detail

/// Fit of one model. The window keeps points with positive distance and
/// SE <= 25% of the value; `positive_times_only` additionally drops t <= 0
/// (required by the algebraic model, and used to compare models on one window).
inline RateFit fit_rate(const DecayCurve& c, RateModel model, bool positive_times_only = false) {
  c.validate();
  RateFit fit;
  fit.model = model;
  std::vector<double> x, y;
  for (std::size_t i = 0; i < c.size(); ++i) {
    const double t = c.times[i], d = c.distances[i];
    if ((model == RateModel::algebraic || positive_times_only) && !(t > 0.0)) continue;
    if (!(d > 0.0) || c.se[i] > kSeDominatedFraction * d) {
      ++fit.n_dropped;
      continue;
    }
    x.push_back(model == RateModel::exponential ? t : std::log(t));
    y.push_back(std::log(d));
  }
  fit.n_points = x.size();
  if (x.size() < 2) {
    fit.warning = "fewer than two usable points";
    fit.rate = 0.0;
    fit.r_squared = 0.0;
    return fit;
  }
  const auto line = detail::least_squares(x, y);
  fit.rate = -line.slope;
  fit.C = std::exp(line.intercept);
  fit.r_squared = line.r2;
  fit.t_first = model == RateModel::exponential ? x.front() : std::exp(x.front());
  fit.t_last = model == RateModel::exponential ? x.back() : std::exp(x.back());
  return fit;
}

/// Both models on the common window t > 0; the higher r^2 wins.
inline ModelComparison compare_models(const DecayCurve& c) {
  return {fit_rate(c, RateModel::exponential, true), fit_rate(c, RateModel::algebraic, true)};
}

inline nlohmann::json to_json(const RateFit& f) {
  return {{"model", to_string(f.model)}, {"C", f.C},           {"rate", f.rate},         {"slope", f.slope()},
          {"r_squared", f.r_squared},    {"t_first", f.t_first}, {"t_last", f.t_last},   {"n_points", f.n_points},
          {"n_dropped", f.n_dropped},    {"warning", f.warning}};
}

inline nlohmann::json to_json(const DecayCurve& c) {
  return {{"metric", c.metric}, {"times", c.times}, {"distances", c.distances}, {"se", c.se}, {"ensemble_size", c.ensemble_size}};
}

inline void write_curve_csv(std::ostream& os, const DecayCurve& c) {
  os << "t,distance,se\n";
  for (std::size_t i = 0; i < c.size(); ++i)
    os << format_double(c.times[i]) << ',' << format_double(c.distances[i]) << ',' << format_double(c.se[i]) << '\n';
}

}  // namespace fracslow::ergodicity
