#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "fracslow/core/error.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/core/stats.hpp"
#include "fracslow/measures/empirical.hpp"

namespace fracslow::measures {

namespace detail {

// Bootstrap the larger cloud down to the size of the smaller one.
inline void match_sizes(std::vector<double>& a, std::vector<double>& b, std::uint64_t seed) {
  if (a.size() == b.size()) return;
  auto& big = a.size() > b.size() ? a : b;
  const std::size_t n = std::min(a.size(), b.size());
  Rng rng(seed, label_of("wasserstein-resample"));
  std::vector<double> pick(n);
  for (auto& v : pick) v = big[rng.index(big.size())];
  big = std::move(pick);
}

}  // namespace detail

/// Exact empirical W^p on the line: sorted samples matched in order. Unequal
/// sample counts are handled by bootstrapping the larger cloud down.
inline double wasserstein_1d(std::vector<double> a, std::vector<double> b, double p = 1.0, std::uint64_t seed = 0) {
  if (a.empty() || b.empty()) throw ParameterError("wasserstein_1d: empty sample");
  if (!(p >= 1.0)) throw ParameterError("wasserstein_1d: p must be >= 1");
  detail::match_sizes(a, b, seed);
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double d = std::abs(a[i] - b[i]);
    s += p == 1.0 ? d : std::pow(d, p);
  }
  s /= static_cast<double>(a.size());
  return p == 1.0 ? s : std::pow(s, 1.0 / p);
}

inline double wasserstein_1d(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p = 1.0, std::uint64_t seed = 0) {
  if (a.dim() != 1 || b.dim() != 1) throw DimensionError("wasserstein_1d: measures must be one-dimensional");
  return wasserstein_1d(a.column(), b.column(), p, seed);
}

/// Mean over random unit directions of the 1D distance between projections.
/// In one dimension this is wasserstein_1d itself.
inline double sliced_wasserstein(const EmpiricalMeasure& a, const EmpiricalMeasure& b, double p = 1.0,
                                 std::size_t n_projections = 64, std::uint64_t seed = 0) {
  if (a.dim() != b.dim()) throw DimensionError("sliced_wasserstein: dimension mismatch");
  if (a.dim() == 1) return wasserstein_1d(a, b, p, seed);
  if (n_projections < 1) throw ParameterError("sliced_wasserstein: need at least one projection");
  Rng rng(seed, label_of("sliced-directions"));
  const auto d = static_cast<Eigen::Index>(a.dim());
  double acc = 0.0;
  for (std::size_t k = 0; k < n_projections; ++k) {
    Vector e(d);
    for (Eigen::Index i = 0; i < d; ++i) e(i) = rng.normal();
    e.normalize();
    const Vector pa = a.samples() * e, pb = b.samples() * e;
    acc += wasserstein_1d(std::vector<double>(pa.data(), pa.data() + pa.size()),
                          std::vector<double>(pb.data(), pb.data() + pb.size()), p, derive_seed(seed, {k}));
  }
  return acc / static_cast<double>(n_projections);
}

/// Binning for tv_histogram: fixed width on a lattice through `origin`, or
/// Freedman-Diaconis on the pooled cloud with the bin count clamped to [8, 512].
struct BinRule {
  enum class Kind { freedman_diaconis, fixed_width } kind = Kind::freedman_diaconis;
  double width = 1.0;
  double origin = 0.0;

  static BinRule freedman_diaconis() { return {}; }
  static BinRule fixed(double w, double origin = 0.0) { return {Kind::fixed_width, w, origin}; }
};

namespace detail {

struct AxisBinning {
  double lo = 0.0;
  double width = 1.0;
  long long count = 1;

  long long index(double v) const {
    if (count == 1 && width == 0.0) return 0;
    const auto k = static_cast<long long>(std::floor((v - lo) / width));
    return std::clamp<long long>(k, 0, count - 1);
  }
};

inline AxisBinning axis_binning(const std::vector<double>& pooled, const BinRule& rule) {
  const auto [mn, mx] = std::minmax_element(pooled.begin(), pooled.end());
  AxisBinning ax;
  if (rule.kind == BinRule::Kind::fixed_width) {
    if (!(rule.width > 0.0)) throw ParameterError("tv_histogram: bin width must be positive");
    ax.width = rule.width;
    ax.lo = rule.origin + std::floor((*mn - rule.origin) / rule.width) * rule.width;
    ax.count = static_cast<long long>(std::floor((*mx - ax.lo) / rule.width)) + 1;
    return ax;
  }
  const double range = *mx - *mn;
  if (range == 0.0) {
    ax.lo = *mn;
    ax.width = 0.0;
    ax.count = 1;
    return ax;
  }
  const double iqr = stats::quantile(pooled, 0.75) - stats::quantile(pooled, 0.25);
  const double h = 2.0 * iqr * std::pow(static_cast<double>(pooled.size()), -1.0 / 3.0);
  long long bins = h > 0.0 ? static_cast<long long>(std::ceil(range / h)) : 8;
  bins = std::clamp<long long>(bins, 8, 512);
  ax.lo = *mn;
  ax.count = bins;
  ax.width = range / static_cast<double>(bins);
  return ax;
}

}  // namespace detail

/// Histogram estimate of the total variation distance, 1/2 sum |p_a - p_b| on
/// a shared binning. Supports dim <= 2; higher dimensions need the coupling
/// bound of the ergodicity module.
inline double tv_histogram(const EmpiricalMeasure& a, const EmpiricalMeasure& b, const BinRule& rule = BinRule::freedman_diaconis()) {
  if (a.dim() != b.dim()) throw DimensionError("tv_histogram: dimension mismatch");
  if (a.dim() > 2) throw ParameterError("tv_histogram: histogram method supports dim <= 2");
  std::vector<detail::AxisBinning> axes;
  for (std::size_t c = 0; c < a.dim(); ++c) {
    auto pooled = a.column(c);
    const auto bc = b.column(c);
    pooled.insert(pooled.end(), bc.begin(), bc.end());
    axes.push_back(detail::axis_binning(pooled, rule));
  }
  std::map<std::pair<long long, long long>, double> diff;
  auto add = [&](const EmpiricalMeasure& m, double w) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      const auto ii = static_cast<Eigen::Index>(i);
      const long long k0 = axes[0].index(m.samples()(ii, 0));
      const long long k1 = axes.size() > 1 ? axes[1].index(m.samples()(ii, 1)) : 0;
      diff[{k0, k1}] += w;
    }
  };
  add(a, 1.0 / static_cast<double>(a.size()));
  add(b, -1.0 / static_cast<double>(b.size()));
  double s = 0.0;
  for (const auto& [k, v] : diff) s += std::abs(v);
  return std::clamp(0.5 * s, 0.0, 1.0);
}

}  // namespace fracslow::measures
