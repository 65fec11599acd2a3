#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fracslow/core/error.hpp"
#include "fracslow/core/parallel.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/core/stats.hpp"
#include "fracslow/noise/fbm.hpp"
#include "fracslow/noise/hurst.hpp"

namespace fracslow::noise {

/// One line of the variance-law check. `statistic` is "variance" for
/// E[(B_{s+k dt} - B_s)^2] against (k dt)^{2H}, or "lag1-covariance" for the
/// mean product of neighbouring increments against dt^{2H} fgn_covariance(1, H).
struct LawResidual {
  double hurst = 0.0;
  std::string statistic;
  std::size_t lag = 0;
  double empirical = 0.0;
  double expected = 0.0;
  double se = 0.0;

  double z() const { return se > 0.0 ? (empirical - expected) / se : (empirical == expected ? 0.0 : INFINITY); }
};

struct LawCheckOptions {
  std::size_t n_paths = 200;
  std::size_t n_steps = 4096;
  double dt = 1.0;
  std::vector<std::size_t> lags{1, 2, 4, 8, 16, 32, 64};
  std::uint64_t seed = 0;
  FbmMethod method = FbmMethod::circulant_embedding;
  std::size_t workers = 0;
};

/// Each path contributes its time-average, so SEs are taken across
/// independent paths.
inline std::vector<LawResidual> variance_law_check(double hurst, const LawCheckOptions& opt = {}) {
  validate_hurst(hurst);
  if (opt.n_paths < 2) throw ParameterError("variance_law_check: need at least two paths");
  for (auto k : opt.lags)
    if (k < 1 || k >= opt.n_steps) throw ParameterError("variance_law_check: lags must lie in [1, n_steps)");
  const FbmGenerator gen(hurst, 1, opt.n_steps, opt.dt, opt.method);
  const std::size_t L = opt.lags.size();
  std::vector<std::vector<double>> sq(L, std::vector<double>(opt.n_paths));
  std::vector<double> cov(opt.n_paths);
  parallel_for(
      opt.n_paths,
      [&](std::size_t p) {
        const auto B = gen.sample(opt.seed, derive_seed(label_of("variance-law"), {p}));
        const std::size_t n = B.n_points();
        for (std::size_t j = 0; j < L; ++j) {
          const std::size_t k = opt.lags[j];
          double s = 0.0;
          for (std::size_t i = 0; i + k < n; ++i) s += std::pow(B(i + k) - B(i), 2);
          sq[j][p] = s / static_cast<double>(n - k);
        }
        double c = 0.0;
        for (std::size_t i = 0; i + 2 < n; ++i) c += (B(i + 1) - B(i)) * (B(i + 2) - B(i + 1));
        cov[p] = c / static_cast<double>(n - 2);
      },
      opt.workers);

  std::vector<LawResidual> out;
  for (std::size_t j = 0; j < L; ++j)
    out.push_back({hurst, "variance", opt.lags[j], stats::mean(sq[j]),
                   std::pow(static_cast<double>(opt.lags[j]) * opt.dt, 2.0 * hurst), stats::standard_error(sq[j])});
  out.push_back({hurst, "lag1-covariance", 1, stats::mean(cov), std::pow(opt.dt, 2.0 * hurst) * fgn_covariance(1, hurst),
                 stats::standard_error(cov)});
  return out;
}

}  // namespace fracslow::noise
