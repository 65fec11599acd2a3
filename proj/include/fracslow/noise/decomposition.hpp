#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "fracslow/core/error.hpp"
#include "fracslow/core/sample_path.hpp"
#include "fracslow/noise/hurst.hpp"
#include "fracslow/noise/riemann_liouville.hpp"

namespace fracslow::noise {

/// Split of the fBm increment theta_t B over [0, h] into the part measurable
/// with respect to the Wiener past (smooth) and the part driven by fresh
/// increments on [t, t+h] (rough, a Riemann-Liouville process).
struct IncrementDecomposition {
  SamplePath smooth;
  SamplePath rough;
  double base_time = 0.0;
  double truncation_depth = 0.0;
  /// Estimated standard deviation of the neglected past beyond truncation_depth at lag h.
  double tail_sd = 0.0;
};

/// Default truncation depth of the Wiener past: 64 max(1, h).
inline double default_truncation_depth(double horizon) { return 64.0 * std::max(1.0, horizon); }

/// Standard deviation of the smooth-part contribution from the Wiener past
/// older than depth, at lag h. The kernel difference decays like
/// (H-1/2) h s^{H-3/2}, which integrates to the closed form below.
inline double smooth_tail_sd(double hurst, double horizon, double depth) {
  validate_hurst(hurst);
  if (!(depth > 0.0)) throw ParameterError("smooth_tail_sd: depth must be positive");
  return mvn_alpha(hurst) * std::abs(hurst - 0.5) * horizon * std::pow(depth, hurst - 1.0) / std::sqrt(2.0 - 2.0 * hurst);
}

/// Concatenation of two adjacent cell blocks.
inline WienerCells concat(const WienerCells& a, const WienerCells& b) {
  if (a.hurst != b.hurst || a.dt != b.dt) throw ParameterError("concat: cells use different grids");
  if (std::abs(a.t_end() - b.t_start) > 1e-9 * std::max(1.0, std::abs(b.t_start)))
    throw ParameterError("concat: cell blocks are not adjacent");
  WienerCells out = a;
  out.dW.insert(out.dW.end(), b.dW.begin(), b.dW.end());
  out.near.insert(out.near.end(), b.near.begin(), b.near.end());
  return out;
}

/// Increments B_{t+l dt} - B_t, l = 0..n_after, of the truncated moving-average
/// fBm built directly from all cells; t is the start of cell `origin`.
inline std::vector<double> mvn_increments_from_cells(const WienerCells& cells, std::size_t origin, std::size_t n_after) {
  if (origin + n_after > cells.size()) throw ParameterError("mvn_increments_from_cells: range exceeds cells");
  const double alpha = mvn_alpha(cells.hurst);
  const HybridKernel kernel(cells.hurst, cells.dt);
  const auto far = kernel.far_sums(cells.dW);
  auto value = [&](std::size_t i) { return i == 0 ? 0.0 : alpha * (cells.near[i - 1] + far[i]); };
  std::vector<double> out(n_after + 1);
  const double base = value(origin);
  for (std::size_t l = 0; l <= n_after; ++l) out[l] = value(origin + l) - base;
  return out;
}

/// Smooth/rough decomposition for one coordinate. `past` covers
/// [t - depth, t], `future` covers [t, t + h]; both on the same grid.
/// Throws TruncationError if the estimated tail exceeds `tolerance`.
inline IncrementDecomposition mvn_increment_decomposition(const WienerCells& past, const WienerCells& future,
                                                           double tolerance = std::numeric_limits<double>::infinity()) {
  if (past.size() < 1 || future.size() < 1) throw ParameterError("mvn_increment_decomposition: empty cells");
  if (past.hurst != future.hurst || past.dt != future.dt)
    throw ParameterError("mvn_increment_decomposition: past and future use different grids");
  const double hurst = past.hurst;
  const double dt = past.dt;
  const std::size_t P = past.size();
  const std::size_t F = future.size();
  const double depth = static_cast<double>(P) * dt;
  const double horizon = static_cast<double>(F) * dt;
  const double tail = smooth_tail_sd(hurst, horizon, depth);
  if (tail > tolerance)
    throw TruncationError("Wiener past of depth " + std::to_string(depth) + " gives tail sd " + std::to_string(tail) +
                              " above tolerance " + std::to_string(tolerance),
                          tail);

  const double alpha = mvn_alpha(hurst);
  const HybridKernel kernel(hurst, dt);

  // Past cells only, evaluated beyond their end: sum_{j<P} w_{P+l-j} dW_j.
  std::vector<double> padded(past.dW);
  padded.resize(P + F, 0.0);
  const auto far_past = kernel.far_sums(padded);
  const auto far_future = kernel.far_sums(future.dW);

  RowMatrix smooth = RowMatrix::Zero(static_cast<Eigen::Index>(F + 1), 1);
  RowMatrix rough = RowMatrix::Zero(static_cast<Eigen::Index>(F + 1), 1);
  const double base = alpha * (past.near[P - 1] + far_past[P]);
  for (std::size_t l = 1; l <= F; ++l) {
    smooth(static_cast<Eigen::Index>(l), 0) = alpha * far_past[P + l] - base;
    rough(static_cast<Eigen::Index>(l), 0) = alpha * (future.near[l - 1] + far_future[l]);
  }
  return IncrementDecomposition{SamplePath(0.0, dt, std::move(smooth)), SamplePath(0.0, dt, std::move(rough)),
                                future.t_start, depth, tail};
}

/// Draws a fresh past/future pair and decomposes the increment at time t.
inline IncrementDecomposition draw_increment_decomposition(double hurst, double t, double horizon, double dt, Rng& rng,
                                                           double depth = 0.0) {
  if (depth <= 0.0) depth = default_truncation_depth(horizon);
  const HybridKernel kernel(hurst, dt);
  const auto P = static_cast<std::size_t>(std::llround(depth / dt));
  const auto F = static_cast<std::size_t>(std::llround(horizon / dt));
  const WienerCells past = kernel.draw(P, t - static_cast<double>(P) * dt, rng);
  const WienerCells future = kernel.draw(F, t, rng);
  return mvn_increment_decomposition(past, future);
}

}  // namespace fracslow::noise
