#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "fracslow/core/error.hpp"

namespace fracslow {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Uniformly sampled trajectory of a vector-valued process.
///
/// Row i holds the state at time t0 + i*dt. Grid times are always computed
/// from the index, never by accumulating dt.
class SamplePath {
 public:
  SamplePath() = default;

  SamplePath(double t0, double dt, RowMatrix values) : t0_(t0), dt_(dt), values_(std::move(values)) {
    if (!(dt_ > 0.0) || !std::isfinite(dt_)) throw ParameterError("SamplePath: dt must be positive");
    if (values_.rows() < 1 || values_.cols() < 1)
      throw ParameterError("SamplePath: need at least one point and one coordinate");
    if (!values_.allFinite()) throw ParameterError("SamplePath: values must be finite");
  }

  /// Zero path with n_points rows.
  static SamplePath zeros(double t0, double dt, std::size_t n_points, std::size_t dim) {
    return SamplePath(t0, dt, RowMatrix::Zero(static_cast<Eigen::Index>(n_points), static_cast<Eigen::Index>(dim)));
  }

  double t0() const noexcept { return t0_; }
  double dt() const noexcept { return dt_; }
  std::size_t n_points() const noexcept { return static_cast<std::size_t>(values_.rows()); }
  std::size_t n_steps() const noexcept { return n_points() - 1; }
  std::size_t dim() const noexcept { return static_cast<std::size_t>(values_.cols()); }
  double time(std::size_t i) const noexcept { return t0_ + static_cast<double>(i) * dt_; }
  double t_end() const noexcept { return time(n_steps()); }

  const RowMatrix& values() const noexcept { return values_; }
  RowMatrix& values() noexcept { return values_; }

  auto row(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)); }
  auto row(std::size_t i) { return values_.row(static_cast<Eigen::Index>(i)); }
  double operator()(std::size_t i, std::size_t c = 0) const {
    return values_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
  }

  Vector state(std::size_t i) const { return values_.row(static_cast<Eigen::Index>(i)).transpose(); }
  Vector increment(std::size_t i) const {
    return (values_.row(static_cast<Eigen::Index>(i + 1)) - values_.row(static_cast<Eigen::Index>(i))).transpose();
  }

  /// Every k-th point, starting at index 0.
  SamplePath subsample(std::size_t k) const {
    if (k == 0) throw ParameterError("subsample: stride must be positive");
    const std::size_t n = n_steps() / k + 1;
    RowMatrix out(static_cast<Eigen::Index>(n), values_.cols());
    for (std::size_t i = 0; i < n; ++i) out.row(static_cast<Eigen::Index>(i)) = values_.row(static_cast<Eigen::Index>(i * k));
    return SamplePath(t0_, dt_ * static_cast<double>(k), std::move(out));
  }

  /// Points [first, last] inclusive, keeping absolute grid times.
  SamplePath slice(std::size_t first, std::size_t last) const {
    if (first > last || last >= n_points()) throw ParameterError("slice: index range out of bounds");
    RowMatrix out = values_.middleRows(static_cast<Eigen::Index>(first), static_cast<Eigen::Index>(last - first + 1));
    return SamplePath(time(first), dt_, std::move(out));
  }

  /// Wiener shift theta_s: path(s + .) - path(s), re-based at time 0.
  SamplePath shifted(std::size_t first) const {
    SamplePath out = slice(first, n_steps());
    const Eigen::RowVectorXd base = out.values_.row(0);
    out.values_.rowwise() -= base;
    out.t0_ = 0.0;
    return out;
  }

  /// Index of the grid point closest to time t.
  std::size_t index_of(double t) const {
    const double k = std::round((t - t0_) / dt_);
    if (k < 0.0 || k > static_cast<double>(n_steps()))
      throw ParameterError("index_of: time " + std::to_string(t) + " outside the path");
    return static_cast<std::size_t>(k);
  }

 private:
  double t0_ = 0.0;
  double dt_ = 1.0;
  RowMatrix values_;
};

}  // namespace fracslow
