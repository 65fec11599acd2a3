#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <mutex>
#include <vector>

#include "fracslow/core/error.hpp"
#include "fracslow/core/fft.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/core/sample_path.hpp"
#include "fracslow/noise/fbm.hpp"
#include "fracslow/noise/hurst.hpp"

namespace fracslow::noise {

/// Wiener increments on consecutive cells [t_j, t_j + dt] of one coordinate,
/// each paired with the exact near-cell kernel integral
/// near_j = int_cell (t_{j+1} - u)^{H-1/2} dW_u drawn jointly with dW_j.
struct WienerCells {
  double hurst = 0.5;
  double dt = 1.0;
  double t_start = 0.0;
  std::vector<double> dW;
  std::vector<double> near;

  std::size_t size() const noexcept { return dW.size(); }
  double t_end() const noexcept { return t_start + static_cast<double>(size()) * dt; }
};

/// Discretisation of the kernel (t-u)^{H-1/2} on a uniform grid (hybrid
/// scheme with one exact near cell). Cell k steps back from the evaluation
/// point (k >= 2) carries the cell average of the kernel,
/// dt^{H-1/2} (k^{H+1/2} - (k-1)^{H+1/2}) / (H+1/2).
class HybridKernel {
 public:
  HybridKernel(double hurst, double dt) : hurst_(hurst), dt_(dt) {
    validate_hurst(hurst);
    if (!(dt > 0.0)) throw ParameterError("HybridKernel: dt must be positive");
    const double hp = hurst + 0.5;
    near_z1_ = std::pow(dt, hurst) / hp;
    near_z2_ = std::pow(dt, hurst) * std::sqrt(std::max(0.0, 1.0 / (2.0 * hurst) - 1.0 / (hp * hp)));
  }

  double hurst() const noexcept { return hurst_; }
  double dt() const noexcept { return dt_; }

  /// Weight of the cell k steps back (k >= 2); zero for k < 2.
  double weight(std::size_t k) const {
    if (k < 2) return 0.0;
    const double hp = hurst_ + 0.5;
    const double kd = static_cast<double>(k);
    return std::pow(dt_, hurst_ - 0.5) * (std::pow(kd, hp) - std::pow(kd - 1.0, hp)) / hp;
  }

  /// Draws n cells starting at t_start.
  WienerCells draw(std::size_t n, double t_start, Rng& rng) const {
    WienerCells c{hurst_, dt_, t_start, std::vector<double>(n), std::vector<double>(n)};
    const double sdt = std::sqrt(dt_);
    for (std::size_t j = 0; j < n; ++j) {
      const double z1 = rng.normal();
      const double z2 = rng.normal();
      c.dW[j] = sdt * z1;
      c.near[j] = near_z1_ * z1 + near_z2_ * z2;
    }
    return c;
  }

  /// far[i] = sum_{j <= i-2} weight(i - j) dW[j] for i = 0 .. dW.size().
  std::vector<double> far_sums(const std::vector<double>& dW) const {
    const std::size_t n = dW.size();
    std::vector<double> w(n + 1);
    for (std::size_t k = 0; k <= n; ++k) w[k] = weight(k);
    std::vector<double> full = fracslow::detail::convolve(w, dW);
    std::vector<double> out(n + 1, 0.0);
    for (std::size_t i = 0; i <= n && i < full.size(); ++i) out[i] = full[i];
    return out;
  }

 private:
  double hurst_;
  double dt_;
  double near_z1_ = 0.0;
  double near_z2_ = 0.0;
};

/// Riemann-Liouville value at relative grid index i >= 1 built from the cells
/// [first, first + i): alpha_H (near[first+i-1] + far sums over earlier cells).
inline std::vector<double> riemann_liouville_from_cells(const WienerCells& cells, std::size_t first, std::size_t count) {
  if (first + count > cells.size()) throw ParameterError("riemann_liouville_from_cells: range exceeds cells");
  const double alpha = mvn_alpha(cells.hurst);
  HybridKernel kernel(cells.hurst, cells.dt);
  std::vector<double> dW(cells.dW.begin() + static_cast<std::ptrdiff_t>(first),
                         cells.dW.begin() + static_cast<std::ptrdiff_t>(first + count));
  const auto far = kernel.far_sums(dW);
  std::vector<double> out(count + 1, 0.0);
  for (std::size_t i = 1; i <= count; ++i) out[i] = alpha * (cells.near[first + i - 1] + far[i]);
  return out;
}

/// Sampler of the Riemann-Liouville (type-II) process
/// alpha_H int_0^t (t-u)^{H-1/2} dW_u with the same alpha_H as the
/// moving-average fBm, so Var = alpha_H^2 t^{2H} / (2H).
class RiemannLiouvilleGenerator {
 public:
  RiemannLiouvilleGenerator(double hurst, std::size_t dim, std::size_t n_steps, double dt)
      : kernel_(hurst, dt), dim_(dim), n_(n_steps), alpha_(mvn_alpha(hurst)) {
    FbmSpec{hurst, dim, n_steps, dt, FbmMethod::riemann_liouville_kernel, 0, 0}.validate();
    std::vector<double> w(n_ + 1);
    for (std::size_t k = 0; k <= n_; ++k) w[k] = kernel_.weight(k);
    weights_ = std::move(w);
    if (n_ > 256) {
      m_ = fracslow::detail::next_pow2(2 * n_ + 1);
      fft_ = std::make_shared<fracslow::detail::ComplexFft>(m_, FFTW_FORWARD);
      ifft_ = std::make_shared<fracslow::detail::ComplexFft>(m_, FFTW_BACKWARD);
      std::vector<std::complex<double>> in(m_);
      for (std::size_t k = 0; k <= n_; ++k) in[k] = weights_[k];
      fft_->execute(in, weight_spectrum_);
    }
  }

  double hurst() const noexcept { return kernel_.hurst(); }
  double dt() const noexcept { return kernel_.dt(); }
  std::size_t n_steps() const noexcept { return n_; }
  const HybridKernel& kernel() const noexcept { return kernel_; }

  SamplePath sample(std::uint64_t seed, std::uint64_t stream, double t0 = 0.0) const {
    Rng rng(seed, stream);
    return sample(rng, t0);
  }

  SamplePath sample(Rng& rng, double t0 = 0.0) const {
    RowMatrix v = RowMatrix::Zero(static_cast<Eigen::Index>(n_ + 1), static_cast<Eigen::Index>(dim_));
    for (std::size_t c = 0; c < dim_; ++c) {
      const WienerCells cells = kernel_.draw(n_, t0, rng);
      const auto far = far_sums(cells.dW);
      for (std::size_t i = 1; i <= n_; ++i)
        v(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = alpha_ * (cells.near[i - 1] + far[i]);
    }
    return SamplePath(t0, kernel_.dt(), std::move(v));
  }

 private:
  std::vector<double> far_sums(const std::vector<double>& dW) const {
    std::vector<double> out(n_ + 1, 0.0);
    if (!fft_) {
      for (std::size_t i = 2; i <= n_; ++i) {
        double s = 0.0;
        for (std::size_t j = 0; j + 2 <= i; ++j) s += weights_[i - j] * dW[j];
        out[i] = s;
      }
      return out;
    }
    std::vector<std::complex<double>> in(m_), spec, back;
    for (std::size_t j = 0; j < n_; ++j) in[j] = dW[j];
    fft_->execute(in, spec);
    for (std::size_t k = 0; k < m_; ++k) spec[k] *= weight_spectrum_[k];
    ifft_->execute(spec, back);
    for (std::size_t i = 0; i <= n_; ++i) out[i] = back[i].real() / static_cast<double>(m_);
    return out;
  }

  HybridKernel kernel_;
  std::size_t dim_;
  std::size_t n_;
  double alpha_;
  std::vector<double> weights_;
  std::size_t m_ = 0;
  std::shared_ptr<fracslow::detail::ComplexFft> fft_, ifft_;
  std::vector<std::complex<double>> weight_spectrum_;
};

/// One Riemann-Liouville path (spec.method must be riemann-liouville-kernel).
inline SamplePath generate_riemann_liouville(const FbmSpec& spec) {
  spec.validate();
  if (spec.method != FbmMethod::riemann_liouville_kernel)
    throw ParameterError("generate_riemann_liouville: method must be riemann-liouville-kernel");
  return RiemannLiouvilleGenerator(spec.hurst, spec.dim, spec.n_steps, spec.dt).sample(spec.seed, spec.stream);
}

}  // namespace fracslow::noise
