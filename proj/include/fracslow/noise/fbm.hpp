#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "fracslow/core/error.hpp"
#include "fracslow/core/fft.hpp"
#include "fracslow/core/rng.hpp"
#include "fracslow/core/sample_path.hpp"
#include "fracslow/noise/hurst.hpp"

namespace fracslow::noise {

enum class FbmMethod { circulant_embedding, cholesky, riemann_liouville_kernel };

inline std::string to_string(FbmMethod m) {
  switch (m) {
    case FbmMethod::circulant_embedding: return "circulant-embedding";
    case FbmMethod::cholesky: return "cholesky";
    case FbmMethod::riemann_liouville_kernel: return "riemann-liouville-kernel";
  }
  return "?";
}

inline FbmMethod fbm_method_from_string(const std::string& s) {
  if (s == "circulant-embedding") return FbmMethod::circulant_embedding;
  if (s == "cholesky") return FbmMethod::cholesky;
  if (s == "riemann-liouville-kernel") return FbmMethod::riemann_liouville_kernel;
  throw ParameterError("unknown fBm method '" + s + "'");
}

struct FbmSpec {
  double hurst = 0.5;
  std::size_t dim = 1;
  std::size_t n_steps = 1;
  double dt = 1.0;
  FbmMethod method = FbmMethod::circulant_embedding;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  void validate() const {
    validate_hurst(hurst);
    if (dim < 1) throw ParameterError("FbmSpec: dim must be positive");
    if (n_steps < 1) throw ParameterError("FbmSpec: n_steps must be positive");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw ParameterError("FbmSpec: dt must be positive");
  }
};

/// Exact sampler of fractional Brownian motion on a uniform grid.
///
/// The circulant embedding of the fGn covariance is factorised once at
/// construction and reused for every (seed, stream) draw. If the embedding
/// has negative eigenvalues even after padding the circulant to 8x its
/// minimal size, the generator switches to the Durbin-Levinson (Toeplitz
/// Cholesky) recursion and records a warning.
class FbmGenerator {
 public:
  FbmGenerator(double hurst, std::size_t dim, std::size_t n_steps, double dt,
               FbmMethod method = FbmMethod::circulant_embedding)
      : hurst_(hurst), dim_(dim), n_(n_steps), dt_(dt), method_(method) {
    FbmSpec{hurst, dim, n_steps, dt, method, 0, 0}.validate();
    if (method == FbmMethod::riemann_liouville_kernel)
      throw ParameterError("FbmGenerator: riemann-liouville-kernel does not produce fBm; use RiemannLiouvilleGenerator");
    scale_ = std::pow(dt_, hurst_);
    if (method_ == FbmMethod::circulant_embedding) setup_circulant();
    if (method_ == FbmMethod::cholesky) setup_levinson();
  }

  explicit FbmGenerator(const FbmSpec& spec) : FbmGenerator(spec.hurst, spec.dim, spec.n_steps, spec.dt, spec.method) {}

  FbmMethod requested_method() const noexcept { return requested_; }
  FbmMethod method_used() const noexcept { return method_; }
  const std::string& warning() const noexcept { return warning_; }
  std::size_t embedding_size() const noexcept { return lambda_.size(); }
  double hurst() const noexcept { return hurst_; }
  double dt() const noexcept { return dt_; }
  std::size_t n_steps() const noexcept { return n_; }
  std::size_t dim() const noexcept { return dim_; }

  /// Unit-step fGn for one coordinate (length n_steps, variance 1).
  std::vector<double> unit_increments(Rng& rng) const {
    std::vector<double> a, b;
    draw_pair(rng, a, b, false);
    return a;
  }

  /// Path starting at 0 at time t0 with increments scaled to the grid.
  SamplePath sample(std::uint64_t seed, std::uint64_t stream, double t0 = 0.0) const {
    Rng rng(seed, stream);
    return sample(rng, t0);
  }

  SamplePath sample(Rng& rng, double t0 = 0.0) const {
    RowMatrix v = RowMatrix::Zero(static_cast<Eigen::Index>(n_ + 1), static_cast<Eigen::Index>(dim_));
    std::vector<double> a, b;
    for (std::size_t c = 0; c < dim_; c += 2) {
      const bool want_second = c + 1 < dim_;
      draw_pair(rng, a, b, want_second);
      accumulate(v, c, a);
      if (want_second) accumulate(v, c + 1, b);
    }
    return SamplePath(t0, dt_, std::move(v));
  }

 private:
  void accumulate(RowMatrix& v, std::size_t c, const std::vector<double>& incr) const {
    const auto col = static_cast<Eigen::Index>(c);
    double acc = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      acc += incr[i] * scale_;
      v(static_cast<Eigen::Index>(i + 1), col) = acc;
    }
  }

  void setup_circulant() {
    const std::size_t base = fracslow::detail::next_pow2(std::max<std::size_t>(n_, 2));
    for (std::size_t pad = 1; pad <= 8; pad *= 2) {
      const std::size_t half = base * pad;
      const std::size_t m = 2 * half;
      std::vector<std::complex<double>> c(m), out;
      for (std::size_t k = 0; k <= half; ++k) c[k] = fgn_covariance(static_cast<long long>(k), hurst_);
      for (std::size_t k = half + 1; k < m; ++k) c[k] = c[m - k];
      fracslow::detail::ComplexFft fft(m, FFTW_FORWARD);
      fft.execute(c, out);
      double lmax = 0.0, lmin = 0.0;
      for (const auto& z : out) {
        lmax = std::max(lmax, z.real());
        lmin = std::min(lmin, z.real());
      }
      if (lmin >= -1e-10 * lmax) {
        lambda_.resize(m);
        for (std::size_t k = 0; k < m; ++k) lambda_[k] = std::sqrt(std::max(0.0, out[k].real()) / static_cast<double>(m));
        fft_ = std::make_shared<fracslow::detail::ComplexFft>(m, FFTW_FORWARD);
        return;
      }
    }
    warning_ = "circulant embedding has negative eigenvalues after 8x padding; fell back to cholesky";
    method_ = FbmMethod::cholesky;
    setup_levinson();
  }

  void setup_levinson() {
    gamma_.resize(n_);
    for (std::size_t k = 0; k < n_; ++k) gamma_[k] = fgn_covariance(static_cast<long long>(k), hurst_);
  }

  void draw_pair(Rng& rng, std::vector<double>& a, std::vector<double>& b, bool want_second) const {
    a.assign(n_, 0.0);
    b.assign(want_second ? n_ : 0, 0.0);
    if (method_ == FbmMethod::circulant_embedding) {
      const std::size_t m = lambda_.size();
      std::vector<std::complex<double>> w(m), y;
      for (std::size_t k = 0; k < m; ++k) {
        const double re = rng.normal();
        const double im = rng.normal();
        w[k] = lambda_[k] * std::complex<double>(re, im);
      }
      fft_->execute(w, y);
      for (std::size_t i = 0; i < n_; ++i) {
        a[i] = y[i].real();
        if (want_second) b[i] = y[i].imag();
      }
      return;
    }
    levinson(rng, a);
    if (want_second) levinson(rng, b);
  }

  // Durbin-Levinson recursion: the innovations form of the Cholesky
  // factorisation of the Toeplitz covariance.
  void levinson(Rng& rng, std::vector<double>& x) const {
    std::vector<double> phi(n_, 0.0), prev(n_, 0.0);
    double v = gamma_[0];
    x[0] = std::sqrt(v) * rng.normal();
    for (std::size_t k = 1; k < n_; ++k) {
      double num = gamma_[k];
      for (std::size_t j = 1; j < k; ++j) num -= prev[j] * gamma_[k - j];
      const double pkk = num / v;
      phi[k] = pkk;
      for (std::size_t j = 1; j < k; ++j) phi[j] = prev[j] - pkk * prev[k - j];
      v *= (1.0 - pkk * pkk);
      double mean = 0.0;
      for (std::size_t j = 1; j <= k; ++j) mean += phi[j] * x[k - j];
      x[k] = mean + std::sqrt(std::max(v, 0.0)) * rng.normal();
      std::copy(phi.begin(), phi.begin() + static_cast<std::ptrdiff_t>(k + 1), prev.begin());
    }
  }

  double hurst_;
  std::size_t dim_;
  std::size_t n_;
  double dt_;
  FbmMethod method_;
  FbmMethod requested_ = method_;
  double scale_ = 1.0;
  std::string warning_;
  std::vector<double> lambda_;
  std::shared_ptr<fracslow::detail::ComplexFft> fft_;
  std::vector<double> gamma_;
};

/// One fBm path for the given spec (method must be circulant-embedding or cholesky).
inline SamplePath generate_fbm(const FbmSpec& spec) {
  spec.validate();
  return FbmGenerator(spec).sample(spec.seed, spec.stream);
}

}  // namespace fracslow::noise
