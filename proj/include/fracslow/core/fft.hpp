#pragma once

#include <complex>
#include <cstddef>
#include <mutex>
#include <vector>

#include <fftw3.h>

namespace fracslow::detail {

// Planner calls are not thread-safe in FFTW; execution on fresh arrays is.
inline std::mutex& fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

/// In-place-capable complex DFT of fixed size, shareable across threads.
class ComplexFft {
 public:
  ComplexFft(std::size_t n, int sign) : n_(n) {
    std::vector<std::complex<double>> a(n), b(n);
    std::lock_guard lock(fftw_planner_mutex());
    plan_ = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(a.data()),
                             reinterpret_cast<fftw_complex*>(b.data()), sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  }
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;
  ~ComplexFft() {
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan_);
  }

  std::size_t size() const noexcept { return n_; }

  void execute(std::vector<std::complex<double>>& in, std::vector<std::complex<double>>& out) const {
    out.resize(n_);
    fftw_execute_dft(plan_, reinterpret_cast<fftw_complex*>(in.data()), reinterpret_cast<fftw_complex*>(out.data()));
  }

 private:
  std::size_t n_;
  fftw_plan plan_{};
};

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

/// Linear convolution of two real sequences via zero-padded FFT.
inline std::vector<double> convolve(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.empty() || b.empty()) return {};
  const std::size_t out_len = a.size() + b.size() - 1;
  if (a.size() * b.size() <= 65536) {
    std::vector<double> out(out_len, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
  }
  const std::size_t m = next_pow2(out_len);
  ComplexFft fwd(m, FFTW_FORWARD), inv(m, FFTW_BACKWARD);
  std::vector<std::complex<double>> fa(m), fb(m), ta, tb;
  for (std::size_t i = 0; i < a.size(); ++i) fa[i] = a[i];
  for (std::size_t i = 0; i < b.size(); ++i) fb[i] = b[i];
  fwd.execute(fa, ta);
  fwd.execute(fb, tb);
  for (std::size_t k = 0; k < m; ++k) ta[k] *= tb[k];
  inv.execute(ta, fa);
  std::vector<double> out(out_len);
  for (std::size_t i = 0; i < out_len; ++i) out[i] = fa[i].real() / static_cast<double>(m);
  return out;
}

}  // namespace fracslow::detail
