#pragma once

#include <fftw3.h>

#include <complex>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <vector>

namespace eulerlab::fft {

using cplx = std::complex<double>;

namespace detail {

// FFTW planning is not thread-safe; execution with new-array interfaces is.
class PlanPair {
 public:
  explicit PlanPair(int n) : n_(n) {
    const std::size_t real_size = static_cast<std::size_t>(n) * n;
    const std::size_t half_size = static_cast<std::size_t>(n) * (n / 2 + 1);
    auto* r = fftw_alloc_real(real_size);
    auto* c = fftw_alloc_complex(half_size);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c_2d(n, n, r, c, flags);
    backward_ = fftw_plan_dft_c2r_2d(n, n, c, r, flags | FFTW_DESTROY_INPUT);
    fftw_free(r);
    fftw_free(c);
    if (!forward_ || !backward_) throw std::runtime_error("FFTW planning failed");
  }
  PlanPair(const PlanPair&) = delete;
  PlanPair& operator=(const PlanPair&) = delete;
  ~PlanPair() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }

  int n() const { return n_; }
  fftw_plan forward() const { return forward_; }
  fftw_plan backward() const { return backward_; }

 private:
  int n_;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

inline const PlanPair& plans(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<PlanPair>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<PlanPair>(n);
  return *slot;
}

class PlanPair1D {
 public:
  explicit PlanPair1D(int n) {
    auto* r = fftw_alloc_real(n);
    auto* c = fftw_alloc_complex(n / 2 + 1);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    forward_ = fftw_plan_dft_r2c_1d(n, r, c, flags);
    backward_ = fftw_plan_dft_c2r_1d(n, c, r, flags | FFTW_DESTROY_INPUT);
    fftw_free(r);
    fftw_free(c);
    if (!forward_ || !backward_) throw std::runtime_error("FFTW planning failed");
  }
  PlanPair1D(const PlanPair1D&) = delete;
  PlanPair1D& operator=(const PlanPair1D&) = delete;
  ~PlanPair1D() {
    fftw_destroy_plan(forward_);
    fftw_destroy_plan(backward_);
  }
  fftw_plan forward() const { return forward_; }
  fftw_plan backward() const { return backward_; }

 private:
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

inline const PlanPair1D& plans_1d(int n) {
  static std::mutex mutex;
  static std::map<int, std::unique_ptr<PlanPair1D>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[n];
  if (!slot) slot = std::make_unique<PlanPair1D>(n);
  return *slot;
}

}  // namespace detail

/// 1D analogue of forward(): n/2 + 1 normalised coefficients.
inline std::vector<cplx> forward_1d(int n, std::span<const double> values) {
  const auto& p = detail::plans_1d(n);
  std::vector<double> in(values.begin(), values.end());
  std::vector<cplx> out(static_cast<std::size_t>(n / 2 + 1));
  fftw_execute_dft_r2c(p.forward(), in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  for (auto& c : out) c /= static_cast<double>(n);
  return out;
}

inline std::vector<double> inverse_1d(int n, std::span<const cplx> modes) {
  const auto& p = detail::plans_1d(n);
  std::vector<cplx> in(modes.begin(), modes.end());
  std::vector<double> out(static_cast<std::size_t>(n));
  fftw_execute_dft_c2r(p.backward(), reinterpret_cast<fftw_complex*>(in.data()), out.data());
  return out;
}

/// Forward transform normalised so that the result holds Fourier
/// coefficients: f(x) = sum_k c_k exp(i k.(x - x_0)).
inline std::vector<cplx> forward(int n, std::span<const double> values) {
  const auto& p = detail::plans(n);
  std::vector<double> in(values.begin(), values.end());
  std::vector<cplx> out(static_cast<std::size_t>(n) * (n / 2 + 1));
  fftw_execute_dft_r2c(p.forward(), in.data(), reinterpret_cast<fftw_complex*>(out.data()));
  const double scale = 1.0 / (static_cast<double>(n) * n);
  for (auto& c : out) c *= scale;
  return out;
}

inline std::vector<double> inverse(int n, std::span<const cplx> modes) {
  const auto& p = detail::plans(n);
  std::vector<cplx> in(modes.begin(), modes.end());
  std::vector<double> out(static_cast<std::size_t>(n) * n);
  fftw_execute_dft_c2r(p.backward(), reinterpret_cast<fftw_complex*>(in.data()), out.data());
  return out;
}

}  // namespace eulerlab::fft
