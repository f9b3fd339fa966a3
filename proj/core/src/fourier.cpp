#include "lgsim/fourier.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

#include "lgsim/errors.hpp"

namespace lgsim::fourier {

namespace {
// The FFTW planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

struct RealFft::Impl {
  std::size_t n;
  double* x;
  fftw_complex* X;
  fftw_plan fwd;
  fftw_plan inv;

  explicit Impl(std::size_t n_) : n(n_) {
    if (n < 2) throw ParameterError("FFT size must be >= 2");
    std::lock_guard lock(planner_mutex());
    x = fftw_alloc_real(n);
    X = fftw_alloc_complex(n / 2 + 1);
    const int ni = static_cast<int>(n);
    fwd = fftw_plan_dft_r2c_1d(ni, x, X, FFTW_ESTIMATE);
    inv = fftw_plan_dft_c2r_1d(ni, X, x, FFTW_ESTIMATE);
    for (std::size_t i = 0; i < n; ++i) x[i] = 0.0;
    for (std::size_t i = 0; i <= n / 2; ++i) X[i][0] = X[i][1] = 0.0;
  }
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(inv);
    fftw_free(x);
    fftw_free(X);
  }
};

RealFft::RealFft(std::size_t n) : impl_(std::make_unique<Impl>(n)) {}
RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

std::size_t RealFft::size() const { return impl_->n; }
std::span<double> RealFft::real_data() { return {impl_->x, impl_->n}; }
std::span<std::complex<double>> RealFft::spectrum_data() {
  return {reinterpret_cast<std::complex<double>*>(impl_->X), impl_->n / 2 + 1};
}
void RealFft::forward() { fftw_execute(impl_->fwd); }
void RealFft::inverse() { fftw_execute(impl_->inv); }

struct ComplexFft::Impl {
  std::size_t n;
  fftw_complex* x;
  fftw_plan fwd;
  fftw_plan bwd;

  explicit Impl(std::size_t n_) : n(n_) {
    if (n < 1) throw ParameterError("FFT size must be >= 1");
    std::lock_guard lock(planner_mutex());
    x = fftw_alloc_complex(n);
    const int ni = static_cast<int>(n);
    fwd = fftw_plan_dft_1d(ni, x, x, FFTW_FORWARD, FFTW_ESTIMATE);
    bwd = fftw_plan_dft_1d(ni, x, x, FFTW_BACKWARD, FFTW_ESTIMATE);
    for (std::size_t i = 0; i < n; ++i) x[i][0] = x[i][1] = 0.0;
  }
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(fwd);
    fftw_destroy_plan(bwd);
    fftw_free(x);
  }
};

ComplexFft::ComplexFft(std::size_t n) : impl_(std::make_unique<Impl>(n)) {}
ComplexFft::~ComplexFft() = default;
ComplexFft::ComplexFft(ComplexFft&&) noexcept = default;
ComplexFft& ComplexFft::operator=(ComplexFft&&) noexcept = default;

std::size_t ComplexFft::size() const { return impl_->n; }
std::span<std::complex<double>> ComplexFft::data() {
  return {reinterpret_cast<std::complex<double>*>(impl_->x), impl_->n};
}
void ComplexFft::forward() { fftw_execute(impl_->fwd); }
void ComplexFft::backward() { fftw_execute(impl_->bwd); }

std::vector<double> cosine_transform(std::span<const double> samples, double step,
                                     std::span<const double> omegas) {
  if (samples.size() < 2) throw GridError("cosine transform needs at least two samples");
  std::vector<double> out(omegas.size());
  const std::size_t n = samples.size();
  for (std::size_t j = 0; j < omegas.size(); ++j) {
    // Rotation recurrence for cos(w k h), re-anchored every 1024 steps.
    const double wh = omegas[j] * step;
    const std::complex<double> rot(std::cos(wh), std::sin(wh));
    std::complex<double> ph(1.0, 0.0);
    double acc = 0.5 * samples[0];
    for (std::size_t k = 1; k < n; ++k) {
      if (k % 1024 == 0) {
        const double a = wh * static_cast<double>(k);
        ph = {std::cos(a), std::sin(a)};
      } else {
        ph *= rot;
      }
      acc += (k + 1 == n ? 0.5 : 1.0) * samples[k] * ph.real();
    }
    out[j] = 2.0 * step * acc;
  }
  return out;
}

}  // namespace lgsim::fourier
