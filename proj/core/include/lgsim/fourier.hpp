#pragma once

// Thin RAII wrappers around FFTW plans. Each object owns its buffers and
// plan, so one object per thread is the intended use. Transforms are
// unnormalized (FFTW convention).

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace lgsim::fourier {

class RealFft {
 public:
  explicit RealFft(std::size_t n);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const;
  std::span<double> real_data();
  std::span<std::complex<double>> spectrum_data();  // n/2 + 1 bins

  // real_data -> spectrum_data, X_k = sum_n x_n e^{-2 pi i k n / N}
  void forward();
  // spectrum_data -> real_data, x_n = sum_k X_k e^{+2 pi i k n / N}.
  // Overwrites spectrum_data.
  void inverse();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

class ComplexFft {
 public:
  explicit ComplexFft(std::size_t n);
  ~ComplexFft();
  ComplexFft(ComplexFft&&) noexcept;
  ComplexFft& operator=(ComplexFft&&) noexcept;
  ComplexFft(const ComplexFft&) = delete;
  ComplexFft& operator=(const ComplexFft&) = delete;

  std::size_t size() const;
  std::span<std::complex<double>> data();
  void forward();   // sign -1
  void backward();  // sign +1

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Trapezoidal cosine transform of an even function sampled on a uniform
// grid from tau = 0: S(w) = 2 int_0^T K(tau) cos(w tau) dtau.
std::vector<double> cosine_transform(std::span<const double> samples, double step,
                                     std::span<const double> omegas);

}  // namespace lgsim::fourier
