#pragma once

#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <vector>

namespace heartcloak::dsp {

using cplx = std::complex<double>;

/// Forward complex DFT of fixed length backed by an FFTW plan. Unnormalized:
/// X[k] = sum_n x[n] exp(-j 2 pi k n / N). Plans are created under a global
/// lock; execute() is safe to call concurrently on distinct Fft objects.
class Fft {
 public:
  explicit Fft(std::size_t size);
  ~Fft();
  Fft(Fft&&) noexcept;
  Fft& operator=(Fft&&) noexcept;
  Fft(const Fft&) = delete;
  Fft& operator=(const Fft&) = delete;

  std::size_t size() const noexcept { return size_; }

  /// Input shorter than size() is zero-padded; longer input is an error.
  void execute(std::span<const cplx> in, std::span<cplx> out);

 private:
  struct Impl;
  std::size_t size_;
  std::unique_ptr<Impl> impl_;
};

/// Real-input forward DFT, returns size/2 + 1 bins.
class RealFft {
 public:
  explicit RealFft(std::size_t size);
  ~RealFft();
  RealFft(RealFft&&) noexcept;
  RealFft& operator=(RealFft&&) noexcept;
  RealFft(const RealFft&) = delete;
  RealFft& operator=(const RealFft&) = delete;

  std::size_t size() const noexcept { return size_; }
  std::size_t bins() const noexcept { return size_ / 2 + 1; }

  void execute(std::span<const double> in, std::span<cplx> out);

 private:
  struct Impl;
  std::size_t size_;
  std::unique_ptr<Impl> impl_;
};

std::vector<cplx> fft(std::span<const cplx> in, std::size_t size);
std::vector<cplx> rfft(std::span<const double> in, std::size_t size);

std::size_t next_pow2(std::size_t n) noexcept;

/// Periodic=false gives the symmetric Hann window used for analysis frames.
std::vector<double> hann_window(std::size_t n);

}  // namespace heartcloak::dsp
