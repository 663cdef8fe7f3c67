#include "heartcloak/dsp/fft.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "heartcloak/error.hpp"

namespace heartcloak::dsp {
namespace {

// FFTW's planner is not reentrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

}  // namespace

struct Fft::Impl {
  fftw_complex* in{nullptr};
  fftw_complex* out{nullptr};
  fftw_plan plan{nullptr};

  explicit Impl(std::size_t n) {
    std::lock_guard lock(planner_mutex());
    in = fftw_alloc_complex(n);
    out = fftw_alloc_complex(n);
    plan = fftw_plan_dft_1d(static_cast<int>(n), in, out, FFTW_FORWARD, FFTW_ESTIMATE);
  }
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

Fft::Fft(std::size_t size) : size_(size) {
  require(size > 0, "fft size must be positive");
  impl_ = std::make_unique<Impl>(size);
}
Fft::~Fft() = default;
Fft::Fft(Fft&&) noexcept = default;
Fft& Fft::operator=(Fft&&) noexcept = default;

void Fft::execute(std::span<const cplx> in, std::span<cplx> out) {
  require(in.size() <= size_, "fft input longer than transform size");
  require(out.size() >= size_, "fft output buffer too small");
  auto* buf = reinterpret_cast<cplx*>(impl_->in);
  std::copy(in.begin(), in.end(), buf);
  std::fill(buf + in.size(), buf + size_, cplx{});
  fftw_execute(impl_->plan);
  const auto* res = reinterpret_cast<const cplx*>(impl_->out);
  std::copy(res, res + size_, out.begin());
}

struct RealFft::Impl {
  double* in{nullptr};
  fftw_complex* out{nullptr};
  fftw_plan plan{nullptr};

  explicit Impl(std::size_t n) {
    std::lock_guard lock(planner_mutex());
    in = fftw_alloc_real(n);
    out = fftw_alloc_complex(n / 2 + 1);
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in, out, FFTW_ESTIMATE);
  }
  ~Impl() {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
    fftw_free(in);
    fftw_free(out);
  }
};

RealFft::RealFft(std::size_t size) : size_(size) {
  require(size > 0, "fft size must be positive");
  impl_ = std::make_unique<Impl>(size);
}
RealFft::~RealFft() = default;
RealFft::RealFft(RealFft&&) noexcept = default;
RealFft& RealFft::operator=(RealFft&&) noexcept = default;

void RealFft::execute(std::span<const double> in, std::span<cplx> out) {
  require(in.size() <= size_, "fft input longer than transform size");
  require(out.size() >= bins(), "fft output buffer too small");
  std::copy(in.begin(), in.end(), impl_->in);
  std::fill(impl_->in + in.size(), impl_->in + size_, 0.0);
  fftw_execute(impl_->plan);
  const auto* res = reinterpret_cast<const cplx*>(impl_->out);
  std::copy(res, res + bins(), out.begin());
}

std::vector<cplx> fft(std::span<const cplx> in, std::size_t size) {
  Fft plan(size);
  std::vector<cplx> out(size);
  plan.execute(in, out);
  return out;
}

std::vector<cplx> rfft(std::span<const double> in, std::size_t size) {
  RealFft plan(size);
  std::vector<cplx> out(plan.bins());
  plan.execute(in, out);
  return out;
}

std::size_t next_pow2(std::size_t n) noexcept {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (n < 2) return w;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                static_cast<double>(n - 1));
  }
  return w;
}

}  // namespace heartcloak::dsp
