#pragma once

#include <complex>
#include <span>
#include <vector>

namespace heartcloak::dsp {

/// Direct-form II transposed biquad, a0 normalized to 1.
struct Biquad {
  double b0{1.0}, b1{0.0}, b2{0.0};
  double a1{0.0}, a2{0.0};

  std::complex<double> response(double omega) const;
  double dc_gain() const;
};

/// Cascade of second-order sections.
class SosFilter {
 public:
  SosFilter() = default;
  explicit SosFilter(std::vector<Biquad> sections) : sections_(std::move(sections)) {}

  const std::vector<Biquad>& sections() const noexcept { return sections_; }
  bool empty() const noexcept { return sections_.empty(); }
  void append(const SosFilter& other);

  /// Complex response at frequency_hz for a sampling rate of sample_rate_hz.
  std::complex<double> response(double frequency_hz, double sample_rate_hz) const;

  /// Causal single pass, zero initial state.
  std::vector<double> filter(std::span<const double> x) const;

  /// Forward-backward application: zero phase, magnitude |H|^2. The input is
  /// extended by odd reflection and each pass starts from the steady state
  /// for the edge sample, which keeps start-up transients out of the output.
  std::vector<double> filtfilt(std::span<const double> x) const;

 private:
  std::vector<Biquad> sections_;
};

/// Butterworth band-pass of prototype order `order` (2*order poles), unity
/// gain at the geometric band center. Bilinear transform with prewarping.
SosFilter butterworth_bandpass(int order, double low_hz, double high_hz, double sample_rate_hz);

/// Butterworth band-stop of prototype order `order`, unity gain at DC.
SosFilter butterworth_bandstop(int order, double low_hz, double high_hz, double sample_rate_hz);

}  // namespace heartcloak::dsp
