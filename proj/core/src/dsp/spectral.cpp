#include "heartcloak/dsp/spectral.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>

#include "heartcloak/dsp/fft.hpp"
#include "heartcloak/error.hpp"

namespace heartcloak::dsp {
namespace {

std::vector<double> make_window(std::size_t n, Window window) {
  return window == Window::hann ? hann_window(n) : std::vector<double>(n, 1.0);
}

double mean_of(std::span<const double> x) {
  if (x.empty()) return 0.0;
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

// Goertzel-style single-bin DFT of a real frame.
std::complex<double> dft_at(std::span<const double> frame, double cycles_per_sample) {
  const double w = 2.0 * std::numbers::pi * cycles_per_sample;
  const double coeff = 2.0 * std::cos(w);
  double s1 = 0.0, s2 = 0.0;
  for (double v : frame) {
    const double s0 = v + coeff * s1 - s2;
    s2 = s1;
    s1 = s0;
  }
  // X = e^{jw(N-1)} * (s1 - e^{-jw} s2); only the magnitude is needed here.
  return std::complex<double>(s1 - std::cos(w) * s2, std::sin(w) * s2);
}

}  // namespace

Spectrum magnitude_spectrum(std::span<const double> x, double fs, std::size_t fft_size,
                            Window window) {
  require(!x.empty(), "spectrum of empty signal");
  require(fs > 0.0, "sample rate must be positive");
  if (fft_size == 0) fft_size = next_pow2(4 * x.size());
  require(fft_size >= x.size(), "fft size smaller than signal");

  const auto w = make_window(x.size(), window);
  const double mu = mean_of(x);
  std::vector<double> buf(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) buf[i] = (x[i] - mu) * w[i];

  const auto spec = rfft(buf, fft_size);
  Spectrum out;
  out.frequency_hz.resize(spec.size());
  out.magnitude.resize(spec.size());
  for (std::size_t k = 0; k < spec.size(); ++k) {
    out.frequency_hz[k] = static_cast<double>(k) * fs / static_cast<double>(fft_size);
    out.magnitude[k] = std::abs(spec[k]);
  }
  return out;
}

double line_amplitude(std::span<const double> x, double fs, double frequency_hz) {
  require(!x.empty(), "line amplitude of empty signal");
  const auto w = hann_window(x.size());
  const double mu = mean_of(x);
  std::vector<double> buf(x.size());
  double wsum = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    buf[i] = (x[i] - mu) * w[i];
    wsum += w[i];
  }
  return 2.0 * std::abs(dft_at(buf, frequency_hz / fs)) / wsum;
}

std::vector<double> Spectrogram::mean_profile() const {
  std::vector<double> out(magnitude.size(), 0.0);
  for (std::size_t r = 0; r < magnitude.size(); ++r) {
    const auto& row = magnitude[r];
    if (!row.empty()) out[r] = std::accumulate(row.begin(), row.end(), 0.0) / row.size();
  }
  return out;
}

Spectrogram spectrogram(std::span<const double> x, double fs, const SpectrogramOptions& opt) {
  require(fs > 0.0, "sample rate must be positive");
  require(opt.resolution_bpm > 0.0 && opt.hop_s > 0.0 && opt.max_bpm > 0.0,
          "spectrogram options must be positive");
  const auto len = static_cast<std::size_t>(std::lround(60.0 / opt.resolution_bpm * fs));
  const auto hop = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(opt.hop_s * fs)));
  require(len >= 2, "spectrogram window shorter than two samples");
  require(x.size() >= len, "signal shorter than one spectrogram window");

  Spectrogram sg;
  const auto rows = static_cast<std::size_t>(std::floor(opt.max_bpm / opt.resolution_bpm)) + 1;
  for (std::size_t r = 0; r < rows; ++r) sg.frequency_bpm.push_back(r * opt.resolution_bpm);
  sg.magnitude.assign(rows, {});

  const auto w = make_window(len, opt.window);
  const double wsum = std::accumulate(w.begin(), w.end(), 0.0);
  std::vector<double> frame(len);
  for (std::size_t start = 0; start + len <= x.size(); start += hop) {
    const auto seg = x.subspan(start, len);
    const double mu = mean_of(seg);
    for (std::size_t i = 0; i < len; ++i) frame[i] = (seg[i] - mu) * w[i];
    sg.time_s.push_back((static_cast<double>(start) + 0.5 * static_cast<double>(len - 1)) / fs);
    for (std::size_t r = 0; r < rows; ++r) {
      const double f_hz = sg.frequency_bpm[r] / 60.0;
      sg.magnitude[r].push_back(2.0 * std::abs(dft_at(frame, f_hz / fs)) / wsum);
    }
  }
  return sg;
}

std::vector<double> ridge_frequencies(const Spectrogram& sg, double low_bpm, double high_bpm) {
  const auto prof = sg.mean_profile();
  std::vector<double> ridges;
  for (std::size_t r = 1; r + 1 < prof.size(); ++r) {
    const double f = sg.frequency_bpm[r];
    if (f < low_bpm || f > high_bpm) continue;
    if (prof[r] > prof[r - 1] && prof[r] >= prof[r + 1]) ridges.push_back(f);
  }
  return ridges;
}

}  // namespace heartcloak::dsp
