#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace heartcloak::dsp {

enum class Window { rectangular, hann };

struct Spectrum {
  std::vector<double> frequency_hz;
  std::vector<double> magnitude;
};

/// One-sided magnitude spectrum of the mean-removed, windowed input,
/// zero-padded to fft_size (0 picks the next power of two >= 4 * n).
Spectrum magnitude_spectrum(std::span<const double> x, double sample_rate_hz,
                            std::size_t fft_size = 0, Window window = Window::hann);

/// Amplitude of the sinusoidal component at frequency_hz, estimated by a
/// Hann-weighted projection. A pure tone a*sin(2 pi f t) returns ~a.
double line_amplitude(std::span<const double> x, double sample_rate_hz, double frequency_hz);

struct Spectrogram {
  std::vector<double> frequency_bpm;  // rows
  std::vector<double> time_s;         // columns, window centers
  std::vector<std::vector<double>> magnitude;  // [row][column]

  /// Magnitude averaged over time, one value per frequency row.
  std::vector<double> mean_profile() const;
};

struct SpectrogramOptions {
  double resolution_bpm{6.0};  // bin spacing; window length = 60 / resolution seconds
  double hop_s{1.0};
  double max_bpm{240.0};
  Window window{Window::hann};
};

/// Short-time Fourier magnitude evaluated on an exact BPM grid
/// (0, res, 2 res, ... max_bpm). The window length is rounded to whole samples.
Spectrogram spectrogram(std::span<const double> x, double sample_rate_hz,
                        const SpectrogramOptions& options = {});

/// Frequencies (BPM) of local maxima of the time-averaged profile that lie in
/// [low_bpm, high_bpm].
std::vector<double> ridge_frequencies(const Spectrogram& sg, double low_bpm, double high_bpm);

}  // namespace heartcloak::dsp
