#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "heartcloak/signal_model.hpp"

namespace heartcloak {

inline constexpr double kSpeedOfLight = 299'792'458.0;
inline constexpr double kSpeedOfSound = 343.0;

/// Parameters of one FMCW sensing modality. Both modalities share the same
/// dechirp model; only the numbers differ.
struct SensorProfile {
  std::string name;
  double start_frequency_hz{0.0};
  double bandwidth_hz{0.0};
  double slope_hz_per_s{0.0};
  double chirp_duration_s{0.0};
  double frame_period_s{0.0};
  double adc_rate_hz{0.0};
  std::size_t adc_samples{0};
  std::size_t range_fft_size{0};
  double propagation_speed_mps{kSpeedOfLight};

  /// 77 GHz radar: 60.012 MHz/us slope, 5 Msps, 256 samples, 0.5 ms frames.
  static SensorProfile mmwave();
  /// 18-22 kHz sonar: 48 kHz sampling, 512-sample chirps, 343 m/s.
  static SensorProfile acoustic();
  /// "mmwave" or "acoustic".
  static SensorProfile preset(const std::string& name);

  void validate() const;

  double range_resolution_m() const { return propagation_speed_mps / (2.0 * bandwidth_hz); }
  double wavelength_m() const { return propagation_speed_mps / start_frequency_hz; }
  /// Wavelength at the sweep frequency reached mid-way through the sampled
  /// chirp; the Hann-windowed range bin phase scales with this wavelength.
  double effective_wavelength_m() const;
  double frame_rate_hz() const { return 1.0 / frame_period_s; }
  double beat_frequency_hz(double distance_m) const {
    return 2.0 * slope_hz_per_s * distance_m / propagation_speed_mps;
  }
  /// Fractional FFT bin of a target at distance_m.
  double range_bin(double distance_m) const {
    return beat_frequency_hz(distance_m) * static_cast<double>(range_fft_size) / adc_rate_hz;
  }
  /// Largest distance whose beat frequency stays below the ADC rate.
  double max_range_m() const {
    return adc_rate_hz * propagation_speed_mps / (2.0 * slope_hz_per_s);
  }

  bool operator==(const SensorProfile&) const = default;
};

/// Additional point reflector; empty motion means static clutter.
struct Reflector {
  double distance_m{1.0};
  double amplitude{1.0};
  DisplacementSignal motion;
};

struct Scene {
  double base_distance_m{0.30};
  DisplacementSignal displacement;  // mm, radial, added to base_distance_m
  double amplitude_scale{1.0};      // echo amplitude of the subject
  std::optional<double> snr_db{20.0};  // per IF sample for a unit-amplitude echo; nullopt = noiseless
  std::vector<Reflector> reflectors;

  void validate(const SensorProfile& profile) const;
};

/// Row-major complex64 matrix: IF frames or range profiles.
struct ComplexMatrix {
  std::size_t rows{0};
  std::size_t cols{0};
  std::vector<std::complex<float>> data;

  ComplexMatrix() = default;
  ComplexMatrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  std::span<std::complex<float>> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const std::complex<float>> row(std::size_t r) const {
    return {data.data() + r * cols, cols};
  }
};

/// Number of whole frames the scene's displacement covers.
std::size_t frame_count(const SensorProfile& profile, const Scene& scene);

/// Dechirped IF samples, one row per frame. Displacement is held constant
/// within a chirp and sampled at the frame start. Noise for frame i comes from
/// a generator seeded by derive_seed(seed, i), so frames can be produced in
/// any order with identical results.
ComplexMatrix simulate_frames(const SensorProfile& profile, const Scene& scene,
                              std::uint64_t seed, std::size_t frames = 0);

/// Fill one IF row for frame `index` (used by simulate_frames and the fused
/// pipeline).
void simulate_frame(const SensorProfile& profile, const Scene& scene, std::uint64_t seed,
                    std::size_t index, std::span<std::complex<double>> out);

/// Hann window, zero-pad to range_fft_size, per-row DFT.
ComplexMatrix range_fft(const ComplexMatrix& frames, const SensorProfile& profile);

struct BinSelection {
  std::size_t bin{0};
  bool fallback{false};  // true when no bin showed motion and max magnitude was used
};

/// Bin with the largest temporal variance of its complex value (DC excluded).
/// Falls back to the strongest bin when no bin's variance exceeds four times
/// the median variance.
BinSelection select_bin(const ComplexMatrix& range_profiles);

struct PhaseSeries {
  std::vector<double> phase;  // radians
  double sample_rate{0.0};
  std::size_t range_bin{0};
  bool unwrapped{false};
};

/// Removes 2*pi jumps so successive differences lie in [-pi, pi].
void unwrap_phase(std::vector<double>& phase);

/// Per-frame argument at `bin`, unwrapped and mean-removed.
PhaseSeries extract_phase(const ComplexMatrix& range_profiles, std::size_t bin,
                          double frame_rate_hz);

/// x = lambda / (4 pi) * phi, in millimeters.
DisplacementSignal displacement_from_phase(const PhaseSeries& phase, const SensorProfile& profile,
                                           SignalLabel label = SignalLabel::composite);

struct SensedDisplacement {
  DisplacementSignal displacement;
  BinSelection bin;
};

/// simulate_frames -> range_fft -> select_bin -> extract_phase ->
/// displacement_from_phase without materializing the IF matrix.
SensedDisplacement sense_displacement(const SensorProfile& profile, const Scene& scene,
                                      std::uint64_t seed);

}  // namespace heartcloak
