#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "heartcloak/random.hpp"

namespace heartcloak {

enum class SignalLabel { true_signal, decoy, composite };

std::string_view to_string(SignalLabel label) noexcept;

/// Uniformly sampled radial displacement in millimeters.
struct DisplacementSignal {
  std::vector<double> samples;
  double sample_rate{0.0};
  SignalLabel label{SignalLabel::composite};

  double duration() const noexcept {
    return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  std::size_t size() const noexcept { return samples.size(); }

  /// Linear interpolation at time t (seconds), clamped to the ends.
  double at(double t) const;

  /// Throws ParameterError unless the rate is positive and all samples finite.
  void validate() const;
};

/// Generative model of the subject's chest motion. Each beat is a Gaussian
/// bump whose full width at half maximum is pulse_width_s.
struct VitalSignSource {
  double heart_rate_bpm{66.0};
  double heartbeat_amplitude_mm{0.5};
  double pulse_width_s{0.080};
  bool breathing_enabled{false};
  double breathing_rate_bpm{15.0};
  double breathing_amplitude_mm{4.0};
  double jitter_std{0.02};  // fractional std of each RR interval
  double range_low_bpm{30.0};
  double range_high_bpm{240.0};

  void validate() const;

  bool operator==(const VitalSignSource&) const = default;
};

DisplacementSignal synthesize_heartbeat(const VitalSignSource& src, double duration_s,
                                        double sample_rate, Rng& rng);

struct PulseTrainSpec {
  double base_duration_s{10.0};
  double base_sample_rate{2000.0};
  std::vector<double> decoy_frequencies_bpm;
  double pulse_width_s{0.025};
  int repetitions{3};

  void validate() const;

  bool operator==(const PulseTrainSpec&) const = default;
};

struct PulseTrain {
  std::vector<std::uint8_t> samples;  // 0 or 1
  double sample_rate{0.0};
  std::size_t pulses_per_base{0};

  double duration() const noexcept {
    return sample_rate > 0.0 ? static_cast<double>(samples.size()) / sample_rate : 0.0;
  }
  std::size_t pulse_count() const;  // rising edges over the whole train
};

/// Sum of unit sinusoids at the decoy frequencies, each positive-going zero
/// crossing emitting a pulse of pulse_width_s; the base is tiled
/// `repetitions` times.
PulseTrain generate_pulse_train(const PulseTrainSpec& spec);

/// The sum-of-sinusoids base signal that generate_pulse_train thresholds.
std::vector<double> pulse_base_signal(const PulseTrainSpec& spec);

/// Pneumatic chamber response to one valve pulse: linear rise to the peak over
/// rise_time_s, then exponential deflation with time constant fall_time_s / 3
/// that reaches zero at fall_time_s.
struct ActuatorKernel {
  double rise_time_s{0.025};
  double fall_time_s{0.050};
  double peak_displacement_mm{0.5};
  double saturation_factor{1.5};  // overlapping responses clip at this * peak

  void validate() const;
  std::vector<double> render(double sample_rate) const;

  bool operator==(const ActuatorKernel&) const = default;
};

/// Each pulse onset triggers one kernel response; overlapping responses add
/// and saturate.
DisplacementSignal actuate(const PulseTrain& pulses, const ActuatorKernel& kernel);

/// Pointwise sum, label composite.
DisplacementSignal superimpose(const DisplacementSignal& a, const DisplacementSignal& b);

/// Decoys rendered with the heartbeat generator itself (same pulse shape and
/// jitter, independent phases): an idealized actuator whose output is
/// statistically exchangeable with the true heartbeat.
DisplacementSignal render_matched_decoys(std::span<const double> decoy_bpm,
                                         const VitalSignSource& shape, double duration_s,
                                         double sample_rate, Rng& rng);

/// Scale factor that makes the mean spectral line amplitude of `decoy` at
/// `decoy_bpm` equal `ratio` times the line amplitude of `truth` at
/// `true_bpm`.
double decoy_amplitude_gain(const DisplacementSignal& truth, double true_bpm,
                            const DisplacementSignal& decoy, std::span<const double> decoy_bpm,
                            double ratio = 1.0);

DisplacementSignal scaled(const DisplacementSignal& sig, double gain);

/// Resample onto a new uniform grid by linear interpolation.
DisplacementSignal resample(const DisplacementSignal& sig, double new_rate, double duration_s);

}  // namespace heartcloak
