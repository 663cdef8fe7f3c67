#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

#include "heartcloak/dsp/iir.hpp"
#include "heartcloak/obfuscation.hpp"
#include "heartcloak/signal_model.hpp"

namespace heartcloak {

struct HeartBandFilter {
  double low_hz{0.8};
  double high_hz{2.0};
  int order{4};

  void validate(double sample_rate) const;
  dsp::SosFilter design(double sample_rate) const;

  bool operator==(const HeartBandFilter&) const = default;
};

/// Band-stop cascade centered on the key's decoy frequencies.
struct NotchBank {
  std::vector<double> center_bpm;
  double half_bandwidth_bpm{2.0};
  int order{2};

  static NotchBank from_key(const ObfuscationKey& key, double half_bandwidth_bpm = 2.0,
                            int order = 2);
  dsp::SosFilter design(double sample_rate) const;
};

enum class EstimationMethod { peak_rr, fft_peak };
enum class ObserverMode { authorized, unauthorized };

std::string_view to_string(EstimationMethod m) noexcept;
std::string_view to_string(ObserverMode m) noexcept;

struct HeartRateEstimate {
  double bpm{std::numeric_limits<double>::quiet_NaN()};
  EstimationMethod method{EstimationMethod::fft_peak};
  ObserverMode mode{ObserverMode::unauthorized};
  /// fft_peak: top / second in-band spectral peak. peak_rr: 1 - CV of the
  /// RR intervals, floored at 0.
  double confidence{0.0};
  bool valid{false};
  /// Set on the headline estimate when the cross-check disagrees.
  bool low_confidence{false};
  double cross_check_bpm{std::numeric_limits<double>::quiet_NaN()};
};

struct ExtractionOptions {
  HeartBandFilter band{};
  double notch_half_bandwidth_bpm{2.0};
  int notch_order{2};
  double prominence_factor{0.3};  // times the signal std
  double disagreement_bpm{10.0};
  double min_duration_s{10.0};
  double valid_low_bpm{30.0};
  double valid_high_bpm{240.0};

  bool operator==(const ExtractionOptions&) const = default;
};

/// Zero-phase Butterworth band-pass.
DisplacementSignal bandpass(const DisplacementSignal& sig, const HeartBandFilter& band = {});

/// Indices of local maxima whose topographic prominence is >= min_prominence.
std::vector<std::size_t> find_prominent_peaks(std::span<const double> x, double min_prominence);

HeartRateEstimate estimate_hr_peaks(const DisplacementSignal& sig,
                                    const ExtractionOptions& options = {});

HeartRateEstimate estimate_hr_fft(const DisplacementSignal& sig,
                                  const ExtractionOptions& options = {});

DisplacementSignal authorized_filter(const DisplacementSignal& sig, const NotchBank& notches);
DisplacementSignal authorized_filter(const DisplacementSignal& sig, const ObfuscationKey& key,
                                     const ExtractionOptions& options = {});

struct EstimateSet {
  HeartRateEstimate fft_peak;
  HeartRateEstimate peak_rr;
  /// fft_peak with the peak_rr cross-check folded in.
  HeartRateEstimate headline(double disagreement_bpm = 10.0) const;
};

/// Unauthorized: band-pass then estimate. Authorized: band-pass, notch out
/// the key's decoys, then estimate. `key` is required in authorized mode.
EstimateSet estimate_set(const DisplacementSignal& sig, ObserverMode mode,
                         const ObfuscationKey* key, const ExtractionOptions& options = {});

HeartRateEstimate estimate(const DisplacementSignal& sig, ObserverMode mode,
                           const ObfuscationKey* key = nullptr,
                           const ExtractionOptions& options = {});

}  // namespace heartcloak
