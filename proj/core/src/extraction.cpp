#include "heartcloak/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "heartcloak/dsp/spectral.hpp"
#include "heartcloak/error.hpp"

namespace heartcloak {

std::string_view to_string(EstimationMethod m) noexcept {
  return m == EstimationMethod::fft_peak ? "fft_peak" : "peak_rr";
}

std::string_view to_string(ObserverMode m) noexcept {
  return m == ObserverMode::authorized ? "authorized" : "unauthorized";
}

void HeartBandFilter::validate(double fs) const {
  require(low_hz > 0.0 && low_hz < high_hz, "heart band must satisfy 0 < low < high");
  require(high_hz < fs / 2.0, "heart band exceeds the Nyquist frequency");
  require(order >= 1, "heart band filter order must be >= 1");
}

dsp::SosFilter HeartBandFilter::design(double fs) const {
  validate(fs);
  return dsp::butterworth_bandpass(order, low_hz, high_hz, fs);
}

NotchBank NotchBank::from_key(const ObfuscationKey& key, double half_bandwidth_bpm, int order) {
  return NotchBank{key.frequencies_bpm(), half_bandwidth_bpm, order};
}

dsp::SosFilter NotchBank::design(double fs) const {
  require(half_bandwidth_bpm > 0.0, "notch half bandwidth must be positive");
  dsp::SosFilter bank;
  for (double c : center_bpm) {
    const double lo = (c - half_bandwidth_bpm) / 60.0;
    const double hi = (c + half_bandwidth_bpm) / 60.0;
    require(lo > 0.0 && hi < fs / 2.0, "notch frequency outside the representable band");
    bank.append(dsp::butterworth_bandstop(order, lo, hi, fs));
  }
  return bank;
}

DisplacementSignal bandpass(const DisplacementSignal& sig, const HeartBandFilter& band) {
  const auto sos = band.design(sig.sample_rate);
  return DisplacementSignal{sos.filtfilt(sig.samples), sig.sample_rate, sig.label};
}

std::vector<std::size_t> find_prominent_peaks(std::span<const double> x, double min_prominence) {
  std::vector<std::size_t> peaks;
  const std::size_t n = x.size();
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (!(x[i] > x[i - 1] && x[i] >= x[i + 1])) continue;
    // Plateaus: report the first sample, skip the rest.
    double left_min = x[i];
    for (std::size_t j = i; j-- > 0;) {
      if (x[j] > x[i]) break;
      left_min = std::min(left_min, x[j]);
    }
    double right_min = x[i];
    for (std::size_t j = i + 1; j < n; ++j) {
      if (x[j] > x[i]) break;
      right_min = std::min(right_min, x[j]);
    }
    const double prominence = x[i] - std::max(left_min, right_min);
    if (prominence >= min_prominence) peaks.push_back(i);
    while (i + 1 < n && x[i + 1] == x[i]) ++i;
  }
  return peaks;
}

namespace {

void check_duration(const DisplacementSignal& sig, const ExtractionOptions& opt) {
  sig.validate();
  require(sig.duration() >= opt.min_duration_s - 1e-9, "heart-rate estimation needs >= 10 s of signal");
}

double stddev(std::span<const double> x) {
  const double mu = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  double acc = 0.0;
  for (double v : x) acc += (v - mu) * (v - mu);
  return std::sqrt(acc / static_cast<double>(x.size()));
}

bool in_range(double bpm, const ExtractionOptions& opt) {
  return std::isfinite(bpm) && bpm >= opt.valid_low_bpm && bpm <= opt.valid_high_bpm;
}

}  // namespace

HeartRateEstimate estimate_hr_peaks(const DisplacementSignal& sig, const ExtractionOptions& opt) {
  check_duration(sig, opt);
  HeartRateEstimate est;
  est.method = EstimationMethod::peak_rr;
  const double threshold = opt.prominence_factor * stddev(sig.samples);
  const auto peaks = find_prominent_peaks(sig.samples, threshold);
  if (peaks.size() < 2 || threshold <= 0.0) return est;

  std::vector<double> rr;
  for (std::size_t i = 1; i < peaks.size(); ++i) {
    rr.push_back(static_cast<double>(peaks[i] - peaks[i - 1]) / sig.sample_rate);
  }
  const double mean_rr = std::accumulate(rr.begin(), rr.end(), 0.0) / static_cast<double>(rr.size());
  est.bpm = 60.0 / mean_rr;
  est.confidence = std::max(0.0, 1.0 - stddev(rr) / mean_rr);
  est.valid = in_range(est.bpm, opt);
  return est;
}

HeartRateEstimate estimate_hr_fft(const DisplacementSignal& sig, const ExtractionOptions& opt) {
  check_duration(sig, opt);
  HeartRateEstimate est;
  est.method = EstimationMethod::fft_peak;
  const auto spec = dsp::magnitude_spectrum(sig.samples, sig.sample_rate);

  std::size_t lo = 0;
  while (lo < spec.frequency_hz.size() && spec.frequency_hz[lo] < opt.band.low_hz) ++lo;
  std::size_t hi = lo;
  while (hi < spec.frequency_hz.size() && spec.frequency_hz[hi] <= opt.band.high_hz) ++hi;
  if (hi - lo < 3) return est;

  const auto& mag = spec.magnitude;
  const auto first = mag.begin() + static_cast<std::ptrdiff_t>(lo);
  const auto last = mag.begin() + static_cast<std::ptrdiff_t>(hi);
  const auto [mn, mx] = std::minmax_element(first, last);
  if (*mx <= 0.0 || *mx - *mn <= 1e-9 * *mx) return est;  // flat

  const auto k = static_cast<std::size_t>(mx - mag.begin());
  double offset = 0.0;
  if (k > 0 && k + 1 < mag.size()) {
    const double a = mag[k - 1], b = mag[k], c = mag[k + 1];
    const double denom = a - 2.0 * b + c;
    if (denom < 0.0) offset = std::clamp(0.5 * (a - c) / denom, -0.5, 0.5);
  }
  const double df = spec.frequency_hz[1] - spec.frequency_hz[0];
  est.bpm = 60.0 * (spec.frequency_hz[k] + offset * df);

  double second = 0.0;
  for (std::size_t i = std::max<std::size_t>(lo, 1); i < hi && i + 1 < mag.size(); ++i) {
    if (i == k) continue;
    if (mag[i] > mag[i - 1] && mag[i] >= mag[i + 1]) second = std::max(second, mag[i]);
  }
  if (second <= 0.0) second = std::max(mag[lo], mag[hi - 1]);
  est.confidence = second > 0.0 ? *mx / second : std::numeric_limits<double>::infinity();
  est.valid = in_range(est.bpm, opt);
  return est;
}

DisplacementSignal authorized_filter(const DisplacementSignal& sig, const NotchBank& notches) {
  const auto sos = notches.design(sig.sample_rate);
  return DisplacementSignal{sos.filtfilt(sig.samples), sig.sample_rate, sig.label};
}

DisplacementSignal authorized_filter(const DisplacementSignal& sig, const ObfuscationKey& key,
                                     const ExtractionOptions& opt) {
  return authorized_filter(
      sig, NotchBank::from_key(key, opt.notch_half_bandwidth_bpm, opt.notch_order));
}

HeartRateEstimate EstimateSet::headline(double disagreement_bpm) const {
  HeartRateEstimate h = fft_peak;
  h.cross_check_bpm = peak_rr.bpm;
  h.low_confidence = !peak_rr.valid || !fft_peak.valid ||
                     std::abs(fft_peak.bpm - peak_rr.bpm) > disagreement_bpm;
  return h;
}

EstimateSet estimate_set(const DisplacementSignal& sig, ObserverMode mode,
                         const ObfuscationKey* key, const ExtractionOptions& opt) {
  if (mode == ObserverMode::authorized) {
    require(key != nullptr, "authorized estimation requires the key");
  }
  check_duration(sig, opt);
  DisplacementSignal x = bandpass(sig, opt.band);
  if (mode == ObserverMode::authorized && key->p() > 0) x = authorized_filter(x, *key, opt);

  EstimateSet set{estimate_hr_fft(x, opt), estimate_hr_peaks(x, opt)};
  set.fft_peak.mode = mode;
  set.peak_rr.mode = mode;
  return set;
}

HeartRateEstimate estimate(const DisplacementSignal& sig, ObserverMode mode,
                           const ObfuscationKey* key, const ExtractionOptions& opt) {
  return estimate_set(sig, mode, key, opt).headline(opt.disagreement_bpm);
}

}  // namespace heartcloak
