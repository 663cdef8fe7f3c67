#include "heartcloak/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "heartcloak/dsp/spectral.hpp"
#include "heartcloak/error.hpp"

namespace heartcloak {

std::string_view to_string(SignalLabel label) noexcept {
  switch (label) {
    case SignalLabel::true_signal: return "true";
    case SignalLabel::decoy: return "decoy";
    case SignalLabel::composite: return "composite";
  }
  return "unknown";
}

double DisplacementSignal::at(double t) const {
  if (samples.empty()) return 0.0;
  const double pos = t * sample_rate;
  if (pos <= 0.0) return samples.front();
  const auto last = static_cast<double>(samples.size() - 1);
  if (pos >= last) return samples.back();
  const auto i = static_cast<std::size_t>(pos);
  const double frac = pos - static_cast<double>(i);
  return samples[i] + frac * (samples[i + 1] - samples[i]);
}

void DisplacementSignal::validate() const {
  require(sample_rate > 0.0, "displacement sample rate must be positive");
  for (double v : samples) require(std::isfinite(v), "displacement contains non-finite samples");
}

void VitalSignSource::validate() const {
  require(range_low_bpm > 0.0 && range_low_bpm < range_high_bpm,
          "physiological range must satisfy 0 < low < high");
  require(heart_rate_bpm >= range_low_bpm && heart_rate_bpm <= range_high_bpm,
          "heart rate outside the physiological range");
  require(heartbeat_amplitude_mm > 0.0, "heartbeat amplitude must be positive");
  require(pulse_width_s > 0.0 && pulse_width_s < 60.0 / heart_rate_bpm,
          "pulse width must be positive and shorter than one beat period");
  require(jitter_std >= 0.0 && jitter_std <= 0.1, "jitter std must lie in [0, 0.1]");
  if (breathing_enabled) {
    require(breathing_rate_bpm > 0.0, "breathing rate must be positive");
    require(breathing_amplitude_mm >= 0.0, "breathing amplitude must be non-negative");
  }
}

DisplacementSignal synthesize_heartbeat(const VitalSignSource& src, double duration_s,
                                        double sample_rate, Rng& rng) {
  src.validate();
  require(duration_s > 0.0, "duration must be positive");
  require(sample_rate >= 4.0 * src.heart_rate_bpm / 60.0 * 10.0,
          "sample rate too low to resolve the pulse shape");

  const auto n = static_cast<std::size_t>(std::lround(duration_s * sample_rate));
  DisplacementSignal out{std::vector<double>(n, 0.0), sample_rate, SignalLabel::true_signal};

  const double period = 60.0 / src.heart_rate_bpm;
  const double sigma = src.pulse_width_s / (2.0 * std::sqrt(2.0 * std::numbers::ln2));
  const double reach = 6.0 * sigma;
  std::uniform_real_distribution<double> phase(0.0, period);
  std::normal_distribution<double> gauss(0.0, 1.0);

  // Start one period early so the first partially visible beat is rendered.
  double beat = phase(rng) - period;
  while (beat < duration_s + reach) {
    const auto lo = static_cast<std::ptrdiff_t>(std::ceil((beat - reach) * sample_rate));
    const auto hi = static_cast<std::ptrdiff_t>(std::floor((beat + reach) * sample_rate));
    for (auto i = std::max<std::ptrdiff_t>(lo, 0);
         i <= std::min<std::ptrdiff_t>(hi, static_cast<std::ptrdiff_t>(n) - 1); ++i) {
      const double z = (static_cast<double>(i) / sample_rate - beat) / sigma;
      out.samples[static_cast<std::size_t>(i)] += src.heartbeat_amplitude_mm * std::exp(-0.5 * z * z);
    }
    double rr = period;
    if (src.jitter_std > 0.0) rr *= std::max(0.5, 1.0 + src.jitter_std * gauss(rng));
    beat += rr;
  }

  if (src.breathing_enabled) {
    std::uniform_real_distribution<double> bphase(0.0, 2.0 * std::numbers::pi);
    const double phi = bphase(rng);
    const double w = 2.0 * std::numbers::pi * src.breathing_rate_bpm / 60.0;
    for (std::size_t i = 0; i < n; ++i) {
      out.samples[i] += src.breathing_amplitude_mm *
                        std::sin(w * static_cast<double>(i) / sample_rate + phi);
    }
  }
  return out;
}

void PulseTrainSpec::validate() const {
  require(!decoy_frequencies_bpm.empty(), "pulse train needs at least one decoy frequency");
  for (double f : decoy_frequencies_bpm) require(f > 0.0, "decoy frequencies must be positive");
  require(base_duration_s > 0.0, "base duration must be positive");
  require(base_sample_rate > 0.0, "base sample rate must be positive");
  require(pulse_width_s > 0.0, "pulse width must be positive");
  require(repetitions >= 1, "repetitions must be >= 1");
  const double fmax =
      *std::max_element(decoy_frequencies_bpm.begin(), decoy_frequencies_bpm.end());
  require(pulse_width_s * fmax / 60.0 < 1.0, "pulses would overlap within one decoy period");
  require(pulse_width_s * base_sample_rate >= 1.0, "pulse shorter than one sample");
}

std::size_t PulseTrain::pulse_count() const {
  std::size_t count = 0;
  std::uint8_t prev = 0;
  for (auto v : samples) {
    if (v && !prev) ++count;
    prev = v;
  }
  return count;
}

std::vector<double> pulse_base_signal(const PulseTrainSpec& spec) {
  spec.validate();
  const auto n = static_cast<std::size_t>(std::lround(spec.base_duration_s * spec.base_sample_rate));
  std::vector<double> base(n, 0.0);
  for (double f : spec.decoy_frequencies_bpm) {
    const double w = 2.0 * std::numbers::pi * f / 60.0 / spec.base_sample_rate;
    for (std::size_t i = 0; i < n; ++i) base[i] += std::sin(w * static_cast<double>(i));
  }
  return base;
}

PulseTrain generate_pulse_train(const PulseTrainSpec& spec) {
  const auto base = pulse_base_signal(spec);
  const std::size_t n = base.size();

  // The sample before t=0 is the continuous signal at -1/fs, so a crossing
  // exactly at the origin counts.
  double prev = 0.0;
  for (double f : spec.decoy_frequencies_bpm) {
    prev += std::sin(-2.0 * std::numbers::pi * f / 60.0 / spec.base_sample_rate);
  }
  std::vector<std::size_t> crossings;
  for (std::size_t i = 0; i < n; ++i) {
    if (prev < 0.0 && base[i] >= 0.0) crossings.push_back(i);
    prev = base[i];
  }

  const auto width = static_cast<std::size_t>(std::lround(spec.pulse_width_s * spec.base_sample_rate));
  PulseTrain train;
  train.sample_rate = spec.base_sample_rate;
  train.pulses_per_base = crossings.size();
  const std::size_t total = n * static_cast<std::size_t>(spec.repetitions);
  train.samples.assign(total, 0);
  for (int r = 0; r < spec.repetitions; ++r) {
    for (std::size_t c : crossings) {
      const std::size_t start = c + static_cast<std::size_t>(r) * n;
      const std::size_t end = std::min(total, start + width);
      std::fill(train.samples.begin() + static_cast<std::ptrdiff_t>(start),
                train.samples.begin() + static_cast<std::ptrdiff_t>(end), std::uint8_t{1});
    }
  }
  return train;
}

void ActuatorKernel::validate() const {
  require(rise_time_s > 0.0 && fall_time_s > 0.0, "actuator rise and fall times must be positive");
  require(peak_displacement_mm >= 0.0, "actuator peak displacement must be non-negative");
  require(saturation_factor >= 1.0, "saturation factor must be >= 1");
}

std::vector<double> ActuatorKernel::render(double sample_rate) const {
  validate();
  const auto nr = static_cast<std::size_t>(std::lround(rise_time_s * sample_rate));
  const auto nf = static_cast<std::size_t>(std::lround(fall_time_s * sample_rate));
  require(nr >= 1 && nf >= 1, "actuator kernel shorter than one sample at this rate");
  std::vector<double> k;
  k.reserve(nr + nf);
  for (std::size_t i = 0; i < nr; ++i) {
    k.push_back(peak_displacement_mm * static_cast<double>(i + 1) / static_cast<double>(nr));
  }
  const double tau = fall_time_s / 3.0;
  const double floor_val = std::exp(-3.0);
  for (std::size_t j = 1; j <= nf; ++j) {
    const double t = static_cast<double>(j) / sample_rate;
    const double shape = (std::exp(-t / tau) - floor_val) / (1.0 - floor_val);
    k.push_back(peak_displacement_mm * std::max(0.0, shape));
  }
  return k;
}

DisplacementSignal actuate(const PulseTrain& pulses, const ActuatorKernel& kernel) {
  require(pulses.sample_rate > 0.0, "pulse train sample rate must be positive");
  const auto k = kernel.render(pulses.sample_rate);
  const std::size_t n = pulses.samples.size();
  DisplacementSignal out{std::vector<double>(n, 0.0), pulses.sample_rate, SignalLabel::decoy};
  std::uint8_t prev = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (pulses.samples[i] && !prev) {
      const std::size_t end = std::min(n, i + k.size());
      for (std::size_t j = i; j < end; ++j) out.samples[j] += k[j - i];
    }
    prev = pulses.samples[i];
  }
  const double cap = kernel.saturation_factor * kernel.peak_displacement_mm;
  for (double& v : out.samples) v = std::min(v, cap);
  return out;
}

DisplacementSignal superimpose(const DisplacementSignal& a, const DisplacementSignal& b) {
  require(a.sample_rate > 0.0 && std::abs(a.sample_rate - b.sample_rate) <= 1e-9 * a.sample_rate,
          "superimpose requires equal sample rates");
  require(a.size() == b.size(), "superimpose requires equal durations");
  DisplacementSignal out{a.samples, a.sample_rate, SignalLabel::composite};
  for (std::size_t i = 0; i < out.samples.size(); ++i) out.samples[i] += b.samples[i];
  return out;
}

DisplacementSignal render_matched_decoys(std::span<const double> decoy_bpm,
                                         const VitalSignSource& shape, double duration_s,
                                         double sample_rate, Rng& rng) {
  require(!decoy_bpm.empty(), "no decoy frequencies");
  const auto n = static_cast<std::size_t>(std::lround(duration_s * sample_rate));
  DisplacementSignal out{std::vector<double>(n, 0.0), sample_rate, SignalLabel::decoy};
  for (double f : decoy_bpm) {
    VitalSignSource src = shape;
    src.heart_rate_bpm = f;
    src.breathing_enabled = false;
    const auto one = synthesize_heartbeat(src, duration_s, sample_rate, rng);
    for (std::size_t i = 0; i < n; ++i) out.samples[i] += one.samples[i];
  }
  return out;
}

double decoy_amplitude_gain(const DisplacementSignal& truth, double true_bpm,
                            const DisplacementSignal& decoy, std::span<const double> decoy_bpm,
                            double ratio) {
  require(!decoy_bpm.empty(), "no decoy frequencies");
  require(ratio >= 0.0, "decoy amplitude ratio must be non-negative");
  const double t = dsp::line_amplitude(truth.samples, truth.sample_rate, true_bpm / 60.0);
  double d = 0.0;
  for (double f : decoy_bpm) d += dsp::line_amplitude(decoy.samples, decoy.sample_rate, f / 60.0);
  d /= static_cast<double>(decoy_bpm.size());
  require(d > 0.0, "decoy signal has no energy at the key frequencies");
  return ratio * t / d;
}

DisplacementSignal scaled(const DisplacementSignal& sig, double gain) {
  DisplacementSignal out = sig;
  for (double& v : out.samples) v *= gain;
  return out;
}

DisplacementSignal resample(const DisplacementSignal& sig, double new_rate, double duration_s) {
  require(new_rate > 0.0 && duration_s > 0.0, "resample needs positive rate and duration");
  const auto n = static_cast<std::size_t>(std::lround(duration_s * new_rate));
  DisplacementSignal out{std::vector<double>(n), new_rate, sig.label};
  for (std::size_t i = 0; i < n; ++i) out.samples[i] = sig.at(static_cast<double>(i) / new_rate);
  return out;
}

}  // namespace heartcloak
