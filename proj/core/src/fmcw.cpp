#include "heartcloak/fmcw.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "heartcloak/dsp/fft.hpp"
#include "heartcloak/error.hpp"
#include "heartcloak/random.hpp"

namespace heartcloak {

SensorProfile SensorProfile::mmwave() {
  SensorProfile p;
  p.name = "mmwave";
  p.start_frequency_hz = 77e9;
  p.bandwidth_hz = 3.07e9;
  p.slope_hz_per_s = 60.012e12;
  p.chirp_duration_s = 98e-6;
  p.frame_period_s = 0.5e-3;
  p.adc_rate_hz = 5e6;
  p.adc_samples = 256;
  p.range_fft_size = 256;
  p.propagation_speed_mps = kSpeedOfLight;
  return p;
}

SensorProfile SensorProfile::acoustic() {
  SensorProfile p;
  p.name = "acoustic";
  p.start_frequency_hz = 18e3;
  p.bandwidth_hz = 4e3;
  p.chirp_duration_s = 10.67e-3;
  p.slope_hz_per_s = p.bandwidth_hz / p.chirp_duration_s;
  p.adc_rate_hz = 48e3;
  p.adc_samples = 512;
  p.range_fft_size = 512;
  // Back-to-back chirps: one frame per 512 samples (93.75 Hz).
  p.frame_period_s = 512.0 / 48e3;
  p.propagation_speed_mps = kSpeedOfSound;
  return p;
}

SensorProfile SensorProfile::preset(const std::string& name) {
  if (name == "mmwave") return mmwave();
  if (name == "acoustic") return acoustic();
  throw ParameterError("unknown sensor preset: " + name);
}

void SensorProfile::validate() const {
  require(start_frequency_hz > 0.0 && bandwidth_hz > 0.0 && slope_hz_per_s > 0.0,
          "sensor frequencies and slope must be positive");
  require(chirp_duration_s > 0.0 && frame_period_s > 0.0, "chirp and frame periods must be positive");
  require(adc_rate_hz > 0.0 && adc_samples > 0, "ADC rate and sample count must be positive");
  require(range_fft_size >= adc_samples, "range FFT size must be >= ADC samples");
  require(propagation_speed_mps > 0.0, "propagation speed must be positive");
  const double adc_time = static_cast<double>(adc_samples) / adc_rate_hz;
  require(adc_time <= chirp_duration_s * (1.0 + 1e-3), "ADC window longer than the chirp");
  require(frame_period_s >= chirp_duration_s * (1.0 - 1e-3), "frame period shorter than the chirp");
}

double SensorProfile::effective_wavelength_m() const {
  const double mid = slope_hz_per_s * static_cast<double>(adc_samples - 1) / (2.0 * adc_rate_hz);
  return propagation_speed_mps / (start_frequency_hz + mid);
}

void Scene::validate(const SensorProfile& profile) const {
  require(base_distance_m > 0.0, "base distance must be positive");
  require(amplitude_scale >= 0.0, "amplitude scale must be non-negative");
  displacement.validate();
  double peak = 0.0;
  for (double v : displacement.samples) peak = std::max(peak, std::abs(v));
  require(base_distance_m + peak * 1e-3 < profile.max_range_m(),
          "target outside the unambiguous range");
  for (const auto& r : reflectors) {
    require(r.distance_m > 0.0 && r.distance_m < profile.max_range_m(),
            "reflector outside the unambiguous range");
    if (!r.motion.samples.empty()) r.motion.validate();
  }
}

std::size_t frame_count(const SensorProfile& profile, const Scene& scene) {
  return static_cast<std::size_t>(
      std::floor(scene.displacement.duration() / profile.frame_period_s + 1e-9));
}

namespace {

void add_echo(const SensorProfile& prof, double distance_m, double amplitude,
              std::span<std::complex<double>> out) {
  const double c = prof.propagation_speed_mps;
  const double beat = prof.beat_frequency_hz(distance_m);
  const double phase0 = std::fmod(4.0 * std::numbers::pi * prof.start_frequency_hz * distance_m / c,
                                  2.0 * std::numbers::pi);
  const std::complex<double> step = std::polar(1.0, 2.0 * std::numbers::pi * beat / prof.adc_rate_hz);
  std::complex<double> z = std::polar(amplitude, phase0);
  for (auto& v : out) {
    v += z;
    z *= step;
  }
}

}  // namespace

void simulate_frame(const SensorProfile& profile, const Scene& scene, std::uint64_t seed,
                    std::size_t index, std::span<std::complex<double>> out) {
  std::fill(out.begin(), out.end(), std::complex<double>{});
  const double t = static_cast<double>(index) * profile.frame_period_s;
  const double d = scene.base_distance_m + scene.displacement.at(t) * 1e-3;
  add_echo(profile, d, scene.amplitude_scale, out);
  for (const auto& r : scene.reflectors) {
    const double rd = r.distance_m + (r.motion.samples.empty() ? 0.0 : r.motion.at(t) * 1e-3);
    add_echo(profile, rd, r.amplitude, out);
  }
  if (scene.snr_db) {
    // Fixed noise floor: snr_db refers to a unit-amplitude echo.
    const double noise_power = std::pow(10.0, -*scene.snr_db / 10.0);
    Rng rng(derive_seed(seed, index));
    std::normal_distribution<double> n(0.0, std::sqrt(noise_power / 2.0));
    for (auto& v : out) {
      const double re = n(rng);
      const double im = n(rng);
      v += std::complex<double>(re, im);
    }
  }
}

ComplexMatrix simulate_frames(const SensorProfile& profile, const Scene& scene,
                              std::uint64_t seed, std::size_t frames) {
  profile.validate();
  scene.validate(profile);
  const std::size_t available = frame_count(profile, scene);
  if (frames == 0) frames = available;
  require(frames >= 1 && frames <= available, "displacement signal too short for the requested frames");

  ComplexMatrix out(frames, profile.adc_samples);
  std::vector<std::complex<double>> row(profile.adc_samples);
  for (std::size_t i = 0; i < frames; ++i) {
    simulate_frame(profile, scene, seed, i, row);
    auto dst = out.row(i);
    for (std::size_t k = 0; k < row.size(); ++k) dst[k] = std::complex<float>(row[k]);
  }
  return out;
}

ComplexMatrix range_fft(const ComplexMatrix& frames, const SensorProfile& profile) {
  require(frames.cols <= profile.range_fft_size, "frame length exceeds range FFT size");
  const auto window = dsp::hann_window(frames.cols);
  dsp::Fft plan(profile.range_fft_size);
  ComplexMatrix out(frames.rows, profile.range_fft_size);
  std::vector<dsp::cplx> in(frames.cols);
  std::vector<dsp::cplx> spec(profile.range_fft_size);
  for (std::size_t r = 0; r < frames.rows; ++r) {
    const auto src = frames.row(r);
    for (std::size_t k = 0; k < frames.cols; ++k) in[k] = dsp::cplx(src[k]) * window[k];
    plan.execute(in, spec);
    auto dst = out.row(r);
    for (std::size_t k = 0; k < spec.size(); ++k) dst[k] = std::complex<float>(spec[k]);
  }
  return out;
}

BinSelection select_bin(const ComplexMatrix& rp) {
  require(rp.rows >= 1 && rp.cols >= 2, "range profiles need >= 1 frame and >= 2 bins");
  std::vector<std::complex<double>> mean(rp.cols);
  std::vector<double> power(rp.cols, 0.0);
  for (std::size_t r = 0; r < rp.rows; ++r) {
    const auto row = rp.row(r);
    for (std::size_t b = 0; b < rp.cols; ++b) {
      const std::complex<double> z(row[b]);
      mean[b] += z;
      power[b] += std::norm(z);
    }
  }
  const auto n = static_cast<double>(rp.rows);
  std::vector<double> var(rp.cols, 0.0);
  for (std::size_t b = 0; b < rp.cols; ++b) {
    mean[b] /= n;
    power[b] /= n;
    var[b] = std::max(0.0, power[b] - std::norm(mean[b]));
  }

  std::size_t best = 1;
  for (std::size_t b = 2; b < rp.cols; ++b) {
    if (var[b] > var[best]) best = b;
  }
  std::vector<double> sorted(var.begin() + 1, var.end());
  std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2),
                   sorted.end());
  const double median = sorted[sorted.size() / 2];
  std::size_t strongest = 1;
  for (std::size_t b = 2; b < rp.cols; ++b) {
    if (power[b] > power[strongest]) strongest = b;
  }
  // Relative floor so float rounding on a static scene doesn't count as motion.
  if (var[best] > 4.0 * median && var[best] > 1e-9 * power[strongest]) return {best, false};
  return {strongest, true};
}

void unwrap_phase(std::vector<double>& phase) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  if (phase.empty()) return;
  double offset = 0.0;
  double prev_raw = phase.front();
  for (std::size_t i = 1; i < phase.size(); ++i) {
    const double raw = phase[i];
    offset -= two_pi * std::round((raw - prev_raw) / two_pi);
    phase[i] = raw + offset;
    prev_raw = raw;
  }
}

PhaseSeries extract_phase(const ComplexMatrix& rp, std::size_t bin, double frame_rate_hz) {
  require(bin < rp.cols, "range bin out of bounds");
  require(frame_rate_hz > 0.0, "frame rate must be positive");
  PhaseSeries ps;
  ps.sample_rate = frame_rate_hz;
  ps.range_bin = bin;
  ps.phase.resize(rp.rows);
  for (std::size_t r = 0; r < rp.rows; ++r) {
    ps.phase[r] = std::arg(std::complex<double>(rp.row(r)[bin]));
  }
  unwrap_phase(ps.phase);
  if (!ps.phase.empty()) {
    const double mu = std::accumulate(ps.phase.begin(), ps.phase.end(), 0.0) /
                      static_cast<double>(ps.phase.size());
    for (double& v : ps.phase) v -= mu;
  }
  ps.unwrapped = true;
  return ps;
}

DisplacementSignal displacement_from_phase(const PhaseSeries& phase, const SensorProfile& profile,
                                           SignalLabel label) {
  const double scale = profile.effective_wavelength_m() / (4.0 * std::numbers::pi) * 1e3;
  DisplacementSignal out{std::vector<double>(phase.phase.size()), phase.sample_rate, label};
  for (std::size_t i = 0; i < phase.phase.size(); ++i) out.samples[i] = scale * phase.phase[i];
  return out;
}

SensedDisplacement sense_displacement(const SensorProfile& profile, const Scene& scene,
                                      std::uint64_t seed) {
  profile.validate();
  scene.validate(profile);
  const std::size_t frames = frame_count(profile, scene);
  require(frames >= 1, "displacement signal shorter than one frame");

  const auto window = dsp::hann_window(profile.adc_samples);
  dsp::Fft plan(profile.range_fft_size);
  ComplexMatrix profiles(frames, profile.range_fft_size);
  std::vector<dsp::cplx> row(profile.adc_samples);
  std::vector<dsp::cplx> spec(profile.range_fft_size);
  for (std::size_t i = 0; i < frames; ++i) {
    simulate_frame(profile, scene, seed, i, row);
    // Round through complex64 so the result matches the two-step path.
    for (std::size_t k = 0; k < row.size(); ++k) {
      row[k] = dsp::cplx(std::complex<float>(row[k])) * window[k];
    }
    plan.execute(row, spec);
    auto dst = profiles.row(i);
    for (std::size_t k = 0; k < spec.size(); ++k) dst[k] = std::complex<float>(spec[k]);
  }
  SensedDisplacement out;
  out.bin = select_bin(profiles);
  const auto phase = extract_phase(profiles, out.bin.bin, profile.frame_rate_hz());
  out.displacement = displacement_from_phase(phase, profile, scene.displacement.label);
  return out;
}

}  // namespace heartcloak
