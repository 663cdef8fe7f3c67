#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "heartcloak/dsp/spectral.hpp"
#include "heartcloak/error.hpp"
#include "heartcloak/extraction.hpp"
#include "heartcloak/signal_model.hpp"
#include "oracles.hpp"

using namespace heartcloak;

namespace {

VitalSignSource clean(double bpm) {
  VitalSignSource s;
  s.heart_rate_bpm = bpm;
  s.jitter_std = 0.0;
  return s;
}

DisplacementSignal as_signal(const PulseTrain& t) {
  return {std::vector<double>(t.samples.begin(), t.samples.end()), t.sample_rate,
          SignalLabel::decoy};
}

// In-band local maxima of the DTFT magnitude above frac * global max.
std::vector<double> band_peaks(const DisplacementSignal& s, double lo_bpm, double hi_bpm,
                               double frac) {
  std::vector<double> f, m;
  std::vector<double> x(s.samples);
  double mean = 0;
  for (double v : x) mean += v;
  mean /= static_cast<double>(x.size());
  for (double& v : x) v -= mean;
  // Hann taper keeps a strong line's leakage from masking weaker ones.
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    x[i] *= 0.5 - 0.5 * std::cos(2.0 * oracle::kPi * static_cast<double>(i) / n);
  for (double b = lo_bpm; b <= hi_bpm; b += 0.25) {
    f.push_back(b);
    m.push_back(oracle::dtft_magnitude(x, s.sample_rate, b / 60.0));
  }
  const double top = *std::max_element(m.begin(), m.end());
  std::vector<double> out;
  for (std::size_t i = 1; i + 1 < m.size(); ++i)
    if (m[i] > m[i - 1] && m[i] >= m[i + 1] && m[i] > frac * top) out.push_back(f[i]);
  return out;
}

}  // namespace

TEST(SynthesizeHeartbeat, SixtyBpmPeaksAtOneHertz) {
  Rng rng(1);
  const auto s = synthesize_heartbeat(clean(60), 30.0, 2000.0, rng);
  EXPECT_EQ(s.size(), 60000u);
  EXPECT_EQ(s.label, SignalLabel::true_signal);
  // Decimate for the direct DTFT scan.
  std::vector<double> d;
  for (std::size_t i = 0; i < s.size(); i += 8) d.push_back(s.samples[i]);
  EXPECT_NEAR(oracle::dtft_argmax(d, 250.0, 0.8, 2.0, 0.001), 1.0, 0.002);
}

TEST(SynthesizeHeartbeat, MeanRrMatchesRate) {
  Rng rng(2);
  auto src = clean(66);
  const auto s = synthesize_heartbeat(src, 30.0, 2000.0, rng);
  const auto peaks = find_prominent_peaks(s.samples, 0.25);
  ASSERT_GE(peaks.size(), 30u);
  const double mean_rr = static_cast<double>(peaks.back() - peaks.front()) /
                         static_cast<double>(peaks.size() - 1) / 2000.0;
  EXPECT_NEAR(mean_rr, 60.0 / 66.0, 1.0 / 2000.0);
}

TEST(SynthesizeHeartbeat, BreathingAddsSecondLine) {
  Rng rng(3);
  auto src = clean(75);
  src.breathing_enabled = true;
  src.breathing_rate_bpm = 15;
  src.breathing_amplitude_mm = 4;
  const auto s = synthesize_heartbeat(src, 30.0, 200.0, rng);
  const double amp_b = dsp::line_amplitude(s.samples, 200.0, 0.25);
  const double amp_h = dsp::line_amplitude(s.samples, 200.0, 1.25);
  EXPECT_NEAR(amp_b, 4.0, 0.1);
  EXPECT_GT(amp_h, 0.05);
  // Both are local maxima of the spectrum.
  const auto peaks = band_peaks(s, 6, 120, 0.005);
  auto has = [&](double bpm) {
    return std::any_of(peaks.begin(), peaks.end(), [&](double f) { return std::abs(f - bpm) <= 0.5; });
  };
  EXPECT_TRUE(has(15.0));
  EXPECT_TRUE(has(75.0));
}

TEST(SynthesizeHeartbeat, ZeroJitterIsPeriodic) {
  Rng rng(4);
  const double fs = 500.0;
  const auto s = synthesize_heartbeat(clean(72), 20.0, fs, rng);
  const double lag_s = 60.0 / 72.0;
  std::size_t best = 0;
  double best_v = -1e300;
  for (std::size_t lag = static_cast<std::size_t>(0.5 * lag_s * fs);
       lag < static_cast<std::size_t>(1.5 * lag_s * fs); ++lag) {
    double acc = 0;
    for (std::size_t i = 0; i + lag < s.size(); ++i) acc += s.samples[i] * s.samples[i + lag];
    acc /= static_cast<double>(s.size() - lag);
    if (acc > best_v) best_v = acc, best = lag;
  }
  EXPECT_LE(std::abs(static_cast<double>(best) - lag_s * fs), 1.0);
}

TEST(SynthesizeHeartbeat, RejectsBadParameters) {
  Rng rng(5);
  EXPECT_THROW(synthesize_heartbeat(clean(60), 0.0, 2000.0, rng), ParameterError);
  EXPECT_THROW(synthesize_heartbeat(clean(60), 10.0, 30.0, rng), ParameterError);
  auto bad = clean(60);
  bad.jitter_std = 0.2;
  EXPECT_THROW(synthesize_heartbeat(bad, 10.0, 2000.0, rng), ParameterError);
  bad = clean(20);
  EXPECT_THROW(synthesize_heartbeat(bad, 10.0, 2000.0, rng), ParameterError);
}

TEST(PulseTrain, SixtyBpmGivesOnePulsePerSecond) {
  PulseTrainSpec spec;
  spec.decoy_frequencies_bpm = {60};
  const auto t = generate_pulse_train(spec);
  EXPECT_EQ(t.samples.size(), 60000u);
  EXPECT_EQ(t.pulses_per_base, 10u);
  EXPECT_EQ(t.pulse_count(), 30u);
  // 25 ms pulses at 2000 Hz.
  std::size_t ones = 0;
  for (auto v : t.samples) ones += v;
  EXPECT_EQ(ones, 30u * 50u);
}

TEST(PulseTrain, CountMatchesBruteForceScan) {
  PulseTrainSpec spec;
  spec.decoy_frequencies_bpm = {53, 79, 101};
  const auto t = generate_pulse_train(spec);
  EXPECT_EQ(t.pulses_per_base, oracle::count_upward_crossings({53, 79, 101}, 10.0, 2000.0));
}

TEST(PulseTrain, CountMatchesScanForRandomSets) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> f(45.0, 180.0);
  std::uniform_int_distribution<int> p(1, 5);
  for (int trial = 0; trial < 100; ++trial) {
    PulseTrainSpec spec;
    spec.base_duration_s = 10.0;
    spec.repetitions = 1;
    const int n = p(rng);
    for (int i = 0; i < n; ++i) spec.decoy_frequencies_bpm.push_back(f(rng));
    const auto t = generate_pulse_train(spec);
    EXPECT_EQ(t.pulses_per_base,
              oracle::count_upward_crossings(spec.decoy_frequencies_bpm, 10.0, 2000.0))
        << trial;
  }
}

TEST(PulseTrain, SpectrogramRidgesAtDecoys) {
  PulseTrainSpec spec;
  spec.decoy_frequencies_bpm = {53, 79, 101};
  const auto t = generate_pulse_train(spec);
  const auto sg = dsp::spectrogram(as_signal(t).samples, t.sample_rate);
  const auto ridges = dsp::ridge_frequencies(sg, 40.0, 200.0);
  for (double f : spec.decoy_frequencies_bpm) {
    EXPECT_TRUE(std::any_of(ridges.begin(), ridges.end(),
                            [&](double r) { return std::abs(r - f) <= 6.0; }))
        << f;
  }
}

TEST(PulseTrain, RejectsInvalidSpecs) {
  PulseTrainSpec spec;
  EXPECT_THROW(generate_pulse_train(spec), ParameterError);
  spec.decoy_frequencies_bpm = {-5};
  EXPECT_THROW(generate_pulse_train(spec), ParameterError);
  spec.decoy_frequencies_bpm = {3000};
  EXPECT_THROW(generate_pulse_train(spec), ParameterError);
}

TEST(Actuator, KernelShape) {
  ActuatorKernel k;
  const auto v = k.render(2000.0);
  EXPECT_EQ(v.size(), 50u + 100u);
  EXPECT_DOUBLE_EQ(*std::max_element(v.begin(), v.end()), 0.5);
  const auto peak = std::max_element(v.begin(), v.end()) - v.begin();
  EXPECT_EQ(peak, 49);
  for (std::size_t i = 1; i <= 49; ++i) EXPECT_GT(v[i], v[i - 1]);
  for (std::size_t i = 50; i < v.size(); ++i) EXPECT_LE(v[i], v[i - 1]);
  EXPECT_NEAR(v.back(), 0.0, 1e-12);
  for (double x : v) EXPECT_GE(x, 0.0);
}

TEST(Actuator, ZeroTrainGivesZero) {
  PulseTrain t;
  t.sample_rate = 2000;
  t.samples.assign(4000, 0);
  const auto d = actuate(t, {});
  EXPECT_EQ(d.label, SignalLabel::decoy);
  for (double v : d.samples) EXPECT_EQ(v, 0.0);
}

TEST(Actuator, SinglePulseSingleBump) {
  PulseTrain t;
  t.sample_rate = 2000;
  t.samples.assign(4000, 0);
  std::fill(t.samples.begin() + 1000, t.samples.begin() + 1050, 1);
  const auto d = actuate(t, {});
  EXPECT_DOUBLE_EQ(*std::max_element(d.samples.begin(), d.samples.end()), 0.5);
  std::size_t support = 0;
  for (double v : d.samples) support += v > 1e-12;
  EXPECT_NEAR(static_cast<double>(support), 0.075 * 2000, 2.0);
}

TEST(Actuator, OverlapSaturates) {
  PulseTrain t;
  t.sample_rate = 2000;
  t.samples.assign(400, 0);
  for (std::size_t s : {100u, 104u, 108u, 112u}) t.samples[s] = 1;
  const auto d = actuate(t, {});
  EXPECT_LE(*std::max_element(d.samples.begin(), d.samples.end()), 0.75 + 1e-12);
}

TEST(Actuator, PreservesDecoyRidges) {
  PulseTrainSpec spec;
  spec.decoy_frequencies_bpm = {53, 79, 101};
  const auto t = generate_pulse_train(spec);
  const auto d = actuate(t, {});
  const auto a = dsp::ridge_frequencies(dsp::spectrogram(as_signal(t).samples, 2000.0), 40, 200);
  const auto b = dsp::ridge_frequencies(dsp::spectrogram(d.samples, 2000.0), 40, 200);
  for (double f : spec.decoy_frequencies_bpm) {
    auto near = [&](const std::vector<double>& r) {
      return std::any_of(r.begin(), r.end(), [&](double x) { return std::abs(x - f) <= 6.0; });
    };
    EXPECT_TRUE(near(a)) << f;
    EXPECT_TRUE(near(b)) << f;
  }
}

// Decoy sets with pairwise separation >= 12 BPM: the 6 BPM spectrogram of the
// actuated signal has a ridge within one bin of every decoy in nearly all sets.
TEST(Actuator, SpectralFidelityProperty) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> f(45.0, 180.0);
  int pass = 0;
  const int sets = 100;
  for (int s = 0; s < sets; ++s) {
    std::vector<double> freqs;
    while (freqs.size() < 3) {
      const double c = f(rng);
      if (std::all_of(freqs.begin(), freqs.end(), [&](double x) { return std::abs(x - c) >= 12.0; }))
        freqs.push_back(c);
    }
    PulseTrainSpec spec;
    spec.decoy_frequencies_bpm = freqs;
    spec.base_sample_rate = 500;
    const auto d = actuate(generate_pulse_train(spec), {});
    const auto r = dsp::ridge_frequencies(dsp::spectrogram(d.samples, 500.0), 30, 220);
    const bool ok = std::all_of(freqs.begin(), freqs.end(), [&](double x) {
      return std::any_of(r.begin(), r.end(), [&](double y) { return std::abs(x - y) <= 6.0; });
    });
    pass += ok;
  }
  EXPECT_GE(pass, 90);
}

TEST(Superimpose, IdentityInverseAndAlgebra) {
  Rng rng(9);
  const auto x = synthesize_heartbeat(clean(66), 10.0, 500.0, rng);
  const auto y = synthesize_heartbeat(clean(80), 10.0, 500.0, rng);
  const auto z = synthesize_heartbeat(clean(95), 10.0, 500.0, rng);
  DisplacementSignal zero{std::vector<double>(x.size(), 0.0), 500.0, SignalLabel::decoy};
  EXPECT_EQ(superimpose(x, zero).samples, x.samples);
  EXPECT_EQ(superimpose(x, zero).label, SignalLabel::composite);
  for (double v : superimpose(x, scaled(x, -1.0)).samples) EXPECT_EQ(v, 0.0);
  const auto xy = superimpose(x, y), yx = superimpose(y, x);
  const auto l = superimpose(superimpose(x, y), z), r = superimpose(x, superimpose(y, z));
  for (std::size_t i = 0; i < x.size(); ++i) {
    EXPECT_EQ(xy.samples[i], yx.samples[i]);
    EXPECT_NEAR(l.samples[i], r.samples[i], 1e-12);
  }
}

TEST(Superimpose, RejectsMismatch) {
  DisplacementSignal a{std::vector<double>(10, 0.0), 100.0, SignalLabel::true_signal};
  DisplacementSignal b{std::vector<double>(10, 0.0), 200.0, SignalLabel::decoy};
  EXPECT_THROW(superimpose(a, b), ParameterError);
  b.sample_rate = 100.0;
  b.samples.resize(11);
  EXPECT_THROW(superimpose(a, b), ParameterError);
}

TEST(Superimpose, CompositeHasAllFourComponents) {
  Rng rng(10);
  const double fs = 250.0;
  const auto truth = synthesize_heartbeat(clean(66), 30.0, fs, rng);
  PulseTrainSpec spec;
  spec.decoy_frequencies_bpm = {53, 79, 101};
  spec.base_sample_rate = fs;
  const auto decoy = actuate(generate_pulse_train(spec), {});
  const double g = decoy_amplitude_gain(truth, 66, decoy, spec.decoy_frequencies_bpm);
  const auto c = superimpose(truth, scaled(decoy, g));
  const auto peaks = band_peaks(c, 48, 120, 0.3);
  for (double f : {53.0, 66.0, 79.0, 101.0}) {
    EXPECT_TRUE(std::any_of(peaks.begin(), peaks.end(), [&](double p) { return std::abs(p - f) <= 1.0; }))
        << f;
  }
}

TEST(DecoyGain, EqualizesLineAmplitudes) {
  Rng rng(12);
  const double fs = 250.0;
  const auto truth = synthesize_heartbeat(clean(70), 30.0, fs, rng);
  PulseTrainSpec spec;
  spec.decoy_frequencies_bpm = {55, 90, 120};
  spec.base_sample_rate = fs;
  const auto decoy = actuate(generate_pulse_train(spec), {});
  const double g = decoy_amplitude_gain(truth, 70, decoy, spec.decoy_frequencies_bpm, 2.0);
  const auto d = scaled(decoy, g);
  double mean = 0;
  for (double f : spec.decoy_frequencies_bpm) mean += dsp::line_amplitude(d.samples, fs, f / 60.0);
  mean /= 3.0;
  EXPECT_NEAR(mean, 2.0 * dsp::line_amplitude(truth.samples, fs, 70 / 60.0), 1e-9);
}

TEST(DisplacementSignal, InterpolationAndResample) {
  DisplacementSignal s{{0.0, 1.0, 4.0}, 2.0, SignalLabel::composite};
  EXPECT_DOUBLE_EQ(s.duration(), 1.5);
  EXPECT_DOUBLE_EQ(s.at(0.25), 0.5);
  EXPECT_DOUBLE_EQ(s.at(-1.0), 0.0);
  EXPECT_DOUBLE_EQ(s.at(9.0), 4.0);
  const auto r = resample(s, 4.0, 1.0);
  ASSERT_EQ(r.size(), 4u);
  EXPECT_DOUBLE_EQ(r.samples[1], 0.5);
  EXPECT_DOUBLE_EQ(r.samples[3], 2.5);
  s.samples[1] = std::nan("");
  EXPECT_THROW(s.validate(), ParameterError);
}
