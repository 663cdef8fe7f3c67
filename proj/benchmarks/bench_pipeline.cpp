#include <benchmark/benchmark.h>

#include <cmath>
#include <numbers>

#include "heartcloak/dsp/iir.hpp"
#include "heartcloak/extraction.hpp"
#include "heartcloak/fmcw.hpp"
#include "heartcloak/privacy_eval.hpp"

using namespace heartcloak;

namespace {

DisplacementSignal sine(double seconds, double fs, double hz = 1.1, double amp = 0.5) {
  DisplacementSignal s{std::vector<double>(static_cast<std::size_t>(seconds * fs)), fs,
                       SignalLabel::composite};
  for (std::size_t i = 0; i < s.size(); ++i)
    s.samples[i] = amp * std::sin(2 * std::numbers::pi * hz * static_cast<double>(i) / fs);
  return s;
}

SensorProfile profile_arg(const benchmark::State& st) {
  return st.range(0) == 0 ? SensorProfile::mmwave() : SensorProfile::acoustic();
}

}  // namespace

static void BM_SimulateFrames(benchmark::State& st) {
  const auto prof = profile_arg(st);
  Scene s;
  s.displacement = sine(1.0, prof.frame_rate_hz());
  for (auto _ : st) benchmark::DoNotOptimize(simulate_frames(prof, s, 1));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(frame_count(prof, s)));
}
BENCHMARK(BM_SimulateFrames)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_RangeFft(benchmark::State& st) {
  const auto prof = profile_arg(st);
  Scene s;
  s.displacement = sine(1.0, prof.frame_rate_hz());
  const auto frames = simulate_frames(prof, s, 1);
  for (auto _ : st) benchmark::DoNotOptimize(range_fft(frames, prof));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(frames.rows));
}
BENCHMARK(BM_RangeFft)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_SenseDisplacement(benchmark::State& st) {
  const auto prof = profile_arg(st);
  Scene s;
  s.displacement = sine(10.0, prof.frame_rate_hz());
  for (auto _ : st) benchmark::DoNotOptimize(sense_displacement(prof, s, 1));
}
BENCHMARK(BM_SenseDisplacement)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

static void BM_Filtfilt(benchmark::State& st) {
  const double fs = static_cast<double>(st.range(0));
  const auto x = sine(30.0, fs);
  const auto sos = dsp::butterworth_bandpass(4, 0.8, 2.0, fs);
  for (auto _ : st) benchmark::DoNotOptimize(sos.filtfilt(x.samples));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(x.size()));
}
BENCHMARK(BM_Filtfilt)->Arg(250)->Arg(2000)->Unit(benchmark::kMicrosecond);

static void BM_EstimateHrFft(benchmark::State& st) {
  const auto x = bandpass(sine(30.0, static_cast<double>(st.range(0))));
  for (auto _ : st) benchmark::DoNotOptimize(estimate_hr_fft(x));
}
BENCHMARK(BM_EstimateHrFft)->Arg(250)->Arg(2000)->Unit(benchmark::kMicrosecond);

static void BM_AuthorizedEstimate(benchmark::State& st) {
  const auto x = sine(30.0, 250.0);
  const auto key = gen(static_cast<int>(st.range(0)), default_trial_space(), 3);
  for (auto _ : st) benchmark::DoNotOptimize(estimate(x, ObserverMode::authorized, &key));
}
BENCHMARK(BM_AuthorizedEstimate)->Arg(1)->Arg(3)->Arg(8)->Unit(benchmark::kMicrosecond);

static void BM_AbstractGame(benchmark::State& st) {
  AbstractGameConfig cfg;
  cfg.p = static_cast<int>(st.range(0));
  cfg.trials = 1u << 16;
  cfg.workers = 1;
  for (auto _ : st) benchmark::DoNotOptimize(run_abstract_game(cfg));
  st.SetItemsProcessed(st.iterations() * static_cast<std::int64_t>(cfg.trials));
}
BENCHMARK(BM_AbstractGame)->Arg(1)->Arg(3)->Arg(8)->Unit(benchmark::kMillisecond);

static void BM_DisplacementTrial(benchmark::State& st) {
  TrialConfig cfg;
  cfg.observation = ObservationModel::displacement;
  cfg.synthesis_rate_hz = 250.0;
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(synthesize_trial(cfg, i++));
}
BENCHMARK(BM_DisplacementTrial)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
