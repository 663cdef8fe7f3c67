#include "commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <ostream>
#include <sstream>

#include "heartcloak/dsp/spectral.hpp"
#include "heartcloak/error.hpp"
#include "heartcloak/extraction.hpp"
#include "heartcloak/io.hpp"
#include "heartcloak/privacy_eval.hpp"

namespace heartcloak::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v, const char* format = "%.6f") {
  if (std::isnan(v)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, format, v);
  return buf;
}

std::string join_bpm(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i], "%.3f");
  return s + "]";
}

// Strongest ridges of the time-averaged spectrogram, strongest first.
std::vector<double> strongest_ridges(const dsp::Spectrogram& sg, std::size_t count) {
  const auto profile = sg.mean_profile();
  auto ridges = dsp::ridge_frequencies(sg, 40.0, 200.0);
  auto level = [&](double bpm) {
    const auto it = std::find(sg.frequency_bpm.begin(), sg.frequency_bpm.end(), bpm);
    return profile[static_cast<std::size_t>(it - sg.frequency_bpm.begin())];
  };
  std::stable_sort(ridges.begin(), ridges.end(),
                   [&](double a, double b) { return level(a) > level(b); });
  if (ridges.size() > count) ridges.resize(count);
  return ridges;
}

std::string estimate_row(std::size_t trial, const HeartRateEstimate& e, double truth) {
  const double err = std::isfinite(truth) && std::isfinite(e.bpm) ? std::abs(e.bpm - truth)
                                                                   : std::nan("");
  std::ostringstream os;
  os << trial << ',' << to_string(e.mode) << ',' << to_string(e.method) << ',' << fmt(e.bpm)
     << ',' << fmt(e.confidence) << ',' << fmt(truth) << ',' << fmt(err) << '\n';
  return os.str();
}

DisplacementSignal pulse_train_signal(const PulseTrain& train) {
  DisplacementSignal s;
  s.sample_rate = train.sample_rate;
  s.label = SignalLabel::decoy;
  s.samples.assign(train.samples.begin(), train.samples.end());
  return s;
}

}  // namespace

ScenarioConfig resolve_scenario(const GlobalOptions& g) {
  ScenarioConfig c = g.config ? load_scenario(*g.config) : ScenarioConfig{};
  if (g.seed) c.seed = *g.seed;
  if (g.out) c.output_dir = *g.out;
  c.validate();
  return c;
}

FrequencySpace parse_space(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ':')) parts.push_back(item);
  require(parts.size() == 3 || parts.size() == 4,
          "space must be low:high:resolution[:distribution], got '" + text + "'");
  FrequencySpace s;
  try {
    s.low_bpm = std::stod(parts[0]);
    s.high_bpm = std::stod(parts[1]);
    s.resolution_bpm = std::stod(parts[2]);
  } catch (const std::exception&) {
    throw ParameterError("space bounds must be numbers, got '" + text + "'");
  }
  if (parts.size() == 4) s.distribution = distribution_from_string(parts[3]);
  s.validate();
  return s;
}

// ---------------------------------------------------------------------------

int cmd_keygen(const GlobalOptions& g, const KeygenOptions& o, std::ostream& out) {
  ScenarioConfig c = resolve_scenario(g);
  const int p = o.p.value_or(c.plan.p);
  require(p >= 1, "--p must be >= 1");
  const FrequencySpace space = o.space ? parse_space(*o.space) : c.plan.key_space;
  const ObfuscationKey key = gen(p, space, c.seed);
  const fs::path path = fs::path(c.output_dir) / "key.json";
  io::write_key(path, key);
  out << "key: " << join_bpm(key.frequencies_bpm()) << " BPM -> " << path.string() << '\n';
  out << "grid points N = " << space.size() << '\n';
  out << "random-guess success = " << fmt(guess_probability(p), "%.6g") << '\n';
  out << "collision bound = " << fmt(collision_bound(p, space.size()), "%.4e") << '\n';
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_simulate(const GlobalOptions& g, const SimulateOptions& o, std::ostream& out) {
  ScenarioConfig c = resolve_scenario(g);
  if (o.sensor) c.sensor = SensorProfile::preset(*o.sensor);
  if (o.duration_s) c.plan.duration_s = *o.duration_s;
  require(c.plan.duration_s > 0.0, "--duration must be positive");
  c.validate();

  std::optional<ObfuscationKey> fixed;
  if (o.key) fixed = io::read_key(*o.key);
  const int sets = fixed ? 1 : c.plan.key_sets;
  const double rate = c.pulse.base_sample_rate;

  for (int s = 0; s < sets; ++s) {
    const ObfuscationKey key =
        fixed ? *fixed : gen(std::max(c.plan.p, 1), c.plan.key_space, derive_seed(c.seed, s));
    const auto key_bpm = key.frequencies_bpm();
    Rng rng = make_rng(c.seed, 1000 + static_cast<std::uint64_t>(s));

    const auto truth = synthesize_heartbeat(c.vital, c.plan.duration_s, rate, rng);
    PulseTrainSpec spec = c.pulse;
    spec.decoy_frequencies_bpm = key_bpm;
    spec.repetitions = std::max(
        spec.repetitions, static_cast<int>(std::ceil(c.plan.duration_s / spec.base_duration_s - 1e-9)));
    PulseTrain train = generate_pulse_train(spec);
    train.samples.resize(truth.size(), 0);
    auto decoy = actuate(train, c.actuator);
    decoy.samples.resize(truth.size(), 0.0);
    const double gain = c.plan.decoy_amplitude_ratio > 0.0
                            ? decoy_amplitude_gain(truth, c.vital.heart_rate_bpm, decoy, key_bpm,
                                                   c.plan.decoy_amplitude_ratio)
                            : 0.0;
    decoy = scaled(decoy, gain);
    const auto composite = superimpose(truth, decoy);

    Scene scene;
    scene.base_distance_m = c.scene.base_distance_m;
    scene.displacement = composite;
    scene.amplitude_scale = c.scene.amplitude_scale;
    scene.snr_db = c.scene.snr_db;
    const auto frames = simulate_frames(c.sensor, scene, derive_seed(c.seed, 2000 + s));
    const auto profiles = range_fft(frames, c.sensor);
    const auto bin = select_bin(profiles);
    const auto phase = extract_phase(profiles, bin.bin, c.sensor.frame_rate_hz());
    const auto observed = displacement_from_phase(phase, c.sensor);

    const fs::path dir = fs::path(c.output_dir) / ("keyset_" + std::to_string(s));
    io::write_key(dir / "key.json", key);
    io::write_displacement_csv(dir / "composite_displacement.csv", composite);
    io::write_displacement_csv(dir / "observed_displacement.csv", observed);
    io::write_if_binary(dir / "if.bin", frames);
    const auto pulse_sg = dsp::spectrogram(pulse_train_signal(train).samples, rate);
    const auto observed_sg = dsp::spectrogram(observed.samples, observed.sample_rate);
    io::write_spectrogram(dir / "pulse_spectrogram.txt", pulse_sg);
    io::write_spectrogram(dir / "observed_spectrogram.txt", observed_sg);

    out << "keyset " << s << ": key " << join_bpm(key_bpm) << " BPM, heart rate "
        << fmt(c.vital.heart_rate_bpm, "%.3f") << " BPM\n"
        << "  " << c.sensor.name << ": " << frames.rows << " frames at "
        << fmt(c.sensor.frame_rate_hz(), "%.4f") << " Hz, range bin " << bin.bin
        << (bin.fallback ? " (fallback)" : "") << ", decoy gain " << fmt(gain, "%.4f") << '\n'
        << "  pulse-train ridges " << join_bpm(strongest_ridges(pulse_sg, key_bpm.size()))
        << ", observed ridges " << join_bpm(strongest_ridges(observed_sg, key_bpm.size() + 1))
        << '\n'
        << "  wrote " << dir.string() << '\n';
  }
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_extract(const GlobalOptions& g, const ExtractOptions& o, std::ostream& out) {
  ScenarioConfig c = resolve_scenario(g);
  require(o.mode == "both" || o.mode == "authorized" || o.mode == "unauthorized",
          "--mode must be both, authorized or unauthorized");
  const bool want_auth = o.mode != "unauthorized";
  require(!(o.mode == "authorized" && !o.key), "authorized mode requires --key");
  require(!o.input.empty(), "--input is required");
  if (o.sensor) c.sensor = SensorProfile::preset(*o.sensor);

  DisplacementSignal sig;
  if (o.input_is_if) {
    const auto frames = io::read_if_binary(o.input);
    require(frames.cols == c.sensor.adc_samples, "IF row length does not match the sensor profile");
    const auto profiles = range_fft(frames, c.sensor);
    const auto bin = select_bin(profiles);
    sig = displacement_from_phase(extract_phase(profiles, bin.bin, c.sensor.frame_rate_hz()),
                                  c.sensor);
  } else {
    sig = io::read_displacement_csv(o.input);
  }
  std::optional<ObfuscationKey> key;
  if (o.key) key = io::read_key(*o.key);

  const double truth = o.truth_bpm.value_or(std::nan(""));
  std::string csv = "trial_id,mode,method,bpm,confidence,ground_truth_bpm,abs_error\n";
  if (o.mode != "authorized") {
    const auto set = estimate_set(sig, ObserverMode::unauthorized, nullptr, c.extraction);
    csv += estimate_row(0, set.fft_peak, truth) + estimate_row(0, set.peak_rr, truth);
  }
  if (want_auth && key) {
    const auto set = estimate_set(sig, ObserverMode::authorized, &*key, c.extraction);
    csv += estimate_row(0, set.fft_peak, truth) + estimate_row(0, set.peak_rr, truth);
  }
  io::write_text(fs::path(c.output_dir) / "estimates.csv", csv);
  out << csv;
  return kOk;
}

// ---------------------------------------------------------------------------

int cmd_eval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out) {
  ScenarioConfig c = resolve_scenario(g);
  require(o.mode == "both" || o.mode == "authorized" || o.mode == "unauthorized",
          "--mode must be both, authorized or unauthorized");
  require(!(o.mode == "authorized" && !o.key), "authorized mode requires --key");
  if (o.sensor) c.sensor = SensorProfile::preset(*o.sensor);

  TrialConfig t = c.trial_config();
  if (o.trials) t.trials = *o.trials;
  if (o.p) t.p = *o.p;
  if (o.abstract_only) t.abstract_only = true;
  if (o.key) {
    t.fixed_key = io::read_key(*o.key);
    t.p = static_cast<int>(t.fixed_key->p());
    t.space = t.fixed_key->space;
  }

  const PrivacyReport rep = run_game(t);
  const auto files = write_report(rep, c.output_dir);
  out << "p = " << rep.p << ", N = " << rep.grid_points << ", trials = " << rep.trials << '\n'
      << "bayesian success = " << fmt(rep.empirical_success) << " (random guess "
      << fmt(rep.random_guess) << "), advantage = " << fmt(rep.advantage, "%.6g")
      << ", bound = " << fmt(rep.analytic_bound, "%.4e") << '\n'
      << "collision rate = " << fmt(rep.collision_rate, "%.6g") << '\n';
  if (!rep.abstract_only) {
    out << "spectral adversary success = " << fmt(rep.spectral_success) << '\n'
        << "MAE unauthorized = " << fmt(rep.mae_unauthorized, "%.3f")
        << " BPM, authorized = " << fmt(rep.mae_authorized, "%.3f")
        << " BPM, protection ratio = " << fmt(rep.protection_ratio, "%.3f")
        << ", paired p = " << fmt(rep.paired_p_value, "%.3g") << '\n';
  }
  out << "wrote " << files.summary.string() << " and " << files.trials_csv.string() << '\n';

  if (!g.check) return kOk;
  bool ok = true;
  for (const auto& r : run_invariant_suite(t, rep)) {
    out << (r.passed ? "PASS " : "FAIL ") << r.name << ": " << r.detail << '\n';
    ok = ok && r.passed;
  }
  return ok ? kOk : kFailure;
}

// ---------------------------------------------------------------------------

TrialConfig apply_sweep(TrialConfig t, const std::string& axis, double v) {
  if (axis == "snr") {
    t.snr_db = v;
  } else if (axis == "amplitude") {
    t.amplitude_scale = v;
  } else if (axis == "p") {
    require(v >= 0.0 && v == std::floor(v), "p sweep values must be non-negative integers");
    t.p = static_cast<int>(v);
  } else if (axis == "distance-proxy") {
    // Two-way spreading: echo amplitude ~ 1/d^2 against a fixed noise floor,
    // so the effective SNR drops 40 dB per decade of distance.
    require(v > 0.0, "distance-proxy values must be positive meters");
    const double ref = t.base_distance_m;
    t.amplitude_scale *= (ref / v) * (ref / v);
    t.base_distance_m = v;
  } else {
    throw ParameterError("unknown sweep axis '" + axis + "' (snr|amplitude|p|distance-proxy)");
  }
  return t;
}

int cmd_bench(const GlobalOptions& g, const BenchOptions& o, std::ostream& out) {
  ScenarioConfig c = resolve_scenario(g);
  require(!o.values.empty(), "--values must list at least one value");
  TrialConfig base = c.trial_config();
  if (o.trials) base.trials = *o.trials;
  apply_sweep(base, o.sweep, o.values.front());  // reject unknown axes before running

  std::string csv =
      "axis,value,p,trials,random_guess,empirical_success,advantage,analytic_bound,"
      "collision_rate,spectral_success,mae_unauthorized,mae_authorized,protection_ratio,"
      "paired_p_value\n";
  out << csv;
  for (double v : o.values) {
    const PrivacyReport r = run_game(apply_sweep(base, o.sweep, v));
    std::ostringstream row;
    row << o.sweep << ',' << fmt(v, "%.6g") << ',' << r.p << ',' << r.trials << ','
        << fmt(r.random_guess) << ',' << fmt(r.empirical_success) << ',' << fmt(r.advantage)
        << ',' << fmt(r.analytic_bound, "%.6e") << ',' << fmt(r.collision_rate) << ','
        << fmt(r.spectral_success) << ',' << fmt(r.mae_unauthorized) << ','
        << fmt(r.mae_authorized) << ',' << fmt(r.protection_ratio) << ','
        << fmt(r.paired_p_value, "%.6e") << '\n';
    csv += row.str();
    out << row.str() << std::flush;
  }
  io::write_text(fs::path(c.output_dir) / ("bench_" + o.sweep + ".csv"), csv);
  return kOk;
}

}  // namespace heartcloak::cli
