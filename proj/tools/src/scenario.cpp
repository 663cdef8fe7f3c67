#include "scenario.hpp"

#include <set>

#include <nlohmann/json.hpp>

#include "heartcloak/error.hpp"
#include "heartcloak/io.hpp"

namespace heartcloak::cli {

using json = nlohmann::ordered_json;

namespace {

// Reads fields of one JSON object and rejects anything it was not asked for.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    require(j_.is_object(), where() + " must be an object");
  }

  template <class T>
  Reader& get(const char* key, T& out) {
    seen_.insert(key);
    if (!j_.contains(key)) return *this;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      throw ParameterError(where(key) + " has the wrong type");
    }
    return *this;
  }

  template <class Fn>
  Reader& object(const char* key, Fn&& fn) {
    seen_.insert(key);
    if (j_.contains(key)) {
      Reader sub(j_.at(key), where(key));
      fn(sub);
      sub.finish();
    }
    return *this;
  }

  const json* raw(const char* key) {
    seen_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ParameterError("unknown field " + where(k.c_str()));
    }
  }

  std::string where(const char* key = nullptr) const {
    if (!key) return path_.empty() ? "config" : path_;
    return path_.empty() ? std::string(key) : path_ + "." + key;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void read_space(Reader& r, FrequencySpace& s) {
  std::string dist(to_string(s.distribution));
  r.get("low_bpm", s.low_bpm).get("high_bpm", s.high_bpm).get("resolution_bpm", s.resolution_bpm);
  r.get("distribution", dist);
  s.distribution = distribution_from_string(dist);
}

json write_space(const FrequencySpace& s) {
  return json{{"low_bpm", s.low_bpm},
              {"high_bpm", s.high_bpm},
              {"resolution_bpm", s.resolution_bpm},
              {"distribution", std::string(to_string(s.distribution))}};
}

void read_sensor(Reader& r, SensorProfile& p) {
  std::string preset;
  r.get("preset", preset);
  if (!preset.empty()) p = SensorProfile::preset(preset);
  r.get("name", p.name)
      .get("start_frequency_hz", p.start_frequency_hz)
      .get("bandwidth_hz", p.bandwidth_hz)
      .get("slope_hz_per_s", p.slope_hz_per_s)
      .get("chirp_duration_s", p.chirp_duration_s)
      .get("frame_period_s", p.frame_period_s)
      .get("adc_rate_hz", p.adc_rate_hz)
      .get("adc_samples", p.adc_samples)
      .get("range_fft_size", p.range_fft_size)
      .get("propagation_speed_mps", p.propagation_speed_mps);
}

json write_sensor(const SensorProfile& p) {
  for (const char* name : {"mmwave", "acoustic"}) {
    if (p == SensorProfile::preset(name)) return name;
  }
  return json{{"name", p.name},
              {"start_frequency_hz", p.start_frequency_hz},
              {"bandwidth_hz", p.bandwidth_hz},
              {"slope_hz_per_s", p.slope_hz_per_s},
              {"chirp_duration_s", p.chirp_duration_s},
              {"frame_period_s", p.frame_period_s},
              {"adc_rate_hz", p.adc_rate_hz},
              {"adc_samples", p.adc_samples},
              {"range_fft_size", p.range_fft_size},
              {"propagation_speed_mps", p.propagation_speed_mps}};
}

}  // namespace

void ScenarioConfig::validate() const {
  sensor.validate();
  vital.validate();
  actuator.validate();
  plan.key_space.validate();
  plan.trial_space.validate();
  require(plan.p >= 0, "plan.p must be >= 0");
  require(plan.trials >= 1, "plan.trials must be >= 1");
  require(plan.duration_s > 0.0, "plan.duration_s must be positive");
  require(plan.key_sets >= 1, "plan.key_sets must be >= 1");
  require(plan.synthesis_rate_hz > 0.0, "plan.synthesis_rate_hz must be positive");
  require(scene.base_distance_m > 0.0, "scene.base_distance_m must be positive");
  require(scene.amplitude_scale > 0.0, "scene.amplitude_scale must be positive");
  require(pulse.base_duration_s > 0.0 && pulse.base_sample_rate > 0.0,
          "pulse_train durations and rates must be positive");
  require(pulse.repetitions >= 1, "pulse_train.repetitions must be >= 1");
  require(!output_dir.empty(), "output_dir must not be empty");
}

TrialConfig ScenarioConfig::trial_config() const {
  TrialConfig t;
  t.p = plan.p;
  t.space = plan.trial_space;
  t.sensor = sensor;
  t.snr_db = scene.snr_db;
  t.amplitude_scale = scene.amplitude_scale;
  t.base_distance_m = scene.base_distance_m;
  t.duration_s = plan.duration_s;
  t.trials = plan.trials;
  t.seed = seed;
  t.decoy_rendering = plan.decoy_rendering;
  t.decoy_amplitude_ratio = plan.decoy_amplitude_ratio;
  t.min_separation_bpm = plan.min_separation_bpm;
  t.observation = plan.observation;
  t.synthesis_rate_hz = plan.synthesis_rate_hz;
  t.pulse_base_duration_s = plan.trial_pulse_base_duration_s;
  t.vital = vital;
  t.pulse_width_s = pulse.pulse_width_s;
  t.actuator = actuator;
  t.extraction = extraction;
  t.correct_tolerance_bpm = plan.correct_tolerance_bpm;
  t.abstract_only = plan.abstract_only;
  t.workers = plan.workers;
  return t;
}

ScenarioConfig parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw IoError(std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig c;
  Reader root(j, "");

  if (const json* s = root.raw("sensor")) {
    if (s->is_string()) {
      c.sensor = SensorProfile::preset(s->get<std::string>());
    } else {
      Reader r(*s, "sensor");
      read_sensor(r, c.sensor);
      r.finish();
    }
  }
  root.object("vital", [&](Reader& r) {
    auto& v = c.vital;
    r.get("heart_rate_bpm", v.heart_rate_bpm)
        .get("heartbeat_amplitude_mm", v.heartbeat_amplitude_mm)
        .get("pulse_width_s", v.pulse_width_s)
        .get("breathing_enabled", v.breathing_enabled)
        .get("breathing_rate_bpm", v.breathing_rate_bpm)
        .get("breathing_amplitude_mm", v.breathing_amplitude_mm)
        .get("jitter_std", v.jitter_std)
        .get("range_low_bpm", v.range_low_bpm)
        .get("range_high_bpm", v.range_high_bpm);
  });
  root.object("pulse_train", [&](Reader& r) {
    r.get("base_duration_s", c.pulse.base_duration_s)
        .get("base_sample_rate", c.pulse.base_sample_rate)
        .get("pulse_width_s", c.pulse.pulse_width_s)
        .get("repetitions", c.pulse.repetitions);
  });
  root.object("actuator", [&](Reader& r) {
    r.get("rise_time_s", c.actuator.rise_time_s)
        .get("fall_time_s", c.actuator.fall_time_s)
        .get("peak_displacement_mm", c.actuator.peak_displacement_mm)
        .get("saturation_factor", c.actuator.saturation_factor);
  });
  root.object("scene", [&](Reader& r) {
    r.get("base_distance_m", c.scene.base_distance_m)
        .get("snr_db", c.scene.snr_db)
        .get("amplitude_scale", c.scene.amplitude_scale);
  });
  root.object("plan", [&](Reader& r) {
    auto& p = c.plan;
    std::string rendering(to_string(p.decoy_rendering));
    std::string observation(to_string(p.observation));
    r.get("p", p.p)
        .get("trials", p.trials)
        .get("duration_s", p.duration_s)
        .get("key_sets", p.key_sets)
        .object("key_space", [&](Reader& s) { read_space(s, p.key_space); })
        .object("trial_space", [&](Reader& s) { read_space(s, p.trial_space); })
        .get("decoy_rendering", rendering)
        .get("decoy_amplitude_ratio", p.decoy_amplitude_ratio)
        .get("min_separation_bpm", p.min_separation_bpm)
        .get("observation", observation)
        .get("synthesis_rate_hz", p.synthesis_rate_hz)
        .get("trial_pulse_base_duration_s", p.trial_pulse_base_duration_s)
        .get("correct_tolerance_bpm", p.correct_tolerance_bpm)
        .get("workers", p.workers)
        .get("abstract_only", p.abstract_only);
    p.decoy_rendering = decoy_rendering_from_string(rendering);
    p.observation = observation_from_string(observation);
  });
  root.object("extraction", [&](Reader& r) {
    auto& e = c.extraction;
    r.object("band", [&](Reader& b) {
       b.get("low_hz", e.band.low_hz).get("high_hz", e.band.high_hz).get("order", e.band.order);
     })
        .get("notch_half_bandwidth_bpm", e.notch_half_bandwidth_bpm)
        .get("notch_order", e.notch_order)
        .get("prominence_factor", e.prominence_factor)
        .get("disagreement_bpm", e.disagreement_bpm)
        .get("min_duration_s", e.min_duration_s)
        .get("valid_low_bpm", e.valid_low_bpm)
        .get("valid_high_bpm", e.valid_high_bpm);
  });
  root.get("output_dir", c.output_dir).get("seed", c.seed);
  root.finish();
  c.validate();
  return c;
}

std::string serialize_scenario(const ScenarioConfig& c) {
  json j;
  j["sensor"] = write_sensor(c.sensor);
  const auto& v = c.vital;
  j["vital"] = {{"heart_rate_bpm", v.heart_rate_bpm},
                {"heartbeat_amplitude_mm", v.heartbeat_amplitude_mm},
                {"pulse_width_s", v.pulse_width_s},
                {"breathing_enabled", v.breathing_enabled},
                {"breathing_rate_bpm", v.breathing_rate_bpm},
                {"breathing_amplitude_mm", v.breathing_amplitude_mm},
                {"jitter_std", v.jitter_std},
                {"range_low_bpm", v.range_low_bpm},
                {"range_high_bpm", v.range_high_bpm}};
  j["pulse_train"] = {{"base_duration_s", c.pulse.base_duration_s},
                      {"base_sample_rate", c.pulse.base_sample_rate},
                      {"pulse_width_s", c.pulse.pulse_width_s},
                      {"repetitions", c.pulse.repetitions}};
  j["actuator"] = {{"rise_time_s", c.actuator.rise_time_s},
                   {"fall_time_s", c.actuator.fall_time_s},
                   {"peak_displacement_mm", c.actuator.peak_displacement_mm},
                   {"saturation_factor", c.actuator.saturation_factor}};
  j["scene"] = {{"base_distance_m", c.scene.base_distance_m},
                {"snr_db", c.scene.snr_db},
                {"amplitude_scale", c.scene.amplitude_scale}};
  const auto& p = c.plan;
  j["plan"] = {{"p", p.p},
               {"trials", p.trials},
               {"duration_s", p.duration_s},
               {"key_sets", p.key_sets},
               {"key_space", write_space(p.key_space)},
               {"trial_space", write_space(p.trial_space)},
               {"decoy_rendering", std::string(to_string(p.decoy_rendering))},
               {"decoy_amplitude_ratio", p.decoy_amplitude_ratio},
               {"min_separation_bpm", p.min_separation_bpm},
               {"observation", std::string(to_string(p.observation))},
               {"synthesis_rate_hz", p.synthesis_rate_hz},
               {"trial_pulse_base_duration_s", p.trial_pulse_base_duration_s},
               {"correct_tolerance_bpm", p.correct_tolerance_bpm},
               {"workers", p.workers},
               {"abstract_only", p.abstract_only}};
  const auto& e = c.extraction;
  j["extraction"] = {
      {"band", {{"low_hz", e.band.low_hz}, {"high_hz", e.band.high_hz}, {"order", e.band.order}}},
      {"notch_half_bandwidth_bpm", e.notch_half_bandwidth_bpm},
      {"notch_order", e.notch_order},
      {"prominence_factor", e.prominence_factor},
      {"disagreement_bpm", e.disagreement_bpm},
      {"min_duration_s", e.min_duration_s},
      {"valid_low_bpm", e.valid_low_bpm},
      {"valid_high_bpm", e.valid_high_bpm}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j.dump(2) + "\n";
}

ScenarioConfig load_scenario(const std::string& path) { return parse_scenario(io::read_text(path)); }

}  // namespace heartcloak::cli
