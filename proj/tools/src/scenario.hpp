#pragma once

#include <cstdint>
#include <string>

#include "heartcloak/fmcw.hpp"
#include "heartcloak/obfuscation.hpp"
#include "heartcloak/privacy_eval.hpp"
#include "heartcloak/signal_model.hpp"

namespace heartcloak::cli {

struct SceneSettings {
  double base_distance_m{0.30};
  double snr_db{20.0};
  double amplitude_scale{1.0};
  bool operator==(const SceneSettings&) const = default;
};

struct TrialPlan {
  int p{3};
  int trials{50};
  double duration_s{30.0};
  int key_sets{2};
  FrequencySpace key_space{};                   // keygen and simulate
  FrequencySpace trial_space{default_trial_space()};  // eval and bench
  DecoyRendering decoy_rendering{DecoyRendering::actuated};
  double decoy_amplitude_ratio{1.0};
  double min_separation_bpm{6.0};
  ObservationModel observation{ObservationModel::fmcw};
  double synthesis_rate_hz{2000.0};
  double trial_pulse_base_duration_s{0.0};
  double correct_tolerance_bpm{3.0};
  unsigned workers{0};
  bool abstract_only{false};
  bool operator==(const TrialPlan&) const = default;
};

/// Everything a command needs, loadable from one JSON file. Unknown keys are
/// rejected at every level; missing keys take the defaults below.
struct ScenarioConfig {
  SensorProfile sensor{SensorProfile::mmwave()};
  VitalSignSource vital{};
  PulseTrainSpec pulse{};  // decoy frequencies come from the key
  ActuatorKernel actuator{};
  SceneSettings scene{};
  TrialPlan plan{};
  ExtractionOptions extraction{};
  std::string output_dir{"out"};
  std::uint64_t seed{1};

  void validate() const;
  /// Trial configuration for eval / bench.
  TrialConfig trial_config() const;

  bool operator==(const ScenarioConfig&) const = default;
};

ScenarioConfig parse_scenario(const std::string& json_text);
std::string serialize_scenario(const ScenarioConfig& cfg);
ScenarioConfig load_scenario(const std::string& path);

}  // namespace heartcloak::cli
