#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "heartcloak/extraction.hpp"
#include "heartcloak/fmcw.hpp"
#include "heartcloak/obfuscation.hpp"
#include "heartcloak/signal_model.hpp"

namespace heartcloak {

// ---------------------------------------------------------------------------
// Adversaries

/// Posterior P(M = value of c[j] | c) for every index j of the multiset,
/// assuming message and decoys are independent draws from space's
/// distribution. Entries sharing a value share the value's posterior mass.
std::vector<double> bayesian_posterior(const FrequencyMultiset& c, const FrequencySpace& space);

/// Maximum-a-posteriori guess of the message index; ties broken uniformly by rng.
std::size_t bayesian_adversary(const FrequencyMultiset& c, const FrequencySpace& space, Rng& rng);

/// Strategy for the multiset-level game; the default is bayesian_adversary.
using Adversary =
    std::function<std::size_t(const FrequencyMultiset&, const FrequencySpace&, Rng&)>;

struct SpectralGuess {
  double guess_bpm{0.0};
  bool correct{false};
  HeartRateEstimate estimate;
};

/// Keyless observer: unauthorized estimate, correct iff valid and within
/// tolerance_bpm of the truth.
SpectralGuess spectral_adversary(const DisplacementSignal& sig, double true_bpm,
                                 const ExtractionOptions& options = {},
                                 double tolerance_bpm = 3.0);

// ---------------------------------------------------------------------------
// Multiset-level game

struct AbstractGameConfig {
  int p{3};
  FrequencySpace space{};
  std::uint64_t trials{1'000'000};
  std::uint64_t seed{1};
  bool good_only{false};  // resample until the ciphertext has no collision
  Adversary adversary{};  // empty -> bayesian_adversary
  unsigned workers{0};    // 0 -> hardware concurrency
};

struct AbstractGameResult {
  int p{0};
  std::int64_t grid_points{0};
  std::uint64_t trials{0};
  std::uint64_t successes{0};
  std::uint64_t collisions{0};
  std::uint64_t good_trials{0};
  std::uint64_t good_successes{0};

  double success_rate() const;
  double advantage() const;  // success_rate - 1/(p+1)
  double collision_rate() const;
  double good_success_rate() const;
  double success_stderr() const;    // binomial standard error around 1/(p+1)
  double collision_stderr() const;  // binomial standard error around the bound
  double analytic_bound() const;
  double random_guess() const;
};

AbstractGameResult run_abstract_game(const AbstractGameConfig& config);

// ---------------------------------------------------------------------------
// Full-pipeline game

enum class DecoyRendering { actuated, matched };
enum class ObservationModel { fmcw, displacement };

std::string_view to_string(DecoyRendering r) noexcept;
std::string_view to_string(ObservationModel m) noexcept;
DecoyRendering decoy_rendering_from_string(std::string_view s);
ObservationModel observation_from_string(std::string_view s);

/// Heart band friendly default space for signal-level trials: second
/// harmonics of every grid point fall above the 2 Hz band edge.
FrequencySpace default_trial_space();

struct TrialConfig {
  int p{3};
  FrequencySpace space{default_trial_space()};
  SensorProfile sensor{SensorProfile::mmwave()};
  double snr_db{20.0};
  double amplitude_scale{1.0};
  double base_distance_m{0.30};
  double duration_s{30.0};
  int trials{50};
  std::uint64_t seed{1};

  DecoyRendering decoy_rendering{DecoyRendering::actuated};
  /// Decoy line amplitude relative to the heartbeat line amplitude.
  double decoy_amplitude_ratio{1.0};
  /// Message and decoys are redrawn jointly until every pair is at least this
  /// far apart (0 disables).
  double min_separation_bpm{6.0};
  ObservationModel observation{ObservationModel::fmcw};
  double synthesis_rate_hz{2000.0};
  /// 0 -> one untiled base spanning the recording.
  double pulse_base_duration_s{0.0};

  VitalSignSource vital{};
  double pulse_width_s{0.025};
  ActuatorKernel actuator{};
  ExtractionOptions extraction{};
  double correct_tolerance_bpm{3.0};

  bool abstract_only{false};
  unsigned workers{0};
  std::optional<ObfuscationKey> fixed_key;

  void validate() const;
};

struct TrialRecord {
  std::size_t trial_id{0};
  double true_bpm{0.0};
  std::vector<double> key_bpm;
  EstimateSet unauthorized;
  EstimateSet authorized;
  bool bayes_correct{false};
  bool collision{false};
  SpectralGuess spectral;
  /// Absolute errors indexed [mode][method]: mode 0 unauthorized, 1
  /// authorized; method 0 fft_peak, 1 peak_rr.
  std::array<std::array<double, 2>, 2> abs_error{};
  double decoy_gain{0.0};
  std::size_t range_bin{0};
};

struct PrivacyReport {
  int p{0};
  std::int64_t grid_points{0};
  std::uint64_t trials{0};
  std::string profile;
  std::uint64_t seed{0};
  bool abstract_only{false};

  double random_guess{0.0};
  double empirical_success{0.0};  // Bayesian adversary on the multiset
  double advantage{0.0};
  double analytic_bound{0.0};
  double collision_rate{0.0};
  double spectral_success{0.0};   // keyless estimator within tolerance

  double mae_unauthorized{0.0};
  double mae_authorized{0.0};
  double protection_ratio{0.0};   // NaN when mae_authorized == 0
  double mae_unauthorized_peak_rr{0.0};
  double mae_authorized_peak_rr{0.0};
  double paired_t{0.0};
  double paired_p_value{1.0};     // one-sided, H1: unauthorized error > authorized

  std::vector<TrialRecord> rows;
};

/// Everything the signal-level pipeline produces for one trial.
struct TrialObservation {
  double true_bpm{0.0};
  ObfuscationKey key;
  DisplacementSignal truth;
  DisplacementSignal decoy;
  DisplacementSignal composite;
  DisplacementSignal observed;
  double decoy_gain{0.0};
  std::size_t range_bin{0};
};

/// Draw (m, k) for trial `index` and synthesize + observe it.
TrialObservation synthesize_trial(const TrialConfig& config, std::size_t index);

PrivacyReport run_game(const TrialConfig& config);

struct PairedTest {
  double t{0.0};
  double p_value{1.0};
};
/// One-sided paired t-test of mean(a - b) > 0.
PairedTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

/// Absolute error used for MAE; an estimate without a frequency scores the
/// distance to the farther heart-band edge.
double absolute_error(const HeartRateEstimate& est, double true_bpm,
                      const ExtractionOptions& options = {});

struct ReportFiles {
  std::filesystem::path summary;
  std::filesystem::path trials_csv;
};

/// summary.json and trials.csv under `dir` (created if needed).
ReportFiles write_report(const PrivacyReport& report, const std::filesystem::path& dir);

std::string trials_csv(const PrivacyReport& report);
std::string summary_json(const PrivacyReport& report);

struct CheckResult {
  std::string name;
  bool passed{false};
  std::string detail;
};

/// Statistical and structural checks behind `eval --check`.
std::vector<CheckResult> run_invariant_suite(const TrialConfig& config,
                                             const PrivacyReport& report);

}  // namespace heartcloak
