#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "scenario.hpp"

namespace heartcloak::cli {

enum ExitCode : int { kOk = 0, kFailure = 1, kUsage = 2, kIo = 3 };

struct GlobalOptions {
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  bool check{false};
};

/// Defaults, then the config file, then command-line overrides.
ScenarioConfig resolve_scenario(const GlobalOptions& g);

/// "low:high:resolution[:distribution]".
FrequencySpace parse_space(const std::string& text);

struct KeygenOptions {
  std::optional<int> p;
  std::optional<std::string> space;
};

struct SimulateOptions {
  std::optional<std::string> key;
  std::optional<std::string> sensor;
  std::optional<double> duration_s;
};

struct ExtractOptions {
  std::string input;
  std::optional<std::string> key;
  std::string mode{"both"};  // both | authorized | unauthorized
  std::optional<double> truth_bpm;
  std::optional<std::string> sensor;  // profile used to decode --if input
  bool input_is_if{false};
};

struct EvalOptions {
  std::optional<std::string> key;
  std::string mode{"both"};  // authorized requires --key
  std::optional<int> trials;
  std::optional<int> p;
  std::optional<std::string> sensor;
  bool abstract_only{false};
};

struct BenchOptions {
  std::string sweep;
  std::vector<double> values;
  std::optional<int> trials;
};

int cmd_keygen(const GlobalOptions& g, const KeygenOptions& o, std::ostream& out);
int cmd_simulate(const GlobalOptions& g, const SimulateOptions& o, std::ostream& out);
int cmd_extract(const GlobalOptions& g, const ExtractOptions& o, std::ostream& out);
int cmd_eval(const GlobalOptions& g, const EvalOptions& o, std::ostream& out);
int cmd_bench(const GlobalOptions& g, const BenchOptions& o, std::ostream& out);

/// Sweep one TrialConfig axis; exposed for tests.
TrialConfig apply_sweep(TrialConfig base, const std::string& axis, double value);

}  // namespace heartcloak::cli
