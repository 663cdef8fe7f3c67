#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "heartcloak/error.hpp"

using namespace heartcloak::cli;

int main(int argc, char** argv) {
  CLI::App app{"heartcloak: decoy-based heart-rate obfuscation simulator"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  std::string config;
  std::uint64_t seed = 0;
  std::string out;
  app.add_option("--config", config, "Scenario JSON file");
  app.add_option("--seed", seed, "Seed for every random draw");
  app.add_option("--out", out, "Output directory");
  app.add_flag("--check", g.check, "eval: run the invariant suite, exit 1 on failure");

  KeygenOptions ko;
  auto* keygen = app.add_subcommand("keygen", "Draw a decoy key");
  keygen->add_option("--p", ko.p, "Number of decoy frequencies");
  keygen->add_option("--space", ko.space, "low:high:resolution[:uniform|triangular]");

  SimulateOptions so;
  auto* simulate = app.add_subcommand("simulate", "Synthesize, sense and export one scenario");
  simulate->add_option("--key", so.key, "Key file (default: draw plan.key_sets keys)");
  simulate->add_option("--sensor", so.sensor, "mmwave | acoustic");
  simulate->add_option("--duration", so.duration_s, "Recording length in seconds");

  ExtractOptions xo;
  auto* extract = app.add_subcommand("extract", "Estimate heart rate from a recording");
  extract->add_option("--input", xo.input, "Displacement CSV or IF binary")->required();
  extract->add_flag("--if", xo.input_is_if, "Input is an IF binary for the configured sensor");
  extract->add_option("--key", xo.key, "Key file for authorized extraction");
  extract->add_option("--mode", xo.mode, "both | authorized | unauthorized");
  extract->add_option("--truth", xo.truth_bpm, "Ground-truth BPM for the error column");
  extract->add_option("--sensor", xo.sensor, "mmwave | acoustic (decodes --if input)");

  EvalOptions eo;
  auto* eval = app.add_subcommand("eval", "Run the privacy game and write a report");
  eval->add_option("--key", eo.key, "Use one fixed key for every trial");
  eval->add_option("--mode", eo.mode, "both | authorized (requires --key) | unauthorized");
  eval->add_option("--trials", eo.trials, "Trial count");
  eval->add_option("--p", eo.p, "Decoy count");
  eval->add_option("--sensor", eo.sensor, "mmwave | acoustic");
  eval->add_flag("--abstract", eo.abstract_only, "Multiset-level game only (no DSP)");

  BenchOptions bo;
  auto* bench = app.add_subcommand("bench", "Sweep one axis and tabulate results");
  bench->add_option("--sweep", bo.sweep, "snr | amplitude | p | distance-proxy")->required();
  bench->add_option("--values", bo.values, "Sweep values")->delimiter(',');
  bench->add_option("--trials", bo.trials, "Trials per point");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }
  if (!config.empty()) g.config = config;
  if (app.count("--seed")) g.seed = seed;
  if (!out.empty()) g.out = out;

  try {
    if (keygen->parsed()) return cmd_keygen(g, ko, std::cout);
    if (simulate->parsed()) return cmd_simulate(g, so, std::cout);
    if (extract->parsed()) return cmd_extract(g, xo, std::cout);
    if (eval->parsed()) return cmd_eval(g, eo, std::cout);
    if (bench->parsed()) return cmd_bench(g, bo, std::cout);
  } catch (const heartcloak::ParameterError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const heartcloak::IoError& e) {
    std::cerr << "io error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailure;
  }
  return kUsage;
}
