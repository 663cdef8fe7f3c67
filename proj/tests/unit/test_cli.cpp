#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "heartcloak/error.hpp"
#include "heartcloak/io.hpp"
#include "scenario.hpp"

using namespace heartcloak;
using namespace heartcloak::cli;
namespace fs = std::filesystem;

namespace {

fs::path workdir(const std::string& name) {
  const auto d = fs::temp_directory_path() / ("heartcloak_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// Small, fast scenario: displacement-level observation at 250 Hz.
const char* kFastScenario = R"({
  "plan": {"trials": 4, "observation": "displacement", "synthesis_rate_hz": 250,
           "decoy_rendering": "matched", "workers": 1},
  "seed": 11
})";

struct Run {
  int rc;
  std::string out;
};

Run run_cli(const std::string& args, const fs::path& dir) {
  const auto log = dir / "stdout.txt";
  const std::string cmd = std::string(HEARTCLOAK_CLI_PATH) + " " + args + " > " + log.string() +
                          " 2> " + (dir / "stderr.txt").string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, io::read_text(log)};
}

}  // namespace

TEST(Scenario, RoundTrip) {
  ScenarioConfig c;
  c.sensor = SensorProfile::acoustic();
  c.plan.p = 5;
  c.plan.trial_space.distribution = FrequencyDistribution::triangular;
  c.scene.snr_db = 12.5;
  c.extraction.band.order = 3;
  c.seed = 42;
  EXPECT_EQ(parse_scenario(serialize_scenario(c)), c);
  c.sensor.adc_samples = 256;
  EXPECT_EQ(parse_scenario(serialize_scenario(c)), c);
  EXPECT_EQ(parse_scenario("{}"), ScenarioConfig{});
}

TEST(Scenario, StrictFields) {
  EXPECT_THROW(parse_scenario(R"({"plan": {"tirals": 3}})"), ParameterError);
  EXPECT_THROW(parse_scenario(R"({"colour": 1})"), ParameterError);
  EXPECT_THROW(parse_scenario(R"({"sensor": "lidar"})"), ParameterError);
  EXPECT_THROW(parse_scenario(R"({"plan": {"p": "three"}})"), ParameterError);
  EXPECT_THROW(parse_scenario(R"({"plan": {"duration_s": 0}})"), ParameterError);
  EXPECT_THROW(parse_scenario("{oops"), IoError);
  const auto c = parse_scenario(R"({"sensor": {"preset": "acoustic", "adc_samples": 256}})");
  EXPECT_EQ(c.sensor.adc_samples, 256u);
  EXPECT_EQ(c.sensor.start_frequency_hz, 18e3);
}

TEST(Scenario, TrialConfigMapping) {
  auto c = parse_scenario(kFastScenario);
  const auto t = c.trial_config();
  EXPECT_EQ(t.trials, 4);
  EXPECT_EQ(t.seed, 11u);
  EXPECT_EQ(t.observation, ObservationModel::displacement);
  EXPECT_EQ(t.decoy_rendering, DecoyRendering::matched);
}

TEST(ParseSpace, Forms) {
  const auto s = parse_space("50:150:0.5:triangular");
  EXPECT_EQ(s.size(), 201);
  EXPECT_EQ(s.distribution, FrequencyDistribution::triangular);
  EXPECT_EQ(parse_space("45:180:0.002").size(), 67501);
  EXPECT_THROW(parse_space("45:180"), ParameterError);
  EXPECT_THROW(parse_space("a:b:c"), ParameterError);
}

TEST(Sweep, Axes) {
  TrialConfig base;
  EXPECT_EQ(apply_sweep(base, "p", 5).p, 5);
  EXPECT_THROW(apply_sweep(base, "p", 2.5), ParameterError);
  EXPECT_DOUBLE_EQ(apply_sweep(base, "snr", 7).snr_db, 7);
  EXPECT_DOUBLE_EQ(apply_sweep(base, "amplitude", 0.4).amplitude_scale, 0.4);
  const auto d = apply_sweep(base, "distance-proxy", 0.6);
  EXPECT_DOUBLE_EQ(d.base_distance_m, 0.6);
  EXPECT_DOUBLE_EQ(d.amplitude_scale, 0.25);
  EXPECT_THROW(apply_sweep(base, "weather", 1), ParameterError);
}

TEST(Commands, KeygenPrintsProbabilities) {
  const auto dir = workdir("keygen");
  GlobalOptions g;
  g.out = dir.string();
  g.seed = 5;
  KeygenOptions o;
  o.p = 3;
  std::ostringstream out;
  EXPECT_EQ(cmd_keygen(g, o, out), kOk);
  EXPECT_NE(out.str().find("random-guess success = 0.25"), std::string::npos);
  const auto key = io::read_key(dir / "key.json");
  EXPECT_EQ(key.p(), 3u);
  o.p = 0;
  EXPECT_THROW(cmd_keygen(g, o, out), ParameterError);
}

TEST(Commands, UsageErrors) {
  const auto dir = workdir("usage");
  GlobalOptions g;
  g.out = dir.string();
  std::ostringstream out;
  BenchOptions b;
  b.sweep = "snr";
  EXPECT_THROW(cmd_bench(g, b, out), ParameterError);
  b.sweep = "weather";
  b.values = {1};
  EXPECT_THROW(cmd_bench(g, b, out), ParameterError);
  EvalOptions e;
  e.mode = "authorized";
  EXPECT_THROW(cmd_eval(g, e, out), ParameterError);
  SimulateOptions s;
  s.duration_s = 0;
  EXPECT_THROW(cmd_simulate(g, s, out), ParameterError);
}

TEST(Binary, ExitCodes) {
  const auto dir = workdir("exit");
  const std::string out = " --out " + dir.string();
  EXPECT_EQ(run_cli("keygen --p 3" + out, dir).rc, 0);
  EXPECT_EQ(run_cli("keygen --p 0" + out, dir).rc, 2);
  EXPECT_EQ(run_cli("simulate --duration 0" + out, dir).rc, 2);
  EXPECT_EQ(run_cli("bench --sweep snr" + out, dir).rc, 2);
  EXPECT_EQ(run_cli("bench --sweep weather --values 1" + out, dir).rc, 2);
  EXPECT_EQ(run_cli("eval --mode authorized" + out, dir).rc, 2);
  EXPECT_EQ(run_cli("frobnicate" + out, dir).rc, 2);
  EXPECT_EQ(run_cli("extract --input " + (dir / "missing.csv").string() + out, dir).rc, 3);
  EXPECT_EQ(run_cli("--config " + (dir / "missing.json").string() + " keygen" + out, dir).rc, 3);
}

TEST(Binary, EvalAndBenchAreReproducible) {
  const auto dir = workdir("repro");
  io::write_text(dir / "scenario.json", kFastScenario);
  const std::string cfg = " --config " + (dir / "scenario.json").string();
  auto eval_once = [&](const std::string& sub) {
    const auto o = dir / sub;
    const auto r = run_cli(cfg + " --out " + o.string() + " eval", dir);
    EXPECT_EQ(r.rc, 0) << r.out;
    return io::read_text(o / "summary.json") + io::read_text(o / "trials.csv");
  };
  EXPECT_EQ(eval_once("a"), eval_once("b"));

  const auto r = run_cli(cfg + " --out " + (dir / "bench").string() +
                             " bench --sweep p --values 1,2,4 --trials 2",
                         dir);
  ASSERT_EQ(r.rc, 0) << r.out;
  std::istringstream csv(io::read_text(dir / "bench" / "bench_p.csv"));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line.rfind("axis,value,p,trials,random_guess,", 0), 0u);
  std::vector<double> guesses;
  while (std::getline(csv, line)) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    guesses.push_back(std::stod(f.at(4)));
  }
  ASSERT_EQ(guesses.size(), 3u);
  EXPECT_NEAR(guesses[0], 0.5, 1e-9);
  EXPECT_NEAR(guesses[1], 1.0 / 3, 1e-6);
  EXPECT_NEAR(guesses[2], 0.2, 1e-9);
}

TEST(Binary, CheckMode) {
  const auto dir = workdir("check");
  io::write_text(dir / "scenario.json", kFastScenario);
  const auto r = run_cli("--check --config " + (dir / "scenario.json").string() + " --out " +
                             dir.string() + " eval",
                         dir);
  EXPECT_EQ(r.rc, 0) << r.out;
  EXPECT_NE(r.out.find("PASS correctness"), std::string::npos);
  EXPECT_EQ(r.out.find("FAIL"), std::string::npos);
}

TEST(Binary, SimulateThenExtract) {
  const auto dir = workdir("sim");
  const std::string common = " --seed 3 --out " + dir.string();
  auto r = run_cli(common + " simulate --sensor acoustic --duration 20", dir);
  ASSERT_EQ(r.rc, 0) << r.out;
  const auto ks = dir / "keyset_0";
  for (const char* f : {"key.json", "composite_displacement.csv", "observed_displacement.csv",
                        "if.bin", "pulse_spectrogram.txt", "observed_spectrogram.txt"})
    EXPECT_TRUE(fs::exists(ks / f)) << f;
  r = run_cli(common + " extract --input " + (ks / "observed_displacement.csv").string() +
                  " --key " + (ks / "key.json").string() + " --truth 66",
              dir);
  ASSERT_EQ(r.rc, 0) << r.out;
  const auto est = io::read_text(dir / "estimates.csv");
  EXPECT_NE(est.find("authorized"), std::string::npos);
  EXPECT_NE(est.find("unauthorized"), std::string::npos);
  r = run_cli(common + " extract --if --input " + (ks / "if.bin").string() +
                  " --sensor acoustic --mode unauthorized",
              dir);
  EXPECT_EQ(r.rc, 0) << r.out;
  EXPECT_EQ(run_cli(common + " extract --mode authorized --input " +
                        (ks / "observed_displacement.csv").string(),
                    dir)
                .rc,
            2);
}
