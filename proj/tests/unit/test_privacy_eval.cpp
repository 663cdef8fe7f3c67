#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <map>
#include <nlohmann/json.hpp>
#include <sstream>

#include "heartcloak/error.hpp"
#include "heartcloak/privacy_eval.hpp"
#include "oracles.hpp"

using namespace heartcloak;

namespace {

FrequencyMultiset ms(std::vector<std::int64_t> v) {
  std::vector<GridIndex> g;
  for (auto x : v) g.push_back(GridIndex{x});
  return FrequencyMultiset(std::move(g));
}

// Brute-force P(M = v | sorted(m, k1..kp) = c) by enumerating every tuple.
std::map<std::int64_t, double> brute_posterior(const FrequencyMultiset& c, const FrequencySpace& s) {
  const std::int64_t n = s.size();
  const std::size_t len = c.size();
  std::map<std::int64_t, double> mass;
  std::vector<std::int64_t> tup(len, 0);
  double total = 0;
  while (true) {
    std::vector<GridIndex> g;
    double pr = 1;
    for (auto x : tup) {
      g.push_back(GridIndex{x});
      pr *= s.probability(GridIndex{x});
    }
    if (FrequencyMultiset(g) == c) {
      mass[tup[0]] += pr;
      total += pr;
    }
    std::size_t i = 0;
    while (i < len && ++tup[i] == n) tup[i++] = 0;
    if (i == len) break;
  }
  for (auto& [k, v] : mass) v /= total;
  return mass;
}

TrialConfig fast_config(int p, int trials) {
  TrialConfig c;
  c.p = p;
  c.trials = trials;
  c.observation = ObservationModel::displacement;
  c.synthesis_rate_hz = 250.0;
  c.duration_s = 30.0;
  c.decoy_rendering = DecoyRendering::matched;
  c.workers = 2;
  return c;
}

std::filesystem::path temp_dir(const std::string& name) {
  auto d = std::filesystem::temp_directory_path() / ("heartcloak_pe_" + name);
  std::filesystem::remove_all(d);
  return d;
}

}  // namespace

TEST(Posterior, MatchesBruteForceUniformAndTriangular) {
  for (auto dist : {FrequencyDistribution::uniform, FrequencyDistribution::triangular}) {
    const auto space = FrequencySpace::with_points(60, 64, 5, dist);
    for (const auto& c : {ms({0, 1, 2}), ms({1, 1, 4}), ms({2, 2, 2}), ms({0, 3, 3, 4})}) {
      const auto post = bayesian_posterior(c, space);
      const auto oracle = brute_posterior(c, space);
      for (std::size_t j = 0; j < c.size(); ++j) {
        const auto v = c.values()[j].value;
        EXPECT_NEAR(post[j] * static_cast<double>(c.count(c.values()[j])), oracle.at(v), 1e-12);
      }
    }
  }
}

TEST(Posterior, DistinctUniformIsFlat) {
  const FrequencySpace space;
  const auto post = bayesian_posterior(ms({10, 200, 3000, 45000}), space);
  for (double q : post) EXPECT_NEAR(q, 0.25, 1e-12);
}

TEST(Adversary, TiesBrokenByRng) {
  const FrequencySpace space;
  std::map<std::size_t, int> hist;
  Rng rng(3);
  for (int i = 0; i < 4000; ++i) ++hist[bayesian_adversary(ms({1, 2, 3, 4}), space, rng)];
  ASSERT_EQ(hist.size(), 4u);
  for (auto& [k, n] : hist) EXPECT_NEAR(n / 4000.0, 0.25, 4 * oracle::sigma(0.25, 4000));
  // A repeated value carries twice the mass.
  EXPECT_EQ(bayesian_adversary(ms({5, 5, 9}), space, rng), 0u);
}

TEST(AbstractGame, OneDecoyIsCoinFlip) {
  AbstractGameConfig cfg;
  cfg.p = 1;
  cfg.trials = 100000;
  const auto r = run_abstract_game(cfg);
  EXPECT_NEAR(r.success_rate(), 0.5, 3 * oracle::sigma(0.5, 1e5));
  EXPECT_DOUBLE_EQ(r.random_guess(), 0.5);
}

TEST(AbstractGame, TriangularDistributionStillUniformGuess) {
  AbstractGameConfig cfg;
  cfg.p = 3;
  cfg.trials = 100000;
  cfg.space.distribution = FrequencyDistribution::triangular;
  cfg.good_only = true;
  const auto r = run_abstract_game(cfg);
  EXPECT_EQ(r.collisions, 0u);
  EXPECT_NEAR(r.success_rate(), 0.25, 3 * oracle::sigma(0.25, 1e5));
}

TEST(AbstractGame, PluggableAdversary) {
  AbstractGameConfig cfg;
  cfg.p = 3;
  cfg.trials = 50000;
  cfg.adversary = [](const FrequencyMultiset&, const FrequencySpace&, Rng&) { return std::size_t{0}; };
  const auto r = run_abstract_game(cfg);
  EXPECT_NEAR(r.success_rate(), 0.25, 4 * oracle::sigma(0.25, 5e4));
  cfg.adversary = [](const FrequencyMultiset&, const FrequencySpace&, Rng&) { return std::size_t{9}; };
  EXPECT_THROW(run_abstract_game(cfg), std::exception);
}

TEST(AbstractGame, IndependentOfWorkerCount) {
  AbstractGameConfig cfg;
  cfg.p = 2;
  cfg.trials = 70000;
  cfg.space = FrequencySpace::with_points(45, 180, 64);
  cfg.workers = 1;
  const auto a = run_abstract_game(cfg);
  cfg.workers = 3;
  const auto b = run_abstract_game(cfg);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_EQ(a.collisions, b.collisions);
  EXPECT_EQ(a.good_successes, b.good_successes);
}

TEST(AbstractGame, BoundHoldsAcrossGrid) {
  for (int p : {1, 2, 3, 5}) {
    for (std::int64_t n : {std::int64_t{1} << 8, std::int64_t{1} << 12, std::int64_t{1} << 16}) {
      AbstractGameConfig cfg;
      cfg.p = p;
      cfg.trials = 200000;
      cfg.seed = static_cast<std::uint64_t>(p * 1000 + n);
      cfg.space = FrequencySpace::with_points(45, 180, n);
      const auto r = run_abstract_game(cfg);
      const double bound = static_cast<double>(p * (p + 1)) / 2.0 / static_cast<double>(n);
      EXPECT_DOUBLE_EQ(r.analytic_bound(), bound);
      EXPECT_LE(r.collision_rate(), bound + 3 * r.collision_stderr()) << p << " " << n;
      EXPECT_LE(r.advantage(), bound + 3 * r.success_stderr()) << p << " " << n;
      EXPECT_NEAR(r.good_success_rate(), 1.0 / (p + 1),
                  3 * oracle::sigma(1.0 / (p + 1), static_cast<double>(r.good_trials)));
    }
  }
}

TEST(AbstractGame, RejectsBadConfig) {
  AbstractGameConfig cfg;
  cfg.p = 0;
  EXPECT_THROW(run_abstract_game(cfg), ParameterError);
}

TEST(PairedT, MatchesClosedForm) {
  // Differences with known mean and sd; t chosen at the 97.5% quantile for df 9.
  const std::vector<double> base{-1.5, -1, -0.5, 0, 0.5, 1, 1.5, -0.25, 0.25, 0};
  double sd = 0;
  for (double v : base) sd += v * v;
  sd = std::sqrt(sd / 9);
  const double tq = 2.2621571628;
  const double shift = tq * sd / std::sqrt(10.0);
  std::vector<double> a, b(10, 1.0);
  for (double v : base) a.push_back(1.0 + v + shift);
  const auto r = paired_t_test(a, b);
  EXPECT_NEAR(r.t, tq, 1e-9);
  EXPECT_NEAR(r.p_value, 0.025, 1e-8);
  EXPECT_NEAR(paired_t_test(b, a).p_value, 0.975, 1e-8);
  EXPECT_THROW(paired_t_test({1, 2}, {1}), ParameterError);
}

TEST(AbsoluteError, MissingEstimateScoresFartherEdge) {
  HeartRateEstimate e;
  EXPECT_DOUBLE_EQ(absolute_error(e, 60), 60.0);
  EXPECT_DOUBLE_EQ(absolute_error(e, 100), 52.0);
  e.bpm = 70;
  EXPECT_DOUBLE_EQ(absolute_error(e, 66), 4.0);
}

TEST(TrialPipeline, KeyAndMessageSeparated) {
  auto cfg = fast_config(3, 1);
  for (std::size_t i = 0; i < 20; ++i) {
    const auto obs = synthesize_trial(cfg, i);
    std::vector<double> all = obs.key.frequencies_bpm();
    all.push_back(obs.true_bpm);
    ASSERT_EQ(obs.key.p(), 3u);
    for (std::size_t a = 0; a < all.size(); ++a)
      for (std::size_t b = a + 1; b < all.size(); ++b) EXPECT_GE(std::abs(all[a] - all[b]), 6.0);
    EXPECT_TRUE(cfg.space.on_grid(obs.true_bpm));
    EXPECT_EQ(obs.observed.size(), obs.composite.size());
  }
}

TEST(TrialPipeline, FixedKeyIsUsed) {
  auto cfg = fast_config(3, 1);
  ObfuscationKey key;
  key.space = cfg.space;
  for (double b : {70.0, 90.0, 110.0}) key.frequencies.push_back(key.space.index_of(b));
  cfg.fixed_key = key;
  const auto obs = synthesize_trial(cfg, 4);
  EXPECT_EQ(obs.key, key);
  cfg.p = 2;
  EXPECT_THROW(cfg.validate(), ParameterError);
}

TEST(RunGame, ReportConsistency) {
  const auto cfg = fast_config(3, 12);
  const auto rep = run_game(cfg);
  ASSERT_EQ(rep.rows.size(), 12u);
  EXPECT_DOUBLE_EQ(rep.random_guess, 0.25);
  EXPECT_NEAR(rep.advantage, rep.empirical_success - 0.25, 1e-12);

  // MAE and ratio recomputed from the CSV rows.
  std::istringstream csv(trials_csv(rep));
  std::string line;
  std::getline(csv, line);
  EXPECT_EQ(line, "trial_id,mode,method,bpm,confidence,ground_truth_bpm,abs_error");
  double sum_u = 0, sum_a = 0;
  int rows = 0;
  while (std::getline(csv, line)) {
    ++rows;
    std::vector<std::string> f;
    std::stringstream ss(line);
    for (std::string x; std::getline(ss, x, ',');) f.push_back(x);
    ASSERT_EQ(f.size(), 7u);
    if (f[2] != "fft_peak") continue;
    (f[1] == "authorized" ? sum_a : sum_u) += std::stod(f[6]);
  }
  EXPECT_EQ(rows, 48);
  EXPECT_NEAR(sum_u / 12, rep.mae_unauthorized, 1e-5);
  EXPECT_NEAR(sum_a / 12, rep.mae_authorized, 1e-5);
  EXPECT_NEAR(rep.protection_ratio, rep.mae_unauthorized / rep.mae_authorized, 1e-9);
}

TEST(RunGame, DeterministicAndWorkerIndependent) {
  auto cfg = fast_config(2, 6);
  cfg.workers = 1;
  const auto a = run_game(cfg);
  cfg.workers = 3;
  const auto b = run_game(cfg);
  EXPECT_EQ(trials_csv(a), trials_csv(b));
  EXPECT_EQ(summary_json(a), summary_json(b));
}

TEST(RunGame, NoDecoysMeansNoProtection) {
  const auto rep = run_game(fast_config(0, 8));
  EXPECT_DOUBLE_EQ(rep.random_guess, 1.0);
  EXPECT_DOUBLE_EQ(rep.mae_authorized, rep.mae_unauthorized);
  for (const auto& r : rep.rows) EXPECT_EQ(r.authorized.fft_peak.bpm, r.unauthorized.fft_peak.bpm);
}

TEST(RunGame, WeakerEchoLowersSpectralSuccess) {
  auto cfg = fast_config(0, 30);
  cfg.snr_db = -18;
  const auto strong = run_game(cfg);
  cfg.amplitude_scale = 1.0 / 3.0;
  const auto weak = run_game(cfg);
  EXPECT_LT(weak.spectral_success, strong.spectral_success);
}

TEST(RunGame, AbstractOnly) {
  TrialConfig cfg;
  cfg.abstract_only = true;
  cfg.trials = 20000;
  const auto rep = run_game(cfg);
  EXPECT_TRUE(rep.rows.empty());
  EXPECT_TRUE(std::isnan(rep.mae_authorized));
  EXPECT_NEAR(rep.empirical_success, 0.25, 4 * oracle::sigma(0.25, 2e4));
  const auto j = nlohmann::json::parse(summary_json(rep));
  EXPECT_TRUE(j["mae_authorized"].is_null());
  EXPECT_TRUE(j["per_trial"].is_null());
}

TEST(Report, FilesAndSchema) {
  const auto rep = run_game(fast_config(3, 4));
  const auto dir = temp_dir("schema");
  const auto files = write_report(rep, dir);
  std::ifstream s(files.summary), c(files.trials_csv);
  std::stringstream ss, cs;
  ss << s.rdbuf();
  cs << c.rdbuf();
  EXPECT_EQ(ss.str(), summary_json(rep));
  EXPECT_EQ(cs.str(), trials_csv(rep));
  const auto j = nlohmann::json::parse(ss.str());
  for (const char* k : {"p", "grid_points", "trials", "profile", "seed", "random_guess",
                        "empirical_success", "advantage", "analytic_bound", "collision_rate",
                        "spectral_success", "mae_unauthorized", "mae_authorized",
                        "protection_ratio", "paired_t", "paired_p_value", "per_trial"})
    EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_EQ(j["per_trial"], "trials.csv");
  EXPECT_EQ(j["p"], 3);
}

TEST(InvariantSuite, AllPass) {
  auto cfg = fast_config(3, 4);
  const auto rep = run_game(cfg);
  const auto checks = run_invariant_suite(cfg, rep);
  EXPECT_GE(checks.size(), 6u);
  for (const auto& c : checks) EXPECT_TRUE(c.passed) << c.name << ": " << c.detail;
}
