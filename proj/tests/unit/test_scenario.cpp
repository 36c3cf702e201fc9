#include <gtest/gtest.h>

#include "samplation/error.hpp"
#include "samplation/scenario.hpp"

using namespace samplation;

TEST(ScenarioJson, DefaultsRoundTrip) {
  const ScenarioConfig cfg;
  const auto back = scenario_from_json(scenario_to_json(cfg));
  EXPECT_EQ(scenario_to_json(back), scenario_to_json(cfg));
}

TEST(ScenarioJson, ShippedConfigMatchesCodeDefaultsExceptAttestations) {
  auto shipped = scenario_from_json(read_text(SAMPLATION_DEFAULT_CONFIG));
  EXPECT_TRUE(shipped.attestations.non_probabilistic_training_data);
  EXPECT_TRUE(shipped.attestations.accuracy_secondary);
  shipped.attestations = Attestations{};
  EXPECT_EQ(scenario_to_json(shipped), scenario_to_json(ScenarioConfig{}));
}

TEST(ScenarioJson, PartialOverride) {
  const auto cfg = scenario_from_json(R"({"samplation": {"finetune": {"epochs": 9}}, "replicates": 2})");
  EXPECT_EQ(cfg.samplation.finetune.epochs, 9u);
  EXPECT_EQ(cfg.samplation.finetune.batch_size, ScenarioConfig{}.samplation.finetune.batch_size);
  EXPECT_EQ(cfg.replicates, 2u);
}

TEST(ScenarioJson, Errors) {
  EXPECT_THROW(scenario_from_json("{"), ConfigError);
  EXPECT_THROW(scenario_from_json(R"({"tau_gird": [1]})"), ConfigError);
  EXPECT_THROW(scenario_from_json(R"({"tau_grid": [5, 4]})"), ConfigError);
  EXPECT_THROW(scenario_from_json(R"({"train_data": {"group_prevalence": [0.5, 0.6]}})"),
               ConfigError);
  EXPECT_THROW(scenario_from_json(R"({"samplation": {"privileged": 1, "unprivileged": 1}})"),
               ConfigError);
  EXPECT_THROW(scenario_from_json(R"({"replicates": "five"})"), ConfigError);
}

TEST(StageSeeds, DerivedAndExplicit) {
  ScenarioConfig cfg;
  const auto a = stage_seeds(cfg, 1);
  EXPECT_EQ(a.trials.size(), cfg.replicates);
  EXPECT_NE(a.train_data, a.test_data);
  EXPECT_NE(stage_seeds(cfg, 2).pretrain, a.pretrain);
  cfg.seeds = {10, 20};
  EXPECT_EQ(stage_seeds(cfg, 1).trials, (std::vector<Seed>{10, 20}));
}

TEST(SweepJson, RoundTripKeepsRowsAndMeans) {
  SweepResult res;
  for (std::size_t tau : {10u, 20u}) {
    for (Seed s : {1u, 2u}) {
      SweepRow r;
      r.tau = tau;
      r.seed = s;
      r.ratio_before = {4.0, false};
      r.ratio_after = {1.0 / double(tau + s), false};
      r.acc_before = 0.6;
      r.acc_after = 0.7;
      r.shares_before = {0.8, 0.2};
      r.shares_after = {0.5, 0.5};
      r.allocation = reverse_allocation(r.shares_before, tau);
      res.rows.push_back(r);
    }
  }
  res.summaries = summarize(res.rows);
  res.selection = select_tau(res.summaries, 1.0, 0.25);
  const auto back = sweep_result_from_json(sweep_result_to_json(res));
  EXPECT_EQ(sweep_result_to_json(back), sweep_result_to_json(res));
}

TEST(Report, ContainsAccuracyDeltaPerTau) {
  SweepResult res;
  SweepRow r;
  r.tau = 70;
  r.ratio_before = {8.0, false};
  r.ratio_after = {1.05, false};
  r.acc_before = 0.8;
  r.acc_after = 0.78;
  res.rows.push_back(r);
  res.summaries = summarize(res.rows);
  res.selection = select_tau(res.summaries, 1.0, 0.25);
  ApplicabilityReport audit;
  const auto text = report_json(ScenarioConfig{}, 5, audit, res);
  EXPECT_NE(text.find("\"mean_acc_drop\""), std::string::npos);
  EXPECT_NE(text.find("\"tau_star\": 70"), std::string::npos);
  EXPECT_NE(text.find("\"acc_drop_at_tau_star\""), std::string::npos);
}
