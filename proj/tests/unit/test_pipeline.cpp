#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <sstream>

#include "samplation/error.hpp"
#include "samplation/pipeline.hpp"
#include "samplation/scenario.hpp"

using namespace samplation;

namespace {

struct Fixture {
  Dataset train, test;
  Model model;
  std::vector<Reserve> reserves;
  SamplationConfig cfg;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    Fixture x;
    ScenarioConfig sc;
    const auto seeds = stage_seeds(sc, 777);
    SynthConfig tr = sc.train_data;
    tr.seed = seeds.train_data;
    tr.n = 800;
    SynthConfig te = sc.test_data;
    te.seed = seeds.test_data;
    te.n = 400;
    x.train = generate_synthetic(tr);
    x.test = generate_synthetic(te);
    TrainConfig pc = sc.pretrain;
    pc.seed = seeds.pretrain;
    x.model = pretrain(x.train, pc);
    x.reserves = build_reserves(x.train, 300, 5, seeds.reserves);
    x.cfg = sc.samplation;
    return x;
  }();
  return f;
}

}  // namespace

TEST(Samplate, ZeroTauIsNoOp) {
  const auto& f = fixture();
  SamplationConfig cfg = f.cfg;
  cfg.tau = 0;
  const auto row = samplate(f.model, f.reserves, f.test, cfg, 1);
  EXPECT_EQ(row.ratio_after.value, row.ratio_before.value);
  EXPECT_EQ(row.acc_after, row.acc_before);
  EXPECT_EQ(row.allocation.counts, (std::vector<std::size_t>{0, 0}));
}

TEST(Samplate, AllocationFollowsReverseRule) {
  const auto& f = fixture();
  SamplationConfig cfg = f.cfg;
  cfg.tau = 60;
  const auto row = samplate(f.model, f.reserves, f.test, cfg, 3);
  EXPECT_EQ(row.allocation, reverse_allocation(row.shares_before, 60));
  EXPECT_GT(row.allocation.counts[1], row.allocation.counts[0]);
}

TEST(Samplate, AllocationRecorded) {
  // Model predicting 80% group 0 on the probe set -> (100, 400) at tau 500.
  Model m(1, 2);
  m.weight(1, 0) = 1.0;
  Dataset test(1, 2, 2);
  for (int i = 0; i < 80; ++i) test.push_back({{-1.0}, 0, 0, false});
  for (int i = 0; i < 20; ++i) test.push_back({{1.0}, 1, 1, false});
  std::vector<Reserve> reserves(2);
  for (std::size_t g = 0; g < 2; ++g) {
    reserves[g].group = g;
    reserves[g].instances = Dataset(1, 2, 2);
    for (int i = 0; i < 1000; ++i) {
      reserves[g].instances.push_back({{g == 0 ? -1.0 : 1.0}, g, g, true});
    }
  }
  SamplationConfig cfg;
  cfg.tau = 500;
  const auto row = samplate(m, reserves, test, cfg, 5);
  EXPECT_EQ(row.allocation.counts, (std::vector<std::size_t>{100, 400}));
}

TEST(Samplate, DeterministicAndInputUntouched) {
  const auto& f = fixture();
  const Model before = f.model;
  const auto a = samplate(f.model, f.reserves, f.test, f.cfg, 11);
  const auto b = samplate(f.model, f.reserves, f.test, f.cfg, 11);
  EXPECT_EQ(a.ratio_after.value, b.ratio_after.value);
  EXPECT_EQ(a.acc_after, b.acc_after);
  EXPECT_EQ(a.shares_after, b.shares_after);
  EXPECT_EQ(f.model, before);
}

TEST(Samplate, CapacityError) {
  const auto& f = fixture();
  SamplationConfig cfg = f.cfg;
  cfg.tau = 10000;
  EXPECT_THROW(samplate(f.model, f.reserves, f.test, cfg, 1), CapacityError);
}

TEST(Sweep, SingleRow) {
  const auto& f = fixture();
  const std::vector<std::size_t> grid{50};
  const std::vector<Seed> seeds{9};
  const auto res = sweep(f.model, f.reserves, f.test, f.cfg, grid, seeds);
  ASSERT_EQ(res.rows.size(), 1u);
  ASSERT_EQ(res.summaries.size(), 1u);
  EXPECT_EQ(res.summaries[0].mean_ratio.value, res.rows[0].ratio_after.value);
}

TEST(Sweep, MeansRecomputeExactlyAndRatioBeforeConstant) {
  const auto& f = fixture();
  const std::vector<std::size_t> grid{20, 40, 60};
  const std::vector<Seed> seeds{1, 2, 3};
  const auto res = sweep(f.model, f.reserves, f.test, f.cfg, grid, seeds);
  ASSERT_EQ(res.rows.size(), 9u);
  std::map<std::size_t, std::vector<double>> by_tau;
  for (const auto& r : res.rows) {
    EXPECT_EQ(r.ratio_before.value, res.rows[0].ratio_before.value);
    EXPECT_EQ(r.allocation, reverse_allocation(r.shares_before, r.tau));
    by_tau[r.tau].push_back(r.ratio_after.value);
  }
  for (const auto& s : res.summaries) {
    double sum = 0;
    for (double v : by_tau[s.tau]) sum += v;
    EXPECT_EQ(s.mean_ratio.value, sum / double(by_tau[s.tau].size()));
  }
}

TEST(Sweep, ThreadCountDoesNotChangeOutput) {
  const auto& f = fixture();
  const std::vector<std::size_t> grid{10, 30, 50, 70};
  const std::vector<Seed> seeds{4, 5, 6};
  const auto one = sweep(f.model, f.reserves, f.test, f.cfg, grid, seeds, 1);
  const auto four = sweep(f.model, f.reserves, f.test, f.cfg, grid, seeds, 4);
  EXPECT_EQ(sweep_result_to_json(one), sweep_result_to_json(four));
}

TEST(Sweep, CapacityFailuresAnnotatedAndSweepContinues) {
  const auto& f = fixture();
  const std::vector<std::size_t> grid{50, 5000};
  const std::vector<Seed> seeds{1, 2};
  const auto res = sweep(f.model, f.reserves, f.test, f.cfg, grid, seeds);
  EXPECT_EQ(res.rows.size(), 2u);
  ASSERT_EQ(res.failures.size(), 2u);
  EXPECT_EQ(res.failures[0].tau, 5000u);
}

TEST(Sweep, GridValidation) {
  const auto& f = fixture();
  const std::vector<Seed> seeds{1};
  const std::vector<std::size_t> empty, unsorted{10, 10};
  EXPECT_THROW(sweep(f.model, f.reserves, f.test, f.cfg, empty, seeds), ConfigError);
  EXPECT_THROW(sweep(f.model, f.reserves, f.test, f.cfg, unsorted, seeds), ConfigError);
}

TEST(Grids, FullAndDeskScale) {
  const std::vector<std::size_t> full{400, 450, 500, 550, 600, 650, 700, 710, 720, 730, 740,
                                      750, 760, 770, 780, 790, 800, 850, 900, 950, 1000};
  EXPECT_EQ(full_scale_tau_grid(), full);
  const auto desk = desk_scale_tau_grid();
  ASSERT_EQ(desk.size(), full.size());
  for (std::size_t i = 0; i < full.size(); ++i) EXPECT_EQ(desk[i] * 10, full[i]);
}

namespace {

std::vector<TauSummary> means(std::initializer_list<std::pair<std::size_t, double>> pts) {
  std::vector<TauSummary> out;
  for (auto [tau, m] : pts) {
    TauSummary s;
    s.tau = tau;
    s.mean_ratio = {m, false};
    out.push_back(s);
  }
  return out;
}

}  // namespace

TEST(SelectTau, SmallestWithinBand) {
  const auto s = means({{400, 3.1}, {500, 1.1}, {600, 0.95}, {700, 0.4}});
  const auto sel = select_tau(s, 1.0, 0.25);
  EXPECT_EQ(sel.tau_star, 500u);
  EXPECT_EQ(sel.advisory, 600u);
}

TEST(SelectTau, AllWithinBandPicksSmallest) {
  EXPECT_EQ(select_tau(means({{40, 1.1}, {50, 1.0}, {60, 0.9}}), 1.0, 0.25).tau_star, 40u);
}

TEST(SelectTau, NoneWithAdvisory) {
  const auto sel = select_tau(means({{40, 3.0}, {50, 2.0}, {60, 0.3}}), 1.0, 0.25);
  EXPECT_FALSE(sel.tau_star.has_value());
  EXPECT_EQ(sel.advisory, 60u);
}

TEST(PlotCsv, CountsAndMeanRows) {
  const auto& f = fixture();
  const std::vector<std::size_t> grid{20, 40};
  const std::vector<Seed> seeds{1, 2, 3};
  const auto res = sweep(f.model, f.reserves, f.test, f.cfg, grid, seeds);
  const auto text = plot_csv(res);
  std::istringstream in(text);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "tau,seed,ratio_after");
  int points = 0, mean_rows = 0;
  std::map<std::size_t, double> parsed_means;
  while (std::getline(in, line)) {
    const auto c1 = line.find(',');
    const auto c2 = line.find(',', c1 + 1);
    if (line.substr(c1 + 1, c2 - c1 - 1) == "MEAN") {
      ++mean_rows;
      parsed_means[std::stoul(line.substr(0, c1))] = std::stod(line.substr(c2 + 1));
    } else {
      ++points;
    }
  }
  EXPECT_EQ(points, 6);
  EXPECT_EQ(mean_rows, 2);
  for (const auto& s : res.summaries) {
    EXPECT_NEAR(parsed_means.at(s.tau), s.mean_ratio.value, 1e-12);
  }
}

TEST(PlotCsv, InfiniteRatioWritten) {
  SweepResult res;
  SweepRow row;
  row.tau = 5;
  row.seed = 1;
  row.ratio_after = {INFINITY, true};
  res.rows.push_back(row);
  res.summaries = summarize(res.rows);
  EXPECT_EQ(plot_csv(res), "tau,seed,ratio_after\n5,1,inf\n5,MEAN,inf\n");
}
