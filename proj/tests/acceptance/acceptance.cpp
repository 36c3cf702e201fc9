// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
// failure. Thresholds are fixed here.

#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "samplation/fairness.hpp"
#include "samplation/generation.hpp"
#include "samplation/model.hpp"
#include "samplation/pipeline.hpp"
#include "samplation/sampling.hpp"
#include "samplation/scenario.hpp"

namespace fs = std::filesystem;
using namespace samplation;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os.precision(precision);
  os << v;
  return os.str();
}

// 1. Reservoir uniformity.
Outcome reservoir_uniformity() {
  constexpr std::size_t kStream = 20, kSample = 5, kTrials = 200000;
  constexpr double kExpected = 0.25, kTol = 0.01, kMaxSeconds = 10.0;
  const auto t0 = Clock::now();
  std::vector<int> stream(kStream);
  std::iota(stream.begin(), stream.end(), 0);
  std::vector<std::size_t> hits(kStream, 0);
  for (std::size_t t = 0; t < kTrials; ++t) {
    for (int v : reservoir_sample(stream, kSample, derive_seed(0xACCE55, t)).items) ++hits[v];
  }
  const double elapsed = seconds_since(t0);
  double worst = 0;
  for (auto h : hits) worst = std::max(worst, std::abs(double(h) / kTrials - kExpected));
  return {worst <= kTol && elapsed < kMaxSeconds,
          "max |freq - 0.25| = " + fmt(worst) + ", " + fmt(elapsed, 3) + " s"};
}

// 2. SMOTE geometry: segment membership, bounding box, label copy.
Outcome smote_geometry() {
  constexpr int kGenerations = 1000;
  constexpr double kTol = 1e-9;
  Rng rng(0x5307E);
  std::size_t points = 0, bad = 0;
  for (int gen = 0; gen < kGenerations; ++gen) {
    const std::size_t n = 2 + rng.uniform_index(30);
    const std::size_t d = 1 + rng.uniform_index(5);
    const std::size_t k = 1 + rng.uniform_index(std::min<std::size_t>(n - 1, 7));
    const std::size_t group = rng.uniform_index(3);
    std::vector<Instance> pool;
    for (std::size_t i = 0; i < n; ++i) {
      Instance inst;
      for (std::size_t j = 0; j < d; ++j) inst.features.push_back(rng.normal() * 5 + 1);
      inst.label = inst.group = group;
      pool.push_back(std::move(inst));
    }
    if (gen % 10 == 0) pool[1].features = pool[0].features;  // duplicate points

    const auto out = smote_generate_traced(pool, 1 + rng.uniform_index(50), k, rng());
    std::vector<double> lo(d, INFINITY), hi(d, -INFINITY);
    for (const auto& p : pool) {
      for (std::size_t j = 0; j < d; ++j) {
        lo[j] = std::min(lo[j], p.features[j]);
        hi[j] = std::max(hi[j], p.features[j]);
      }
    }
    std::vector<std::vector<double>> pts;
    for (const auto& p : pool) pts.push_back(p.features);

    for (std::size_t i = 0; i < out.instances.size(); ++i) {
      ++points;
      const auto& x = out.instances[i].features;
      const auto& a = pool[out.trace[i].base].features;
      const auto& b = pool[out.trace[i].neighbor].features;
      bool ok = out.instances[i].label == pool[out.trace[i].base].label &&
                out.instances[i].group == group && out.instances[i].synthetic;

      // neighbour must be one of the base's k nearest (brute force)
      std::vector<std::pair<double, std::size_t>> dist;
      for (std::size_t q = 0; q < n; ++q) {
        if (q == out.trace[i].base) continue;
        double s = 0;
        for (std::size_t j = 0; j < d; ++j) s += (pts[q][j] - a[j]) * (pts[q][j] - a[j]);
        dist.emplace_back(s, q);
      }
      std::sort(dist.begin(), dist.end());
      bool among = false;
      for (std::size_t r = 0; r < k; ++r) among = among || dist[r].second == out.trace[i].neighbor;
      ok = ok && among;

      // projection onto the segment, independent of the stored lambda
      double ab2 = 0, dot = 0, scale = 1;
      for (std::size_t j = 0; j < d; ++j) {
        ab2 += (b[j] - a[j]) * (b[j] - a[j]);
        dot += (x[j] - a[j]) * (b[j] - a[j]);
        scale = std::max({scale, std::abs(a[j]), std::abs(b[j])});
      }
      const double t = ab2 > 0 ? dot / ab2 : 0.0;
      double resid = 0;
      for (std::size_t j = 0; j < d; ++j) {
        resid = std::max(resid, std::abs(x[j] - (a[j] + t * (b[j] - a[j]))));
      }
      ok = ok && resid <= kTol * scale && t >= -kTol && t <= 1 + kTol;
      for (std::size_t j = 0; j < d; ++j) {
        ok = ok && x[j] >= lo[j] - kTol * scale && x[j] <= hi[j] + kTol * scale;
      }
      bad += ok ? 0 : 1;
    }
  }
  return {bad == 0, std::to_string(points - bad) + "/" + std::to_string(points) +
                        " synthetic points valid over " + std::to_string(kGenerations) +
                        " generations"};
}

// 3. Gradient oracle: central differences, step 1e-5.
Outcome gradient_oracle() {
  constexpr int kPairs = 100;
  constexpr double kStep = 1e-5, kMaxRel = 1e-4;
  Rng rng(0x62AD);
  double worst = 0;
  for (int p = 0; p < kPairs; ++p) {
    const std::size_t d = 1 + rng.uniform_index(5);
    const std::size_t c = 2 + rng.uniform_index(3);
    Model m(d, c);
    for (auto& w : m.weights) w = rng.normal();
    for (auto& b : m.bias) b = rng.normal();
    Dataset batch(d, c, c);
    const std::size_t n = 1 + rng.uniform_index(32);
    for (std::size_t i = 0; i < n; ++i) {
      Instance inst;
      for (std::size_t j = 0; j < d; ++j) inst.features.push_back(2 * rng.normal());
      inst.label = inst.group = rng.uniform_index(c);
      batch.push_back(inst);
    }
    const double l2 = rng.uniform01();
    const auto lg = loss_and_grad(m, batch, l2);
    const auto check = [&](double analytic, const std::function<void(Model&, double)>& nudge) {
      Model plus = m, minus = m;
      nudge(plus, kStep);
      nudge(minus, -kStep);
      const double numeric = (loss(plus, batch, l2) - loss(minus, batch, l2)) / (2 * kStep);
      const double rel = std::abs(analytic - numeric) /
                         std::max({std::abs(analytic), std::abs(numeric), 1e-6});
      worst = std::max(worst, rel);
    };
    for (std::size_t w = 0; w < m.weights.size(); ++w) {
      check(lg.grad.weights[w], [w](Model& x, double h) { x.weights[w] += h; });
    }
    for (std::size_t b = 0; b < m.bias.size(); ++b) {
      check(lg.grad.bias[b], [b](Model& x, double h) { x.bias[b] += h; });
    }
  }
  return {worst < kMaxRel, "max relative error " + fmt(worst, 3)};
}

// 4. Reverse-allocation exactness against integer largest-remainder.
Outcome reverse_allocation_exact() {
  std::size_t cases = 0, bad = 0;
  for (int i = 0; i <= 20; ++i) {
    for (int j = 0; j <= 20; ++j) {
      if (i + j == 0) continue;
      const double a = 0.05 * i, b = 0.05 * j;
      const std::vector<double> shares{a / (a + b), b / (a + b)};
      for (std::size_t tau = 1; tau <= 50; ++tau) {
        ++cases;
        // Group 0 gets tau * share_1 = tau * j / (i + j), exactly.
        const std::size_t den = i + j;
        const std::size_t f0 = tau * j / den, r0 = tau * j % den;
        const std::size_t f1 = tau * i / den, r1 = tau * i % den;
        std::vector<std::size_t> expect{f0, f1};
        if (f0 + f1 < tau) ++expect[r0 >= r1 ? 0 : 1];
        const auto got = reverse_allocation(shares, tau);
        const bool ok = got.counts == expect && got.counts[0] + got.counts[1] == tau;
        bad += ok ? 0 : 1;
      }
    }
  }
  return {bad == 0, std::to_string(cases - bad) + "/" + std::to_string(cases) + " cases exact"};
}

struct Scenario {
  SweepResult result;
  double seconds = 0;
};

Scenario run_default_scenario() {
  const auto t0 = Clock::now();
  const ScenarioConfig cfg = scenario_from_json(read_text(SAMPLATION_DEFAULT_CONFIG));
  const auto seeds = stage_seeds(cfg, cfg.master_seed);
  SynthConfig tr = cfg.train_data, te = cfg.test_data;
  tr.seed = seeds.train_data;
  te.seed = seeds.test_data;
  const Dataset train = generate_synthetic(tr), test = generate_synthetic(te);
  TrainConfig pc = cfg.pretrain;
  pc.seed = seeds.pretrain;
  const Model m = pretrain(train, pc);
  const auto reserves = build_reserves(train, cfg.samplation.reserve_size, cfg.samplation.k,
                                       seeds.reserves);
  Scenario s;
  s.result = sweep(m, reserves, test, cfg.samplation, cfg.tau_grid, seeds.trials, cfg.threads);
  s.seconds = seconds_since(t0);
  return s;
}

// 5. Desk-scale replication of the ratio-vs-tau curve.
Outcome desk_replication(const Scenario& s) {
  constexpr double kMinRatioBefore = 3.0, kBand = 0.25, kMaxAccDrop = 0.05, kMaxSeconds = 60.0;
  const auto& res = s.result;
  if (res.rows.empty()) return {false, "sweep produced no rows"};
  double before = 0;
  for (const auto& r : res.rows) before += r.ratio_before.value;
  before /= double(res.rows.size());
  const bool a = before >= kMinRatioBefore && !res.rows[0].ratio_before.infinite;

  const auto sel = select_tau(res.summaries, 1.0, kBand);
  const TauSummary* star = sel.tau_star ? res.summary(*sel.tau_star) : nullptr;
  const bool b = star != nullptr && std::abs(star->mean_ratio.value - 1.0) <= kBand;

  const TauSummary* last = res.summary(100);
  const bool c = last != nullptr && !last->mean_ratio.infinite && last->mean_ratio.value < 1.0;

  const bool d = star != nullptr && star->mean_acc_drop <= kMaxAccDrop;
  const bool t = s.seconds < kMaxSeconds;

  std::string detail = "(a) ratio_before " + fmt(before) + (a ? " ok" : " FAIL");
  detail += "; (b) tau* " + (star ? std::to_string(star->tau) + " mean " + fmt(star->mean_ratio.value)
                                  : std::string("none"));
  detail += b ? " ok" : " FAIL";
  detail += "; (c) mean@100 " + (last ? fmt(last->mean_ratio.value) : std::string("n/a"));
  detail += c ? " ok" : " FAIL";
  detail += "; (d) acc drop@tau* " + (star ? fmt(star->mean_acc_drop) : std::string("n/a"));
  detail += d ? " ok" : " FAIL";
  detail += "; " + fmt(s.seconds, 3) + " s";
  return {a && b && c && d && t, detail};
}

std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](auto x, auto y) { return v[x] < v[y]; });
  std::vector<double> rank(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double r = (double(i) + double(j)) / 2.0 + 1.0;
    for (std::size_t q = i; q <= j; ++q) rank[idx[q]] = r;
    i = j + 1;
  }
  return rank;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / double(x.size());
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / double(y.size());
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (x[i] - mx) * (y[i] - my);
    sxx += (x[i] - mx) * (x[i] - mx);
    syy += (y[i] - my) * (y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

// 6. Monotone trend.
Outcome monotone_trend(const Scenario& s) {
  constexpr double kMaxSpearman = -0.8;
  std::vector<double> taus, means;
  for (const auto& sum : s.result.summaries) {
    taus.push_back(double(sum.tau));
    means.push_back(sum.mean_ratio.value);
  }
  if (taus.size() < 3) return {false, "too few grid points"};
  const double rho = pearson(average_ranks(taus), average_ranks(means));
  return {rho <= kMaxSpearman, "Spearman rho = " + fmt(rho)};
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string("\"") + SAMPLATION_CLI_PATH + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

// 7. Byte-identical CLI sweeps.
Outcome cli_determinism() {
  const fs::path root = fs::current_path() / "acceptance_runs";
  fs::remove_all(root);
  const std::string cfg = std::string("--config \"") + SAMPLATION_DEFAULT_CONFIG + "\"";
  const int c1 = run_cli("sweep " + cfg + " --seed 20240501 --out \"" + (root / "a").string() + "\"");
  const int c2 = run_cli("sweep " + cfg + " --seed 20240501 --out \"" + (root / "b").string() + "\"");
  if (c1 != 0 || c2 != 0) {
    return {false, "sweep exit codes " + std::to_string(c1) + ", " + std::to_string(c2)};
  }
  for (const char* f : {"plot.csv", "report.json", "sweep.json", "audit.json"}) {
    if (read_text(root / "a" / f) != read_text(root / "b" / f)) {
      return {false, std::string(f) + " differs"};
    }
  }
  return {true, "plot.csv, report.json, sweep.json, audit.json identical"};
}

// 8. Applicability gate.
Outcome applicability_gate() {
  const fs::path dir = fs::current_path() / "acceptance_runs" / "gate";
  fs::remove_all(dir);
  fs::create_directories(dir);
  Dataset train(2, 2, 2);
  Rng rng(8);
  for (int i = 0; i < 200; ++i) train.push_back({{rng.normal(), rng.normal()}, 0, 0, false});
  train.push_back({{1.5, 0.0}, 1, 1, false});
  write_csv(train, dir / "train.csv");
  const std::string cfg = std::string("--config \"") + SAMPLATION_DEFAULT_CONFIG + "\"";
  const std::string train_arg = " --train \"" + (dir / "train.csv").string() + "\"";

  const int audit = run_cli("audit " + cfg + train_arg + " --out \"" + dir.string() + "\"");
  bool cond6_fail = false;
  try {
    const auto report = applicability_from_json(read_text(dir / "audit.json"));
    cond6_fail = report.conditions[5].status == ConditionStatus::fail;
  } catch (const std::exception&) {
  }
  const int sweep_code =
      run_cli("sweep " + cfg + train_arg + " --out \"" + (dir / "sweep").string() + "\"");
  const bool no_outputs = !fs::exists(dir / "sweep" / "report.json");
  const bool ok = audit == 3 && cond6_fail && sweep_code == 3 && no_outputs;
  return {ok, "audit exit " + std::to_string(audit) + ", condition 6 " +
                  (cond6_fail ? "fail" : "not failed") + ", sweep exit " +
                  std::to_string(sweep_code)};
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](int id, const char* name, const Outcome& o) {
    std::printf("[%s] criterion %d: %s -- %s\n", o.pass ? "PASS" : "FAIL", id, name,
                o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  };
  const auto guarded = [](const std::function<Outcome()>& f) -> Outcome {
    try {
      return f();
    } catch (const std::exception& e) {
      return {false, std::string("exception: ") + e.what()};
    }
  };

  report(1, "reservoir uniformity", guarded(reservoir_uniformity));
  report(2, "SMOTE geometry", guarded(smote_geometry));
  report(3, "gradient oracle", guarded(gradient_oracle));
  report(4, "reverse-allocation exactness", guarded(reverse_allocation_exact));
  Scenario scenario;
  const auto setup = guarded([&] {
    scenario = run_default_scenario();
    return Outcome{true, ""};
  });
  report(5, "desk-scale replication",
         setup.pass ? guarded([&] { return desk_replication(scenario); }) : setup);
  report(6, "monotone trend", setup.pass ? guarded([&] { return monotone_trend(scenario); }) : setup);
  report(7, "CLI determinism", guarded(cli_determinism));
  report(8, "applicability gate", guarded(applicability_gate));

  std::printf("%d of 8 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
