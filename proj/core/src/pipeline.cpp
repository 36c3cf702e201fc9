#include "samplation/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <thread>

#include "samplation/error.hpp"

namespace samplation {

void SamplationConfig::validate() const {
  if (!(target_ratio > 0.0) || !std::isfinite(target_ratio)) {
    throw ConfigError("target_ratio must be finite and > 0");
  }
  if (privileged == unprivileged) {
    throw ConfigError("privileged and unprivileged groups must differ");
  }
  if (!(overcorrection_band > 0.0) || !std::isfinite(overcorrection_band)) {
    throw ConfigError("overcorrection_band must be finite and > 0");
  }
  if (k == 0) throw ConfigError("k must be at least 1");
  finetune.validate();
}

const TauSummary* SweepResult::summary(std::size_t tau) const {
  for (const auto& s : summaries) {
    if (s.tau == tau) return &s;
  }
  return nullptr;
}

SweepRow samplate(const Model& m, std::span<const Reserve> reserves, const Dataset& test,
                  const SamplationConfig& cfg, Seed seed) {
  return samplate_with_model(m, reserves, test, cfg, seed).row;
}

TrialOutcome samplate_with_model(const Model& m, std::span<const Reserve> reserves,
                                 const Dataset& test, const SamplationConfig& cfg, Seed seed) {
  cfg.validate();
  const auto before = evaluate(m, test, cfg.privileged, cfg.unprivileged, cfg.target_ratio);

  SweepRow row;
  row.tau = cfg.tau;
  row.seed = seed;
  row.ratio_before = before.ratio;
  row.acc_before = before.accuracy;
  row.shares_before = before.shares;
  row.allocation = reverse_allocation(before.shares, cfg.tau);

  const Dataset sample = draw_from_reserves(reserves, row.allocation, derive_seed(seed, "draw"));
  TrainConfig ft = cfg.finetune;
  ft.seed = derive_seed(seed, "finetune");
  Model tuned = finetune(m, sample, ft);

  const auto after = evaluate(tuned, test, cfg.privileged, cfg.unprivileged, cfg.target_ratio);
  row.ratio_after = after.ratio;
  row.acc_after = after.accuracy;
  row.shares_after = after.shares;
  return {std::move(row), std::move(tuned)};
}

std::vector<TauSummary> summarize(std::span<const SweepRow> rows) {
  std::map<std::size_t, std::vector<const SweepRow*>> by_tau;
  for (const auto& r : rows) by_tau[r.tau].push_back(&r);

  std::vector<TauSummary> out;
  for (const auto& [tau, group] : by_tau) {
    TauSummary s;
    s.tau = tau;
    s.n_rows = group.size();
    double ratio_sum = 0.0, before_sum = 0.0, after_sum = 0.0;
    bool infinite = false;
    for (const auto* r : group) {
      infinite = infinite || r->ratio_after.infinite;
      ratio_sum += r->ratio_after.value;
      before_sum += r->acc_before;
      after_sum += r->acc_after;
    }
    const auto n = static_cast<double>(group.size());
    s.mean_ratio = infinite ? ImbalanceRatio{std::numeric_limits<double>::infinity(), true}
                            : ImbalanceRatio{ratio_sum / n, false};
    s.mean_acc_before = before_sum / n;
    s.mean_acc_after = after_sum / n;
    s.mean_acc_drop = s.mean_acc_before - s.mean_acc_after;
    out.push_back(s);
  }
  return out;
}

TauSelection select_tau(std::span<const TauSummary> summaries, double target, double band) {
  std::vector<const TauSummary*> sorted;
  for (const auto& s : summaries) sorted.push_back(&s);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const TauSummary* a, const TauSummary* b) { return a->tau < b->tau; });

  TauSelection sel;
  double best = std::numeric_limits<double>::infinity();
  for (const auto* s : sorted) {
    if (s->mean_ratio.infinite) continue;
    const double gap = std::abs(s->mean_ratio.value - target);
    if (!sel.tau_star && gap <= band) sel.tau_star = s->tau;
    if (gap < best) {
      best = gap;
      sel.advisory = s->tau;
    }
  }
  return sel;
}

SweepResult sweep(const Model& m, std::span<const Reserve> reserves, const Dataset& test,
                  const SamplationConfig& cfg, std::span<const std::size_t> tau_grid,
                  std::span<const Seed> seeds, std::size_t threads) {
  cfg.validate();
  if (tau_grid.empty()) throw ConfigError("tau grid is empty");
  if (!std::is_sorted(tau_grid.begin(), tau_grid.end(), std::less_equal<>{})) {
    throw ConfigError("tau grid must be strictly increasing");
  }
  if (seeds.empty()) throw ConfigError("sweep needs at least one seed");

  struct Trial {
    std::size_t tau;
    Seed seed;
    std::optional<SweepRow> row;
    std::optional<SweepFailure> failure;
    std::exception_ptr error;
  };
  std::vector<Trial> trials;
  trials.reserve(tau_grid.size() * seeds.size());
  for (std::size_t tau : tau_grid) {
    for (Seed s : seeds) trials.push_back({tau, s, std::nullopt, std::nullopt, nullptr});
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < trials.size(); i = next++) {
      auto& t = trials[i];
      SamplationConfig trial_cfg = cfg;
      trial_cfg.tau = t.tau;
      try {
        t.row = samplate(m, reserves, test, trial_cfg, derive_seed(t.seed, t.tau));
        t.row->seed = t.seed;
      } catch (const CapacityError& e) {
        t.failure = SweepFailure{t.tau, t.seed, e.what()};
      } catch (...) {
        t.error = std::current_exception();
      }
    }
  };

  const std::size_t n_threads = std::clamp<std::size_t>(threads, 1, trials.size());
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < n_threads; ++i) pool.emplace_back(worker);
  }

  SweepResult res;
  for (auto& t : trials) {
    if (t.error) std::rethrow_exception(t.error);
    if (t.row) res.rows.push_back(std::move(*t.row));
    if (t.failure) res.failures.push_back(std::move(*t.failure));
  }
  res.summaries = summarize(res.rows);
  res.selection = select_tau(res.summaries, cfg.target_ratio, cfg.overcorrection_band);
  return res;
}

namespace {

std::vector<std::size_t> scaled_grid(std::size_t unit) {
  std::vector<std::size_t> grid;
  for (std::size_t t = 40; t <= 65; t += 5) grid.push_back(t * unit);
  for (std::size_t t = 70; t <= 80; t += 1) grid.push_back(t * unit);
  for (std::size_t t = 85; t <= 100; t += 5) grid.push_back(t * unit);
  return grid;
}

std::string ratio_text(const ImbalanceRatio& r) {
  return r.infinite ? std::string("inf") : format_double(r.value);
}

}  // namespace

std::vector<std::size_t> full_scale_tau_grid() { return scaled_grid(10); }
std::vector<std::size_t> desk_scale_tau_grid() { return scaled_grid(1); }

std::string plot_csv(const SweepResult& res) {
  std::string out = "tau,seed,ratio_after\n";
  for (const auto& s : res.summaries) {
    for (const auto& r : res.rows) {
      if (r.tau != s.tau) continue;
      out += std::to_string(r.tau) + "," + std::to_string(r.seed) + "," +
             ratio_text(r.ratio_after) + "\n";
    }
    out += std::to_string(s.tau) + ",MEAN," + ratio_text(s.mean_ratio) + "\n";
  }
  return out;
}

void emit_plot_csv(const SweepResult& res, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  const auto text = plot_csv(res);
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace samplation
