#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "samplation/dataset.hpp"
#include "samplation/fairness.hpp"
#include "samplation/generation.hpp"
#include "samplation/model.hpp"
#include "samplation/sampling.hpp"

namespace samplation {

/// Parameters of one remediation trial.
struct SamplationConfig {
  std::size_t tau = 75;
  double target_ratio = 1.0;
  std::size_t privileged = 0;
  std::size_t unprivileged = 1;
  std::size_t reserve_size = 1600;
  std::size_t k = 5;
  double overcorrection_band = 0.25;
  TrainConfig finetune{.epochs = 5, .batch_size = 10, .learning_rate = 0.07, .l2 = 0.0};

  void validate() const;
};

/// One fine-tuning trial.
struct SweepRow {
  std::size_t tau = 0;
  Seed seed = 0;
  ImbalanceRatio ratio_before;
  ImbalanceRatio ratio_after;
  double acc_before = 0.0;
  double acc_after = 0.0;
  std::vector<double> shares_before;
  std::vector<double> shares_after;
  Allocation allocation;
};

/// Per-tau aggregate over seeds (the mean curve).
struct TauSummary {
  std::size_t tau = 0;
  std::size_t n_rows = 0;
  ImbalanceRatio mean_ratio;  // infinite when any row is
  double mean_acc_before = 0.0;
  double mean_acc_after = 0.0;
  /// mean_acc_before - mean_acc_after; positive means accuracy was lost.
  double mean_acc_drop = 0.0;
};

struct SweepFailure {
  std::size_t tau = 0;
  Seed seed = 0;
  std::string message;
};

struct TauSelection {
  std::optional<std::size_t> tau_star;
  /// tau whose mean ratio is closest to the target; set whether or not a
  /// tau_star was found.
  std::optional<std::size_t> advisory;
};

struct SweepResult {
  std::vector<SweepRow> rows;  // (tau, seed-index) order
  std::vector<TauSummary> summaries;  // one per grid tau with at least one row
  std::vector<SweepFailure> failures;
  TauSelection selection;

  const TauSummary* summary(std::size_t tau) const;
};

/// Evaluate, allocate by reverse shares, draw from reserves, fine-tune a
/// copy of `m`, re-evaluate. Fine-tuning and drawing derive their seeds from
/// `seed`.
SweepRow samplate(const Model& m, std::span<const Reserve> reserves, const Dataset& test,
                  const SamplationConfig& cfg, Seed seed);

struct TrialOutcome {
  SweepRow row;
  Model tuned;
};

/// samplate that also returns the fine-tuned model.
TrialOutcome samplate_with_model(const Model& m, std::span<const Reserve> reserves,
                                 const Dataset& test, const SamplationConfig& cfg, Seed seed);

/// Means over rows grouped by tau, in ascending tau order.
std::vector<TauSummary> summarize(std::span<const SweepRow> rows);

/// Smallest tau whose mean ratio is within `band` of `target`; the advisory
/// is the tau minimising |mean - target| (lowest tau on ties).
TauSelection select_tau(std::span<const TauSummary> summaries, double target, double band);

/// One samplate trial per (tau, seed). Every trial starts from `m`. Capacity
/// errors are recorded per trial and the sweep continues. Trials run on up
/// to `threads` workers; the output does not depend on the thread count.
SweepResult sweep(const Model& m, std::span<const Reserve> reserves, const Dataset& test,
                  const SamplationConfig& cfg, std::span<const std::size_t> tau_grid,
                  std::span<const Seed> seeds, std::size_t threads = 1);

/// Full-scale grid: 400..650 step 50, 700..800 step 10, 850..1000 step 50.
std::vector<std::size_t> full_scale_tau_grid();
/// The same grid at one tenth scale: 40..65 step 5, 70..80 step 1, 85..100 step 5.
std::vector<std::size_t> desk_scale_tau_grid();

/// `tau,seed,ratio_after` rows followed, per tau, by `tau,MEAN,ratio_mean`.
std::string plot_csv(const SweepResult& res);
void emit_plot_csv(const SweepResult& res, const std::filesystem::path& path);

}  // namespace samplation
