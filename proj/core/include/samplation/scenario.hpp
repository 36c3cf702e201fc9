#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "samplation/dataset.hpp"
#include "samplation/fairness.hpp"
#include "samplation/generation.hpp"
#include "samplation/model.hpp"
#include "samplation/pipeline.hpp"

namespace samplation {

/// Everything needed to run an experiment from scratch. Loaded from JSON;
/// absent keys keep the defaults below, which form the desk-scale scenario.
struct ScenarioConfig {
  Seed master_seed = 20240501;
  SynthConfig train_data{.n = 2000, .dim = 2, .group_prevalence = {0.9, 0.1},
                         .class_separation = 1.5, .noise_sd = 1.0, .seed = 0};
  SynthConfig test_data{.n = 1000, .dim = 2, .group_prevalence = {0.5, 0.5},
                        .class_separation = 1.5, .noise_sd = 1.0, .seed = 0};
  TrainConfig pretrain{.epochs = 20, .batch_size = 32, .learning_rate = 0.1, .l2 = 1e-4};
  SamplationConfig samplation;
  std::vector<std::size_t> tau_grid = desk_scale_tau_grid();
  std::size_t replicates = 5;
  /// Explicit trial seeds; derived from the master seed when empty.
  std::vector<Seed> seeds;
  Attestations attestations;
  std::size_t threads = 1;

  void validate() const;
};

/// Stream tags used to derive the per-stage seeds from the master seed.
struct StageSeeds {
  Seed train_data, test_data, pretrain, reserves;
  std::vector<Seed> trials;
};

/// Seeds not set explicitly in `cfg` are derived from `master`.
StageSeeds stage_seeds(const ScenarioConfig& cfg, Seed master);

ScenarioConfig scenario_from_json(const std::string& text);
std::string scenario_to_json(const ScenarioConfig& cfg, int indent = 2);

std::string sweep_result_to_json(const SweepResult& res, int indent = 2);
SweepResult sweep_result_from_json(const std::string& text);

std::string reserve_metadata_json(const Reserve& r, int indent = 2);

/// Bundles the configuration, applicability audit, per-tau means with
/// accuracy deltas and the tau selection into one JSON document.
std::string report_json(const ScenarioConfig& cfg, Seed master_seed,
                        const ApplicabilityReport& audit, const SweepResult& res,
                        int indent = 2);
void emit_report(const ScenarioConfig& cfg, Seed master_seed,
                 const ApplicabilityReport& audit, const SweepResult& res,
                 const std::filesystem::path& path);

/// Whole-file helpers shared by the CLI and tests.
std::string read_text(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace samplation
