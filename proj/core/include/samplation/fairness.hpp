#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "samplation/dataset.hpp"
#include "samplation/model.hpp"

namespace samplation {

/// privileged share / unprivileged share. A zero denominator yields
/// +infinity with `infinite` set instead of throwing.
struct ImbalanceRatio {
  double value = 0.0;
  bool infinite = false;
};

struct FairnessReport {
  std::vector<double> shares;  // predicted-label proportions on the test set
  std::size_t privileged = 0;
  std::size_t unprivileged = 1;
  ImbalanceRatio ratio;
  double target = 1.0;
  double accuracy = 0.0;
  std::vector<double> per_group_accuracy;  // 0 for groups absent from the test set
  std::vector<std::size_t> per_group_count;
  std::size_t n_test = 0;
};

enum class ConditionStatus { pass, fail, attested, not_checkable };

std::string to_string(ConditionStatus s);

struct ConditionResult {
  int id = 0;
  ConditionStatus status = ConditionStatus::not_checkable;
  std::string evidence;
};

/// The six applicability conditions, ids 1..6 in order.
struct ApplicabilityReport {
  std::array<ConditionResult, 6> conditions;

  bool any_failure() const;
};

/// User statements for the conditions no program can verify.
struct Attestations {
  bool non_probabilistic_training_data = false;  // 1
  bool biased_pretraining = false;               // 2
  bool unfair_with_known_target = false;         // 3
  bool accuracy_secondary = false;               // 4
};

/// Proportion of `predicted` labels equal to each value in [0, n_labels).
std::vector<double> shares_from_labels(std::span<const std::size_t> predicted,
                                       std::size_t n_labels);

/// Proportion of test instances predicted as each label (label == group).
std::vector<double> prediction_shares(const Model& m, const Dataset& test);

ImbalanceRatio imbalance_ratio(std::span<const double> shares, std::size_t privileged,
                               std::size_t unprivileged);

FairnessReport evaluate(const Model& m, const Dataset& test, std::size_t privileged,
                        std::size_t unprivileged, double target = 1.0);

/// Minimum training minority/majority ratio accepted by condition 5.
inline constexpr double kMinImbalanceRatio = 0.1;
/// Minimum real instances in the smallest group (condition 6).
inline constexpr std::size_t kMinMinorityCount = 2;

/// Conditions 5 and 6 are computed from the training group counts; 1 to 4
/// come from `attestations`. `report`, when given, adds the measured ratio to
/// condition 3's evidence.
ApplicabilityReport check_applicability(const Dataset& train,
                                        const FairnessReport* report,
                                        const Attestations& attestations);

std::string fairness_report_to_json(const FairnessReport& r, int indent = 2);
std::string applicability_to_json(const ApplicabilityReport& r, int indent = 2);
ApplicabilityReport applicability_from_json(const std::string& text);

}  // namespace samplation
