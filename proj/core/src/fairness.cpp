#include "samplation/fairness.hpp"

#include <algorithm>
#include <limits>

#include "json.hpp"
#include "samplation/error.hpp"

namespace samplation {

std::string to_string(ConditionStatus s) {
  switch (s) {
    case ConditionStatus::pass: return "pass";
    case ConditionStatus::fail: return "fail";
    case ConditionStatus::attested: return "attested";
    case ConditionStatus::not_checkable: return "not-checkable";
  }
  return "not-checkable";
}

namespace {

ConditionStatus status_from_string(const std::string& s) {
  if (s == "pass") return ConditionStatus::pass;
  if (s == "fail") return ConditionStatus::fail;
  if (s == "attested") return ConditionStatus::attested;
  if (s == "not-checkable") return ConditionStatus::not_checkable;
  throw ParseError("unknown condition status '" + s + "'");
}

}  // namespace

bool ApplicabilityReport::any_failure() const {
  return std::any_of(conditions.begin(), conditions.end(),
                     [](const ConditionResult& c) { return c.status == ConditionStatus::fail; });
}

std::vector<double> shares_from_labels(std::span<const std::size_t> predicted,
                                       std::size_t n_labels) {
  if (predicted.empty()) throw SizeError("prediction shares need a nonempty test set");
  std::vector<std::size_t> counts(n_labels, 0);
  for (std::size_t label : predicted) {
    if (label >= n_labels) throw DimensionError("predicted label out of range");
    ++counts[label];
  }
  std::vector<double> shares(n_labels);
  const auto n = static_cast<double>(predicted.size());
  for (std::size_t c = 0; c < n_labels; ++c) shares[c] = static_cast<double>(counts[c]) / n;
  return shares;
}

std::vector<double> prediction_shares(const Model& m, const Dataset& test) {
  if (test.empty()) throw SizeError("prediction shares need a nonempty test set");
  std::vector<std::size_t> labels;
  labels.reserve(test.size());
  for (const auto& p : predict(m, test)) labels.push_back(p.label);
  return shares_from_labels(labels, m.n_labels);
}

ImbalanceRatio imbalance_ratio(std::span<const double> shares, std::size_t privileged,
                               std::size_t unprivileged) {
  if (privileged >= shares.size() || unprivileged >= shares.size()) {
    throw ConfigError("group id out of range for the share vector");
  }
  if (shares[unprivileged] == 0.0) {
    return {std::numeric_limits<double>::infinity(), true};
  }
  return {shares[privileged] / shares[unprivileged], false};
}

FairnessReport evaluate(const Model& m, const Dataset& test, std::size_t privileged,
                        std::size_t unprivileged, double target) {
  if (test.empty()) throw SizeError("evaluation needs a nonempty test set");
  const auto preds = predict(m, test);

  FairnessReport r;
  r.privileged = privileged;
  r.unprivileged = unprivileged;
  r.target = target;
  r.n_test = test.size();

  std::vector<std::size_t> labels;
  labels.reserve(preds.size());
  std::size_t correct = 0;
  r.per_group_count.assign(test.n_groups(), 0);
  std::vector<std::size_t> group_correct(test.n_groups(), 0);
  for (std::size_t i = 0; i < preds.size(); ++i) {
    labels.push_back(preds[i].label);
    const bool hit = preds[i].label == test[i].label;
    correct += hit ? 1 : 0;
    ++r.per_group_count[test[i].group];
    group_correct[test[i].group] += hit ? 1 : 0;
  }
  r.shares = shares_from_labels(labels, m.n_labels);
  r.ratio = imbalance_ratio(r.shares, privileged, unprivileged);
  r.accuracy = static_cast<double>(correct) / static_cast<double>(test.size());
  r.per_group_accuracy.assign(test.n_groups(), 0.0);
  for (std::size_t g = 0; g < test.n_groups(); ++g) {
    if (r.per_group_count[g] > 0) {
      r.per_group_accuracy[g] =
          static_cast<double>(group_correct[g]) / static_cast<double>(r.per_group_count[g]);
    }
  }
  return r;
}

ApplicabilityReport check_applicability(const Dataset& train, const FairnessReport* report,
                                        const Attestations& att) {
  ApplicabilityReport out;
  const auto attested = [](int id, bool flag, std::string evidence) {
    return ConditionResult{id, flag ? ConditionStatus::attested : ConditionStatus::fail,
                           std::move(evidence)};
  };

  out.conditions[0] = attested(1, att.non_probabilistic_training_data,
                               att.non_probabilistic_training_data
                                   ? "user attests the training data are not a probabilistic sample"
                                   : "not attested: training data may come from a probabilistic "
                                     "sampling design");
  out.conditions[1] = attested(2, att.biased_pretraining,
                               att.biased_pretraining
                                   ? "user attests the model was pre-trained on selection-biased data"
                                   : "not attested: pre-training data may be unbiased");
  std::string cond3 = att.unfair_with_known_target
                          ? "user attests unfair predictions and a known target ratio"
                          : "not attested: unfairness or target level unknown";
  if (report != nullptr) {
    cond3 += "; measured ratio ";
    cond3 += report->ratio.infinite ? std::string("inf") : format_double(report->ratio.value);
    cond3 += " vs target " + format_double(report->target);
  }
  out.conditions[2] = attested(3, att.unfair_with_known_target, std::move(cond3));
  out.conditions[3] = attested(4, att.accuracy_secondary,
                               att.accuracy_secondary
                                   ? "user accepts accuracy as secondary to fairness"
                                   : "not attested: accuracy may not be sacrificed");

  const auto counts = train.group_counts();
  if (counts.empty() || train.empty()) {
    out.conditions[4] = {5, ConditionStatus::fail, "training set is empty"};
    out.conditions[5] = {6, ConditionStatus::fail, "training set is empty"};
    return out;
  }
  const auto [min_it, max_it] = std::minmax_element(counts.begin(), counts.end());
  const std::size_t minority = *min_it;
  const std::size_t majority = *max_it;
  const auto minority_group = static_cast<std::size_t>(min_it - counts.begin());
  const auto majority_group = static_cast<std::size_t>(max_it - counts.begin());

  // minority / majority >= 1/10, compared in integers.
  const bool balanced_enough = minority * 10 >= majority;
  out.conditions[4] = {
      5, balanced_enough ? ConditionStatus::pass : ConditionStatus::fail,
      "minority group " + std::to_string(minority_group) + " has " + std::to_string(minority) +
          ", majority group " + std::to_string(majority_group) + " has " +
          std::to_string(majority) + " (ratio " +
          format_double(static_cast<double>(minority) / static_cast<double>(majority)) +
          ", threshold 0.1)"};
  out.conditions[5] = {
      6, minority >= kMinMinorityCount ? ConditionStatus::pass : ConditionStatus::fail,
      "minority group " + std::to_string(minority_group) + " has " + std::to_string(minority) +
          " real instance(s); at least " + std::to_string(kMinMinorityCount) + " required"};
  return out;
}

namespace {

nlohmann::ordered_json ratio_json(const ImbalanceRatio& r) {
  return r.infinite ? nlohmann::ordered_json(nullptr) : nlohmann::ordered_json(r.value);
}

}  // namespace

std::string fairness_report_to_json(const FairnessReport& r, int indent) {
  nlohmann::ordered_json j;
  j["shares"] = r.shares;
  j["privileged"] = r.privileged;
  j["unprivileged"] = r.unprivileged;
  j["ratio"] = ratio_json(r.ratio);
  j["ratio_infinite"] = r.ratio.infinite;
  j["target"] = r.target;
  j["accuracy"] = r.accuracy;
  j["per_group_accuracy"] = r.per_group_accuracy;
  j["per_group_count"] = r.per_group_count;
  j["n_test"] = r.n_test;
  return j.dump(indent) + "\n";
}

std::string applicability_to_json(const ApplicabilityReport& r, int indent) {
  nlohmann::ordered_json j;
  auto conditions = nlohmann::ordered_json::array();
  for (const auto& c : r.conditions) {
    nlohmann::ordered_json e;
    e["id"] = c.id;
    e["status"] = to_string(c.status);
    e["evidence"] = c.evidence;
    conditions.push_back(std::move(e));
  }
  j["conditions"] = std::move(conditions);
  j["any_failure"] = r.any_failure();
  return j.dump(indent) + "\n";
}

ApplicabilityReport applicability_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    const auto& conditions = j.at("conditions");
    if (!conditions.is_array() || conditions.size() != 6) {
      throw ParseError("applicability report must list exactly six conditions");
    }
    ApplicabilityReport r;
    for (std::size_t i = 0; i < 6; ++i) {
      const auto& c = conditions[i];
      r.conditions[i].id = c.at("id").get<int>();
      if (r.conditions[i].id != static_cast<int>(i) + 1) {
        throw ParseError("applicability conditions must be ordered 1..6");
      }
      r.conditions[i].status = status_from_string(c.at("status").get<std::string>());
      r.conditions[i].evidence = c.value("evidence", std::string{});
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("applicability JSON: ") + e.what());
  }
}

}  // namespace samplation
