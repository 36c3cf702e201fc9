#include "samplation/scenario.hpp"

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "json.hpp"
#include "samplation/error.hpp"

namespace samplation {

using ojson = nlohmann::ordered_json;

void ScenarioConfig::validate() const {
  train_data.validate();
  test_data.validate();
  pretrain.validate();
  samplation.validate();
  if (train_data.dim != test_data.dim) {
    throw ConfigError("train_data and test_data must share dim");
  }
  if (train_data.group_prevalence.size() != test_data.group_prevalence.size()) {
    throw ConfigError("train_data and test_data must declare the same number of groups");
  }
  const std::size_t groups = train_data.group_prevalence.size();
  if (samplation.privileged >= groups || samplation.unprivileged >= groups) {
    throw ConfigError("privileged/unprivileged group ids exceed the group count");
  }
  if (tau_grid.empty()) throw ConfigError("tau_grid is empty");
  for (std::size_t i = 1; i < tau_grid.size(); ++i) {
    if (tau_grid[i] <= tau_grid[i - 1]) throw ConfigError("tau_grid must be strictly increasing");
  }
  if (seeds.empty() && replicates == 0) throw ConfigError("replicates must be positive");
}

StageSeeds stage_seeds(const ScenarioConfig& cfg, Seed master) {
  StageSeeds s;
  s.train_data = derive_seed(master, "train-data");
  s.test_data = derive_seed(master, "test-data");
  s.pretrain = derive_seed(master, "pretrain");
  s.reserves = derive_seed(master, "reserves");
  if (!cfg.seeds.empty()) {
    s.trials = cfg.seeds;
  } else {
    const Seed trial_root = derive_seed(master, "trials");
    for (std::size_t r = 0; r < cfg.replicates; ++r) s.trials.push_back(derive_seed(trial_root, r));
  }
  return s;
}

namespace {

void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                         const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!ok.contains(item.key())) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

SynthConfig synth_from_json(const nlohmann::json& j, SynthConfig out, const std::string& where) {
  reject_unknown_keys(j, {"n", "dim", "group_prevalence", "class_separation", "noise_sd"}, where);
  read_opt(j, "n", out.n);
  read_opt(j, "dim", out.dim);
  read_opt(j, "group_prevalence", out.group_prevalence);
  read_opt(j, "class_separation", out.class_separation);
  read_opt(j, "noise_sd", out.noise_sd);
  return out;
}

ojson synth_to_json(const SynthConfig& c) {
  ojson j;
  j["n"] = c.n;
  j["dim"] = c.dim;
  j["group_prevalence"] = c.group_prevalence;
  j["class_separation"] = c.class_separation;
  j["noise_sd"] = c.noise_sd;
  return j;
}

TrainConfig train_from_json(const nlohmann::json& j, TrainConfig out, const std::string& where) {
  reject_unknown_keys(j, {"epochs", "batch_size", "learning_rate", "l2"}, where);
  read_opt(j, "epochs", out.epochs);
  read_opt(j, "batch_size", out.batch_size);
  read_opt(j, "learning_rate", out.learning_rate);
  read_opt(j, "l2", out.l2);
  return out;
}

ojson train_to_json(const TrainConfig& c) {
  ojson j;
  j["epochs"] = c.epochs;
  j["batch_size"] = c.batch_size;
  j["learning_rate"] = c.learning_rate;
  j["l2"] = c.l2;
  return j;
}

ojson ratio_json(const ImbalanceRatio& r) {
  return r.infinite ? ojson(nullptr) : ojson(r.value);
}

ImbalanceRatio ratio_from_json(const nlohmann::json& j) {
  if (j.is_null()) return {std::numeric_limits<double>::infinity(), true};
  return {j.get<double>(), false};
}

ojson scenario_json(const ScenarioConfig& cfg) {
  ojson j;
  j["master_seed"] = cfg.master_seed;
  j["train_data"] = synth_to_json(cfg.train_data);
  j["test_data"] = synth_to_json(cfg.test_data);
  j["pretrain"] = train_to_json(cfg.pretrain);
  ojson s;
  s["target_ratio"] = cfg.samplation.target_ratio;
  s["privileged"] = cfg.samplation.privileged;
  s["unprivileged"] = cfg.samplation.unprivileged;
  s["reserve_size"] = cfg.samplation.reserve_size;
  s["k"] = cfg.samplation.k;
  s["overcorrection_band"] = cfg.samplation.overcorrection_band;
  s["finetune"] = train_to_json(cfg.samplation.finetune);
  j["samplation"] = std::move(s);
  j["tau_grid"] = cfg.tau_grid;
  j["replicates"] = cfg.replicates;
  j["seeds"] = cfg.seeds;
  ojson a;
  a["non_probabilistic_training_data"] = cfg.attestations.non_probabilistic_training_data;
  a["biased_pretraining"] = cfg.attestations.biased_pretraining;
  a["unfair_with_known_target"] = cfg.attestations.unfair_with_known_target;
  a["accuracy_secondary"] = cfg.attestations.accuracy_secondary;
  j["attestations"] = std::move(a);
  j["threads"] = cfg.threads;
  return j;
}

ojson row_json(const SweepRow& r) {
  ojson j;
  j["tau"] = r.tau;
  j["seed"] = r.seed;
  j["ratio_before"] = ratio_json(r.ratio_before);
  j["ratio_after"] = ratio_json(r.ratio_after);
  j["acc_before"] = r.acc_before;
  j["acc_after"] = r.acc_after;
  j["shares_before"] = r.shares_before;
  j["shares_after"] = r.shares_after;
  j["allocation"] = r.allocation.counts;
  return j;
}

ojson summary_json(const TauSummary& s) {
  ojson j;
  j["tau"] = s.tau;
  j["n_rows"] = s.n_rows;
  j["mean_ratio"] = ratio_json(s.mean_ratio);
  j["mean_acc_before"] = s.mean_acc_before;
  j["mean_acc_after"] = s.mean_acc_after;
  j["mean_acc_drop"] = s.mean_acc_drop;
  return j;
}

ojson optional_json(const std::optional<std::size_t>& v) {
  return v ? ojson(*v) : ojson(nullptr);
}

std::optional<std::size_t> optional_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<std::size_t>();
}

}  // namespace

ScenarioConfig scenario_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }
  ScenarioConfig cfg;
  try {
    reject_unknown_keys(j,
                        {"master_seed", "train_data", "test_data", "pretrain", "samplation",
                         "tau_grid", "replicates", "seeds", "attestations", "threads"},
                        "config");
    read_opt(j, "master_seed", cfg.master_seed);
    if (j.contains("train_data")) {
      cfg.train_data = synth_from_json(j.at("train_data"), cfg.train_data, "train_data");
    }
    if (j.contains("test_data")) {
      cfg.test_data = synth_from_json(j.at("test_data"), cfg.test_data, "test_data");
    }
    if (j.contains("pretrain")) {
      cfg.pretrain = train_from_json(j.at("pretrain"), cfg.pretrain, "pretrain");
    }
    if (j.contains("samplation")) {
      const auto& s = j.at("samplation");
      reject_unknown_keys(s,
                          {"target_ratio", "privileged", "unprivileged", "reserve_size", "k",
                           "overcorrection_band", "finetune"},
                          "samplation");
      read_opt(s, "target_ratio", cfg.samplation.target_ratio);
      read_opt(s, "privileged", cfg.samplation.privileged);
      read_opt(s, "unprivileged", cfg.samplation.unprivileged);
      read_opt(s, "reserve_size", cfg.samplation.reserve_size);
      read_opt(s, "k", cfg.samplation.k);
      read_opt(s, "overcorrection_band", cfg.samplation.overcorrection_band);
      if (s.contains("finetune")) {
        cfg.samplation.finetune =
            train_from_json(s.at("finetune"), cfg.samplation.finetune, "samplation.finetune");
      }
    }
    read_opt(j, "tau_grid", cfg.tau_grid);
    read_opt(j, "replicates", cfg.replicates);
    read_opt(j, "seeds", cfg.seeds);
    if (j.contains("attestations")) {
      const auto& a = j.at("attestations");
      reject_unknown_keys(a,
                          {"non_probabilistic_training_data", "biased_pretraining",
                           "unfair_with_known_target", "accuracy_secondary"},
                          "attestations");
      read_opt(a, "non_probabilistic_training_data",
               cfg.attestations.non_probabilistic_training_data);
      read_opt(a, "biased_pretraining", cfg.attestations.biased_pretraining);
      read_opt(a, "unfair_with_known_target", cfg.attestations.unfair_with_known_target);
      read_opt(a, "accuracy_secondary", cfg.attestations.accuracy_secondary);
    }
    read_opt(j, "threads", cfg.threads);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config JSON: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

std::string scenario_to_json(const ScenarioConfig& cfg, int indent) {
  return scenario_json(cfg).dump(indent) + "\n";
}

std::string sweep_result_to_json(const SweepResult& res, int indent) {
  ojson j;
  auto rows = ojson::array();
  for (const auto& r : res.rows) rows.push_back(row_json(r));
  j["rows"] = std::move(rows);
  auto summaries = ojson::array();
  for (const auto& s : res.summaries) summaries.push_back(summary_json(s));
  j["summaries"] = std::move(summaries);
  auto failures = ojson::array();
  for (const auto& f : res.failures) {
    ojson e;
    e["tau"] = f.tau;
    e["seed"] = f.seed;
    e["message"] = f.message;
    failures.push_back(std::move(e));
  }
  j["failures"] = std::move(failures);
  j["tau_star"] = optional_json(res.selection.tau_star);
  j["advisory_tau"] = optional_json(res.selection.advisory);
  return j.dump(indent) + "\n";
}

SweepResult sweep_result_from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    SweepResult res;
    for (const auto& r : j.at("rows")) {
      SweepRow row;
      row.tau = r.at("tau").get<std::size_t>();
      row.seed = r.at("seed").get<Seed>();
      row.ratio_before = ratio_from_json(r.at("ratio_before"));
      row.ratio_after = ratio_from_json(r.at("ratio_after"));
      row.acc_before = r.at("acc_before").get<double>();
      row.acc_after = r.at("acc_after").get<double>();
      row.shares_before = r.at("shares_before").get<std::vector<double>>();
      row.shares_after = r.at("shares_after").get<std::vector<double>>();
      row.allocation.counts = r.at("allocation").get<std::vector<std::size_t>>();
      row.allocation.tau = row.tau;
      res.rows.push_back(std::move(row));
    }
    if (j.contains("failures")) {
      for (const auto& f : j.at("failures")) {
        res.failures.push_back({f.at("tau").get<std::size_t>(), f.at("seed").get<Seed>(),
                                f.at("message").get<std::string>()});
      }
    }
    res.summaries = summarize(res.rows);
    res.selection.tau_star = optional_from_json(j, "tau_star");
    res.selection.advisory = optional_from_json(j, "advisory_tau");
    return res;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("sweep JSON: ") + e.what());
  }
}

std::string reserve_metadata_json(const Reserve& r, int indent) {
  ojson j;
  j["group"] = r.group;
  j["base_count"] = r.base_count;
  j["k"] = r.k;
  j["seed"] = r.seed;
  j["reserve_size"] = r.instances.size();
  return j.dump(indent) + "\n";
}

std::string report_json(const ScenarioConfig& cfg, Seed master_seed,
                        const ApplicabilityReport& audit, const SweepResult& res, int indent) {
  ojson j;
  j["master_seed"] = master_seed;
  j["config"] = scenario_json(cfg);
  j["applicability"] = ojson::parse(applicability_to_json(audit));

  ojson before;
  if (!res.rows.empty()) {
    before["ratio"] = ratio_json(res.rows.front().ratio_before);
    before["accuracy"] = res.rows.front().acc_before;
    before["shares"] = res.rows.front().shares_before;
  }
  j["before"] = std::move(before);

  auto curve = ojson::array();
  for (const auto& s : res.summaries) curve.push_back(summary_json(s));
  j["sweep"] = std::move(curve);

  j["target_ratio"] = cfg.samplation.target_ratio;
  j["overcorrection_band"] = cfg.samplation.overcorrection_band;
  j["tau_star"] = optional_json(res.selection.tau_star);
  j["advisory_tau"] = optional_json(res.selection.advisory);
  if (res.selection.tau_star) {
    const auto* s = res.summary(*res.selection.tau_star);
    j["ratio_at_tau_star"] = ratio_json(s->mean_ratio);
    j["acc_drop_at_tau_star"] = s->mean_acc_drop;
  } else {
    j["ratio_at_tau_star"] = nullptr;
    j["acc_drop_at_tau_star"] = nullptr;
  }
  auto failures = ojson::array();
  for (const auto& f : res.failures) {
    ojson e;
    e["tau"] = f.tau;
    e["seed"] = f.seed;
    e["message"] = f.message;
    failures.push_back(std::move(e));
  }
  j["failures"] = std::move(failures);
  return j.dump(indent) + "\n";
}

void emit_report(const ScenarioConfig& cfg, Seed master_seed, const ApplicabilityReport& audit,
                 const SweepResult& res, const std::filesystem::path& path) {
  write_text(path, report_json(cfg, master_seed, audit, res));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace samplation
