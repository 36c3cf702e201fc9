#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <optional>

#include "CLI11.hpp"
#include "json.hpp"
#include "samplation/error.hpp"
#include "samplation/scenario.hpp"

namespace samplation::cli {

namespace fs = std::filesystem;

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<Seed> seed;
  std::string out_dir = "out";
  std::optional<std::size_t> threads;
  bool force = false;
};

struct Context {
  ScenarioConfig cfg;
  Seed master_seed = 0;
  StageSeeds seeds;
  fs::path out;
  bool force = false;
};

void add_common(CLI::App* sub, CommonOptions& opt) {
  sub->add_option("--config", opt.config_path, "Scenario config JSON (defaults apply to absent keys)")
      ->check(CLI::ExistingFile);
  sub->add_option("--seed", opt.seed, "Master seed (falls back to $SAMPLATION_SEED, then config)");
  sub->add_option("--out", opt.out_dir, "Output directory")->capture_default_str();
  sub->add_option("--threads", opt.threads, "Worker threads for sweeps");
  sub->add_flag("--force", opt.force, "Proceed despite failed applicability conditions");
}

Seed parse_seed(const std::string& text, const char* source) {
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(text, &pos, 10);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != text.size()) {
    throw ConfigError(std::string(source) + " is not an unsigned 64-bit integer: '" + text + "'");
  }
  return static_cast<Seed>(v);
}

Context make_context(const CommonOptions& opt) {
  Context ctx;
  if (!opt.config_path.empty()) ctx.cfg = scenario_from_json(read_text(opt.config_path));
  if (opt.threads) ctx.cfg.threads = *opt.threads;
  if (opt.seed) {
    ctx.master_seed = *opt.seed;
  } else if (const char* env = std::getenv("SAMPLATION_SEED"); env != nullptr && *env != '\0') {
    ctx.master_seed = parse_seed(env, "SAMPLATION_SEED");
  } else {
    ctx.master_seed = ctx.cfg.master_seed;
  }
  ctx.seeds = stage_seeds(ctx.cfg, ctx.master_seed);
  ctx.out = opt.out_dir;
  ctx.force = opt.force;
  fs::create_directories(ctx.out);
  return ctx;
}

std::size_t group_count(const Context& ctx) { return ctx.cfg.train_data.group_prevalence.size(); }

Dataset load_dataset(const Context& ctx, const std::string& path) {
  return read_csv(path, group_count(ctx), group_count(ctx));
}

std::pair<Dataset, Dataset> generate_pair(const Context& ctx) {
  SynthConfig train = ctx.cfg.train_data;
  train.seed = ctx.seeds.train_data;
  SynthConfig test = ctx.cfg.test_data;
  test.seed = ctx.seeds.test_data;
  Dataset tr = generate_synthetic(train);
  tr.set_name("train");
  Dataset te = generate_synthetic(test);
  te.set_name("test");
  return {std::move(tr), std::move(te)};
}

Model pretrain_model(const Context& ctx, const Dataset& train) {
  TrainConfig tc = ctx.cfg.pretrain;
  tc.seed = ctx.seeds.pretrain;
  return pretrain(train, tc);
}

std::vector<Reserve> load_reserves(const Context& ctx, const fs::path& dir) {
  std::vector<Reserve> reserves;
  for (std::size_t g = 0; g < group_count(ctx); ++g) {
    const auto csv = dir / ("reserve_" + std::to_string(g) + ".csv");
    if (!fs::exists(csv)) continue;
    Reserve r;
    r.group = g;
    r.instances = read_csv(csv, group_count(ctx), group_count(ctx));
    const auto meta_path = dir / ("reserve_" + std::to_string(g) + ".json");
    if (fs::exists(meta_path)) {
      try {
        const auto meta = nlohmann::json::parse(read_text(meta_path));
        r.base_count = meta.value("base_count", std::size_t{0});
        r.k = meta.value("k", std::size_t{0});
        r.seed = meta.value("seed", Seed{0});
        if (meta.value("group", g) != g) {
          throw SchemaError("reserve metadata group does not match " + meta_path.string());
        }
      } catch (const nlohmann::json::exception& e) {
        throw ParseError(meta_path.string() + ": " + e.what());
      }
    }
    for (const auto& inst : r.instances) {
      if (inst.group != g) {
        throw SchemaError("reserve file " + csv.string() + " contains group " +
                          std::to_string(inst.group));
      }
    }
    reserves.push_back(std::move(r));
  }
  if (reserves.empty()) throw IoError("no reserve_<g>.csv files found in " + dir.string());
  return reserves;
}

void write_reserves(const std::vector<Reserve>& reserves, const fs::path& dir) {
  for (const auto& r : reserves) {
    write_csv(r.instances, dir / ("reserve_" + std::to_string(r.group) + ".csv"));
    write_text(dir / ("reserve_" + std::to_string(r.group) + ".json"), reserve_metadata_json(r));
  }
}

void print_audit(const ApplicabilityReport& audit, std::ostream& out) {
  for (const auto& c : audit.conditions) {
    out << "condition " << c.id << ": " << to_string(c.status) << " (" << c.evidence << ")\n";
  }
}

// Writes audit.json and returns whether the pipeline may continue.
bool gate(const Context& ctx, const ApplicabilityReport& audit, std::ostream& out,
          std::ostream& err) {
  write_text(ctx.out / "audit.json", applicability_to_json(audit));
  print_audit(audit, out);
  if (!audit.any_failure()) return true;
  if (ctx.force) {
    err << "warning: applicability conditions failed; continuing because of --force\n";
    return true;
  }
  err << "error: applicability conditions failed; rerun with --force to override\n";
  return false;
}

std::string ratio_text(const ImbalanceRatio& r) {
  return r.infinite ? "inf" : format_double(r.value);
}

void print_sweep(const SweepResult& res, std::ostream& out) {
  if (!res.rows.empty()) {
    out << "ratio before: " << ratio_text(res.rows.front().ratio_before)
        << "  accuracy before: " << format_double(res.rows.front().acc_before) << "\n";
  }
  out << "tau\tmean_ratio\tmean_acc_after\tacc_drop\n";
  for (const auto& s : res.summaries) {
    out << s.tau << '\t' << ratio_text(s.mean_ratio) << '\t' << format_double(s.mean_acc_after)
        << '\t' << format_double(s.mean_acc_drop) << '\n';
  }
  for (const auto& f : res.failures) {
    out << "failed tau " << f.tau << " seed " << f.seed << ": " << f.message << '\n';
  }
  if (res.selection.tau_star) {
    out << "tau*: " << *res.selection.tau_star << '\n';
  } else {
    out << "tau*: none";
    if (res.selection.advisory) out << " (closest: " << *res.selection.advisory << ")";
    out << '\n';
  }
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Reverse-biased fine-tuning of unfair classifiers (samplation)", "samplation"};
  app.require_subcommand(1);

  CommonOptions common;
  std::string in_path, train_path, test_path, model_path, reserves_dir, sample_path,
      sweep_path, audit_path;
  double train_frac = 0.75;
  std::optional<std::size_t> n_override, tau_override, reserve_size_override, k_override;
  std::vector<double> prevalence_override;

  auto* gen = app.add_subcommand("gen-data", "Generate train.csv and test.csv from the config");
  gen->add_option("--n", n_override, "Override the training set size");
  gen->add_option("--prevalence", prevalence_override, "Override training group prevalences");

  auto* split_cmd = app.add_subcommand("split", "Split a dataset CSV into train.csv/test.csv");
  split_cmd->add_option("--in", in_path, "Input dataset CSV")->required()->check(CLI::ExistingFile);
  split_cmd->add_option("--train-frac", train_frac, "Training fraction in (0,1)")
      ->capture_default_str();

  auto* pre = app.add_subcommand("pretrain", "Pre-train the softmax classifier -> model.json");
  pre->add_option("--train", train_path, "Training CSV")->required()->check(CLI::ExistingFile);

  auto* audit = app.add_subcommand("audit", "Check applicability conditions -> audit.json");
  audit->add_option("--train", train_path, "Training CSV")->required()->check(CLI::ExistingFile);
  audit->add_option("--model", model_path, "Pre-trained model JSON")->check(CLI::ExistingFile);
  audit->add_option("--test", test_path, "Test CSV")->check(CLI::ExistingFile);

  auto* reserves_cmd =
      app.add_subcommand("build-reserves", "Build one SMOTE reserve per group -> reserve_<g>.csv");
  reserves_cmd->add_option("--train", train_path, "Training CSV")->required()->check(CLI::ExistingFile);
  reserves_cmd->add_option("--reserve-size", reserve_size_override, "Instances per reserve");
  reserves_cmd->add_option("--k", k_override, "SMOTE neighbour count");

  auto* ft = app.add_subcommand("finetune", "Fine-tune a model -> finetuned_model.json");
  ft->add_option("--model", model_path, "Model JSON")->required()->check(CLI::ExistingFile);
  auto* sample_opt = ft->add_option("--sample", sample_path, "Explicit fine-tuning sample CSV")
                         ->check(CLI::ExistingFile);
  auto* reserves_opt = ft->add_option("--reserves", reserves_dir, "Reserve directory")
                           ->check(CLI::ExistingDirectory);
  ft->add_option("--test", test_path, "Test CSV (required with --reserves)")
      ->check(CLI::ExistingFile);
  ft->add_option("--tau", tau_override, "Fine-tuning sample size");
  sample_opt->excludes(reserves_opt);

  auto* sweep_cmd = app.add_subcommand("sweep", "Run the tau sweep -> plot.csv, report.json");
  sweep_cmd->add_option("--train", train_path, "Training CSV (generated when absent)")
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--test", test_path, "Test CSV (generated when absent)")
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--model", model_path, "Pre-trained model (trained when absent)")
      ->check(CLI::ExistingFile);
  sweep_cmd->add_option("--reserves", reserves_dir, "Reserve directory (built when absent)")
      ->check(CLI::ExistingDirectory);

  auto* report = app.add_subcommand("report", "Rebuild report.json and plot.csv from sweep.json");
  report->add_option("--sweep", sweep_path, "sweep.json")->required()->check(CLI::ExistingFile);
  report->add_option("--audit", audit_path, "audit.json")->check(CLI::ExistingFile);

  for (auto* sub : app.get_subcommands({})) add_common(sub, common);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kUsage;
  }

  try {
    Context ctx = make_context(common);
    const auto* sub = app.get_subcommands().front();
    const std::string name = sub->get_name();

    if (name == "gen-data") {
      if (n_override) ctx.cfg.train_data.n = *n_override;
      if (!prevalence_override.empty()) ctx.cfg.train_data.group_prevalence = prevalence_override;
      ctx.cfg.validate();
      auto [train, test] = generate_pair(ctx);
      write_csv(train, ctx.out / "train.csv");
      write_csv(test, ctx.out / "test.csv");
      out << "wrote " << train.size() << " training and " << test.size() << " test instances to "
          << ctx.out.string() << "\n";
      return kOk;
    }

    if (name == "split") {
      const Dataset ds = load_dataset(ctx, in_path);
      auto [train, test] = split(ds, train_frac, derive_seed(ctx.master_seed, "split"));
      write_csv(train, ctx.out / "train.csv");
      write_csv(test, ctx.out / "test.csv");
      out << "split " << ds.size() << " -> " << train.size() << " / " << test.size() << "\n";
      return kOk;
    }

    if (name == "pretrain") {
      const Dataset train = load_dataset(ctx, train_path);
      const Model m = pretrain_model(ctx, train);
      write_text(ctx.out / "model.json", model_to_json(m));
      out << "pre-trained on " << train.size() << " instances, training loss "
          << format_double(loss(m, train, ctx.cfg.pretrain.l2)) << "\n";
      return kOk;
    }

    if (name == "audit") {
      const Dataset train = load_dataset(ctx, train_path);
      std::optional<FairnessReport> fr;
      if (!model_path.empty() && !test_path.empty()) {
        const Model m = model_from_json(read_text(model_path));
        fr = evaluate(m, load_dataset(ctx, test_path), ctx.cfg.samplation.privileged,
                      ctx.cfg.samplation.unprivileged, ctx.cfg.samplation.target_ratio);
        write_text(ctx.out / "fairness.json", fairness_report_to_json(*fr));
      }
      const auto report_ptr = fr ? &*fr : nullptr;
      const auto result = check_applicability(train, report_ptr, ctx.cfg.attestations);
      return gate(ctx, result, out, err) ? kOk : kNotApplicable;
    }

    if (name == "build-reserves") {
      const Dataset train = load_dataset(ctx, train_path);
      const auto reserves = build_reserves(
          train, reserve_size_override.value_or(ctx.cfg.samplation.reserve_size),
          k_override.value_or(ctx.cfg.samplation.k), ctx.seeds.reserves);
      write_reserves(reserves, ctx.out);
      for (const auto& r : reserves) {
        out << "reserve " << r.group << ": " << r.instances.size() << " synthetic from "
            << r.base_count << " real (k=" << r.k << ")\n";
      }
      return kOk;
    }

    if (name == "finetune") {
      const Model m = model_from_json(read_text(model_path));
      TrainConfig tc = ctx.cfg.samplation.finetune;
      tc.seed = derive_seed(ctx.master_seed, "finetune");
      if (!sample_path.empty()) {
        const Model tuned = finetune(m, load_dataset(ctx, sample_path), tc);
        write_text(ctx.out / "finetuned_model.json", model_to_json(tuned));
        out << "fine-tuned for " << tc.epochs << " epoch(s)\n";
        return kOk;
      }
      if (reserves_dir.empty() || test_path.empty()) {
        err << "error: finetune needs --sample, or --reserves together with --test\n";
        return kUsage;
      }
      const auto reserves = load_reserves(ctx, reserves_dir);
      const Dataset test = load_dataset(ctx, test_path);
      SamplationConfig sc = ctx.cfg.samplation;
      if (tau_override) sc.tau = *tau_override;
      const auto outcome =
          samplate_with_model(m, reserves, test, sc, derive_seed(ctx.master_seed, "finetune"));
      const SweepRow& row = outcome.row;
      SweepResult single;
      single.rows.push_back(row);
      single.summaries = summarize(single.rows);
      write_text(ctx.out / "trial.json", sweep_result_to_json(single));
      write_text(ctx.out / "finetuned_model.json", model_to_json(outcome.tuned));
      out << "tau " << row.tau << ": ratio " << ratio_text(row.ratio_before) << " -> "
          << ratio_text(row.ratio_after) << ", accuracy " << format_double(row.acc_before)
          << " -> " << format_double(row.acc_after) << "\n";
      return kOk;
    }

    if (name == "sweep") {
      ctx.cfg.validate();
      Dataset train, test;
      if (train_path.empty() || test_path.empty()) {
        auto generated = generate_pair(ctx);
        train = train_path.empty() ? std::move(generated.first) : load_dataset(ctx, train_path);
        test = test_path.empty() ? std::move(generated.second) : load_dataset(ctx, test_path);
      } else {
        train = load_dataset(ctx, train_path);
        test = load_dataset(ctx, test_path);
      }
      const Model m = model_path.empty() ? pretrain_model(ctx, train)
                                         : model_from_json(read_text(model_path));
      const auto before = evaluate(m, test, ctx.cfg.samplation.privileged,
                                   ctx.cfg.samplation.unprivileged,
                                   ctx.cfg.samplation.target_ratio);
      const auto audit_result = check_applicability(train, &before, ctx.cfg.attestations);
      if (!gate(ctx, audit_result, out, err)) return kNotApplicable;

      const auto reserves =
          reserves_dir.empty()
              ? build_reserves(train, ctx.cfg.samplation.reserve_size, ctx.cfg.samplation.k,
                               ctx.seeds.reserves)
              : load_reserves(ctx, reserves_dir);
      const auto res = sweep(m, reserves, test, ctx.cfg.samplation, ctx.cfg.tau_grid,
                             ctx.seeds.trials, ctx.cfg.threads);
      write_text(ctx.out / "sweep.json", sweep_result_to_json(res));
      emit_plot_csv(res, ctx.out / "plot.csv");
      emit_report(ctx.cfg, ctx.master_seed, audit_result, res, ctx.out / "report.json");
      print_sweep(res, out);
      return kOk;
    }

    if (name == "report") {
      SweepResult res = sweep_result_from_json(read_text(sweep_path));
      res.selection = select_tau(res.summaries, ctx.cfg.samplation.target_ratio,
                                 ctx.cfg.samplation.overcorrection_band);
      ApplicabilityReport audit_result;
      if (!audit_path.empty()) {
        audit_result = applicability_from_json(read_text(audit_path));
      } else {
        for (std::size_t i = 0; i < audit_result.conditions.size(); ++i) {
          audit_result.conditions[i] = {static_cast<int>(i) + 1, ConditionStatus::not_checkable,
                                        "no audit supplied"};
        }
      }
      emit_plot_csv(res, ctx.out / "plot.csv");
      emit_report(ctx.cfg, ctx.master_seed, audit_result, res, ctx.out / "report.json");
      print_sweep(res, out);
      return kOk;
    }

    err << app.help();
    return kUsage;
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << "\n";
    return kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args(argv, argv + argc);
  return run(args, out, err);
}

}  // namespace samplation::cli
