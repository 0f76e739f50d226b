#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <iostream>

#include "cxr/charts.hpp"
#include "cxr/config.hpp"
#include "cxr/dataset.hpp"
#include "cxr/errors.hpp"
#include "cxr/metrics.hpp"
#include "cxr/report.hpp"
#include "cxr/training.hpp"

namespace fs = std::filesystem;
using namespace cxr;

namespace {

constexpr const char* kVersion = "0.1.0";

// exit codes: 0 success, 1 partial run, 2 configuration/input error
constexpr int kExitPartial = 1;
constexpr int kExitConfigError = 2;

std::string now_utc() {
  const std::time_t t =
      std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

struct CliOverrides {
  std::string config_path;
  std::string output_dir;
  std::vector<int> synthetic;  // NPOS NNEG
  std::uint64_t seed = 0;
  bool seed_set = false;
  int jobs = 0;
};

ExperimentConfig effective_config(const CliOverrides& cli) {
  ExperimentConfig config = cli.config_path.empty()
                                ? default_config()
                                : parse_config(cli.config_path);
  if (!cli.output_dir.empty()) config.output_dir = cli.output_dir;
  if (cli.jobs > 0) config.jobs = cli.jobs;
  if (cli.seed_set) {
    config.ingest_seed = cli.seed;
    config.split_seed = cli.seed;
    config.training.seed = cli.seed;
  }
  if (cli.synthetic.size() == 2) {
    config.synthetic_pos = cli.synthetic[0];
    config.synthetic_neg = cli.synthetic[1];
  }
  config.validate();
  return config;
}

DatasetManifest make_manifest(const ExperimentConfig& config) {
  if (config.synthetic_pos > 0 || config.synthetic_neg > 0) {
    const std::string dir =
        (fs::path(config.output_dir) / "synthetic").string();
    return generate_synthetic(dir, config.synthetic_pos, config.synthetic_neg,
                              config.synthetic_image_size, config.ingest_seed);
  }
  if (config.cohen_root.empty() || config.kaggle_root.empty()) {
    throw ValidationError(
        "dataset.cohen_root and dataset.kaggle_root must be set (or use "
        "--synthetic NPOS NNEG)");
  }
  if (!fs::exists(config.cohen_root)) {
    throw IngestError("cohen_root does not exist: " + config.cohen_root);
  }
  if (!fs::exists(config.kaggle_root)) {
    throw IngestError("kaggle_root does not exist: " + config.kaggle_root);
  }
  const std::string metadata =
      config.cohen_metadata.empty()
          ? (fs::path(config.cohen_root) / "metadata.csv").string()
          : config.cohen_metadata;

  std::vector<std::string> warnings;
  auto positives = ingest_cohen(config.cohen_root, metadata, &warnings);
  auto negatives = ingest_kaggle_pneumonia(config.kaggle_root,
                                           config.kaggle_fraction,
                                           config.ingest_seed);
  // positives then negatives; kaggle paths are re-rooted below
  std::vector<ImageRecord> records = positives;

  // Record paths resolve against a single root: keep absolute per-source
  // roots out of the manifest by anchoring at the filesystem root when
  // the two sources differ.
  std::string provenance = "cohen=" + config.cohen_root +
                           " kaggle=" + config.kaggle_root +
                           " fraction=" + std::to_string(config.kaggle_fraction);
  for (const auto& w : warnings) provenance += "; warning: " + w;

  for (auto& rec : records) {
    rec.relative_path =
        fs::absolute(fs::path(config.cohen_root) / rec.relative_path).string();
  }
  for (auto rec : negatives) {
    rec.relative_path =
        fs::absolute(fs::path(config.kaggle_root) / rec.relative_path).string();
    records.push_back(std::move(rec));
  }
  return build_manifest(std::move(records), "/", provenance,
                        config.ingest_seed);
}

void print_counts(const DatasetManifest& manifest) {
  std::cout << manifest.records.size() << " records ("
            << manifest.count(ClassLabel::PositiveCovid) << " positive, "
            << manifest.count(ClassLabel::NegativePneumonia) << " negative)\n";
}

std::string arch_tag(ArchitectureId arch) { return to_string(arch); }

ArchitectureOutcome evaluate_architecture(
    const ExperimentConfig& config, const DatasetManifest& manifest,
    const FoldPlan& plan, ArchitectureId arch, const std::string& out_dir) {
  ArchitectureOutcome outcome;
  outcome.architecture = arch;

  CrossValidationOptions options;
  options.pretrained = config.pretrained;
  options.weights_dir = config.weights_dir;
  options.jobs = config.jobs;
  options.checkpoint_dir = (fs::path(out_dir) / "checkpoints").string();
  fs::create_directories(options.checkpoint_dir);

  const auto results = run_cross_validation(
      manifest, plan, arch, config.preprocess, config.augment, config.training,
      options);

  save_fold_results(results,
                    (fs::path(out_dir) / ("predictions_" + arch_tag(arch) + ".json"))
                        .string());

  std::vector<MetricReport> reports;
  std::vector<ConfusionMatrix> matrices;
  for (const auto& r : results) {
    reports.push_back(evaluate(r.predicted_labels, r.positive_scores,
                               r.true_labels));
    matrices.push_back(confusion_matrix(r.predicted_labels, r.true_labels));
    append_epoch_csv((fs::path(out_dir) / "epochs.csv").string(),
                     arch_tag(arch), r.fold_index, r.epoch_logs);
    try {
      const auto curve = roc_curve(r.positive_scores, r.true_labels);
      char title[96];
      std::snprintf(title, sizeof(title), "%s fold %d (AUC %.4f)",
                    arch_tag(arch).c_str(), r.fold_index, auc(curve));
      render_roc_curve((fs::path(out_dir) /
                        ("roc_" + arch_tag(arch) + "_fold" +
                         std::to_string(r.fold_index) + ".png"))
                           .string(),
                       curve, title);
    } catch (const ValidationError&) {
      // single-class fold: no curve to draw
    }
  }

  outcome.aggregate = aggregate_folds(reports);
  outcome.consolidated = consolidate_confusions(matrices);
  outcome.consolidated_accuracy = accuracy(outcome.consolidated);
  outcome.completed = true;

  write_confusion_csv(
      (fs::path(out_dir) / ("confusion_" + arch_tag(arch) + ".csv")).string(),
      outcome.consolidated);
  return outcome;
}

std::vector<std::string> list_artifacts(const std::string& out_dir) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::recursive_directory_iterator(out_dir)) {
    if (!entry.is_regular_file()) continue;
    paths.push_back(fs::relative(entry.path(), out_dir).string());
  }
  std::sort(paths.begin(), paths.end());
  return paths;
}

int cmd_ingest(const CliOverrides& cli) {
  const auto config = effective_config(cli);
  fs::create_directories(config.output_dir);
  const auto manifest = make_manifest(config);
  save_manifest(manifest, (fs::path(config.output_dir) / "manifest.json").string());
  print_counts(manifest);
  return 0;
}

int cmd_split(const CliOverrides& cli) {
  const auto config = effective_config(cli);
  const auto manifest_path = (fs::path(config.output_dir) / "manifest.json").string();
  if (!fs::exists(manifest_path)) {
    throw ValidationError("manifest not found: " + manifest_path +
                          " (run `ingest` first)");
  }
  const auto manifest = load_manifest(manifest_path);
  const auto plan = stratified_kfold(manifest, config.k, config.split_seed);
  save_fold_plan(plan, (fs::path(config.output_dir) / "foldplan.json").string());
  std::cout << "k=" << plan.k << " folds over " << manifest.records.size()
            << " records\n";
  return 0;
}

int cmd_run(const CliOverrides& cli, bool train_only, bool evaluate_only) {
  const auto config = effective_config(cli);
  fs::create_directories(config.output_dir);
  const std::string out_dir = config.output_dir;

  RunRecord record;
  record.config = config;
  record.code_version = kVersion;
  record.started_at = now_utc();

  const auto manifest_path = (fs::path(out_dir) / "manifest.json").string();
  const auto plan_path = (fs::path(out_dir) / "foldplan.json").string();
  DatasetManifest manifest;
  FoldPlan plan;
  if (fs::exists(manifest_path) && fs::exists(plan_path)) {
    manifest = load_manifest(manifest_path);
    plan = load_fold_plan(plan_path);
  } else {
    manifest = make_manifest(config);
    plan = stratified_kfold(manifest, config.k, config.split_seed);
    save_manifest(manifest, manifest_path);
    save_fold_plan(plan, plan_path);
  }
  print_counts(manifest);

  save_config(config, (fs::path(out_dir) / "config.json").string());

  if (evaluate_only) {
    // reuse persisted predictions
    for (auto arch : config.architectures) {
      const auto pred_path =
          (fs::path(out_dir) / ("predictions_" + arch_tag(arch) + ".json"))
              .string();
      ArchitectureOutcome outcome;
      outcome.architecture = arch;
      if (!fs::exists(pred_path)) {
        outcome.failure = "missing predictions: " + pred_path;
        record.partial = true;
        record.outcomes.push_back(outcome);
        continue;
      }
      const auto results = load_fold_results(pred_path);
      std::vector<MetricReport> reports;
      std::vector<ConfusionMatrix> matrices;
      for (const auto& r : results) {
        reports.push_back(
            evaluate(r.predicted_labels, r.positive_scores, r.true_labels));
        matrices.push_back(confusion_matrix(r.predicted_labels, r.true_labels));
      }
      outcome.aggregate = aggregate_folds(reports);
      outcome.consolidated = consolidate_confusions(matrices);
      outcome.consolidated_accuracy = accuracy(outcome.consolidated);
      outcome.completed = true;
      write_confusion_csv(
          (fs::path(out_dir) / ("confusion_" + arch_tag(arch) + ".csv")).string(),
          outcome.consolidated);
      record.outcomes.push_back(outcome);
    }
  } else {
    for (auto arch : config.architectures) {
      try {
        record.outcomes.push_back(
            evaluate_architecture(config, manifest, plan, arch, out_dir));
        std::cout << arch_tag(arch) << ": consolidated accuracy "
                  << format_percent(record.outcomes.back().consolidated_accuracy)
                  << "%\n";
      } catch (const std::exception& e) {
        std::cerr << arch_tag(arch) << " failed: " << e.what() << "\n";
        ArchitectureOutcome outcome;
        outcome.architecture = arch;
        outcome.failure = e.what();
        record.outcomes.push_back(outcome);
        record.partial = true;
      }
    }
  }

  if (!train_only) {
    write_metrics_csv((fs::path(out_dir) / "metrics.csv").string(),
                      record.outcomes);
    render_metric_bar_chart((fs::path(out_dir) / "chart_metrics.png").string(),
                            record.outcomes);
  }

  record.finished_at = now_utc();
  record.artifact_paths = list_artifacts(out_dir);
  record.artifact_paths.push_back("run_record.json");
  std::sort(record.artifact_paths.begin(), record.artifact_paths.end());
  save_run_record(record, (fs::path(out_dir) / "run_record.json").string());

  return record.partial ? kExitPartial : 0;
}

int cmd_report(const CliOverrides& cli) {
  const auto config = effective_config(cli);
  const std::string out_dir = config.output_dir;
  const auto record_path = (fs::path(out_dir) / "run_record.json").string();
  if (!fs::exists(record_path)) {
    throw ValidationError("run record not found: " + record_path);
  }
  auto record = load_run_record(record_path);

  std::vector<std::string> missing;
  for (const auto& rel : record.artifact_paths) {
    if (!fs::exists(fs::path(out_dir) / rel)) missing.push_back(rel);
  }
  if (!missing.empty()) {
    std::string msg = "missing artifacts:";
    for (const auto& m : missing) msg += " " + m;
    throw ValidationError(msg);
  }

  write_metrics_csv((fs::path(out_dir) / "metrics.csv").string(),
                    record.outcomes);
  write_comparison_csv((fs::path(out_dir) / "comparison.csv").string(),
                       record.outcomes);
  write_report_markdown((fs::path(out_dir) / "report.md").string(), record);
  render_metric_bar_chart((fs::path(out_dir) / "chart_metrics.png").string(),
                          record.outcomes);
  std::cout << "report written to " << out_dir << "\n";
  return record.partial ? kExitPartial : 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CNN benchmark for binary chest X-ray classification"};
  app.require_subcommand(1);

  CliOverrides cli;
  app.add_option("--config", cli.config_path, "experiment config file (JSON)");
  app.add_option("--output", cli.output_dir, "output directory");
  app.add_option("--jobs", cli.jobs, "max concurrent folds");
  auto* seed_opt = app.add_option("--seed", cli.seed,
                                  "override ingest/split/training seeds");
  app.add_option("--synthetic", cli.synthetic,
                 "use a generated dataset: NPOS NNEG")
      ->expected(2);

  auto* ingest = app.add_subcommand("ingest", "build the dataset manifest");
  auto* split = app.add_subcommand("split", "stratified k-fold plan");
  auto* train = app.add_subcommand("train", "cross-validated training");
  auto* evaluate_cmd =
      app.add_subcommand("evaluate", "metrics from persisted predictions");
  auto* report = app.add_subcommand("report", "render tables and charts");
  auto* run = app.add_subcommand("run", "end-to-end pipeline");

  CLI11_PARSE(app, argc, argv);
  cli.seed_set = seed_opt->count() > 0;

  try {
    if (ingest->parsed()) return cmd_ingest(cli);
    if (split->parsed()) return cmd_split(cli);
    if (train->parsed()) return cmd_run(cli, /*train_only=*/true,
                                        /*evaluate_only=*/false);
    if (evaluate_cmd->parsed()) return cmd_run(cli, /*train_only=*/false,
                                               /*evaluate_only=*/true);
    if (report->parsed()) return cmd_report(cli);
    if (run->parsed()) return cmd_run(cli, false, false);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const IngestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfigError;
  }
  return 0;
}
