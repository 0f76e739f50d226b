#include "cxr/config.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "cxr/errors.hpp"

using json = nlohmann::json;

namespace cxr {

void ExperimentConfig::validate() const {
  if (k < 2) throw ValidationError("split.k must be >= 2");
  if (!(kaggle_fraction > 0.0 && kaggle_fraction <= 1.0)) {
    throw ValidationError("dataset.kaggle_fraction must lie in (0,1]");
  }
  if (architectures.empty()) throw ValidationError("no architectures configured");
  if (jobs < 1) throw ValidationError("jobs must be >= 1");
  preprocess.validate();
  augment.validate();
  training.validate();
}

ExperimentConfig default_config() { return ExperimentConfig{}; }

namespace {

json config_to_json(const ExperimentConfig& c) {
  json doc;
  doc["dataset"] = {{"cohen_root", c.cohen_root},
                    {"cohen_metadata", c.cohen_metadata},
                    {"kaggle_root", c.kaggle_root},
                    {"kaggle_fraction", c.kaggle_fraction},
                    {"ingest_seed", c.ingest_seed},
                    {"synthetic_pos", c.synthetic_pos},
                    {"synthetic_neg", c.synthetic_neg},
                    {"synthetic_image_size", c.synthetic_image_size}};
  doc["split"] = {{"k", c.k}, {"seed", c.split_seed}};
  json archs = json::array();
  for (auto a : c.architectures) archs.push_back(to_string(a));
  doc["architectures"] = std::move(archs);
  doc["preprocess"] = {{"target_size", c.preprocess.target_size},
                       {"interpolation", "bilinear"},
                       {"channel_mean", c.preprocess.channel_mean},
                       {"channel_std", c.preprocess.channel_std}};
  doc["augment"] = {
      {"horizontal_flip_probability", c.augment.horizontal_flip_probability},
      {"vertical_flip_probability", c.augment.vertical_flip_probability},
      {"rotation_min_degrees", c.augment.rotation_min_degrees},
      {"rotation_max_degrees", c.augment.rotation_max_degrees}};
  doc["training"] = {{"optimizer", "sgd_momentum"},
                     {"learning_rate", c.training.learning_rate},
                     {"momentum", c.training.momentum},
                     {"batch_size", c.training.batch_size},
                     {"epochs", c.training.epochs},
                     {"seed", c.training.seed}};
  doc["pretrained"] = c.pretrained;
  doc["weights_dir"] = c.weights_dir;
  doc["output_dir"] = c.output_dir;
  doc["jobs"] = c.jobs;
  return doc;
}

ExperimentConfig config_from_json(const json& doc) {
  ExperimentConfig c;
  if (doc.contains("dataset")) {
    const auto& d = doc["dataset"];
    c.cohen_root = d.value("cohen_root", c.cohen_root);
    c.cohen_metadata = d.value("cohen_metadata", c.cohen_metadata);
    c.kaggle_root = d.value("kaggle_root", c.kaggle_root);
    c.kaggle_fraction = d.value("kaggle_fraction", c.kaggle_fraction);
    c.ingest_seed = d.value("ingest_seed", c.ingest_seed);
    c.synthetic_pos = d.value("synthetic_pos", c.synthetic_pos);
    c.synthetic_neg = d.value("synthetic_neg", c.synthetic_neg);
    c.synthetic_image_size =
        d.value("synthetic_image_size", c.synthetic_image_size);
  }
  if (doc.contains("split")) {
    c.k = doc["split"].value("k", c.k);
    c.split_seed = doc["split"].value("seed", c.split_seed);
  }
  if (doc.contains("architectures")) {
    c.architectures.clear();
    for (const auto& a : doc["architectures"]) {
      c.architectures.push_back(
          architecture_from_string(a.get<std::string>()));
    }
  }
  if (doc.contains("preprocess")) {
    const auto& p = doc["preprocess"];
    c.preprocess.target_size = p.value("target_size", c.preprocess.target_size);
    if (p.contains("channel_mean")) {
      c.preprocess.channel_mean = p["channel_mean"].get<std::array<double, 3>>();
    }
    if (p.contains("channel_std")) {
      c.preprocess.channel_std = p["channel_std"].get<std::array<double, 3>>();
    }
  }
  if (doc.contains("augment")) {
    const auto& a = doc["augment"];
    c.augment.horizontal_flip_probability = a.value(
        "horizontal_flip_probability", c.augment.horizontal_flip_probability);
    c.augment.vertical_flip_probability = a.value(
        "vertical_flip_probability", c.augment.vertical_flip_probability);
    c.augment.rotation_min_degrees =
        a.value("rotation_min_degrees", c.augment.rotation_min_degrees);
    c.augment.rotation_max_degrees =
        a.value("rotation_max_degrees", c.augment.rotation_max_degrees);
  }
  if (doc.contains("training")) {
    const auto& t = doc["training"];
    c.training.learning_rate = t.value("learning_rate", c.training.learning_rate);
    c.training.momentum = t.value("momentum", c.training.momentum);
    c.training.batch_size = t.value("batch_size", c.training.batch_size);
    c.training.epochs = t.value("epochs", c.training.epochs);
    c.training.seed = t.value("seed", c.training.seed);
  }
  c.pretrained = doc.value("pretrained", c.pretrained);
  c.weights_dir = doc.value("weights_dir", c.weights_dir);
  c.output_dir = doc.value("output_dir", c.output_dir);
  c.jobs = doc.value("jobs", c.jobs);
  return c;
}

}  // namespace

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config file: " + path);
  try {
    return config_from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw ValidationError("malformed config " + path + ": " + e.what());
  }
}

ExperimentConfig config_from_json_text(const std::string& text) {
  try {
    return config_from_json(json::parse(text));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("malformed config text: ") + e.what());
  }
}

std::string config_to_json_text(const ExperimentConfig& config) {
  return config_to_json(config).dump(2);
}

void save_config(const ExperimentConfig& config, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write config: " + path);
  out << config_to_json_text(config) << "\n";
}

namespace {

json outcome_to_json(const ArchitectureOutcome& o) {
  json doc;
  doc["architecture"] = to_string(o.architecture);
  doc["completed"] = o.completed;
  doc["failure"] = o.failure;
  auto metric = [](const AggregateMetric& m) {
    return json{{"mean", m.mean}, {"stddev", m.stddev}};
  };
  doc["aggregate"] = {{"fold_count", o.aggregate.fold_count},
                      {"auc", metric(o.aggregate.auc)},
                      {"accuracy", metric(o.aggregate.accuracy)},
                      {"precision", metric(o.aggregate.precision)},
                      {"recall", metric(o.aggregate.recall)},
                      {"f1", metric(o.aggregate.f1)}};
  doc["consolidated_confusion"] = {{"tp", o.consolidated.tp},
                                   {"fp", o.consolidated.fp},
                                   {"fn", o.consolidated.fn},
                                   {"tn", o.consolidated.tn}};
  doc["consolidated_accuracy"] = o.consolidated_accuracy;
  return doc;
}

ArchitectureOutcome outcome_from_json(const json& doc) {
  ArchitectureOutcome o;
  o.architecture =
      architecture_from_string(doc.at("architecture").get<std::string>());
  o.completed = doc.at("completed").get<bool>();
  o.failure = doc.value("failure", "");
  auto metric = [](const json& m) {
    AggregateMetric out;
    out.mean = m.at("mean").get<double>();
    out.stddev = m.at("stddev").get<double>();
    return out;
  };
  const auto& a = doc.at("aggregate");
  o.aggregate.fold_count = a.at("fold_count").get<int>();
  o.aggregate.auc = metric(a.at("auc"));
  o.aggregate.accuracy = metric(a.at("accuracy"));
  o.aggregate.precision = metric(a.at("precision"));
  o.aggregate.recall = metric(a.at("recall"));
  o.aggregate.f1 = metric(a.at("f1"));
  const auto& cm = doc.at("consolidated_confusion");
  o.consolidated.tp = cm.at("tp").get<std::uint64_t>();
  o.consolidated.fp = cm.at("fp").get<std::uint64_t>();
  o.consolidated.fn = cm.at("fn").get<std::uint64_t>();
  o.consolidated.tn = cm.at("tn").get<std::uint64_t>();
  o.consolidated_accuracy = doc.at("consolidated_accuracy").get<double>();
  return o;
}

}  // namespace

void save_run_record(const RunRecord& record, const std::string& path) {
  json doc;
  doc["config"] = json::parse(config_to_json_text(record.config));
  doc["code_version"] = record.code_version;
  doc["started_at"] = record.started_at;
  doc["finished_at"] = record.finished_at;
  doc["partial"] = record.partial;
  json outcomes = json::array();
  for (const auto& o : record.outcomes) outcomes.push_back(outcome_to_json(o));
  doc["outcomes"] = std::move(outcomes);
  doc["artifact_paths"] = record.artifact_paths;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write run record: " + path);
  out << doc.dump(2) << "\n";
}

RunRecord load_run_record(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read run record: " + path);
  json doc = json::parse(in);
  RunRecord record;
  record.config = config_from_json_text(doc.at("config").dump());
  record.code_version = doc.value("code_version", "");
  record.started_at = doc.value("started_at", "");
  record.finished_at = doc.value("finished_at", "");
  record.partial = doc.at("partial").get<bool>();
  for (const auto& o : doc.at("outcomes")) {
    record.outcomes.push_back(outcome_from_json(o));
  }
  record.artifact_paths =
      doc.at("artifact_paths").get<std::vector<std::string>>();
  return record;
}

}  // namespace cxr
