#include <doctest.h>

#include <filesystem>

#include "cxr/config.hpp"
#include "cxr/report.hpp"

namespace fs = std::filesystem;
using namespace cxr;

TEST_CASE("default config pins the published recipe") {
  const auto c = default_config();
  CHECK(c.k == 10);
  CHECK(c.architectures.size() == 4);
  CHECK(c.preprocess.target_size == 224);
  CHECK(c.augment.rotation_min_degrees == -10.0);
  CHECK(c.augment.rotation_max_degrees == 10.0);
  CHECK(c.augment.horizontal_flip_probability == 0.5);
  CHECK(c.augment.vertical_flip_probability == 0.5);
  CHECK(c.training.learning_rate == 0.001);
  CHECK(c.training.momentum == 0.9);
  CHECK(c.training.batch_size == 8);
  CHECK(c.training.epochs == 30);
  CHECK(c.kaggle_fraction == 0.20);
}

TEST_CASE("config parse -> serialize -> parse is the identity") {
  ExperimentConfig c = default_config();
  c.cohen_root = "/data/cohen";
  c.kaggle_root = "/data/kaggle";
  c.k = 7;
  c.training.epochs = 3;
  c.training.seed = 99;
  c.architectures = {ArchitectureId::SqueezeNet, ArchitectureId::AlexNet};
  c.augment.rotation_max_degrees = 12.5;
  c.pretrained = false;
  c.output_dir = "/tmp/out";

  const std::string text = config_to_json_text(c);
  const auto parsed = config_from_json_text(text);
  CHECK(config_to_json_text(parsed) == text);
  CHECK(parsed.k == 7);
  CHECK(parsed.architectures == c.architectures);
  CHECK(parsed.training.seed == 99);
  CHECK(parsed.augment.rotation_max_degrees == 12.5);
  CHECK(parsed.pretrained == false);
}

TEST_CASE("config validation rejects broken recipes") {
  ExperimentConfig c = default_config();
  c.k = 1;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = default_config();
  c.kaggle_fraction = 0.0;
  CHECK_THROWS_AS(c.validate(), ValidationError);
  c = default_config();
  c.architectures.clear();
  CHECK_THROWS_AS(c.validate(), ValidationError);
}

TEST_CASE("run record round trip") {
  RunRecord record;
  record.config = default_config();
  record.code_version = "test";
  record.started_at = "2024-01-01T00:00:00Z";
  record.finished_at = "2024-01-01T01:00:00Z";
  record.partial = true;
  ArchitectureOutcome o;
  o.architecture = ArchitectureId::SqueezeNet;
  o.completed = true;
  o.aggregate.fold_count = 10;
  o.aggregate.accuracy = {0.992, 0.01};
  o.consolidated = {105, 0, 3, 299};
  o.consolidated_accuracy = 404.0 / 407.0;
  record.outcomes.push_back(o);
  record.artifact_paths = {"metrics.csv", "run_record.json"};

  const fs::path dir = fs::temp_directory_path() / "cxr_tests";
  fs::create_directories(dir);
  const auto path = (dir / "run_record.json").string();
  save_run_record(record, path);
  const auto loaded = load_run_record(path);
  CHECK(loaded.partial == true);
  REQUIRE(loaded.outcomes.size() == 1);
  CHECK(loaded.outcomes[0].architecture == ArchitectureId::SqueezeNet);
  CHECK(loaded.outcomes[0].consolidated.tn == 299);
  CHECK(loaded.outcomes[0].aggregate.accuracy.mean == 0.992);
  CHECK(loaded.artifact_paths == record.artifact_paths);
}

TEST_CASE("literature comparison ships the published accuracy column") {
  std::vector<double> accuracies;
  for (const auto& e : literature_comparison()) {
    if (e.metric == "accuracy") accuracies.push_back(e.value_percent);
  }
  const std::vector<double> expected = {98.00, 90.00, 95.38, 93.30,
                                        96.78, 89.60, 98.08};
  CHECK(accuracies == expected);
}

TEST_CASE("percent formatting is stable") {
  CHECK(format_percent(0.99262899) == "99.26");
  CHECK(format_percent(1.0) == "100.00");
  CHECK(format_percent(0.0) == "0.00");
}
