#ifndef CXR_CONFIG_HPP
#define CXR_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cxr/metrics.hpp"
#include "cxr/models.hpp"
#include "cxr/training.hpp"
#include "cxr/transforms.hpp"

namespace cxr {

// Full run recipe. Defaults reproduce the reference recipe: k=10, four
// architectures, 224 resize, +-10 degree rotation, SGD(0.001, 0.9),
// batch 8, 30 epochs.
struct ExperimentConfig {
  // dataset
  std::string cohen_root;
  std::string cohen_metadata;        // defaults to <cohen_root>/metadata.csv
  std::string kaggle_root;
  double kaggle_fraction = 0.20;
  std::uint64_t ingest_seed = 42;
  int synthetic_pos = 0;             // nonzero switches to synthetic data
  int synthetic_neg = 0;
  int synthetic_image_size = 64;

  // split
  int k = 10;
  std::uint64_t split_seed = 42;

  std::vector<ArchitectureId> architectures = all_architectures();
  PreprocessConfig preprocess;
  AugmentConfig augment;
  TrainingConfig training;

  bool pretrained = true;
  std::string weights_dir;
  std::string output_dir = "runs/latest";
  int jobs = 1;

  void validate() const;
};

ExperimentConfig default_config();

ExperimentConfig parse_config(const std::string& path);
ExperimentConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const ExperimentConfig& config);
void save_config(const ExperimentConfig& config, const std::string& path);

struct ArchitectureOutcome {
  ArchitectureId architecture = ArchitectureId::AlexNet;
  bool completed = false;
  std::string failure;
  AggregateReport aggregate;
  ConfusionMatrix consolidated;
  double consolidated_accuracy = 0.0;
};

struct RunRecord {
  ExperimentConfig config;
  std::string code_version;
  std::string started_at;   // ISO-8601 UTC
  std::string finished_at;
  bool partial = false;
  std::vector<ArchitectureOutcome> outcomes;
  std::vector<std::string> artifact_paths;  // every file under output_dir
};

void save_run_record(const RunRecord& record, const std::string& path);
RunRecord load_run_record(const std::string& path);

}  // namespace cxr

#endif
