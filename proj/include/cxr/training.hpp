#ifndef CXR_TRAINING_HPP
#define CXR_TRAINING_HPP

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cxr/dataset.hpp"
#include "cxr/models.hpp"
#include "cxr/transforms.hpp"

namespace cxr {

struct TrainingConfig {
  double learning_rate = 0.001;
  double momentum = 0.9;
  int batch_size = 8;
  int epochs = 30;
  std::uint64_t seed = 0;

  void validate() const;
};

struct EpochLog {
  int epoch_index = 0;
  double mean_training_loss = 0.0;
  double wall_time_seconds = 0.0;
};

struct FoldResult {
  int fold_index = 0;
  std::vector<std::string> test_record_ids;
  std::vector<ClassLabel> predicted_labels;
  std::vector<double> positive_scores;  // softmax P(PositiveCovid)
  std::vector<ClassLabel> true_labels;
  std::vector<EpochLog> epoch_logs;
};

// Mean negative log softmax probability of the true label over the batch.
// logits: B x C; labels: class indices (0 = PositiveCovid).
double cross_entropy_loss(const Tensor& logits, const std::vector<int>& labels);

// Softmax row-wise over B x C logits (numerically stabilized).
Tensor softmax(const Tensor& logits);

// d(loss)/d(logits) for the mean cross-entropy: (softmax - onehot) / B.
Tensor cross_entropy_grad(const Tensor& logits, const std::vector<int>& labels);

// Classic momentum: v <- momentum * v + g; p <- p - lr * v.
void sgd_momentum_step(const std::vector<Tensor*>& params,
                       const std::vector<const Tensor*>& grads,
                       std::vector<Tensor>& velocity, double lr,
                       double momentum);

// Decoded, resized, ready-to-augment images keyed by record id.
using ImageCache = std::map<std::string, Image>;

ImageCache preload_images(const DatasetManifest& manifest,
                          const PreprocessConfig& preprocess);

// Runs exactly config.epochs epochs of seeded-shuffled mini-batches with
// online augmentation, updating only the head parameters. No early
// stopping, no validation split.
std::vector<EpochLog> train_fold(ModelBundle& model, const FreezePlan& plan,
                                 const DatasetManifest& manifest,
                                 const std::vector<std::string>& train_ids,
                                 const ImageCache& cache,
                                 const PreprocessConfig& preprocess,
                                 const AugmentConfig& augment_cfg,
                                 const TrainingConfig& config);

// Evaluation mode: resize + normalize only, no augmentation. Ties in the
// logits resolve to NegativePneumonia.
void predict(const ModelBundle& model, const DatasetManifest& manifest,
             const std::vector<std::string>& test_ids, const ImageCache& cache,
             const PreprocessConfig& preprocess,
             std::vector<ClassLabel>& predicted_labels,
             std::vector<double>& positive_scores);

struct CrossValidationOptions {
  bool pretrained = true;
  std::string weights_dir;
  int jobs = 1;
  // per-fold trained checkpoints land here when nonempty
  std::string checkpoint_dir;
};

// Fold i: fresh model (seed = config.seed + i) trained on every record
// outside fold i, evaluated on fold i.
std::vector<FoldResult> run_cross_validation(
    const DatasetManifest& manifest, const FoldPlan& plan, ArchitectureId arch,
    const PreprocessConfig& preprocess, const AugmentConfig& augment_cfg,
    const TrainingConfig& config, const CrossValidationOptions& options = {});

void save_fold_results(const std::vector<FoldResult>& results,
                       const std::string& path);
std::vector<FoldResult> load_fold_results(const std::string& path);

}  // namespace cxr

#endif
