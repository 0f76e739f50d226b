#include "cxr/training.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "cxr/errors.hpp"

using json = nlohmann::json;

namespace cxr {

void TrainingConfig::validate() const {
  if (!(learning_rate > 0.0)) throw ValidationError("learning_rate must be positive");
  if (momentum < 0.0 || momentum >= 1.0) throw ValidationError("momentum must lie in [0,1)");
  if (batch_size < 1) throw ValidationError("batch_size must be positive");
  if (epochs < 1) throw ValidationError("epochs must be positive");
}

double cross_entropy_loss(const Tensor& logits, const std::vector<int>& labels) {
  const int b = logits.dim(0), c = logits.dim(1);
  if (static_cast<int>(labels.size()) != b || b < 1) {
    throw ValidationError("logits/labels batch mismatch");
  }
  double total = 0.0;
  for (int i = 0; i < b; ++i) {
    const float* row = logits.data.data() + static_cast<std::size_t>(i) * c;
    double mx = row[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    if (!std::isfinite(mx)) throw NumericError("non-finite logits in loss");
    double lse = 0.0;
    for (int j = 0; j < c; ++j) lse += std::exp(row[j] - mx);
    total += mx + std::log(lse) - row[labels[i]];
  }
  return total / b;
}

Tensor softmax(const Tensor& logits) {
  const int b = logits.dim(0), c = logits.dim(1);
  Tensor out(logits.shape);
  for (int i = 0; i < b; ++i) {
    const float* row = logits.data.data() + static_cast<std::size_t>(i) * c;
    float* dst = out.data.data() + static_cast<std::size_t>(i) * c;
    double mx = row[0];
    for (int j = 1; j < c; ++j) mx = std::max(mx, static_cast<double>(row[j]));
    double sum = 0.0;
    for (int j = 0; j < c; ++j) sum += std::exp(row[j] - mx);
    for (int j = 0; j < c; ++j) {
      dst[j] = static_cast<float>(std::exp(row[j] - mx) / sum);
    }
  }
  return out;
}

Tensor cross_entropy_grad(const Tensor& logits, const std::vector<int>& labels) {
  const int b = logits.dim(0), c = logits.dim(1);
  Tensor grad = softmax(logits);
  for (int i = 0; i < b; ++i) {
    grad.data[static_cast<std::size_t>(i) * c + labels[i]] -= 1.0f;
  }
  for (float& v : grad.data) v /= static_cast<float>(b);
  return grad;
}

void sgd_momentum_step(const std::vector<Tensor*>& params,
                       const std::vector<const Tensor*>& grads,
                       std::vector<Tensor>& velocity, double lr,
                       double momentum) {
  if (params.size() != grads.size()) {
    throw ValidationError("params/grads count mismatch");
  }
  if (velocity.size() != params.size()) {
    velocity.clear();
    for (const Tensor* p : params) velocity.emplace_back(p->shape);
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor& p = *params[i];
    const Tensor& g = *grads[i];
    Tensor& v = velocity[i];
    if (!p.same_shape(g) || !p.same_shape(v)) {
      throw ValidationError("sgd step shape mismatch");
    }
    for (std::size_t j = 0; j < p.data.size(); ++j) {
      v.data[j] = static_cast<float>(momentum * v.data[j] + g.data[j]);
      p.data[j] -= static_cast<float>(lr * v.data[j]);
    }
  }
}

ImageCache preload_images(const DatasetManifest& manifest,
                          const PreprocessConfig& preprocess) {
  ImageCache cache;
  for (const auto& rec : manifest.records) {
    cache.emplace(rec.id,
                  resize_bilinear(load_image(manifest.resolve(rec)),
                                  preprocess.target_size));
  }
  return cache;
}

namespace {

int label_index(ClassLabel label) {
  return label == ClassLabel::PositiveCovid ? 0 : 1;
}

const Image& cached_image(const ImageCache& cache, const std::string& id) {
  auto it = cache.find(id);
  if (it == cache.end()) throw ValidationError("record not in image cache: " + id);
  return it->second;
}

struct HeadNames {
  std::string weight, bias;
};

HeadNames head_param_names(const ModelBundle& model) {
  HeadNames names;
  for (const auto& n : model.head_parameter_names) {
    if (n.ends_with(".weight") || n == "classifier.weight") names.weight = n;
    if (n.ends_with(".bias") || n == "classifier.bias") names.bias = n;
  }
  return names;
}

}  // namespace

std::vector<EpochLog> train_fold(ModelBundle& model, const FreezePlan& plan,
                                 const DatasetManifest& manifest,
                                 const std::vector<std::string>& train_ids,
                                 const ImageCache& cache,
                                 const PreprocessConfig& preprocess,
                                 const AugmentConfig& augment_cfg,
                                 const TrainingConfig& config) {
  config.validate();
  preprocess.validate();
  augment_cfg.validate();
  if (train_ids.empty()) throw ValidationError("empty training set");
  for (const auto& [name, trainable] : plan.trainable) {
    if (trainable != (model.head_parameter_names.count(name) > 0)) {
      throw ValidationError("freeze plan inconsistent with model head");
    }
  }

  std::map<std::string, ClassLabel> labels;
  for (const auto& rec : manifest.records) labels[rec.id] = rec.label;

  const HeadNames head = head_param_names(model);
  Tensor& weight = model.param(head.weight);
  Tensor& bias = model.param(head.bias);
  std::vector<Tensor> velocity;

  Rng rng(config.seed);
  std::vector<std::string> order = train_ids;
  std::vector<EpochLog> logs;

  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    rng.shuffle(order);
    double loss_sum = 0.0;
    std::size_t sample_count = 0;

    for (std::size_t start = 0; start < order.size();
         start += config.batch_size) {
      const std::size_t end =
          std::min(order.size(), start + config.batch_size);
      const int b = static_cast<int>(end - start);

      Tensor logits({b, model.num_classes});
      std::vector<Tensor> features;
      features.reserve(b);
      std::vector<int> batch_labels(b);
      for (int i = 0; i < b; ++i) {
        const std::string& id = order[start + i];
        const Image aug = augment(cached_image(cache, id), augment_cfg, rng);
        const Tensor input = to_model_tensor(aug, preprocess);
        features.push_back(extract_features(model, input));
        const Tensor sample_logits = head_forward(model, features.back());
        std::copy(sample_logits.data.begin(), sample_logits.data.end(),
                  logits.data.begin() +
                      static_cast<std::size_t>(i) * model.num_classes);
        batch_labels[i] = label_index(labels.at(id));
      }

      const double loss = cross_entropy_loss(logits, batch_labels);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite training loss at epoch " +
                           std::to_string(epoch));
      }
      loss_sum += loss * b;
      sample_count += b;

      const Tensor dlogits = cross_entropy_grad(logits, batch_labels);
      Tensor dweight(weight.shape);
      Tensor dbias(bias.shape);
      for (int i = 0; i < b; ++i) {
        Tensor per_sample({model.num_classes});
        std::copy(dlogits.data.begin() +
                      static_cast<std::size_t>(i) * model.num_classes,
                  dlogits.data.begin() +
                      static_cast<std::size_t>(i + 1) * model.num_classes,
                  per_sample.data.begin());
        head_backward(model, features[i], per_sample, dweight, dbias);
      }

      sgd_momentum_step({&weight, &bias}, {&dweight, &dbias}, velocity,
                        config.learning_rate, config.momentum);
    }

    EpochLog log;
    log.epoch_index = epoch;
    log.mean_training_loss = loss_sum / static_cast<double>(sample_count);
    log.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    logs.push_back(log);
  }
  return logs;
}

void predict(const ModelBundle& model, const DatasetManifest& manifest,
             const std::vector<std::string>& test_ids, const ImageCache& cache,
             const PreprocessConfig& preprocess,
             std::vector<ClassLabel>& predicted_labels,
             std::vector<double>& positive_scores) {
  predicted_labels.clear();
  positive_scores.clear();
  for (const auto& id : test_ids) {
    const Tensor input = to_model_tensor(cached_image(cache, id), preprocess);
    const Tensor logits = forward(model, input);
    Tensor batch = logits;
    batch.shape = {1, model.num_classes};
    const Tensor probs = softmax(batch);
    positive_scores.push_back(probs.at(0));
    // tie resolves to the negative class
    predicted_labels.push_back(logits.at(0) > logits.at(1)
                                   ? ClassLabel::PositiveCovid
                                   : ClassLabel::NegativePneumonia);
  }
}

namespace {

FoldResult run_one_fold(const DatasetManifest& manifest, const FoldPlan& plan,
                        ArchitectureId arch, const PreprocessConfig& preprocess,
                        const AugmentConfig& augment_cfg,
                        const TrainingConfig& config,
                        const CrossValidationOptions& options,
                        const ImageCache& cache, int fold) {
  const std::uint64_t fold_seed = config.seed + static_cast<std::uint64_t>(fold);
  ModelBundle model = build_model(arch, 2, options.pretrained, fold_seed,
                                  options.weights_dir);
  const FreezePlan freeze = apply_sft(model);

  TrainingConfig fold_config = config;
  fold_config.seed = worker_seed(fold_seed, 0x7261696e);

  FoldResult result;
  result.fold_index = fold;
  result.test_record_ids = fold_test_ids(manifest, plan, fold);
  const auto train_ids = fold_train_ids(manifest, plan, fold);

  result.epoch_logs = train_fold(model, freeze, manifest, train_ids, cache,
                                 preprocess, augment_cfg, fold_config);
  predict(model, manifest, result.test_record_ids, cache, preprocess,
          result.predicted_labels, result.positive_scores);

  std::map<std::string, ClassLabel> labels;
  for (const auto& rec : manifest.records) labels[rec.id] = rec.label;
  for (const auto& id : result.test_record_ids) {
    result.true_labels.push_back(labels.at(id));
  }

  if (!options.checkpoint_dir.empty()) {
    const auto path = std::filesystem::path(options.checkpoint_dir) /
                      (std::string(to_string(arch)) + "_fold" +
                       std::to_string(fold) + ".cxrw");
    save_checkpoint(model, path.string());
  }
  return result;
}

}  // namespace

std::vector<FoldResult> run_cross_validation(
    const DatasetManifest& manifest, const FoldPlan& plan, ArchitectureId arch,
    const PreprocessConfig& preprocess, const AugmentConfig& augment_cfg,
    const TrainingConfig& config, const CrossValidationOptions& options) {
  const ImageCache cache = preload_images(manifest, preprocess);
  std::vector<FoldResult> results(plan.k);
  std::vector<std::exception_ptr> failures(plan.k);

  const int jobs = std::max(1, options.jobs);
  for (int base = 0; base < plan.k; base += jobs) {
    std::vector<std::thread> workers;
    for (int fold = base; fold < std::min(plan.k, base + jobs); ++fold) {
      workers.emplace_back([&, fold]() {
        try {
          results[fold] = run_one_fold(manifest, plan, arch, preprocess,
                                       augment_cfg, config, options, cache,
                                       fold);
        } catch (...) {
          failures[fold] = std::current_exception();
        }
      });
    }
    for (auto& w : workers) w.join();
  }

  for (int fold = 0; fold < plan.k; ++fold) {
    if (failures[fold]) {
      try {
        std::rethrow_exception(failures[fold]);
      } catch (const std::exception& e) {
        throw std::runtime_error("fold " + std::to_string(fold) +
                                 " failed: " + e.what());
      }
    }
  }
  return results;
}

void save_fold_results(const std::vector<FoldResult>& results,
                       const std::string& path) {
  json doc = json::array();
  for (const auto& r : results) {
    json fold;
    fold["fold_index"] = r.fold_index;
    fold["test_record_ids"] = r.test_record_ids;
    json preds = json::array(), trues = json::array();
    for (auto l : r.predicted_labels) preds.push_back(to_string(l));
    for (auto l : r.true_labels) trues.push_back(to_string(l));
    fold["predicted_labels"] = std::move(preds);
    fold["true_labels"] = std::move(trues);
    fold["positive_scores"] = r.positive_scores;
    json epochs = json::array();
    for (const auto& e : r.epoch_logs) {
      epochs.push_back({{"epoch", e.epoch_index},
                        {"mean_training_loss", e.mean_training_loss},
                        {"wall_time_seconds", e.wall_time_seconds}});
    }
    fold["epoch_logs"] = std::move(epochs);
    doc.push_back(std::move(fold));
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write fold results: " + path);
  out << doc.dump(2) << "\n";
}

std::vector<FoldResult> load_fold_results(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read fold results: " + path);
  json doc = json::parse(in);
  std::vector<FoldResult> results;
  for (const auto& fold : doc) {
    FoldResult r;
    r.fold_index = fold.at("fold_index").get<int>();
    r.test_record_ids =
        fold.at("test_record_ids").get<std::vector<std::string>>();
    for (const auto& l : fold.at("predicted_labels")) {
      r.predicted_labels.push_back(label_from_string(l.get<std::string>()));
    }
    for (const auto& l : fold.at("true_labels")) {
      r.true_labels.push_back(label_from_string(l.get<std::string>()));
    }
    r.positive_scores = fold.at("positive_scores").get<std::vector<double>>();
    for (const auto& e : fold.at("epoch_logs")) {
      EpochLog log;
      log.epoch_index = e.at("epoch").get<int>();
      log.mean_training_loss = e.at("mean_training_loss").get<double>();
      log.wall_time_seconds = e.at("wall_time_seconds").get<double>();
      r.epoch_logs.push_back(log);
    }
    results.push_back(std::move(r));
  }
  return results;
}

}  // namespace cxr
