#ifndef CXR_MODELS_HPP
#define CXR_MODELS_HPP

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cxr/tensor.hpp"

namespace cxr {

enum class ArchitectureId { AlexNet, Vgg11Bn, SqueezeNet, DenseNet121 };

const char* to_string(ArchitectureId arch);
ArchitectureId architecture_from_string(const std::string& s);
std::vector<ArchitectureId> all_architectures();

enum class ParamKind { ConvWeight, ConvBias, LinearWeight, LinearBias,
                       BnGamma, BnBeta, BnMean, BnVar };

struct ParamSpec {
  std::string name;        // torchvision state-dict naming
  std::vector<int> shape;
  ParamKind kind;
  int fan_in = 0;          // for fan-in uniform initialization
};

// Full parameter roster of an architecture with a num_classes head.
std::vector<ParamSpec> parameter_specs(ArchitectureId arch, int num_classes);

struct ModelBundle {
  ArchitectureId architecture = ArchitectureId::AlexNet;
  int num_classes = 2;
  std::map<std::string, Tensor> parameters;
  std::set<std::string> head_parameter_names;
  std::string pretrained_provenance;

  Tensor& param(const std::string& name);
  const Tensor& param(const std::string& name) const;
  std::size_t trainable_parameter_count() const;  // head tensors only
};

// trainable(name) is true exactly for the head parameters; everything
// else (backbone weights and batch-norm statistics) stays frozen.
struct FreezePlan {
  std::map<std::string, bool> trainable;
};

// Backbone from the pretrained release (pretrained=true, loaded from
// weights_dir/<arch>.cxrw) or seeded random init; the classification head
// is always freshly initialized with num_classes outputs from `seed`.
ModelBundle build_model(ArchitectureId arch, int num_classes, bool pretrained,
                        std::uint64_t seed, const std::string& weights_dir = "");

FreezePlan apply_sft(const ModelBundle& model);

// Head input: flattened penultimate activation (AlexNet/VGG 4096,
// DenseNet 1024) or the pre-classifier feature map (SqueezeNet 512x13x13).
// The backbone always runs in inference mode (dropout identity, frozen
// batch-norm statistics).
Tensor extract_features(const ModelBundle& model, const Tensor& input);

Tensor head_forward(const ModelBundle& model, const Tensor& features);

// Gradient of a scalar loss w.r.t. the head parameters, given
// d(loss)/d(logits); accumulates into dweight/dbias (pre-sized).
void head_backward(const ModelBundle& model, const Tensor& features,
                   const Tensor& dlogits, Tensor& dweight, Tensor& dbias);

// Full forward pass on a single 3x224x224 tensor -> num_classes logits.
Tensor forward(const ModelBundle& model, const Tensor& input);

// B x 3 x 224 x 224 -> B x num_classes.
Tensor forward_batch(const ModelBundle& model,
                     const std::vector<Tensor>& batch);

// Binary tensor archive + JSON sidecar descriptor.
void save_checkpoint(const ModelBundle& model, const std::string& path);
ModelBundle load_checkpoint(const std::string& path);

// Raw tensor archive IO (the .cxrw format used for pretrained weights).
void save_tensor_archive(const std::map<std::string, Tensor>& tensors,
                         const std::string& path);
std::map<std::string, Tensor> load_tensor_archive(const std::string& path);

// FNV-1a over backbone tensor bytes; freeze-integrity witness.
std::uint64_t backbone_checksum(const ModelBundle& model);

}  // namespace cxr

#endif
