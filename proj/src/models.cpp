#include "cxr/models.hpp"

#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>

#include "cxr/errors.hpp"
#include "cxr/nn.hpp"
#include "cxr/rng.hpp"

using json = nlohmann::json;

namespace cxr {

const char* to_string(ArchitectureId arch) {
  switch (arch) {
    case ArchitectureId::AlexNet: return "alexnet";
    case ArchitectureId::Vgg11Bn: return "vgg11_bn";
    case ArchitectureId::SqueezeNet: return "squeezenet";
    default: return "densenet121";
  }
}

ArchitectureId architecture_from_string(const std::string& s) {
  if (s == "alexnet") return ArchitectureId::AlexNet;
  if (s == "vgg11_bn" || s == "vgg11") return ArchitectureId::Vgg11Bn;
  if (s == "squeezenet") return ArchitectureId::SqueezeNet;
  if (s == "densenet121") return ArchitectureId::DenseNet121;
  throw ValidationError("unknown architecture: " + s);
}

std::vector<ArchitectureId> all_architectures() {
  return {ArchitectureId::AlexNet, ArchitectureId::Vgg11Bn,
          ArchitectureId::SqueezeNet, ArchitectureId::DenseNet121};
}

namespace {

void add_conv(std::vector<ParamSpec>& specs, const std::string& prefix, int oc,
              int ic, int k, bool bias = true) {
  const int fan_in = ic * k * k;
  specs.push_back({prefix + ".weight", {oc, ic, k, k}, ParamKind::ConvWeight,
                   fan_in});
  if (bias) {
    specs.push_back({prefix + ".bias", {oc}, ParamKind::ConvBias, fan_in});
  }
}

void add_linear(std::vector<ParamSpec>& specs, const std::string& prefix,
                int out, int in) {
  specs.push_back({prefix + ".weight", {out, in}, ParamKind::LinearWeight, in});
  specs.push_back({prefix + ".bias", {out}, ParamKind::LinearBias, in});
}

void add_bn(std::vector<ParamSpec>& specs, const std::string& prefix, int c) {
  specs.push_back({prefix + ".weight", {c}, ParamKind::BnGamma, 0});
  specs.push_back({prefix + ".bias", {c}, ParamKind::BnBeta, 0});
  specs.push_back({prefix + ".running_mean", {c}, ParamKind::BnMean, 0});
  specs.push_back({prefix + ".running_var", {c}, ParamKind::BnVar, 0});
}

void add_fire(std::vector<ParamSpec>& specs, const std::string& prefix, int in,
              int squeeze, int expand1, int expand3) {
  add_conv(specs, prefix + ".squeeze", squeeze, in, 1);
  add_conv(specs, prefix + ".expand1x1", expand1, squeeze, 1);
  add_conv(specs, prefix + ".expand3x3", expand3, squeeze, 3);
}

struct FireSpec {
  int index, in, squeeze, expand1, expand3;
};

const std::vector<FireSpec>& squeezenet_fires() {
  static const std::vector<FireSpec> fires = {
      {3, 96, 16, 64, 64},    {4, 128, 16, 64, 64},  {5, 128, 32, 128, 128},
      {7, 256, 32, 128, 128}, {8, 256, 48, 192, 192}, {9, 384, 48, 192, 192},
      {10, 384, 64, 256, 256}, {12, 512, 64, 256, 256}};
  return fires;
}

constexpr int kDenseBlocks[4] = {6, 12, 24, 16};
constexpr int kGrowthRate = 32;
constexpr int kBnSize = 4;

}  // namespace

std::vector<ParamSpec> parameter_specs(ArchitectureId arch, int num_classes) {
  std::vector<ParamSpec> specs;
  switch (arch) {
    case ArchitectureId::AlexNet:
      add_conv(specs, "features.0", 64, 3, 11);
      add_conv(specs, "features.3", 192, 64, 5);
      add_conv(specs, "features.6", 384, 192, 3);
      add_conv(specs, "features.8", 256, 384, 3);
      add_conv(specs, "features.10", 256, 256, 3);
      add_linear(specs, "classifier.1", 4096, 9216);
      add_linear(specs, "classifier.4", 4096, 4096);
      add_linear(specs, "classifier.6", num_classes, 4096);
      break;
    case ArchitectureId::Vgg11Bn: {
      const int conv_idx[8] = {0, 4, 8, 11, 15, 18, 22, 25};
      const int channels[8] = {64, 128, 256, 256, 512, 512, 512, 512};
      int in = 3;
      for (int i = 0; i < 8; ++i) {
        const std::string prefix = "features." + std::to_string(conv_idx[i]);
        add_conv(specs, prefix, channels[i], in, 3);
        add_bn(specs, "features." + std::to_string(conv_idx[i] + 1),
               channels[i]);
        in = channels[i];
      }
      add_linear(specs, "classifier.0", 4096, 25088);
      add_linear(specs, "classifier.3", 4096, 4096);
      add_linear(specs, "classifier.6", num_classes, 4096);
      break;
    }
    case ArchitectureId::SqueezeNet:
      add_conv(specs, "features.0", 96, 3, 7);
      for (const auto& f : squeezenet_fires()) {
        add_fire(specs, "features." + std::to_string(f.index), f.in, f.squeeze,
                 f.expand1, f.expand3);
      }
      add_conv(specs, "classifier.1", num_classes, 512, 1);
      break;
    case ArchitectureId::DenseNet121: {
      add_conv(specs, "features.conv0", 64, 3, 7, /*bias=*/false);
      add_bn(specs, "features.norm0", 64);
      int channels = 64;
      for (int b = 0; b < 4; ++b) {
        const std::string block = "features.denseblock" + std::to_string(b + 1);
        for (int l = 0; l < kDenseBlocks[b]; ++l) {
          const std::string layer =
              block + ".denselayer" + std::to_string(l + 1);
          const int in = channels + l * kGrowthRate;
          add_bn(specs, layer + ".norm1", in);
          add_conv(specs, layer + ".conv1", kBnSize * kGrowthRate, in, 1,
                   /*bias=*/false);
          add_bn(specs, layer + ".norm2", kBnSize * kGrowthRate);
          add_conv(specs, layer + ".conv2", kGrowthRate,
                   kBnSize * kGrowthRate, 3, /*bias=*/false);
        }
        channels += kDenseBlocks[b] * kGrowthRate;
        if (b < 3) {
          const std::string trans =
              "features.transition" + std::to_string(b + 1);
          add_bn(specs, trans + ".norm", channels);
          add_conv(specs, trans + ".conv", channels / 2, channels, 1,
                   /*bias=*/false);
          channels /= 2;
        }
      }
      add_bn(specs, "features.norm5", channels);
      add_linear(specs, "classifier", num_classes, channels);
      break;
    }
  }
  return specs;
}

namespace {

std::set<std::string> head_names(ArchitectureId arch) {
  switch (arch) {
    case ArchitectureId::AlexNet:
    case ArchitectureId::Vgg11Bn:
      return {"classifier.6.weight", "classifier.6.bias"};
    case ArchitectureId::SqueezeNet:
      return {"classifier.1.weight", "classifier.1.bias"};
    default:
      return {"classifier.weight", "classifier.bias"};
  }
}

std::string weights_filename(ArchitectureId arch) {
  return std::string(to_string(arch)) + ".cxrw";
}

void init_param(Tensor& t, const ParamSpec& spec, Rng& rng) {
  switch (spec.kind) {
    case ParamKind::BnGamma:
    case ParamKind::BnVar:
      t.fill(1.0f);
      break;
    case ParamKind::BnBeta:
    case ParamKind::BnMean:
      t.fill(0.0f);
      break;
    case ParamKind::ConvWeight:
    case ParamKind::LinearWeight: {
      // He-uniform: keeps activation variance roughly constant through the
      // ReLU stack, so random-init backbones emit usable feature magnitudes
      const double bound =
          std::sqrt(6.0 / static_cast<double>(spec.fan_in));
      for (float& v : t.data) {
        v = static_cast<float>(rng.uniform(-bound, bound));
      }
      break;
    }
    default: {
      // biases: fan-in uniform, the framework-default scheme
      const double bound = 1.0 / std::sqrt(static_cast<double>(spec.fan_in));
      for (float& v : t.data) {
        v = static_cast<float>(rng.uniform(-bound, bound));
      }
    }
  }
}

}  // namespace

Tensor& ModelBundle::param(const std::string& name) {
  auto it = parameters.find(name);
  if (it == parameters.end()) {
    throw ValidationError("missing parameter: " + name);
  }
  return it->second;
}

const Tensor& ModelBundle::param(const std::string& name) const {
  auto it = parameters.find(name);
  if (it == parameters.end()) {
    throw ValidationError("missing parameter: " + name);
  }
  return it->second;
}

std::size_t ModelBundle::trainable_parameter_count() const {
  std::size_t n = 0;
  for (const auto& name : head_parameter_names) n += param(name).numel();
  return n;
}

ModelBundle build_model(ArchitectureId arch, int num_classes, bool pretrained,
                        std::uint64_t seed, const std::string& weights_dir) {
  if (num_classes < 2) throw ValidationError("num_classes must be >= 2");

  ModelBundle model;
  model.architecture = arch;
  model.num_classes = num_classes;
  model.head_parameter_names = head_names(arch);

  const auto specs = parameter_specs(arch, num_classes);
  Rng rng(seed);
  for (const auto& spec : specs) {
    Tensor t(spec.shape);
    init_param(t, spec, rng);
    model.parameters.emplace(spec.name, std::move(t));
  }

  if (pretrained) {
    std::string dir = weights_dir;
    if (dir.empty()) {
      const char* env = std::getenv("CXR_WEIGHTS_DIR");
      dir = env ? env : "weights";
    }
    const auto path =
        (std::filesystem::path(dir) / weights_filename(arch)).string();
    auto archive = load_tensor_archive(path);
    for (const auto& spec : specs) {
      if (model.head_parameter_names.count(spec.name)) continue;
      auto it = archive.find(spec.name);
      if (it == archive.end()) {
        throw WeightsCorruptError("pretrained archive " + path +
                                  " lacks tensor " + spec.name);
      }
      if (it->second.shape != spec.shape) {
        throw WeightsCorruptError("pretrained tensor " + spec.name +
                                  " has shape " + shape_str(it->second.shape) +
                                  ", expected " + shape_str(spec.shape));
      }
      model.parameters[spec.name] = std::move(it->second);
    }
    model.pretrained_provenance = path;
  } else {
    model.pretrained_provenance =
        "random-init seed=" + std::to_string(seed);
  }
  return model;
}

FreezePlan apply_sft(const ModelBundle& model) {
  if (model.head_parameter_names.empty()) {
    throw ValidationError("model has an empty head");
  }
  FreezePlan plan;
  for (const auto& [name, tensor] : model.parameters) {
    plan.trainable[name] = model.head_parameter_names.count(name) > 0;
  }
  return plan;
}

namespace {

Tensor conv(const ModelBundle& m, const std::string& prefix, const Tensor& x,
            int stride, int padding, bool bias = true) {
  static const Tensor kNoBias;
  return nn::conv2d(x, m.param(prefix + ".weight"),
                    bias ? m.param(prefix + ".bias") : kNoBias, stride,
                    padding);
}

Tensor bn(const ModelBundle& m, const std::string& prefix, const Tensor& x) {
  return nn::batch_norm(x, m.param(prefix + ".weight"),
                        m.param(prefix + ".bias"),
                        m.param(prefix + ".running_mean"),
                        m.param(prefix + ".running_var"));
}

Tensor fire(const ModelBundle& m, const std::string& prefix, const Tensor& x) {
  Tensor s = conv(m, prefix + ".squeeze", x, 1, 0);
  nn::relu_inplace(s);
  Tensor e1 = conv(m, prefix + ".expand1x1", s, 1, 0);
  nn::relu_inplace(e1);
  Tensor e3 = conv(m, prefix + ".expand3x3", s, 1, 1);
  nn::relu_inplace(e3);
  return nn::concat_channels({&e1, &e3});
}

Tensor alexnet_features(const ModelBundle& m, const Tensor& x) {
  Tensor t = conv(m, "features.0", x, 4, 2);
  nn::relu_inplace(t);
  t = nn::max_pool2d(t, 3, 2);
  t = conv(m, "features.3", t, 1, 2);
  nn::relu_inplace(t);
  t = nn::max_pool2d(t, 3, 2);
  t = conv(m, "features.6", t, 1, 1);
  nn::relu_inplace(t);
  t = conv(m, "features.8", t, 1, 1);
  nn::relu_inplace(t);
  t = conv(m, "features.10", t, 1, 1);
  nn::relu_inplace(t);
  t = nn::max_pool2d(t, 3, 2);
  t = nn::adaptive_avg_pool2d(t, 6, 6);
  t = nn::flatten(t);
  // dropout layers run as identity (backbone is in inference mode)
  t = nn::linear(t, m.param("classifier.1.weight"), m.param("classifier.1.bias"));
  nn::relu_inplace(t);
  t = nn::linear(t, m.param("classifier.4.weight"), m.param("classifier.4.bias"));
  nn::relu_inplace(t);
  return t;
}

Tensor vgg_features(const ModelBundle& m, const Tensor& x) {
  const int conv_idx[8] = {0, 4, 8, 11, 15, 18, 22, 25};
  const bool pool_after[8] = {true, true, false, true, false, true, false, true};
  Tensor t = x;
  for (int i = 0; i < 8; ++i) {
    t = conv(m, "features." + std::to_string(conv_idx[i]), t, 1, 1);
    t = bn(m, "features." + std::to_string(conv_idx[i] + 1), t);
    nn::relu_inplace(t);
    if (pool_after[i]) t = nn::max_pool2d(t, 2, 2);
  }
  t = nn::adaptive_avg_pool2d(t, 7, 7);
  t = nn::flatten(t);
  t = nn::linear(t, m.param("classifier.0.weight"), m.param("classifier.0.bias"));
  nn::relu_inplace(t);
  t = nn::linear(t, m.param("classifier.3.weight"), m.param("classifier.3.bias"));
  nn::relu_inplace(t);
  return t;
}

Tensor squeezenet_features(const ModelBundle& m, const Tensor& x) {
  Tensor t = conv(m, "features.0", x, 2, 0);
  nn::relu_inplace(t);
  t = nn::max_pool2d(t, 3, 2, 0, /*ceil_mode=*/true);
  for (const auto& f : squeezenet_fires()) {
    if (f.index == 7 || f.index == 12) {
      t = nn::max_pool2d(t, 3, 2, 0, /*ceil_mode=*/true);
    }
    t = fire(m, "features." + std::to_string(f.index), t);
  }
  return t;  // 512 x 13 x 13
}

Tensor densenet_features(const ModelBundle& m, const Tensor& x) {
  Tensor t = conv(m, "features.conv0", x, 2, 3, /*bias=*/false);
  t = bn(m, "features.norm0", t);
  nn::relu_inplace(t);
  t = nn::max_pool2d(t, 3, 2, 1);
  for (int b = 0; b < 4; ++b) {
    const std::string block = "features.denseblock" + std::to_string(b + 1);
    for (int l = 0; l < kDenseBlocks[b]; ++l) {
      const std::string layer = block + ".denselayer" + std::to_string(l + 1);
      Tensor u = bn(m, layer + ".norm1", t);
      nn::relu_inplace(u);
      u = conv(m, layer + ".conv1", u, 1, 0, /*bias=*/false);
      u = bn(m, layer + ".norm2", u);
      nn::relu_inplace(u);
      u = conv(m, layer + ".conv2", u, 1, 1, /*bias=*/false);
      t = nn::concat_channels({&t, &u});
    }
    if (b < 3) {
      const std::string trans = "features.transition" + std::to_string(b + 1);
      t = bn(m, trans + ".norm", t);
      nn::relu_inplace(t);
      t = conv(m, trans + ".conv", t, 1, 0, /*bias=*/false);
      t = nn::avg_pool2d(t, 2, 2);
    }
  }
  t = bn(m, "features.norm5", t);
  nn::relu_inplace(t);
  t = nn::adaptive_avg_pool2d(t, 1, 1);
  return nn::flatten(t);
}

}  // namespace

Tensor extract_features(const ModelBundle& model, const Tensor& input) {
  if (input.ndim() != 3 || input.dim(0) != 3 || input.dim(1) != 224 ||
      input.dim(2) != 224) {
    throw ValidationError("model input must be 3x224x224, got " +
                          shape_str(input.shape));
  }
  switch (model.architecture) {
    case ArchitectureId::AlexNet: return alexnet_features(model, input);
    case ArchitectureId::Vgg11Bn: return vgg_features(model, input);
    case ArchitectureId::SqueezeNet: return squeezenet_features(model, input);
    default: return densenet_features(model, input);
  }
}

Tensor head_forward(const ModelBundle& model, const Tensor& features) {
  if (model.architecture == ArchitectureId::SqueezeNet) {
    Tensor z = nn::conv2d(features, model.param("classifier.1.weight"),
                          model.param("classifier.1.bias"), 1, 0);
    nn::relu_inplace(z);
    z = nn::adaptive_avg_pool2d(z, 1, 1);
    return nn::flatten(z);
  }
  const std::string prefix =
      model.architecture == ArchitectureId::DenseNet121 ? "classifier"
                                                        : "classifier.6";
  return nn::linear(features, model.param(prefix + ".weight"),
                    model.param(prefix + ".bias"));
}

void head_backward(const ModelBundle& model, const Tensor& features,
                   const Tensor& dlogits, Tensor& dweight, Tensor& dbias) {
  const int nc = model.num_classes;
  if (model.architecture == ArchitectureId::SqueezeNet) {
    // logits_o = mean_{hw} relu(b_o + sum_c W_oc f_chw)
    const Tensor& w = model.param("classifier.1.weight");
    const Tensor& b = model.param("classifier.1.bias");
    const int fc = features.dim(0), fh = features.dim(1), fw = features.dim(2);
    for (int o = 0; o < nc; ++o) {
      const double coeff = dlogits.at(o) / (fh * fw);
      for (int y = 0; y < fh; ++y) {
        for (int x = 0; x < fw; ++x) {
          double pre = b.at(o);
          for (int c = 0; c < fc; ++c) {
            pre += static_cast<double>(w.data[o * fc + c]) * features.at(c, y, x);
          }
          if (pre <= 0.0) continue;  // relu gate
          for (int c = 0; c < fc; ++c) {
            dweight.data[o * fc + c] +=
                static_cast<float>(coeff * features.at(c, y, x));
          }
          dbias.at(o) += static_cast<float>(coeff);
        }
      }
    }
    return;
  }
  const int in_dim = static_cast<int>(features.numel());
  for (int o = 0; o < nc; ++o) {
    const float g = dlogits.at(o);
    float* row = dweight.data.data() + static_cast<std::size_t>(o) * in_dim;
    for (int i = 0; i < in_dim; ++i) row[i] += g * features.data[i];
    dbias.at(o) += g;
  }
}

Tensor forward(const ModelBundle& model, const Tensor& input) {
  Tensor logits = head_forward(model, extract_features(model, input));
  for (float v : logits.data) {
    if (!std::isfinite(v)) throw NumericError("non-finite logits");
  }
  return logits;
}

Tensor forward_batch(const ModelBundle& model,
                     const std::vector<Tensor>& batch) {
  if (batch.empty()) throw ValidationError("empty batch");
  Tensor out({static_cast<int>(batch.size()), model.num_classes});
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Tensor logits = forward(model, batch[i]);
    std::copy(logits.data.begin(), logits.data.end(),
              out.data.begin() + i * model.num_classes);
  }
  return out;
}

// ---- serialization ----

namespace {
constexpr char kMagic[8] = {'C', 'X', 'R', 'W', 'T', 'v', '1', '\n'};
}

void save_tensor_archive(const std::map<std::string, Tensor>& tensors,
                         const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write archive: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::uint64_t count = tensors.size();
  out.write(reinterpret_cast<const char*>(&count), sizeof(count));
  for (const auto& [name, tensor] : tensors) {
    const std::uint32_t name_len = static_cast<std::uint32_t>(name.size());
    out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    out.write(name.data(), name_len);
    const std::uint32_t ndim = static_cast<std::uint32_t>(tensor.shape.size());
    out.write(reinterpret_cast<const char*>(&ndim), sizeof(ndim));
    for (int d : tensor.shape) {
      const std::int32_t dim = d;
      out.write(reinterpret_cast<const char*>(&dim), sizeof(dim));
    }
    out.write(reinterpret_cast<const char*>(tensor.data.data()),
              static_cast<std::streamsize>(tensor.data.size() * sizeof(float)));
  }
  if (!out) throw std::runtime_error("short write: " + path);
}

std::map<std::string, Tensor> load_tensor_archive(const std::string& path) {
  if (!std::filesystem::exists(path)) {
    throw WeightsUnavailableError(
        "weights file not found: " + path +
        " (pretrained weights must be exported locally; see README)");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw WeightsUnavailableError("cannot open weights file: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw WeightsCorruptError("bad magic in weights file: " + path);
  }
  std::uint64_t count = 0;
  in.read(reinterpret_cast<char*>(&count), sizeof(count));
  std::map<std::string, Tensor> tensors;
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint32_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    if (!in || name_len > 4096) {
      throw WeightsCorruptError("truncated weights file: " + path);
    }
    std::string name(name_len, '\0');
    in.read(name.data(), name_len);
    std::uint32_t ndim = 0;
    in.read(reinterpret_cast<char*>(&ndim), sizeof(ndim));
    if (!in || ndim > 8) {
      throw WeightsCorruptError("truncated weights file: " + path);
    }
    std::vector<int> shape(ndim);
    for (auto& d : shape) {
      std::int32_t dim = 0;
      in.read(reinterpret_cast<char*>(&dim), sizeof(dim));
      d = dim;
    }
    Tensor t(shape);
    in.read(reinterpret_cast<char*>(t.data.data()),
            static_cast<std::streamsize>(t.data.size() * sizeof(float)));
    if (!in) throw WeightsCorruptError("truncated weights file: " + path);
    tensors.emplace(std::move(name), std::move(t));
  }
  return tensors;
}

void save_checkpoint(const ModelBundle& model, const std::string& path) {
  save_tensor_archive(model.parameters, path);
  json doc;
  doc["architecture"] = to_string(model.architecture);
  doc["num_classes"] = model.num_classes;
  doc["head_parameter_names"] = model.head_parameter_names;
  doc["pretrained_provenance"] = model.pretrained_provenance;
  std::ofstream out(path + ".json");
  out << doc.dump(2) << "\n";
}

ModelBundle load_checkpoint(const std::string& path) {
  std::ifstream meta(path + ".json");
  if (!meta) throw std::runtime_error("missing checkpoint descriptor: " + path + ".json");
  json doc = json::parse(meta);
  ModelBundle model;
  model.architecture =
      architecture_from_string(doc.at("architecture").get<std::string>());
  model.num_classes = doc.at("num_classes").get<int>();
  model.head_parameter_names =
      doc.at("head_parameter_names").get<std::set<std::string>>();
  model.pretrained_provenance =
      doc.at("pretrained_provenance").get<std::string>();
  model.parameters = load_tensor_archive(path);
  return model;
}

std::uint64_t backbone_checksum(const ModelBundle& model) {
  std::uint64_t hash = 1469598103934665603ULL;  // FNV-1a
  for (const auto& [name, tensor] : model.parameters) {
    if (model.head_parameter_names.count(name)) continue;
    const auto* bytes = reinterpret_cast<const unsigned char*>(tensor.data.data());
    for (std::size_t i = 0; i < tensor.data.size() * sizeof(float); ++i) {
      hash ^= bytes[i];
      hash *= 1099511628211ULL;
    }
  }
  return hash;
}

}  // namespace cxr
