#include "cxr/dataset.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "cxr/image.hpp"
#include "cxr/rng.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace cxr {

const char* to_string(ClassLabel label) {
  return label == ClassLabel::PositiveCovid ? "positive" : "negative";
}

ClassLabel label_from_string(const std::string& s) {
  if (s == "positive") return ClassLabel::PositiveCovid;
  if (s == "negative") return ClassLabel::NegativePneumonia;
  throw ValidationError("unknown class label: " + s);
}

const char* to_string(ImageSource source) {
  switch (source) {
    case ImageSource::CohenRepo: return "cohen";
    case ImageSource::KagglePneumonia: return "kaggle";
    default: return "synthetic";
  }
}

ImageSource source_from_string(const std::string& s) {
  if (s == "cohen") return ImageSource::CohenRepo;
  if (s == "kaggle") return ImageSource::KagglePneumonia;
  if (s == "synthetic") return ImageSource::Synthetic;
  throw ValidationError("unknown image source: " + s);
}

namespace {

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Minimal RFC-4180 CSV reader (quoted fields, embedded commas/newlines).
std::vector<std::vector<std::string>> read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("missing metadata table: " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(field);
      field.clear();
    } else if (c == '\n') {
      if (!field.empty() || !row.empty()) {
        row.push_back(field);
        rows.push_back(row);
      }
      field.clear();
      row.clear();
    } else if (c != '\r') {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    row.push_back(field);
    rows.push_back(row);
  }
  return rows;
}

int find_column(const std::vector<std::string>& header, const std::string& name) {
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (lower(trim(header[i])) == name) return static_cast<int>(i);
  }
  return -1;
}

std::string cell(const std::vector<std::string>& row, int col) {
  if (col < 0 || col >= static_cast<int>(row.size())) return "";
  return trim(row[col]);
}

bool has_image_extension(const fs::path& p) {
  const std::string ext = lower(p.extension().string());
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

std::vector<ImageRecord> ingest_cohen(const std::string& snapshot_root,
                                      const std::string& metadata_csv,
                                      std::vector<std::string>* warnings) {
  auto rows = read_csv(metadata_csv);
  if (rows.empty()) return {};
  const auto& header = rows.front();
  const int c_finding = find_column(header, "finding");
  const int c_modality = find_column(header, "modality");
  const int c_filename = find_column(header, "filename");
  const int c_folder = find_column(header, "folder");
  if (c_finding < 0 || c_modality < 0 || c_filename < 0) {
    throw IngestError("metadata table lacks finding/modality/filename columns: " +
                      metadata_csv);
  }

  std::vector<ImageRecord> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (lower(cell(row, c_finding)) != "covid-19") continue;
    if (lower(cell(row, c_modality)) != "x-ray") continue;
    const std::string filename = cell(row, c_filename);
    if (filename.empty()) continue;

    std::string folder = c_folder >= 0 ? cell(row, c_folder) : "";
    if (folder.empty()) folder = "images";
    const fs::path rel = fs::path(folder) / filename;
    const fs::path abs = fs::path(snapshot_root) / rel;

    int w = 0, h = 0;
    if (!fs::exists(abs) || !probe_image(abs.string(), w, h)) {
      if (warnings) {
        warnings->push_back("row " + std::to_string(r) +
                            ": missing or undecodable image " + rel.string());
      }
      continue;
    }

    ImageRecord rec;
    rec.id = "cohen_" + std::to_string(r) + "_" +
             fs::path(filename).stem().string();
    rec.source = ImageSource::CohenRepo;
    rec.relative_path = rel.string();
    rec.label = ClassLabel::PositiveCovid;
    rec.width = w;
    rec.height = h;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<ImageRecord> ingest_kaggle_pneumonia(const std::string& dataset_root,
                                                 double fraction,
                                                 std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ValidationError("fraction must lie in (0, 1]");
  }
  if (!fs::exists(dataset_root)) {
    throw IngestError("dataset root does not exist: " + dataset_root);
  }

  std::vector<fs::path> viral;
  for (const auto& entry : fs::recursive_directory_iterator(dataset_root)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    if (!has_image_extension(p)) continue;
    if (lower(p.filename().string()).find("virus") == std::string::npos) continue;
    viral.push_back(fs::relative(p, dataset_root));
  }
  if (viral.empty()) {
    throw IngestError("no viral pneumonia images found under " + dataset_root);
  }
  std::sort(viral.begin(), viral.end());

  const std::size_t take =
      static_cast<std::size_t>(fraction * static_cast<double>(viral.size()));
  Rng rng(seed);
  const auto picked = rng.sample_without_replacement(viral.size(), take);

  std::vector<ImageRecord> records;
  records.reserve(picked.size());
  for (std::size_t idx : picked) {
    const fs::path& rel = viral[idx];
    ImageRecord rec;
    rec.id = "kaggle_" + rel.stem().string();
    rec.source = ImageSource::KagglePneumonia;
    rec.relative_path = rel.string();
    rec.label = ClassLabel::NegativePneumonia;
    probe_image((fs::path(dataset_root) / rel).string(), rec.width, rec.height);
    records.push_back(std::move(rec));
  }
  return records;
}

DatasetManifest build_manifest(std::vector<ImageRecord> records,
                               const std::string& root,
                               const std::string& provenance,
                               std::uint64_t seed) {
  if (records.empty()) throw ValidationError("manifest requires records");
  std::set<std::string> seen;
  for (const auto& rec : records) {
    if (!seen.insert(rec.id).second) {
      throw ValidationError("duplicate record id: " + rec.id);
    }
  }
  DatasetManifest manifest;
  manifest.records = std::move(records);
  manifest.root = root;
  manifest.source_snapshot = provenance;
  manifest.build_seed = seed;
  manifest.counts_per_label[ClassLabel::PositiveCovid] = 0;
  manifest.counts_per_label[ClassLabel::NegativePneumonia] = 0;
  for (const auto& rec : manifest.records) {
    ++manifest.counts_per_label[rec.label];
  }
  return manifest;
}

FoldPlan stratified_kfold(const DatasetManifest& manifest, int k,
                          std::uint64_t seed) {
  if (k < 2) throw ValidationError("k must be >= 2");
  for (const auto& [label, count] : manifest.counts_per_label) {
    if (count > 0 && count < static_cast<std::size_t>(k)) {
      throw SplitError(std::string("label '") + to_string(label) + "' has " +
                       std::to_string(count) + " records, fewer than k=" +
                       std::to_string(k));
    }
  }

  FoldPlan plan;
  plan.k = k;
  plan.split_seed = seed;

  Rng rng(seed);
  int cursor = 0;
  for (ClassLabel label :
       {ClassLabel::PositiveCovid, ClassLabel::NegativePneumonia}) {
    std::vector<const ImageRecord*> group;
    for (const auto& rec : manifest.records) {
      if (rec.label == label) group.push_back(&rec);
    }
    rng.shuffle(group);
    for (const auto* rec : group) {
      plan.assignment[rec->id] = cursor;
      cursor = (cursor + 1) % k;
    }
  }
  return plan;
}

DatasetManifest generate_synthetic(const std::string& out_dir, int n_pos,
                                   int n_neg, int image_size,
                                   std::uint64_t seed) {
  if (n_pos < 0 || n_neg < 0) throw ValidationError("negative sample count");
  if (image_size < 32) throw ValidationError("image_size must be >= 32");
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec || !fs::is_directory(out_dir)) {
    throw std::runtime_error("cannot create output directory: " + out_dir);
  }

  Rng rng(seed);
  const double sigma = image_size / 6.0;
  std::vector<ImageRecord> records;

  auto emit = [&](ClassLabel label, int index) {
    const bool positive = label == ClassLabel::PositiveCovid;
    // class signal: positives are bright with a centered disk, negatives are
    // dark with a faint centered ring; both cues survive the flip/rotation
    // augmentations
    const double jitter_x = rng.uniform(-sigma / 2, sigma / 2);
    const double jitter_y = rng.uniform(-sigma / 2, sigma / 2);
    const double cx = image_size / 2.0 + jitter_x;
    const double cy = image_size / 2.0 + jitter_y;
    const double ring_radius = image_size / 3.0;
    // negatives sit near mid-gray, positives near white, so the class gap
    // dominates whatever a frozen backbone shares between the two classes
    const double base = positive ? 195.0 : 101.0;
    const double blob_gain = positive ? 60.0 : 15.0;

    Image img(image_size, image_size, 1);
    for (int y = 0; y < image_size; ++y) {
      for (int x = 0; x < image_size; ++x) {
        const double noise = rng.uniform(0.0, 30.0);
        const double d =
            std::sqrt((x - cx) * (x - cx) + (y - cy) * (y - cy));
        const double arg = positive ? d : d - ring_radius;
        const double blob =
            blob_gain * std::exp(-arg * arg / (2.0 * sigma * sigma));
        img.at(y, x, 0) =
            static_cast<float>(std::min(255.0, base + noise + blob));
      }
    }

    char name[64];
    std::snprintf(name, sizeof(name), "syn_%s_%04d.png",
                  positive ? "pos" : "neg", index);
    save_png((fs::path(out_dir) / name).string(), img);

    ImageRecord rec;
    rec.id = fs::path(name).stem().string();
    rec.source = ImageSource::Synthetic;
    rec.relative_path = name;
    rec.label = label;
    rec.width = image_size;
    rec.height = image_size;
    records.push_back(std::move(rec));
  };

  for (int i = 0; i < n_pos; ++i) emit(ClassLabel::PositiveCovid, i);
  for (int i = 0; i < n_neg; ++i) emit(ClassLabel::NegativePneumonia, i);

  DatasetManifest manifest;
  if (!records.empty()) {
    manifest = build_manifest(std::move(records), out_dir,
                              "synthetic seed=" + std::to_string(seed), seed);
  } else {
    manifest.root = out_dir;
    manifest.build_seed = seed;
    manifest.source_snapshot = "synthetic seed=" + std::to_string(seed);
    manifest.counts_per_label[ClassLabel::PositiveCovid] = 0;
    manifest.counts_per_label[ClassLabel::NegativePneumonia] = 0;
  }
  return manifest;
}

void save_manifest(const DatasetManifest& manifest, const std::string& path) {
  json doc;
  doc["root"] = manifest.root;
  doc["source_snapshot"] = manifest.source_snapshot;
  doc["build_seed"] = manifest.build_seed;
  json recs = json::array();
  for (const auto& rec : manifest.records) {
    recs.push_back({{"id", rec.id},
                    {"source", to_string(rec.source)},
                    {"path", rec.relative_path},
                    {"label", to_string(rec.label)},
                    {"width", rec.width},
                    {"height", rec.height}});
  }
  doc["records"] = std::move(recs);
  json counts;
  for (const auto& [label, count] : manifest.counts_per_label) {
    counts[to_string(label)] = count;
  }
  doc["counts_per_label"] = std::move(counts);
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << doc.dump(2) << "\n";
}

DatasetManifest load_manifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read manifest: " + path);
  json doc = json::parse(in);
  DatasetManifest manifest;
  manifest.root = doc.at("root").get<std::string>();
  manifest.source_snapshot = doc.at("source_snapshot").get<std::string>();
  manifest.build_seed = doc.at("build_seed").get<std::uint64_t>();
  for (const auto& r : doc.at("records")) {
    ImageRecord rec;
    rec.id = r.at("id").get<std::string>();
    rec.source = source_from_string(r.at("source").get<std::string>());
    rec.relative_path = r.at("path").get<std::string>();
    rec.label = label_from_string(r.at("label").get<std::string>());
    rec.width = r.at("width").get<int>();
    rec.height = r.at("height").get<int>();
    manifest.records.push_back(std::move(rec));
  }
  for (const auto& [key, value] : doc.at("counts_per_label").items()) {
    manifest.counts_per_label[label_from_string(key)] =
        value.get<std::size_t>();
  }
  return manifest;
}

void save_fold_plan(const FoldPlan& plan, const std::string& path) {
  json doc;
  doc["k"] = plan.k;
  doc["split_seed"] = plan.split_seed;
  doc["assignment"] = plan.assignment;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write fold plan: " + path);
  out << doc.dump(2) << "\n";
}

FoldPlan load_fold_plan(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read fold plan: " + path);
  json doc = json::parse(in);
  FoldPlan plan;
  plan.k = doc.at("k").get<int>();
  plan.split_seed = doc.at("split_seed").get<std::uint64_t>();
  plan.assignment =
      doc.at("assignment").get<std::map<std::string, int>>();
  return plan;
}

std::vector<std::string> fold_test_ids(const DatasetManifest& manifest,
                                       const FoldPlan& plan, int fold) {
  std::vector<std::string> ids;
  for (const auto& rec : manifest.records) {
    if (plan.assignment.at(rec.id) == fold) ids.push_back(rec.id);
  }
  return ids;
}

std::vector<std::string> fold_train_ids(const DatasetManifest& manifest,
                                        const FoldPlan& plan, int fold) {
  std::vector<std::string> ids;
  for (const auto& rec : manifest.records) {
    if (plan.assignment.at(rec.id) != fold) ids.push_back(rec.id);
  }
  return ids;
}

}  // namespace cxr
