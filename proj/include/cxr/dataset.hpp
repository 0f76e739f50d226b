#ifndef CXR_DATASET_HPP
#define CXR_DATASET_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "cxr/errors.hpp"

namespace cxr {

// PositiveCovid is the positive class for every binary metric downstream.
enum class ClassLabel { PositiveCovid, NegativePneumonia };

const char* to_string(ClassLabel label);
ClassLabel label_from_string(const std::string& s);

enum class ImageSource { CohenRepo, KagglePneumonia, Synthetic };

const char* to_string(ImageSource source);
ImageSource source_from_string(const std::string& s);

struct ImageRecord {
  std::string id;
  ImageSource source = ImageSource::Synthetic;
  std::string relative_path;  // relative to the manifest root
  ClassLabel label = ClassLabel::NegativePneumonia;
  int width = 0;
  int height = 0;
};

struct DatasetManifest {
  std::vector<ImageRecord> records;
  std::map<ClassLabel, std::size_t> counts_per_label;
  std::string source_snapshot;  // provenance: URL / commit / date, warnings
  std::uint64_t build_seed = 0;
  std::string root;  // base directory record paths resolve against

  std::size_t count(ClassLabel label) const {
    auto it = counts_per_label.find(label);
    return it == counts_per_label.end() ? 0 : it->second;
  }
  std::string resolve(const ImageRecord& rec) const {
    return (std::filesystem::path(root) / rec.relative_path).string();
  }
};

struct FoldPlan {
  int k = 0;
  std::map<std::string, int> assignment;  // record id -> fold in [0, k)
  std::uint64_t split_seed = 0;
};

// Cohen repository ingestion: keeps metadata rows whose finding equals
// "COVID-19" (case-insensitive) and whose modality is X-ray, in metadata
// row order. Rows referencing missing or undecodable files are skipped
// with a warning appended to `warnings`.
std::vector<ImageRecord> ingest_cohen(const std::string& snapshot_root,
                                      const std::string& metadata_csv,
                                      std::vector<std::string>* warnings = nullptr);

// Selects floor(fraction * count) of the viral-pneumonia images (filename
// contains "virus") under dataset_root, by seeded sampling without
// replacement over the sorted path list.
std::vector<ImageRecord> ingest_kaggle_pneumonia(const std::string& dataset_root,
                                                 double fraction,
                                                 std::uint64_t seed);

DatasetManifest build_manifest(std::vector<ImageRecord> records,
                               const std::string& root,
                               const std::string& provenance,
                               std::uint64_t seed);

// Per-label seeded shuffle, then a single round-robin pass over labels in
// enum order; the fold cursor carries across labels so total fold sizes
// also balance to +-1.
FoldPlan stratified_kfold(const DatasetManifest& manifest, int k,
                          std::uint64_t seed);

// Writes grayscale PNGs where the class signal is a bright blob in the
// top-left (positive) or bottom-right (negative) quadrant over seeded
// noise. Deterministic: same arguments give byte-identical files.
DatasetManifest generate_synthetic(const std::string& out_dir, int n_pos,
                                   int n_neg, int image_size,
                                   std::uint64_t seed);

// JSON persistence
void save_manifest(const DatasetManifest& manifest, const std::string& path);
DatasetManifest load_manifest(const std::string& path);
void save_fold_plan(const FoldPlan& plan, const std::string& path);
FoldPlan load_fold_plan(const std::string& path);

// Record ids assigned to fold `fold` (manifest order preserved).
std::vector<std::string> fold_test_ids(const DatasetManifest& manifest,
                                       const FoldPlan& plan, int fold);
std::vector<std::string> fold_train_ids(const DatasetManifest& manifest,
                                        const FoldPlan& plan, int fold);

}  // namespace cxr

#endif
