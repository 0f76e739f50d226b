#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <set>

#include "cxr/dataset.hpp"
#include "cxr/image.hpp"

namespace fs = std::filesystem;
using namespace cxr;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "cxr_tests" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_dummy_png(const fs::path& path, int size = 40) {
  fs::create_directories(path.parent_path());
  Image img(size, size, 1);
  for (int y = 0; y < size; ++y) {
    for (int x = 0; x < size; ++x) img.at(y, x, 0) = float((x * 7 + y * 3) % 256);
  }
  save_png(path.string(), img);
}

ImageRecord fake_record(const std::string& id, ClassLabel label) {
  ImageRecord rec;
  rec.id = id;
  rec.label = label;
  rec.relative_path = id + ".png";
  rec.width = rec.height = 64;
  return rec;
}

DatasetManifest fake_manifest(int n_pos, int n_neg) {
  std::vector<ImageRecord> records;
  for (int i = 0; i < n_pos; ++i) {
    records.push_back(fake_record("p" + std::to_string(i), ClassLabel::PositiveCovid));
  }
  for (int i = 0; i < n_neg; ++i) {
    records.push_back(fake_record("n" + std::to_string(i), ClassLabel::NegativePneumonia));
  }
  return build_manifest(std::move(records), "/tmp", "test", 1);
}

}  // namespace

TEST_CASE("ingest_cohen filters finding and modality") {
  const auto dir = fresh_dir("cohen");
  write_dummy_png(dir / "images" / "a.png");
  write_dummy_png(dir / "images" / "b.png");
  write_dummy_png(dir / "images" / "c.png");
  {
    std::ofstream csv(dir / "metadata.csv");
    csv << "patientid,finding,view,modality,folder,filename\n";
    csv << "1,COVID-19,PA,X-ray,images,a.png\n";
    csv << "2,No Finding,PA,X-ray,images,b.png\n";
    csv << "3,COVID-19,PA,CT,images,c.png\n";
  }
  const auto records = ingest_cohen(dir.string(), (dir / "metadata.csv").string());
  REQUIRE(records.size() == 1);
  CHECK(records[0].label == ClassLabel::PositiveCovid);
  CHECK(records[0].relative_path == "images/a.png");
  CHECK(records[0].width == 40);
}

TEST_CASE("ingest_cohen records warnings for missing files") {
  const auto dir = fresh_dir("cohen_missing");
  write_dummy_png(dir / "images" / "ok.png");
  {
    std::ofstream csv(dir / "metadata.csv");
    csv << "finding,modality,filename\n";
    csv << "COVID-19,X-ray,ok.png\n";
    csv << "covid-19,x-ray,gone.png\n";
  }
  std::vector<std::string> warnings;
  const auto records =
      ingest_cohen(dir.string(), (dir / "metadata.csv").string(), &warnings);
  CHECK(records.size() == 1);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0].find("gone.png") != std::string::npos);
}

TEST_CASE("ingest_cohen on empty table yields empty list") {
  const auto dir = fresh_dir("cohen_empty");
  { std::ofstream csv(dir / "metadata.csv"); }
  CHECK(ingest_cohen(dir.string(), (dir / "metadata.csv").string()).empty());
}

TEST_CASE("ingest_cohen without metadata table is an ingestion error") {
  CHECK_THROWS_AS(ingest_cohen("/nonexistent", "/nonexistent/metadata.csv"),
                  IngestError);
}

TEST_CASE("ingest_kaggle_pneumonia full selection") {
  const auto dir = fresh_dir("kaggle_full");
  for (int i = 0; i < 10; ++i) {
    write_dummy_png(dir / "train" / ("person_virus_" + std::to_string(i) + ".png"));
  }
  write_dummy_png(dir / "train" / "person_bacteria_1.png");
  const auto records = ingest_kaggle_pneumonia(dir.string(), 1.0, 3);
  CHECK(records.size() == 10);
  for (const auto& rec : records) {
    CHECK(rec.label == ClassLabel::NegativePneumonia);
  }
}

TEST_CASE("ingest_kaggle_pneumonia floor fraction and determinism") {
  const auto dir = fresh_dir("kaggle_frac");
  for (int i = 0; i < 9; ++i) {
    write_dummy_png(dir / ("img_virus_" + std::to_string(i) + ".jpeg"));
  }
  const auto a = ingest_kaggle_pneumonia(dir.string(), 0.5, 7);
  const auto b = ingest_kaggle_pneumonia(dir.string(), 0.5, 7);
  REQUIRE(a.size() == 4);  // floor(0.5 * 9)
  REQUIRE(b.size() == 4);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].id == b[i].id);
  std::set<std::string> distinct;
  for (const auto& rec : a) distinct.insert(rec.id);
  CHECK(distinct.size() == 4);
}

TEST_CASE("ingest_kaggle_pneumonia rejects bad fraction and empty sets") {
  const auto dir = fresh_dir("kaggle_bad");
  write_dummy_png(dir / "img_bacteria_0.png");
  CHECK_THROWS_AS(ingest_kaggle_pneumonia(dir.string(), 0.0, 1), ValidationError);
  CHECK_THROWS_AS(ingest_kaggle_pneumonia(dir.string(), 1.5, 1), ValidationError);
  CHECK_THROWS_AS(ingest_kaggle_pneumonia(dir.string(), 0.5, 1), IngestError);
}

TEST_CASE("build_manifest counts per label") {
  auto m = fake_manifest(108, 299);
  CHECK(m.records.size() == 407);
  CHECK(m.count(ClassLabel::PositiveCovid) == 108);
  CHECK(m.count(ClassLabel::NegativePneumonia) == 299);

  auto single = fake_manifest(1, 0);
  CHECK(single.count(ClassLabel::PositiveCovid) == 1);
  CHECK(single.count(ClassLabel::NegativePneumonia) == 0);
}

TEST_CASE("build_manifest rejects duplicate ids") {
  std::vector<ImageRecord> records{fake_record("x", ClassLabel::PositiveCovid),
                                   fake_record("x", ClassLabel::NegativePneumonia)};
  CHECK_THROWS_AS(build_manifest(std::move(records), "/tmp", "t", 1),
                  ValidationError);
}

TEST_CASE("stratified_kfold partitions with per-label balance") {
  const auto manifest = fake_manifest(108, 299);
  const auto plan = stratified_kfold(manifest, 10, 42);

  std::vector<int> pos(10, 0), neg(10, 0);
  for (const auto& rec : manifest.records) {
    const int fold = plan.assignment.at(rec.id);
    REQUIRE(fold >= 0);
    REQUIRE(fold < 10);
    (rec.label == ClassLabel::PositiveCovid ? pos : neg)[fold]++;
  }
  CHECK(plan.assignment.size() == manifest.records.size());
  for (int f = 0; f < 10; ++f) {
    CHECK((pos[f] == 10 || pos[f] == 11));
    CHECK((neg[f] == 29 || neg[f] == 30));
    const int total = pos[f] + neg[f];
    CHECK((total == 40 || total == 41));
  }
}

TEST_CASE("stratified_kfold exact divisibility") {
  const auto manifest = fake_manifest(10, 10);
  const auto plan = stratified_kfold(manifest, 10, 1);
  std::vector<int> pos(10, 0), neg(10, 0);
  for (const auto& rec : manifest.records) {
    (rec.label == ClassLabel::PositiveCovid
         ? pos : neg)[plan.assignment.at(rec.id)]++;
  }
  for (int f = 0; f < 10; ++f) {
    CHECK(pos[f] == 1);
    CHECK(neg[f] == 1);
  }
}

TEST_CASE("stratified_kfold names the short label") {
  const auto manifest = fake_manifest(5, 20);
  try {
    stratified_kfold(manifest, 10, 1);
    FAIL("expected SplitError");
  } catch (const SplitError& e) {
    CHECK(std::string(e.what()).find("positive") != std::string::npos);
  }
}

TEST_CASE("stratified_kfold is deterministic in the seed") {
  const auto manifest = fake_manifest(23, 31);
  const auto a = stratified_kfold(manifest, 5, 77);
  const auto b = stratified_kfold(manifest, 5, 77);
  const auto c = stratified_kfold(manifest, 5, 78);
  CHECK(a.assignment == b.assignment);
  CHECK(a.assignment != c.assignment);
}

TEST_CASE("generate_synthetic echoes counts and is byte-deterministic") {
  const auto dir1 = fresh_dir("syn1");
  const auto dir2 = fresh_dir("syn2");
  const auto m1 = generate_synthetic(dir1.string(), 20, 20, 64, 1);
  const auto m2 = generate_synthetic(dir2.string(), 20, 20, 64, 1);
  CHECK(m1.count(ClassLabel::PositiveCovid) == 20);
  CHECK(m1.count(ClassLabel::NegativePneumonia) == 20);

  for (const auto& rec : m1.records) {
    std::ifstream f1(m1.resolve(rec), std::ios::binary);
    std::ifstream f2((fs::path(dir2) / rec.relative_path).string(),
                     std::ios::binary);
    std::string b1((std::istreambuf_iterator<char>(f1)), {});
    std::string b2((std::istreambuf_iterator<char>(f2)), {});
    REQUIRE(!b1.empty());
    CHECK(b1 == b2);
  }

  const auto m3 = generate_synthetic(fresh_dir("syn3").string(), 0, 5, 64, 1);
  CHECK(m3.count(ClassLabel::PositiveCovid) == 0);
  CHECK(m3.count(ClassLabel::NegativePneumonia) == 5);
}

TEST_CASE("generate_synthetic validates arguments") {
  CHECK_THROWS_AS(generate_synthetic(fresh_dir("syn_bad").string(), 1, 1, 16, 1),
                  ValidationError);
}

TEST_CASE("manifest and fold plan survive a JSON round trip") {
  const auto dir = fresh_dir("json_roundtrip");
  const auto manifest = fake_manifest(6, 9);
  const auto plan = stratified_kfold(manifest, 3, 5);

  save_manifest(manifest, (dir / "manifest.json").string());
  save_fold_plan(plan, (dir / "plan.json").string());
  const auto manifest2 = load_manifest((dir / "manifest.json").string());
  const auto plan2 = load_fold_plan((dir / "plan.json").string());

  REQUIRE(manifest2.records.size() == manifest.records.size());
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    CHECK(manifest2.records[i].id == manifest.records[i].id);
    CHECK(manifest2.records[i].label == manifest.records[i].label);
  }
  CHECK(manifest2.counts_per_label == manifest.counts_per_label);
  CHECK(plan2.k == plan.k);
  CHECK(plan2.assignment == plan.assignment);
}

TEST_CASE("fold id helpers partition the manifest") {
  const auto manifest = fake_manifest(8, 12);
  const auto plan = stratified_kfold(manifest, 4, 2);
  std::set<std::string> all;
  for (int f = 0; f < 4; ++f) {
    const auto test = fold_test_ids(manifest, plan, f);
    const auto train = fold_train_ids(manifest, plan, f);
    CHECK(test.size() + train.size() == manifest.records.size());
    for (const auto& id : test) CHECK(all.insert(id).second);
  }
  CHECK(all.size() == manifest.records.size());
}
