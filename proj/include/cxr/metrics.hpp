#ifndef CXR_METRICS_HPP
#define CXR_METRICS_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "cxr/dataset.hpp"

namespace cxr {

// PositiveCovid is the positive class.
struct ConfusionMatrix {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  std::uint64_t tn = 0;

  std::uint64_t total() const { return tp + fp + fn + tn; }
};

struct MetricReport {
  double accuracy = 0.0;
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  double auc = 0.0;
  // Macro-averaged companions (mean of per-class values) reported
  // alongside the binary-positive primaries.
  double macro_precision = 0.0;
  double macro_recall = 0.0;
  double macro_f1 = 0.0;
  std::set<std::string> undefined_flags;  // metrics with zero denominators
};

struct AggregateMetric {
  double mean = 0.0;
  double stddev = 0.0;  // sample (n-1) standard deviation
};

struct AggregateReport {
  int fold_count = 0;
  AggregateMetric accuracy, precision, recall, f1, auc;
};

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
};

ConfusionMatrix confusion_matrix(const std::vector<ClassLabel>& predicted,
                                 const std::vector<ClassLabel>& actual);

double accuracy(const ConfusionMatrix& cm);

// Zero-denominator convention: returns 0 and, when `undefined` is given,
// inserts the metric name there instead of throwing.
double precision(const ConfusionMatrix& cm,
                 std::set<std::string>* undefined = nullptr);
double recall(const ConfusionMatrix& cm,
              std::set<std::string>* undefined = nullptr);
double f1_score(double precision_value, double recall_value);

// One point per distinct threshold (rule: predict positive when
// score >= t), plus the (0,0) and (1,1) endpoints.
std::vector<RocPoint> roc_curve(const std::vector<double>& positive_scores,
                                const std::vector<ClassLabel>& actual);

// Trapezoidal area under the curve.
double auc(const std::vector<RocPoint>& curve);

// Full per-fold report from labels + scores. AUC is set to 0 and flagged
// when only one class is present.
MetricReport evaluate(const std::vector<ClassLabel>& predicted,
                      const std::vector<double>& positive_scores,
                      const std::vector<ClassLabel>& actual);

AggregateReport aggregate_folds(const std::vector<MetricReport>& reports);

ConfusionMatrix consolidate_confusions(
    const std::vector<ConfusionMatrix>& per_fold);

}  // namespace cxr

#endif
