#ifndef CXR_REPORT_HPP
#define CXR_REPORT_HPP

#include <string>
#include <utility>
#include <vector>

#include "cxr/config.hpp"
#include "cxr/metrics.hpp"
#include "cxr/models.hpp"
#include "cxr/training.hpp"

namespace cxr {

// External results quoted for the comparison table; never recomputed.
struct LiteratureEntry {
  std::string method;
  std::string metric;  // "accuracy" or "f1"
  double value_percent = 0.0;
};

const std::vector<LiteratureEntry>& literature_comparison();

// Mean +- std percentages, one row per architecture: AUC, Accuracy,
// Precision, Recall, F1.
void write_metrics_csv(const std::string& path,
                       const std::vector<ArchitectureOutcome>& outcomes);

// 2x2 layout, rows = true class, columns = predicted class.
void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm);

// Our best row appended to the static literature rows.
void write_comparison_csv(const std::string& path,
                          const std::vector<ArchitectureOutcome>& outcomes);

void append_epoch_csv(const std::string& path, const std::string& architecture,
                      int fold, const std::vector<EpochLog>& logs);

// Markdown report bundling the metric table, consolidated confusion
// matrices, and the literature comparison.
void write_report_markdown(const std::string& path, const RunRecord& record);

std::string format_percent(double fraction, int decimals = 2);

}  // namespace cxr

#endif
