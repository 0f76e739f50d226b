#ifndef CXR_CHARTS_HPP
#define CXR_CHARTS_HPP

#include <string>
#include <vector>

#include "cxr/config.hpp"
#include "cxr/metrics.hpp"

namespace cxr {

// Grouped bar chart of the per-architecture mean metrics, PNG output.
void render_metric_bar_chart(const std::string& path,
                             const std::vector<ArchitectureOutcome>& outcomes);

// Single ROC staircase with its AUC in the title, PNG output.
void render_roc_curve(const std::string& path,
                      const std::vector<RocPoint>& curve,
                      const std::string& title);

}  // namespace cxr

#endif
