#include "cxr/report.hpp"

#include <cstdio>
#include <fstream>

namespace cxr {

const std::vector<LiteratureEntry>& literature_comparison() {
  static const std::vector<LiteratureEntry> entries = {
      {"Narin et al. (ResNet-50)", "accuracy", 98.00},
      {"Hemdan et al. (COVIDX-Net)", "accuracy", 90.00},
      {"Sethy and Behera (ResNet-50 + SVM)", "accuracy", 95.38},
      {"Wang and Wong (COVID-Net)", "accuracy", 93.30},
      {"Apostolopoulos and Mpesiana (MobileNet v2)", "accuracy", 96.78},
      {"Khan et al. (CoroNet)", "accuracy", 89.60},
      {"Ozturk et al. (DarkNet)", "accuracy", 98.08},
      {"Pereira et al. (Inception-V3 + texture)", "f1", 89.00},
  };
  return entries;
}

std::string format_percent(double fraction, int decimals) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, fraction * 100.0);
  return buf;
}

namespace {

std::string mean_std(const AggregateMetric& m) {
  return format_percent(m.mean) + " +- " + format_percent(m.stddev);
}

const char* display_name(ArchitectureId arch) {
  switch (arch) {
    case ArchitectureId::AlexNet: return "AlexNet";
    case ArchitectureId::Vgg11Bn: return "VGG-11";
    case ArchitectureId::SqueezeNet: return "SqueezeNet";
    default: return "DenseNet-121";
  }
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

}  // namespace

void write_metrics_csv(const std::string& path,
                       const std::vector<ArchitectureOutcome>& outcomes) {
  auto out = open_out(path);
  out << "cnn,auc_mean_pct,auc_std_pct,accuracy_mean_pct,accuracy_std_pct,"
         "precision_mean_pct,precision_std_pct,recall_mean_pct,recall_std_pct,"
         "f1_mean_pct,f1_std_pct\n";
  for (const auto& o : outcomes) {
    if (!o.completed) continue;
    const auto& a = o.aggregate;
    out << display_name(o.architecture) << ","
        << format_percent(a.auc.mean) << "," << format_percent(a.auc.stddev) << ","
        << format_percent(a.accuracy.mean) << "," << format_percent(a.accuracy.stddev) << ","
        << format_percent(a.precision.mean) << "," << format_percent(a.precision.stddev) << ","
        << format_percent(a.recall.mean) << "," << format_percent(a.recall.stddev) << ","
        << format_percent(a.f1.mean) << "," << format_percent(a.f1.stddev) << "\n";
  }
}

void write_confusion_csv(const std::string& path, const ConfusionMatrix& cm) {
  auto out = open_out(path);
  out << ",pred_positive,pred_negative\n";
  out << "true_positive," << cm.tp << "," << cm.fn << "\n";
  out << "true_negative," << cm.fp << "," << cm.tn << "\n";
}

void write_comparison_csv(const std::string& path,
                          const std::vector<ArchitectureOutcome>& outcomes) {
  const ArchitectureOutcome* best = nullptr;
  for (const auto& o : outcomes) {
    if (!o.completed) continue;
    if (!best || o.aggregate.accuracy.mean > best->aggregate.accuracy.mean) {
      best = &o;
    }
  }
  auto out = open_out(path);
  out << "method,metric,value_pct\n";
  for (const auto& e : literature_comparison()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", e.value_percent);
    out << "\"" << e.method << "\"," << e.metric << "," << buf << "\n";
  }
  if (best) {
    const std::string name = std::string("Our work (") +
                             display_name(best->architecture) +
                             " + SFT + data aug.)";
    out << "\"" << name << "\",accuracy,"
        << format_percent(best->aggregate.accuracy.mean) << "\n";
    out << "\"" << name << "\",f1," << format_percent(best->aggregate.f1.mean)
        << "\n";
  }
}

void append_epoch_csv(const std::string& path, const std::string& architecture,
                      int fold, const std::vector<EpochLog>& logs) {
  const bool fresh = !std::ifstream(path).good();
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + path);
  if (fresh) out << "architecture,fold,epoch,mean_training_loss,wall_time_seconds\n";
  for (const auto& log : logs) {
    char loss[32];
    std::snprintf(loss, sizeof(loss), "%.6f", log.mean_training_loss);
    char secs[32];
    std::snprintf(secs, sizeof(secs), "%.3f", log.wall_time_seconds);
    out << architecture << "," << fold << "," << log.epoch_index << ","
        << loss << "," << secs << "\n";
  }
}

void write_report_markdown(const std::string& path, const RunRecord& record) {
  auto out = open_out(path);
  out << "# Cross-validation report\n\n";
  if (record.partial) {
    out << "**Partial run** — one or more architectures failed; completed "
           "results only.\n\n";
  }

  out << "## Average performance (mean +- std over "
      << (record.outcomes.empty() ? 0 : record.outcomes.front().aggregate.fold_count)
      << " folds, %)\n\n";
  out << "| CNN | AUC | Accuracy | Precision | Recall | F1-Score |\n";
  out << "|-----|-----|----------|-----------|--------|----------|\n";
  for (const auto& o : record.outcomes) {
    if (!o.completed) {
      out << "| " << display_name(o.architecture)
          << " | failed | failed | failed | failed | failed |\n";
      continue;
    }
    const auto& a = o.aggregate;
    out << "| " << display_name(o.architecture) << " | " << mean_std(a.auc)
        << " | " << mean_std(a.accuracy) << " | " << mean_std(a.precision)
        << " | " << mean_std(a.recall) << " | " << mean_std(a.f1) << " |\n";
  }

  out << "\n## Consolidated confusion matrices (all folds)\n\n";
  for (const auto& o : record.outcomes) {
    if (!o.completed) continue;
    out << "### " << display_name(o.architecture) << "\n\n";
    out << "| true \\ predicted | Positive | Negative |\n";
    out << "|------------------|----------|----------|\n";
    out << "| Positive | " << o.consolidated.tp << " | " << o.consolidated.fn
        << " |\n";
    out << "| Negative | " << o.consolidated.fp << " | " << o.consolidated.tn
        << " |\n\n";
    out << "Consolidated accuracy: "
        << format_percent(o.consolidated_accuracy) << "%\n\n";
  }

  out << "## Comparison with published results\n\n";
  out << "| Method | Metric | Value (%) |\n|--------|--------|-----------|\n";
  for (const auto& e : literature_comparison()) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", e.value_percent);
    out << "| " << e.method << " | " << e.metric << " | " << buf << " |\n";
  }
  const ArchitectureOutcome* best = nullptr;
  for (const auto& o : record.outcomes) {
    if (!o.completed) continue;
    if (!best || o.aggregate.accuracy.mean > best->aggregate.accuracy.mean) {
      best = &o;
    }
  }
  if (best) {
    out << "| **Our run (" << display_name(best->architecture)
        << " + SFT + data aug.)** | accuracy | "
        << format_percent(best->aggregate.accuracy.mean) << " |\n";
    out << "| **Our run (" << display_name(best->architecture)
        << " + SFT + data aug.)** | f1 | "
        << format_percent(best->aggregate.f1.mean) << " |\n";
  }
}

}  // namespace cxr
