#include "cxr/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "cxr/errors.hpp"

namespace cxr {

ConfusionMatrix confusion_matrix(const std::vector<ClassLabel>& predicted,
                                 const std::vector<ClassLabel>& actual) {
  if (predicted.size() != actual.size()) {
    throw ValidationError("predicted/actual length mismatch");
  }
  if (predicted.empty()) {
    throw ValidationError("confusion matrix over empty lists");
  }
  ConfusionMatrix cm;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    const bool pred_pos = predicted[i] == ClassLabel::PositiveCovid;
    const bool true_pos = actual[i] == ClassLabel::PositiveCovid;
    if (pred_pos && true_pos) ++cm.tp;
    else if (pred_pos && !true_pos) ++cm.fp;
    else if (!pred_pos && true_pos) ++cm.fn;
    else ++cm.tn;
  }
  return cm;
}

double accuracy(const ConfusionMatrix& cm) {
  if (cm.total() == 0) throw ValidationError("accuracy of empty matrix");
  return static_cast<double>(cm.tp + cm.tn) / static_cast<double>(cm.total());
}

double precision(const ConfusionMatrix& cm, std::set<std::string>* undefined) {
  const std::uint64_t denom = cm.tp + cm.fp;
  if (denom == 0) {
    if (undefined) undefined->insert("precision");
    return 0.0;
  }
  return static_cast<double>(cm.tp) / static_cast<double>(denom);
}

double recall(const ConfusionMatrix& cm, std::set<std::string>* undefined) {
  const std::uint64_t denom = cm.tp + cm.fn;
  if (denom == 0) {
    if (undefined) undefined->insert("recall");
    return 0.0;
  }
  return static_cast<double>(cm.tp) / static_cast<double>(denom);
}

double f1_score(double precision_value, double recall_value) {
  const double sum = precision_value + recall_value;
  if (sum == 0.0) return 0.0;
  return 2.0 * precision_value * recall_value / sum;
}

std::vector<RocPoint> roc_curve(const std::vector<double>& positive_scores,
                                const std::vector<ClassLabel>& actual) {
  if (positive_scores.size() != actual.size()) {
    throw ValidationError("scores/actual length mismatch");
  }
  std::uint64_t n_pos = 0, n_neg = 0;
  for (ClassLabel label : actual) {
    (label == ClassLabel::PositiveCovid ? n_pos : n_neg)++;
  }
  if (n_pos == 0 || n_neg == 0) {
    throw ValidationError("roc_curve requires both classes present");
  }

  std::vector<std::size_t> order(actual.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return positive_scores[a] > positive_scores[b];
  });

  std::vector<RocPoint> curve;
  curve.push_back({0.0, 0.0});
  std::uint64_t tp = 0, fp = 0;
  std::size_t i = 0;
  while (i < order.size()) {
    // sweep the threshold down; samples tied on score enter together
    const double t = positive_scores[order[i]];
    while (i < order.size() && positive_scores[order[i]] == t) {
      if (actual[order[i]] == ClassLabel::PositiveCovid) ++tp;
      else ++fp;
      ++i;
    }
    curve.push_back({static_cast<double>(fp) / n_neg,
                     static_cast<double>(tp) / n_pos});
  }
  if (curve.back().fpr != 1.0 || curve.back().tpr != 1.0) {
    curve.push_back({1.0, 1.0});
  }
  return curve;
}

double auc(const std::vector<RocPoint>& curve) {
  if (curve.size() < 2) throw ValidationError("auc of degenerate curve");
  double area = 0.0;
  for (std::size_t i = 1; i < curve.size(); ++i) {
    const double dx = curve[i].fpr - curve[i - 1].fpr;
    area += dx * (curve[i].tpr + curve[i - 1].tpr) / 2.0;
  }
  return area;
}

MetricReport evaluate(const std::vector<ClassLabel>& predicted,
                      const std::vector<double>& positive_scores,
                      const std::vector<ClassLabel>& actual) {
  const ConfusionMatrix cm = confusion_matrix(predicted, actual);
  MetricReport rep;
  rep.accuracy = accuracy(cm);
  rep.precision = precision(cm, &rep.undefined_flags);
  rep.recall = recall(cm, &rep.undefined_flags);
  rep.f1 = f1_score(rep.precision, rep.recall);

  // negative-class counterparts for the macro variants
  const ConfusionMatrix neg{cm.tn, cm.fn, cm.fp, cm.tp};
  std::set<std::string> neg_flags;
  const double neg_prec = precision(neg, &neg_flags);
  const double neg_rec = recall(neg, &neg_flags);
  rep.macro_precision = (rep.precision + neg_prec) / 2.0;
  rep.macro_recall = (rep.recall + neg_rec) / 2.0;
  rep.macro_f1 = (rep.f1 + f1_score(neg_prec, neg_rec)) / 2.0;

  try {
    rep.auc = auc(roc_curve(positive_scores, actual));
  } catch (const ValidationError&) {
    rep.auc = 0.0;
    rep.undefined_flags.insert("auc");
  }
  return rep;
}

AggregateReport aggregate_folds(const std::vector<MetricReport>& reports) {
  if (reports.size() < 2) {
    throw ValidationError("aggregate_folds needs at least 2 reports");
  }
  const double n = static_cast<double>(reports.size());
  auto agg = [&](auto getter) {
    AggregateMetric m;
    for (const auto& r : reports) m.mean += getter(r);
    m.mean /= n;
    double ss = 0.0;
    bool constant = true;
    for (const auto& r : reports) {
      const double d = getter(r) - m.mean;
      ss += d * d;
      constant = constant && getter(r) == getter(reports.front());
    }
    // identical fold values would otherwise give a tiny nonzero std from
    // mean roundoff
    m.stddev = constant ? 0.0 : std::sqrt(ss / (n - 1.0));
    return m;
  };
  AggregateReport out;
  out.fold_count = static_cast<int>(reports.size());
  out.accuracy = agg([](const MetricReport& r) { return r.accuracy; });
  out.precision = agg([](const MetricReport& r) { return r.precision; });
  out.recall = agg([](const MetricReport& r) { return r.recall; });
  out.f1 = agg([](const MetricReport& r) { return r.f1; });
  out.auc = agg([](const MetricReport& r) { return r.auc; });
  return out;
}

ConfusionMatrix consolidate_confusions(
    const std::vector<ConfusionMatrix>& per_fold) {
  if (per_fold.empty()) throw ValidationError("consolidating empty list");
  ConfusionMatrix sum;
  for (const auto& cm : per_fold) {
    sum.tp += cm.tp;
    sum.fp += cm.fp;
    sum.fn += cm.fn;
    sum.tn += cm.tn;
  }
  return sum;
}

}  // namespace cxr
