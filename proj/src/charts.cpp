#include "cxr/charts.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>

namespace cxr {

namespace {

const char* display_name(ArchitectureId arch) {
  switch (arch) {
    case ArchitectureId::AlexNet: return "AlexNet";
    case ArchitectureId::Vgg11Bn: return "VGG-11";
    case ArchitectureId::SqueezeNet: return "SqueezeNet";
    default: return "DenseNet-121";
  }
}

const cv::Scalar kBarColors[5] = {
    {180, 119, 31},  {14, 127, 255}, {44, 160, 44},
    {40, 39, 214},   {189, 103, 148}};

}  // namespace

void render_metric_bar_chart(const std::string& path,
                             const std::vector<ArchitectureOutcome>& outcomes) {
  const int width = 900, height = 520;
  const int margin_left = 70, margin_bottom = 70, margin_top = 50;
  cv::Mat canvas(height, width, CV_8UC3, cv::Scalar(255, 255, 255));

  const int plot_w = width - margin_left - 30;
  const int plot_h = height - margin_top - margin_bottom;
  auto y_of = [&](double frac) {
    return margin_top + static_cast<int>((1.0 - frac) * plot_h);
  };

  // gridlines every 10%
  for (int p = 0; p <= 100; p += 10) {
    const int y = y_of(p / 100.0);
    cv::line(canvas, {margin_left, y}, {margin_left + plot_w, y},
             cv::Scalar(230, 230, 230));
    cv::putText(canvas, std::to_string(p), {8, y + 4},
                cv::FONT_HERSHEY_SIMPLEX, 0.4, cv::Scalar(60, 60, 60));
  }

  std::vector<const ArchitectureOutcome*> done;
  for (const auto& o : outcomes) {
    if (o.completed) done.push_back(&o);
  }
  const char* metric_names[5] = {"AUC", "Acc", "Prec", "Rec", "F1"};
  if (!done.empty()) {
    const int group_w = plot_w / static_cast<int>(done.size());
    const int bar_w = std::max(4, group_w / 7);
    for (std::size_t g = 0; g < done.size(); ++g) {
      const auto& a = done[g]->aggregate;
      const double values[5] = {a.auc.mean, a.accuracy.mean, a.precision.mean,
                                a.recall.mean, a.f1.mean};
      const int group_x = margin_left + static_cast<int>(g) * group_w + bar_w;
      for (int m = 0; m < 5; ++m) {
        const int x0 = group_x + m * bar_w;
        cv::rectangle(canvas, {x0, y_of(values[m])},
                      {x0 + bar_w - 2, y_of(0.0)}, kBarColors[m], cv::FILLED);
      }
      cv::putText(canvas, display_name(done[g]->architecture),
                  {group_x, height - margin_bottom + 25},
                  cv::FONT_HERSHEY_SIMPLEX, 0.5, cv::Scalar(0, 0, 0));
    }
  }

  // legend
  int lx = margin_left;
  for (int m = 0; m < 5; ++m) {
    cv::rectangle(canvas, {lx, 15}, {lx + 14, 29}, kBarColors[m], cv::FILLED);
    cv::putText(canvas, metric_names[m], {lx + 18, 27},
                cv::FONT_HERSHEY_SIMPLEX, 0.45, cv::Scalar(0, 0, 0));
    lx += 100;
  }
  cv::putText(canvas, "Mean performance per CNN (%)",
              {margin_left, height - 15}, cv::FONT_HERSHEY_SIMPLEX, 0.55,
              cv::Scalar(0, 0, 0));

  if (!cv::imwrite(path, canvas)) {
    throw std::runtime_error("cannot write chart: " + path);
  }
}

void render_roc_curve(const std::string& path,
                      const std::vector<RocPoint>& curve,
                      const std::string& title) {
  const int size = 480, margin = 50;
  cv::Mat canvas(size, size, CV_8UC3, cv::Scalar(255, 255, 255));
  const int plot = size - 2 * margin;
  auto px = [&](double fpr) { return margin + static_cast<int>(fpr * plot); };
  auto py = [&](double tpr) {
    return size - margin - static_cast<int>(tpr * plot);
  };

  cv::rectangle(canvas, {margin, margin}, {size - margin, size - margin},
                cv::Scalar(180, 180, 180));
  cv::line(canvas, {px(0), py(0)}, {px(1), py(1)}, cv::Scalar(200, 200, 200),
           1, cv::LINE_AA);

  for (std::size_t i = 1; i < curve.size(); ++i) {
    cv::line(canvas, {px(curve[i - 1].fpr), py(curve[i - 1].tpr)},
             {px(curve[i].fpr), py(curve[i].tpr)}, cv::Scalar(180, 80, 20), 2,
             cv::LINE_AA);
  }

  cv::putText(canvas, title, {margin, margin - 15}, cv::FONT_HERSHEY_SIMPLEX,
              0.5, cv::Scalar(0, 0, 0));
  cv::putText(canvas, "FPR", {size / 2 - 15, size - 12},
              cv::FONT_HERSHEY_SIMPLEX, 0.45, cv::Scalar(0, 0, 0));
  cv::putText(canvas, "TPR", {8, size / 2}, cv::FONT_HERSHEY_SIMPLEX, 0.45,
              cv::Scalar(0, 0, 0));

  if (!cv::imwrite(path, canvas)) {
    throw std::runtime_error("cannot write chart: " + path);
  }
}

}  // namespace cxr
