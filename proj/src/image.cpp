#include "cxr/image.hpp"

#include <opencv2/imgcodecs.hpp>
#include <opencv2/imgproc.hpp>
#include <stdexcept>

namespace cxr {

Image load_image(const std::string& path) {
  cv::Mat mat = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (mat.empty()) {
    throw std::runtime_error("cannot decode image: " + path);
  }
  if (mat.channels() == 4) {
    cv::cvtColor(mat, mat, cv::COLOR_BGRA2BGR);
  }
  if (mat.depth() != CV_8U) {
    cv::Mat tmp;
    cv::normalize(mat, tmp, 0, 255, cv::NORM_MINMAX);
    tmp.convertTo(mat, CV_8U);
  }
  const int c = mat.channels() == 1 ? 1 : 3;
  Image img(mat.rows, mat.cols, c);
  for (int y = 0; y < mat.rows; ++y) {
    for (int x = 0; x < mat.cols; ++x) {
      if (c == 1) {
        img.at(y, x, 0) = static_cast<float>(mat.at<uchar>(y, x));
      } else {
        const cv::Vec3b bgr = mat.at<cv::Vec3b>(y, x);
        img.at(y, x, 0) = static_cast<float>(bgr[2]);
        img.at(y, x, 1) = static_cast<float>(bgr[1]);
        img.at(y, x, 2) = static_cast<float>(bgr[0]);
      }
    }
  }
  return img;
}

bool image_decodable(const std::string& path) {
  cv::Mat mat = cv::imread(path, cv::IMREAD_UNCHANGED);
  return !mat.empty();
}

bool probe_image(const std::string& path, int& width, int& height) {
  cv::Mat mat = cv::imread(path, cv::IMREAD_UNCHANGED);
  if (mat.empty()) return false;
  width = mat.cols;
  height = mat.rows;
  return true;
}

void save_png(const std::string& path, const Image& img) {
  const int type = img.channels == 1 ? CV_8UC1 : CV_8UC3;
  cv::Mat mat(img.height, img.width, type);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      if (img.channels == 1) {
        float v = img.at(y, x, 0);
        mat.at<uchar>(y, x) =
            static_cast<uchar>(std::clamp(v, 0.0f, 255.0f) + 0.5f);
      } else {
        cv::Vec3b bgr;
        bgr[2] = static_cast<uchar>(std::clamp(img.at(y, x, 0), 0.f, 255.f) + 0.5f);
        bgr[1] = static_cast<uchar>(std::clamp(img.at(y, x, 1), 0.f, 255.f) + 0.5f);
        bgr[0] = static_cast<uchar>(std::clamp(img.at(y, x, 2), 0.f, 255.f) + 0.5f);
        mat.at<cv::Vec3b>(y, x) = bgr;
      }
    }
  }
  if (!cv::imwrite(path, mat)) {
    throw std::runtime_error("cannot write image: " + path);
  }
}

}  // namespace cxr
