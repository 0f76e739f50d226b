#include "cxr/nn.hpp"

#include <Eigen/Core>
#include <cmath>

#include "cxr/errors.hpp"

namespace cxr {
namespace nn {

using MatrixRM =
    Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapRM = Eigen::Map<MatrixRM>;
using ConstMapRM = Eigen::Map<const MatrixRM>;

Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding) {
  if (input.ndim() != 3 || weight.ndim() != 4) {
    throw ValidationError("conv2d expects CHW input and OIHW weight");
  }
  const int ic = input.dim(0), ih = input.dim(1), iw = input.dim(2);
  const int oc = weight.dim(0), kh = weight.dim(2), kw = weight.dim(3);
  if (weight.dim(1) != ic) {
    throw ValidationError("conv2d channel mismatch: input " + shape_str(input.shape) +
                          " weight " + shape_str(weight.shape));
  }
  const int oh = (ih + 2 * padding - kh) / stride + 1;
  const int ow = (iw + 2 * padding - kw) / stride + 1;
  if (oh <= 0 || ow <= 0) throw ValidationError("conv2d output is empty");

  // im2col: (ic*kh*kw) x (oh*ow)
  const int krows = ic * kh * kw;
  MatrixRM col(krows, oh * ow);
  for (int c = 0; c < ic; ++c) {
    for (int ky = 0; ky < kh; ++ky) {
      for (int kx = 0; kx < kw; ++kx) {
        const int row = (c * kh + ky) * kw + kx;
        float* dst = col.data() + static_cast<std::size_t>(row) * oh * ow;
        for (int y = 0; y < oh; ++y) {
          const int sy = y * stride - padding + ky;
          if (sy < 0 || sy >= ih) {
            for (int x = 0; x < ow; ++x) dst[y * ow + x] = 0.0f;
            continue;
          }
          for (int x = 0; x < ow; ++x) {
            const int sx = x * stride - padding + kx;
            dst[y * ow + x] = (sx < 0 || sx >= iw) ? 0.0f : input.at(c, sy, sx);
          }
        }
      }
    }
  }

  Tensor out({oc, oh, ow});
  ConstMapRM w(weight.data.data(), oc, krows);
  MapRM o(out.data.data(), oc, oh * ow);
  o.noalias() = w * col;
  if (!bias.data.empty()) {
    for (int c = 0; c < oc; ++c) o.row(c).array() += bias.at(c);
  }
  return out;
}

Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias) {
  const int in_dim = weight.dim(1), out_dim = weight.dim(0);
  if (static_cast<int>(input.numel()) != in_dim) {
    throw ValidationError("linear input size mismatch");
  }
  Tensor out({out_dim});
  ConstMapRM w(weight.data.data(), out_dim, in_dim);
  Eigen::Map<const Eigen::VectorXf> x(input.data.data(), in_dim);
  Eigen::Map<Eigen::VectorXf> y(out.data.data(), out_dim);
  y.noalias() = w * x;
  if (!bias.data.empty()) {
    y += Eigen::Map<const Eigen::VectorXf>(bias.data.data(), out_dim);
  }
  return out;
}

void relu_inplace(Tensor& t) {
  for (float& v : t.data) v = v > 0.0f ? v : 0.0f;
}

Tensor max_pool2d(const Tensor& input, int kernel, int stride, int padding,
                  bool ceil_mode) {
  const int c = input.dim(0), ih = input.dim(1), iw = input.dim(2);
  auto out_size = [&](int in) {
    const double raw =
        static_cast<double>(in + 2 * padding - kernel) / stride + 1;
    int n = ceil_mode ? static_cast<int>(std::ceil(raw))
                      : static_cast<int>(std::floor(raw));
    // a ceil-mode window must start inside the padded input
    if (ceil_mode && (n - 1) * stride >= in + padding) --n;
    return n;
  };
  const int oh = out_size(ih), ow = out_size(iw);
  Tensor out({c, oh, ow});
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        float best = -std::numeric_limits<float>::infinity();
        for (int ky = 0; ky < kernel; ++ky) {
          const int sy = y * stride - padding + ky;
          if (sy < 0 || sy >= ih) continue;
          for (int kx = 0; kx < kernel; ++kx) {
            const int sx = x * stride - padding + kx;
            if (sx < 0 || sx >= iw) continue;
            best = std::max(best, input.at(ch, sy, sx));
          }
        }
        out.at(ch, y, x) = best;
      }
    }
  }
  return out;
}

Tensor adaptive_avg_pool2d(const Tensor& input, int out_h, int out_w) {
  const int c = input.dim(0), ih = input.dim(1), iw = input.dim(2);
  Tensor out({c, out_h, out_w});
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < out_h; ++y) {
      const int y0 = (y * ih) / out_h;
      const int y1 = ((y + 1) * ih + out_h - 1) / out_h;
      for (int x = 0; x < out_w; ++x) {
        const int x0 = (x * iw) / out_w;
        const int x1 = ((x + 1) * iw + out_w - 1) / out_w;
        double sum = 0.0;
        for (int sy = y0; sy < y1; ++sy) {
          for (int sx = x0; sx < x1; ++sx) sum += input.at(ch, sy, sx);
        }
        out.at(ch, y, x) =
            static_cast<float>(sum / ((y1 - y0) * (x1 - x0)));
      }
    }
  }
  return out;
}

Tensor avg_pool2d(const Tensor& input, int kernel, int stride) {
  const int c = input.dim(0), ih = input.dim(1), iw = input.dim(2);
  const int oh = (ih - kernel) / stride + 1;
  const int ow = (iw - kernel) / stride + 1;
  Tensor out({c, oh, ow});
  const double inv = 1.0 / (kernel * kernel);
  for (int ch = 0; ch < c; ++ch) {
    for (int y = 0; y < oh; ++y) {
      for (int x = 0; x < ow; ++x) {
        double sum = 0.0;
        for (int ky = 0; ky < kernel; ++ky) {
          for (int kx = 0; kx < kernel; ++kx) {
            sum += input.at(ch, y * stride + ky, x * stride + kx);
          }
        }
        out.at(ch, y, x) = static_cast<float>(sum * inv);
      }
    }
  }
  return out;
}

Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                  const Tensor& running_mean, const Tensor& running_var,
                  double eps) {
  const int c = input.dim(0), h = input.dim(1), w = input.dim(2);
  Tensor out(input.shape);
  for (int ch = 0; ch < c; ++ch) {
    const double scale =
        gamma.at(ch) / std::sqrt(static_cast<double>(running_var.at(ch)) + eps);
    const double shift = beta.at(ch) - scale * running_mean.at(ch);
    const std::size_t base = static_cast<std::size_t>(ch) * h * w;
    for (int i = 0; i < h * w; ++i) {
      out.data[base + i] =
          static_cast<float>(input.data[base + i] * scale + shift);
    }
  }
  return out;
}

Tensor concat_channels(const std::vector<const Tensor*>& parts) {
  if (parts.empty()) throw ValidationError("concat of nothing");
  const int h = parts[0]->dim(1), w = parts[0]->dim(2);
  int c = 0;
  for (const Tensor* p : parts) {
    if (p->dim(1) != h || p->dim(2) != w) {
      throw ValidationError("concat spatial mismatch");
    }
    c += p->dim(0);
  }
  Tensor out({c, h, w});
  std::size_t offset = 0;
  for (const Tensor* p : parts) {
    std::copy(p->data.begin(), p->data.end(), out.data.begin() + offset);
    offset += p->data.size();
  }
  return out;
}

Tensor flatten(const Tensor& input) {
  Tensor out = input;
  out.shape = {static_cast<int>(input.numel())};
  return out;
}

}  // namespace nn
}  // namespace cxr
