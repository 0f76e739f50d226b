#ifndef CXR_NN_HPP
#define CXR_NN_HPP

#include <vector>

#include "cxr/tensor.hpp"

namespace cxr {
namespace nn {

// All ops take a single CHW tensor; batching is a loop at the call site.

// weight: OC x IC x KH x KW, bias: OC (may be empty for no bias).
Tensor conv2d(const Tensor& input, const Tensor& weight, const Tensor& bias,
              int stride, int padding);

// weight: OUT x IN over a flattened input.
Tensor linear(const Tensor& input, const Tensor& weight, const Tensor& bias);

void relu_inplace(Tensor& t);

Tensor max_pool2d(const Tensor& input, int kernel, int stride, int padding = 0,
                  bool ceil_mode = false);

// Torch adaptive average pooling bin convention:
// start = floor(i*in/out), end = ceil((i+1)*in/out).
Tensor adaptive_avg_pool2d(const Tensor& input, int out_h, int out_w);

Tensor avg_pool2d(const Tensor& input, int kernel, int stride);

// Inference-mode batch normalization over channels.
Tensor batch_norm(const Tensor& input, const Tensor& gamma, const Tensor& beta,
                  const Tensor& running_mean, const Tensor& running_var,
                  double eps = 1e-5);

// Channel-wise concatenation of CHW tensors with equal spatial dims.
Tensor concat_channels(const std::vector<const Tensor*>& parts);

Tensor flatten(const Tensor& input);

}  // namespace nn
}  // namespace cxr

#endif
