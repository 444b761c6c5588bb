#pragma once

#include <vector>

#include "core/tape.hpp"
#include "core/tensor.hpp"

namespace litetok {

// Differentiable ops. Every op takes an optional tape; with a null tape the
// op is a pure forward evaluation. Results carry requires_grad when recorded.
// Reductions accumulate in double; elementwise math stores f32.

enum class PaddingMode {
    Same,          // stride 1, reflective boundary, output length == input length
    ValidStrided,  // stride >= 2, input length divisible by stride, output = len/stride
};

TensorPtr add(Tape* tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr sub(Tape* tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr mul(Tape* tape, const TensorPtr& a, const TensorPtr& b);
TensorPtr scale(Tape* tape, const TensorPtr& a, double s);
// x[...xd] + bias[d] broadcast over the last axis
TensorPtr add_bias(Tape* tape, const TensorPtr& x, const TensorPtr& bias);

TensorPtr matmul(Tape* tape, const TensorPtr& a, const TensorPtr& b);
// a[mxk] . b[nxk]^T -> [mxn]
TensorPtr matmul_nt(Tape* tape, const TensorPtr& a, const TensorPtr& b);

TensorPtr softmax_last_axis(Tape* tape, const TensorPtr& x);
TensorPtr layer_norm(Tape* tape, const TensorPtr& x, const TensorPtr& gain, const TensorPtr& bias);
TensorPtr gelu(Tape* tape, const TensorPtr& x);

// Per-channel 1D convolution, x[seq x ch], kernel[k x ch], k odd. Out-of-range
// taps reflect about the edge sample (numpy 'reflect'); outputs sit at input
// positions 0, stride, 2*stride, ...
TensorPtr depthwise_conv1d(Tape* tape, const TensorPtr& x, const TensorPtr& kernel,
                           int64_t stride, PaddingMode mode);

// Same kernel math along one axis of a [T*H*W x C] token grid (row-major t,h,w).
// axis: 0=T, 1=H, 2=W. The convolved axis shrinks by `stride` in ValidStrided mode.
TensorPtr depthwise_conv_grid(Tape* tape, const TensorPtr& x, int64_t T, int64_t H, int64_t W,
                              int axis, const TensorPtr& kernel, int64_t stride, PaddingMode mode);

// 2D-only structural ops
TensorPtr slice_rows(Tape* tape, const TensorPtr& x, int64_t row0, int64_t count);
TensorPtr concat_rows(Tape* tape, const std::vector<TensorPtr>& parts);
TensorPtr slice_cols(Tape* tape, const TensorPtr& x, int64_t col0, int64_t count);
TensorPtr concat_cols(Tape* tape, const std::vector<TensorPtr>& parts);
TensorPtr gather_rows(Tape* tape, const TensorPtr& x, std::vector<int64_t> idx);

TensorPtr reshape(Tape* tape, const TensorPtr& x, std::vector<int64_t> shape);

TensorPtr sum_all(Tape* tape, const TensorPtr& x);
TensorPtr mean_all(Tape* tape, const TensorPtr& x);
// mean of scalar tensors, double-accurate (used to combine per-item losses)
TensorPtr mean_scalars(Tape* tape, const std::vector<TensorPtr>& parts);

// y = clamp(x, -limit, +limit); gradient passes where |x| <= limit
TensorPtr clamp_sym(Tape* tape, const TensorPtr& x, double limit);

// scalar value of a one-element tensor, preferring the double side-channel
double scalar_value(const Tensor& t);

int64_t reflect_index(int64_t i, int64_t n);

}  // namespace litetok
