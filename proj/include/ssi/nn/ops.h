#pragma once

#include <vector>

#include "ssi/nn/tensor.h"

namespace ssi::nn {

// Elementwise, identical shapes.
Tensor Add(const Tensor& a, const Tensor& b);
Tensor Sub(const Tensor& a, const Tensor& b);
Tensor Mul(const Tensor& a, const Tensor& b);
Tensor Div(const Tensor& a, const Tensor& b);

Tensor AddScalar(const Tensor& x, double s);
Tensor MulScalar(const Tensor& x, double s);
Tensor Neg(const Tensor& x);

// v has shape [x.dim(axis)] and is broadcast along every other axis.
Tensor AddAlong(const Tensor& x, const Tensor& v, int axis);
Tensor MulAlong(const Tensor& x, const Tensor& v, int axis);

Tensor Sigmoid(const Tensor& x);
Tensor Tanh(const Tensor& x);
Tensor LeakyRelu(const Tensor& x, double slope);
// alpha has 1 element (shared) or x.dim(1) elements (per channel).
Tensor PRelu(const Tensor& x, const Tensor& alpha);
Tensor Square(const Tensor& x);
Tensor Sqrt(const Tensor& x);
Tensor Log(const Tensor& x);
// x^p for x > 0.
Tensor Pow(const Tensor& x, double p);
// Gradient is zero outside [lo, hi].
Tensor Clamp(const Tensor& x, double lo, double hi);

Tensor Sum(const Tensor& x);
Tensor Mean(const Tensor& x);
// Reduces `axis` away.
Tensor SumAxis(const Tensor& x, int axis);
Tensor MeanAxis(const Tensor& x, int axis);

Tensor Reshape(const Tensor& x, const Shape& shape);
Tensor Permute(const Tensor& x, const std::vector<int>& dims);
Tensor Concat(const std::vector<Tensor>& xs, int axis);
Tensor Slice(const Tensor& x, int axis, int64_t begin, int64_t end);
// Zero padding along one axis.
Tensor Pad(const Tensor& x, int axis, int64_t before, int64_t after);
// Repeats the first slice `before` times along `axis`.
Tensor PadReplicate(const Tensor& x, int axis, int64_t before);

// a [m, k] x b [k, n].
Tensor MatMul(const Tensor& a, const Tensor& b);
// x [m, in], w [out, in], optional b [out] -> [m, out].
Tensor Linear(const Tensor& x, const Tensor& w, const Tensor& b);

struct Conv2dGeometry {
  int stride_h = 1, stride_w = 1;
  int dilation_h = 1, dilation_w = 1;
  int pad_top = 0, pad_bottom = 0, pad_left = 0, pad_right = 0;
};

int64_t ConvOutputSize(int64_t in, int kernel, int stride, int dilation, int pad_lo, int pad_hi);

// x [N, C, H, W], w [O, C, kh, kw], optional b [O].
Tensor Conv2d(const Tensor& x, const Tensor& w, const Tensor& b, const Conv2dGeometry& g);

// Adjoint of Conv2d with the same geometry: x [N, C, H, W], w [C, O, kh, kw],
// optional b [O]. (out_h, out_w) is the size whose Conv2d output would be
// (H, W).
Tensor ConvTranspose2d(const Tensor& x, const Tensor& w, const Tensor& b, const Conv2dGeometry& g,
                       int64_t out_h, int64_t out_w);

// Average pooling over the last axis, zero padding counted in the average.
Tensor AvgPoolLast(const Tensor& x, int kernel, int stride, int pad);

// x [N, C, F, T]: normalizes each (n, t) over (C, F), then applies the
// per-channel gain and bias. Depends on frame t only.
Tensor FrameNorm(const Tensor& x, const Tensor& gain, const Tensor& bias, double eps = 1e-5);

}  // namespace ssi::nn
