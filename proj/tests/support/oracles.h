#pragma once

#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "ssi/common/rng.h"
#include "ssi/nn/tensor.h"

namespace ssi::testing {

// Central-difference gradient check of a scalar function of `inputs`.
// Compares analytic and numeric gradients over up to `max_entries` entries
// per input and returns ||analytic - numeric|| / max(||analytic||, ||numeric||).
double GradCheck(const std::function<nn::Tensor()>& f, const std::vector<nn::Tensor>& inputs, Rng& rng,
                 int max_entries = 24, double h = 1e-6);

nn::Tensor RandomTensor(const nn::Shape& shape, Rng& rng, double scale = 1.0, bool requires_grad = false);

// O(N^2) DFT of a real frame (bins 0..N/2).
std::vector<std::complex<double>> DirectDft(const std::vector<double>& x, int n);

// Full linear convolution by the O(n*m) double loop.
std::vector<double> DirectConvolve(const std::vector<double>& a, const std::vector<double>& b);

// Direct 2-D cross-correlation: x [N,C,H,W], w [O,C,kh,kw], explicit zero padding.
std::vector<double> DirectConv2d(const nn::Tensor& x, const nn::Tensor& w, const nn::Tensor& b, int stride_h,
                                 int stride_w, int dil_h, int dil_w, int pad_top, int pad_bottom, int pad_left,
                                 int pad_right, nn::Shape* out_shape);

// Temporary directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag);
  ~TempDir();
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

}  // namespace ssi::testing
