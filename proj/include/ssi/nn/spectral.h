#pragma once

#include "ssi/audio/stft.h"
#include "ssi/nn/tensor.h"

namespace ssi::nn {

// Differentiable STFT. wave [N, L] -> [N, 2, bins, frames], real part in
// channel 0 and imaginary part in channel 1. Same framing as audio::Stft.
Tensor StftOp(const Tensor& wave, const audio::StftConfig& cfg, int sample_rate);

// Differentiable inverse of StftOp (weighted overlap-add). spec
// [N, 2, bins, frames] -> [N, length]. Samples past the last frame are zero.
Tensor IstftOp(const Tensor& spec, const audio::StftConfig& cfg, int sample_rate, int64_t length);

}  // namespace ssi::nn
