#pragma once

#include <memory>
#include <vector>

#include "ssi/nn/module.h"
#include "ssi/nn/ops.h"

namespace ssi::nn {

// Complex feature map stored channel-stacked: data is [N, 2C, F, T] with the
// C real channels first, then the C imaginary channels.
class ComplexTensor {
 public:
  ComplexTensor() = default;
  explicit ComplexTensor(Tensor stacked);
  static ComplexTensor FromParts(const Tensor& real, const Tensor& imag);

  const Tensor& data() const { return data_; }
  int64_t batch() const { return data_.dim(0); }
  int64_t channels() const { return data_.dim(1) / 2; }
  int64_t freq() const { return data_.dim(2); }
  int64_t time() const { return data_.dim(3); }
  Tensor Real() const;
  Tensor Imag() const;

 private:
  Tensor data_;
};

// Concatenates the channels of both operands, keeping the real/imag stacking.
ComplexTensor ConcatChannels(const ComplexTensor& a, const ComplexTensor& b);
// Multiplies real and imaginary parts by the same real mask [N, C, F, T].
ComplexTensor ApplyRealMask(const ComplexTensor& x, const Tensor& mask);

// Kernel over (frequency, time). Time is always causal: a layer's output at
// frame t depends on input frames <= t only.
struct ConvSpec {
  int kernel_f = 5;
  int kernel_t = 2;
  int stride_f = 2;
  int dilation_t = 1;
  int pad_f = 2;
};

Conv2dGeometry EncoderGeometry(const ConvSpec& s);
// Geometry for transposed layers; equals the forward conv's geometry with the
// time padding moved to the right so that the adjoint is causal.
Conv2dGeometry DecoderGeometry(const ConvSpec& s);
int64_t EncodedFreq(int64_t in_f, const ConvSpec& s);

// (Xr*Wr - Xi*Wi) + j (Xr*Wi + Xi*Wr), bias per stacked output channel.
class ComplexConv2d : public Module {
 public:
  ComplexConv2d(int64_t in_channels, int64_t out_channels, ConvSpec spec, Rng& rng);
  ComplexTensor Forward(const ComplexTensor& x) const;
  void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const override;

  int64_t in_channels() const { return in_; }
  int64_t out_channels() const { return out_; }
  const ConvSpec& spec() const { return spec_; }
  Tensor weight_real, weight_imag, bias;

 private:
  int64_t in_, out_;
  ConvSpec spec_;
};

class ComplexConvTranspose2d : public Module {
 public:
  ComplexConvTranspose2d(int64_t in_channels, int64_t out_channels, ConvSpec spec, Rng& rng);
  ComplexTensor Forward(const ComplexTensor& x, int64_t out_freq) const;
  void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const override;

  Tensor weight_real, weight_imag, bias;

 private:
  int64_t in_, out_;
  ConvSpec spec_;
};

// Feature branch: complex conv. Gate branch: real conv over the stacked
// (real, imag) input channels, sigmoid, one gate per output element shared
// by the real and imaginary parts.
class GatedComplexConv2d : public Module {
 public:
  GatedComplexConv2d(int64_t in_channels, int64_t out_channels, ConvSpec spec, Rng& rng);
  ComplexTensor Forward(const ComplexTensor& x) const;
  Tensor Gate(const ComplexTensor& x) const;
  void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const override;

  ComplexConv2d feature;
  Tensor gate_weight, gate_bias;

 private:
  ConvSpec spec_;
};

class GatedComplexConvTranspose2d : public Module {
 public:
  GatedComplexConvTranspose2d(int64_t in_channels, int64_t out_channels, ConvSpec spec, Rng& rng);
  ComplexTensor Forward(const ComplexTensor& x, int64_t out_freq) const;
  void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const override;

  ComplexConvTranspose2d feature;
  Tensor gate_weight, gate_bias;

 private:
  ConvSpec spec_;
};

// Per-frame normalization followed by PReLU.
class NormAct : public Module {
 public:
  explicit NormAct(int64_t channels);
  Tensor Forward(const Tensor& x) const;
  void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const override;

  Tensor gain, bias, alpha;
};

// Densely connected complex convs: layer i sees the block input concatenated
// with all earlier layer outputs, uses time dilation 2^i, keeps the frequency
// size, and emits `channels` complex channels. The block output is the last
// layer's output.
class ComplexDenseBlock : public Module {
 public:
  ComplexDenseBlock(int64_t in_channels, int64_t channels, int depth, int kernel_f, int kernel_t, Rng& rng);
  ComplexTensor Forward(const ComplexTensor& x) const;
  void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const override;

  int depth() const { return static_cast<int>(convs_.size()); }

 private:
  std::vector<std::unique_ptr<ComplexConv2d>> convs_;
  std::vector<std::unique_ptr<NormAct>> norms_;
};

}  // namespace ssi::nn
