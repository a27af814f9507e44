#pragma once

#include <memory>
#include <vector>

#include "ssi/nn/complex.h"
#include "ssi/nn/recurrent.h"
#include "ssi/nn/stcm.h"

namespace ssi::nn {

// Temporal model between encoder and decoder; maps [N, 2C, F, T] to the same
// shape.
class Bottleneck : public Module {
 public:
  virtual Tensor Forward(const Tensor& x) const = 0;
};

// Flattens (2C, F) into D features per frame, runs a real LSTM, projects the
// hidden state back to D with a fully connected layer.
class LstmBottleneck : public Bottleneck {
 public:
  LstmBottleneck(int64_t features, int64_t hidden, int layers, Rng& rng);
  Tensor Forward(const Tensor& x) const override;
  void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const override;

 private:
  int64_t features_;
  Lstm lstm_;
  Tensor fc_w_, fc_b_;
};

// Flattens (2C, F) into D channels and runs a stack of STCMs.
class StcmBottleneck : public Bottleneck {
 public:
  StcmBottleneck(int64_t features, int blocks, const StcmConfig& cfg, Rng& rng);
  Tensor Forward(const Tensor& x) const override;
  void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const override;

 private:
  int64_t features_;
  StcmStack stack_;
};

enum class BottleneckKind { kNone, kLstm, kStcm };

struct BottleneckSpec {
  BottleneckKind kind = BottleneckKind::kLstm;
  int64_t lstm_hidden = 256;
  int lstm_layers = 2;
  int stcm_blocks = 1;
  StcmConfig stcm;
};

struct UNetConfig {
  int64_t in_channels = 1;   // complex channels of the input
  int64_t out_channels = 1;  // complex channels of the output
  // Complex channel totals per encoder layer (real + imaginary); each part
  // gets half.
  std::vector<int64_t> channels = {16, 32, 64, 128, 256, 256};
  ConvSpec spec;
  bool gated = false;
  BottleneckSpec bottleneck;
};

// Complex U-Net: strided causal encoder, bottleneck, transposed-conv decoder
// where layer i consumes the previous decoder output concatenated with
// encoder skip i. The last decoder layer is linear.
class ComplexUNet : public Module {
 public:
  ComplexUNet(const UNetConfig& cfg, int64_t in_freq, Rng& rng);

  ComplexTensor Forward(const ComplexTensor& x) const;
  // Encoder activations, one per layer (the skips).
  std::vector<ComplexTensor> Encode(const ComplexTensor& x) const;
  ComplexTensor Decode(const ComplexTensor& bottleneck_out, const std::vector<ComplexTensor>& skips) const;
  const Bottleneck* bottleneck() const { return bottleneck_.get(); }

  void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const override;

  int64_t in_freq() const { return freqs_.front(); }
  int64_t bottleneck_freq() const { return freqs_.back(); }
  int64_t bottleneck_features() const;

 private:
  UNetConfig cfg_;
  std::vector<int64_t> part_channels_;
  // freqs_[i] is the input frequency size of encoder layer i; freqs_.back()
  // is the bottleneck size.
  std::vector<int64_t> freqs_;
  std::vector<std::unique_ptr<ComplexConv2d>> enc_plain_;
  std::vector<std::unique_ptr<GatedComplexConv2d>> enc_gated_;
  std::vector<std::unique_ptr<NormAct>> enc_norm_;
  std::vector<std::unique_ptr<ComplexConvTranspose2d>> dec_plain_;
  std::vector<std::unique_ptr<GatedComplexConvTranspose2d>> dec_gated_;
  std::vector<std::unique_ptr<NormAct>> dec_norm_;
  std::unique_ptr<Bottleneck> bottleneck_;
};

}  // namespace ssi::nn
