#pragma once

#include <memory>

#include "ssi/models/config.h"
#include "ssi/nn/unet.h"

namespace ssi::models {

// Complex spectrum in, complex spectrum out: [N, 2, bins, T] with bins =
// fft_size/2 + 1. Networks drop the Nyquist bin on entry and emit zero there.
class SpectralModel : public nn::Module {
 public:
  virtual nn::Tensor Forward(const nn::Tensor& spec) const = 0;
  virtual ModelKind kind() const = 0;
  const ModelConfig& config() const { return cfg_; }

 protected:
  explicit SpectralModel(const ModelConfig& cfg) : cfg_(cfg) {}
  nn::Tensor CropNyquist(const nn::Tensor& spec) const;
  nn::Tensor RestoreNyquist(const nn::Tensor& spec) const;

  ModelConfig cfg_;
};

// DCCRN (plain) or GateDCCRN (gated): one complex U-Net with an LSTM + FC
// bottleneck, direct complex spectral mapping.
class Dccrn : public SpectralModel {
 public:
  Dccrn(const ModelConfig& cfg, bool gated, Rng& rng);
  nn::Tensor Forward(const nn::Tensor& spec) const override;
  ModelKind kind() const override { return gated_ ? ModelKind::kGateDccrn : ModelKind::kDccrn; }
  void CollectParameters(const std::string& prefix, std::vector<nn::NamedParameter>& out) const override;

  const nn::ComplexUNet& unet() const { return *unet_; }

 private:
  bool gated_;
  std::unique_ptr<nn::ComplexUNet> unet_;
};

// S-DCCRN (LSTM bottlenecks) or S-DCCSN (STCM bottlenecks): complex encoder
// (two strided convs + DenseBlock), sub-band U-Net over bands folded into
// channels, full-band U-Net, complex decoder (DenseBlock + two transposed
// convs).
class SubFullBandNet : public SpectralModel {
 public:
  SubFullBandNet(const ModelConfig& cfg, bool stcm, Rng& rng);
  nn::Tensor Forward(const nn::Tensor& spec) const override;
  ModelKind kind() const override { return stcm_ ? ModelKind::kSDccsn : ModelKind::kSDccrn; }
  void CollectParameters(const std::string& prefix, std::vector<nn::NamedParameter>& out) const override;

 private:
  nn::ComplexTensor Fold(const nn::ComplexTensor& x) const;
  nn::ComplexTensor Unfold(const nn::ComplexTensor& x) const;

  bool stcm_;
  int64_t part_;  // CED/CFD complex channels per part
  std::unique_ptr<nn::ComplexConv2d> ced_conv1_, ced_conv2_;
  std::unique_ptr<nn::NormAct> ced_norm1_, ced_norm2_;
  std::unique_ptr<nn::ComplexDenseBlock> ced_dense_;
  std::unique_ptr<nn::ComplexUNet> sub_, full_;
  std::unique_ptr<nn::ComplexDenseBlock> cfd_dense_;
  std::unique_ptr<nn::ComplexConvTranspose2d> cfd_deconv1_, cfd_deconv2_;
  std::unique_ptr<nn::NormAct> cfd_norm1_;
};

// Stage-1 repair network chained with a stage-2 denoiser. When frozen, the
// stage-1 parameters do not require grad and its forward records no history.
class CascadeModel : public SpectralModel {
 public:
  CascadeModel(const ModelConfig& cfg, bool stcm, Rng& rng);
  nn::Tensor Forward(const nn::Tensor& spec) const override;
  ModelKind kind() const override { return stage2_->kind() == ModelKind::kSDccsn ? ModelKind::kCascadeSDccsn
                                                                                 : ModelKind::kCascadeSDccrn; }
  void CollectParameters(const std::string& prefix, std::vector<nn::NamedParameter>& out) const override;

  void SetFrozen(bool frozen);
  bool frozen() const { return frozen_; }
  Dccrn& stage1() { return *stage1_; }
  const Dccrn& stage1() const { return *stage1_; }
  SubFullBandNet& stage2() { return *stage2_; }

 private:
  std::unique_ptr<Dccrn> stage1_;
  std::unique_ptr<SubFullBandNet> stage2_;
  bool frozen_ = false;
};

std::unique_ptr<SpectralModel> BuildModel(ModelKind kind, const ModelConfig& cfg, uint64_t seed);

// Parameter count of a model (0 for a null model).
int64_t CountParams(const nn::Module* model);

// Waveform batch [N, L] -> enhanced waveform batch [N, L] via STFT, the
// spectral model and ISTFT.
nn::Tensor EnhanceBatch(const SpectralModel& model, const nn::Tensor& wave);
// Single waveform, no gradient. Rejects a sample-rate mismatch.
audio::Waveform Enhance(const SpectralModel& model, const audio::Waveform& w);

}  // namespace ssi::models
