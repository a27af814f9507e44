#include "ssi/models/networks.h"

#include "ssi/common/error.h"
#include "ssi/nn/spectral.h"

namespace ssi::models {

using nn::ComplexTensor;
using nn::Tensor;

nn::Tensor SpectralModel::CropNyquist(const Tensor& spec) const {
  Require(spec.rank() == 4 && spec.dim(1) == 2 && spec.dim(2) == cfg_.stft.Bins(),
          "model expects a [N, 2, " + std::to_string(cfg_.stft.Bins()) + ", T] spectrum, got " +
              nn::ShapeString(spec.shape()));
  return nn::Slice(spec, 2, 0, cfg_.NetworkBins());
}

nn::Tensor SpectralModel::RestoreNyquist(const Tensor& spec) const { return nn::Pad(spec, 2, 0, 1); }

namespace {

nn::UNetConfig DccrnUNet(const ModelConfig& cfg, bool gated) {
  nn::UNetConfig u;
  u.in_channels = 1;
  u.out_channels = 1;
  u.channels = cfg.dccrn_channels;
  u.spec = cfg.UNetSpec();
  u.gated = gated;
  u.bottleneck.kind = nn::BottleneckKind::kLstm;
  u.bottleneck.lstm_hidden = cfg.lstm_hidden;
  u.bottleneck.lstm_layers = cfg.lstm_layers;
  return u;
}

nn::UNetConfig SubFullUNet(const ModelConfig& cfg, int64_t io_channels, bool stcm) {
  nn::UNetConfig u;
  u.in_channels = io_channels;
  u.out_channels = io_channels;
  u.channels = cfg.sdccsn_channels;
  u.spec = cfg.UNetSpec();
  if (stcm) {
    u.bottleneck.kind = nn::BottleneckKind::kStcm;
    u.bottleneck.stcm_blocks = cfg.stcm_blocks;
    u.bottleneck.stcm = cfg.Stcm();
  } else {
    u.bottleneck.kind = nn::BottleneckKind::kLstm;
    u.bottleneck.lstm_hidden = cfg.sdccrn_lstm_hidden;
    u.bottleneck.lstm_layers = cfg.sdccrn_lstm_layers;
  }
  return u;
}

}  // namespace

Dccrn::Dccrn(const ModelConfig& cfg, bool gated, Rng& rng) : SpectralModel(cfg), gated_(gated) {
  cfg.Validate();
  unet_ = std::make_unique<nn::ComplexUNet>(DccrnUNet(cfg, gated), cfg.NetworkBins(), rng);
}

Tensor Dccrn::Forward(const Tensor& spec) const {
  const ComplexTensor x(CropNyquist(spec));
  return RestoreNyquist(unet_->Forward(x).data());
}

void Dccrn::CollectParameters(const std::string& prefix, std::vector<nn::NamedParameter>& out) const {
  unet_->CollectParameters(nn::Join(prefix, "unet"), out);
}

SubFullBandNet::SubFullBandNet(const ModelConfig& cfg, bool stcm, Rng& rng)
    : SpectralModel(cfg), stcm_(stcm), part_(cfg.ced_cfd_channels / 2) {
  cfg.Validate();
  const nn::ConvSpec down = cfg.UNetSpec();
  const int64_t dense = cfg.dense_channels / 2;
  const int64_t bins = cfg.NetworkBins();
  ced_conv1_ = std::make_unique<nn::ComplexConv2d>(1, part_, down, rng);
  ced_norm1_ = std::make_unique<nn::NormAct>(2 * part_);
  ced_conv2_ = std::make_unique<nn::ComplexConv2d>(part_, part_, down, rng);
  ced_norm2_ = std::make_unique<nn::NormAct>(2 * part_);
  ced_dense_ = std::make_unique<nn::ComplexDenseBlock>(part_, dense, cfg.dense_depth, cfg.dense_kernel_f,
                                                       cfg.dense_kernel_t, rng);
  const int64_t inner = nn::EncodedFreq(nn::EncodedFreq(bins, down), down);
  Require(inner * 4 == bins, "complex encoder must reduce the frequency axis by four");
  sub_ = std::make_unique<nn::ComplexUNet>(SubFullUNet(cfg, dense * cfg.sub_bands, stcm), inner / cfg.sub_bands,
                                           rng);
  full_ = std::make_unique<nn::ComplexUNet>(SubFullUNet(cfg, dense, stcm), inner, rng);
  cfd_dense_ = std::make_unique<nn::ComplexDenseBlock>(dense, part_, cfg.dense_depth, cfg.dense_kernel_f,
                                                       cfg.dense_kernel_t, rng);
  cfd_deconv1_ = std::make_unique<nn::ComplexConvTranspose2d>(part_, part_, down, rng);
  cfd_norm1_ = std::make_unique<nn::NormAct>(2 * part_);
  cfd_deconv2_ = std::make_unique<nn::ComplexConvTranspose2d>(part_, 1, down, rng);
}

// [N, 2C, B*W, T] -> [N, 2*B*C, W, T], channel index b*C + c within each part.
ComplexTensor SubFullBandNet::Fold(const ComplexTensor& x) const {
  const int64_t n = x.batch(), c = x.channels(), f = x.freq(), t = x.time(), b = cfg_.sub_bands;
  auto fold = [&](const Tensor& part) {
    const Tensor v = nn::Reshape(part, {n, c, b, f / b, t});
    return nn::Reshape(nn::Permute(v, {0, 2, 1, 3, 4}), {n, b * c, f / b, t});
  };
  return ComplexTensor::FromParts(fold(x.Real()), fold(x.Imag()));
}

ComplexTensor SubFullBandNet::Unfold(const ComplexTensor& x) const {
  const int64_t n = x.batch(), w = x.freq(), t = x.time(), b = cfg_.sub_bands, c = x.channels() / b;
  auto unfold = [&](const Tensor& part) {
    const Tensor v = nn::Reshape(part, {n, b, c, w, t});
    return nn::Reshape(nn::Permute(v, {0, 2, 1, 3, 4}), {n, c, b * w, t});
  };
  return ComplexTensor::FromParts(unfold(x.Real()), unfold(x.Imag()));
}

Tensor SubFullBandNet::Forward(const Tensor& spec) const {
  const ComplexTensor x(CropNyquist(spec));
  const int64_t bins = x.freq();
  const int64_t half = nn::EncodedFreq(bins, cfg_.UNetSpec());
  ComplexTensor h(ced_norm1_->Forward(ced_conv1_->Forward(x).data()));
  h = ComplexTensor(ced_norm2_->Forward(ced_conv2_->Forward(h).data()));
  h = ced_dense_->Forward(h);
  h = Unfold(sub_->Forward(Fold(h)));
  h = full_->Forward(h);
  h = cfd_dense_->Forward(h);
  h = ComplexTensor(cfd_norm1_->Forward(cfd_deconv1_->Forward(h, half).data()));
  h = cfd_deconv2_->Forward(h, bins);
  return RestoreNyquist(h.data());
}

void SubFullBandNet::CollectParameters(const std::string& prefix, std::vector<nn::NamedParameter>& out) const {
  ced_conv1_->CollectParameters(nn::Join(prefix, "ced.conv1"), out);
  ced_norm1_->CollectParameters(nn::Join(prefix, "ced.norm1"), out);
  ced_conv2_->CollectParameters(nn::Join(prefix, "ced.conv2"), out);
  ced_norm2_->CollectParameters(nn::Join(prefix, "ced.norm2"), out);
  ced_dense_->CollectParameters(nn::Join(prefix, "ced.dense"), out);
  sub_->CollectParameters(nn::Join(prefix, "sub"), out);
  full_->CollectParameters(nn::Join(prefix, "full"), out);
  cfd_dense_->CollectParameters(nn::Join(prefix, "cfd.dense"), out);
  cfd_deconv1_->CollectParameters(nn::Join(prefix, "cfd.deconv1"), out);
  cfd_norm1_->CollectParameters(nn::Join(prefix, "cfd.norm1"), out);
  cfd_deconv2_->CollectParameters(nn::Join(prefix, "cfd.deconv2"), out);
}

CascadeModel::CascadeModel(const ModelConfig& cfg, bool stcm, Rng& rng) : SpectralModel(cfg) {
  Rng r1(rng.NextU64());
  Rng r2(rng.NextU64());
  stage1_ = std::make_unique<Dccrn>(cfg, true, r1);
  stage2_ = std::make_unique<SubFullBandNet>(cfg, stcm, r2);
}

void CascadeModel::SetFrozen(bool frozen) {
  frozen_ = frozen;
  stage1_->SetRequiresGrad(!frozen);
}

Tensor CascadeModel::Forward(const Tensor& spec) const {
  Tensor repaired;
  if (frozen_) {
    nn::NoGradGuard guard;
    repaired = stage1_->Forward(spec);
  } else {
    repaired = stage1_->Forward(spec);
  }
  return stage2_->Forward(repaired);
}

void CascadeModel::CollectParameters(const std::string& prefix, std::vector<nn::NamedParameter>& out) const {
  stage1_->CollectParameters(nn::Join(prefix, "stage1"), out);
  stage2_->CollectParameters(nn::Join(prefix, "stage2"), out);
}

std::unique_ptr<SpectralModel> BuildModel(ModelKind kind, const ModelConfig& cfg, uint64_t seed) {
  Rng rng(seed);
  switch (kind) {
    case ModelKind::kDccrn: return std::make_unique<Dccrn>(cfg, false, rng);
    case ModelKind::kGateDccrn: return std::make_unique<Dccrn>(cfg, true, rng);
    case ModelKind::kSDccrn: return std::make_unique<SubFullBandNet>(cfg, false, rng);
    case ModelKind::kSDccsn: return std::make_unique<SubFullBandNet>(cfg, true, rng);
    case ModelKind::kCascadeSDccrn: return std::make_unique<CascadeModel>(cfg, false, rng);
    case ModelKind::kCascadeSDccsn: return std::make_unique<CascadeModel>(cfg, true, rng);
  }
  throw ValidationError("unknown model kind");
}

int64_t CountParams(const nn::Module* model) { return model ? model->NumParameters() : 0; }

Tensor EnhanceBatch(const SpectralModel& model, const Tensor& wave) {
  const ModelConfig& cfg = model.config();
  const Tensor spec = nn::StftOp(wave, cfg.stft, cfg.sample_rate);
  return nn::IstftOp(model.Forward(spec), cfg.stft, cfg.sample_rate, wave.dim(1));
}

audio::Waveform Enhance(const SpectralModel& model, const audio::Waveform& w) {
  w.Validate();
  Require(w.sample_rate == model.config().sample_rate,
          "input sample rate " + std::to_string(w.sample_rate) + " Hz does not match the model's " +
              std::to_string(model.config().sample_rate) + " Hz");
  nn::NoGradGuard guard;
  const Tensor x = Tensor::FromData({1, static_cast<int64_t>(w.size())}, w.samples);
  const Tensor y = EnhanceBatch(model, x);
  return audio::Waveform(std::vector<double>(y.data().begin(), y.data().end()), w.sample_rate);
}

}  // namespace ssi::models
