#include "ssi/nn/unet.h"

#include "ssi/common/error.h"

namespace ssi::nn {

LstmBottleneck::LstmBottleneck(int64_t features, int64_t hidden, int layers, Rng& rng)
    : features_(features), lstm_(features, hidden, layers, rng) {
  fc_w_ = FanInParameter({features, hidden}, hidden, rng);
  fc_b_ = FanInParameter({features}, hidden, rng);
}

Tensor LstmBottleneck::Forward(const Tensor& x) const {
  const int64_t n = x.dim(0), t = x.dim(3);
  Require(x.dim(1) * x.dim(2) == features_, "LSTM bottleneck feature size mismatch");
  const Tensor seq = Permute(Reshape(x, {n, features_, t}), {2, 0, 1});  // [T, N, D]
  const Tensor h = lstm_.Forward(seq);
  const Tensor y = Linear(Reshape(h, {t * n, lstm_.hidden_size()}), fc_w_, fc_b_);
  return Reshape(Permute(Reshape(y, {t, n, features_}), {1, 2, 0}), x.shape());
}

void LstmBottleneck::CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const {
  lstm_.CollectParameters(Join(prefix, "lstm"), out);
  out.push_back({Join(prefix, "fc_w"), fc_w_});
  out.push_back({Join(prefix, "fc_b"), fc_b_});
}

StcmBottleneck::StcmBottleneck(int64_t features, int blocks, const StcmConfig& cfg, Rng& rng)
    : features_(features), stack_(features, blocks, cfg, rng) {}

Tensor StcmBottleneck::Forward(const Tensor& x) const {
  Require(x.dim(1) * x.dim(2) == features_, "STCM bottleneck feature size mismatch");
  const Tensor seq = Reshape(x, {x.dim(0), features_, 1, x.dim(3)});
  return Reshape(stack_.Forward(seq), x.shape());
}

void StcmBottleneck::CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const {
  stack_.CollectParameters(Join(prefix, "stcm"), out);
}

ComplexUNet::ComplexUNet(const UNetConfig& cfg, int64_t in_freq, Rng& rng) : cfg_(cfg) {
  Require(!cfg.channels.empty(), "U-Net needs at least one encoder layer");
  Require(cfg.in_channels > 0 && cfg.out_channels > 0, "U-Net input/output channels must be positive");
  for (int64_t c : cfg.channels) {
    Require(c > 0 && c % 2 == 0, "U-Net channel totals must be positive and even");
    part_channels_.push_back(c / 2);
  }
  freqs_.push_back(in_freq);
  const size_t layers = part_channels_.size();
  for (size_t i = 0; i < layers; ++i) {
    const int64_t in = i == 0 ? cfg.in_channels : part_channels_[i - 1];
    if (cfg.gated) {
      enc_gated_.push_back(std::make_unique<GatedComplexConv2d>(in, part_channels_[i], cfg.spec, rng));
    } else {
      enc_plain_.push_back(std::make_unique<ComplexConv2d>(in, part_channels_[i], cfg.spec, rng));
    }
    enc_norm_.push_back(std::make_unique<NormAct>(2 * part_channels_[i]));
    freqs_.push_back(EncodedFreq(freqs_.back(), cfg.spec));
    Require(freqs_.back() > 0, "input frequency size too small for the encoder");
  }
  for (size_t k = 0; k < layers; ++k) {
    const size_t j = layers - 1 - k;  // mirrors encoder layer j
    const int64_t in = 2 * part_channels_[j];
    const int64_t out = j == 0 ? cfg.out_channels : part_channels_[j - 1];
    if (cfg.gated) {
      dec_gated_.push_back(std::make_unique<GatedComplexConvTranspose2d>(in, out, cfg.spec, rng));
    } else {
      dec_plain_.push_back(std::make_unique<ComplexConvTranspose2d>(in, out, cfg.spec, rng));
    }
    if (j > 0) dec_norm_.push_back(std::make_unique<NormAct>(2 * out));
  }
  const int64_t features = bottleneck_features();
  switch (cfg.bottleneck.kind) {
    case BottleneckKind::kLstm:
      bottleneck_ = std::make_unique<LstmBottleneck>(features, cfg.bottleneck.lstm_hidden, cfg.bottleneck.lstm_layers,
                                                     rng);
      break;
    case BottleneckKind::kStcm:
      bottleneck_ = std::make_unique<StcmBottleneck>(features, cfg.bottleneck.stcm_blocks, cfg.bottleneck.stcm, rng);
      break;
    case BottleneckKind::kNone:
      break;
  }
}

int64_t ComplexUNet::bottleneck_features() const { return 2 * part_channels_.back() * freqs_.back(); }

std::vector<ComplexTensor> ComplexUNet::Encode(const ComplexTensor& x) const {
  Require(x.freq() == freqs_.front(), "U-Net input has " + std::to_string(x.freq()) + " bins, expected " +
                                          std::to_string(freqs_.front()));
  std::vector<ComplexTensor> skips;
  ComplexTensor h = x;
  for (size_t i = 0; i < enc_norm_.size(); ++i) {
    const ComplexTensor c = cfg_.gated ? enc_gated_[i]->Forward(h) : enc_plain_[i]->Forward(h);
    h = ComplexTensor(enc_norm_[i]->Forward(c.data()));
    skips.push_back(h);
  }
  return skips;
}

ComplexTensor ComplexUNet::Decode(const ComplexTensor& bottleneck_out, const std::vector<ComplexTensor>& skips) const {
  const size_t layers = enc_norm_.size();
  Require(skips.size() == layers, "decoder needs one skip per encoder layer");
  ComplexTensor d = bottleneck_out;
  for (size_t k = 0; k < layers; ++k) {
    const size_t j = layers - 1 - k;
    const ComplexTensor in = ConcatChannels(d, skips[j]);
    d = cfg_.gated ? dec_gated_[k]->Forward(in, freqs_[j]) : dec_plain_[k]->Forward(in, freqs_[j]);
    if (j > 0) d = ComplexTensor(dec_norm_[k]->Forward(d.data()));
  }
  return d;
}

ComplexTensor ComplexUNet::Forward(const ComplexTensor& x) const {
  const std::vector<ComplexTensor> skips = Encode(x);
  const ComplexTensor mid = bottleneck_ ? ComplexTensor(bottleneck_->Forward(skips.back().data())) : skips.back();
  return Decode(mid, skips);
}

void ComplexUNet::CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const {
  for (size_t i = 0; i < enc_norm_.size(); ++i) {
    const std::string p = Join(prefix, "enc" + std::to_string(i));
    if (cfg_.gated) {
      enc_gated_[i]->CollectParameters(Join(p, "conv"), out);
    } else {
      enc_plain_[i]->CollectParameters(Join(p, "conv"), out);
    }
    enc_norm_[i]->CollectParameters(Join(p, "norm"), out);
  }
  if (bottleneck_) bottleneck_->CollectParameters(Join(prefix, "bottleneck"), out);
  for (size_t k = 0; k < enc_norm_.size(); ++k) {
    const std::string p = Join(prefix, "dec" + std::to_string(k));
    if (cfg_.gated) {
      dec_gated_[k]->CollectParameters(Join(p, "conv"), out);
    } else {
      dec_plain_[k]->CollectParameters(Join(p, "conv"), out);
    }
    if (k < dec_norm_.size()) dec_norm_[k]->CollectParameters(Join(p, "norm"), out);
  }
}

}  // namespace ssi::nn
