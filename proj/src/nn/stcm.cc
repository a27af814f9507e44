#include "ssi/nn/stcm.h"

#include "ssi/common/error.h"

namespace ssi::nn {

Stcm::Stcm(int64_t dim, const StcmConfig& cfg, Rng& rng) : dim_(dim), cfg_(cfg) {
  Require(cfg.hidden > 0, "STCM hidden size must be positive");
  Require(dim > 0 && cfg.kernel > 0 && !cfg.dilations.empty(), "invalid STCM configuration");
  squeeze_w_ = FanInParameter({cfg.hidden, dim, 1, 1}, dim, rng);
  squeeze_b_ = FanInParameter({cfg.hidden}, dim, rng);
  squeeze_norm_ = std::make_unique<NormAct>(cfg.hidden);
  for (size_t i = 0; i < cfg.dilations.size(); ++i) {
    Require(cfg.dilations[i] > 0, "STCM dilations must be positive");
    conv_w_.push_back(FanInParameter({cfg.hidden, cfg.hidden, 1, cfg.kernel}, cfg.hidden * cfg.kernel, rng));
    conv_b_.push_back(FanInParameter({cfg.hidden}, cfg.hidden * cfg.kernel, rng));
    conv_norm_.push_back(std::make_unique<NormAct>(cfg.hidden));
  }
  expand_w_ = FanInParameter({dim, cfg.hidden, 1, 1}, cfg.hidden, rng);
  expand_b_ = FanInParameter({dim}, cfg.hidden, rng);
}

Tensor Stcm::Forward(const Tensor& x) const {
  Require(x.rank() == 4 && x.dim(1) == dim_ && x.dim(2) == 1,
          "STCM expects [N, " + std::to_string(dim_) + ", 1, T], got " + ShapeString(x.shape()));
  Tensor h = squeeze_norm_->Forward(Conv2d(x, squeeze_w_, squeeze_b_, {}));
  for (size_t i = 0; i < conv_w_.size(); ++i) {
    Conv2dGeometry g;
    g.dilation_w = cfg_.dilations[i];
    const Tensor padded = PadReplicate(h, 3, static_cast<int64_t>(cfg_.kernel - 1) * cfg_.dilations[i]);
    h = conv_norm_[i]->Forward(Conv2d(padded, conv_w_[i], conv_b_[i], g));
  }
  return Add(x, Conv2d(h, expand_w_, expand_b_, {}));
}

void Stcm::CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const {
  out.push_back({Join(prefix, "squeeze_w"), squeeze_w_});
  out.push_back({Join(prefix, "squeeze_b"), squeeze_b_});
  squeeze_norm_->CollectParameters(Join(prefix, "squeeze_norm"), out);
  for (size_t i = 0; i < conv_w_.size(); ++i) {
    const std::string p = Join(prefix, "conv" + std::to_string(i));
    out.push_back({Join(p, "w"), conv_w_[i]});
    out.push_back({Join(p, "b"), conv_b_[i]});
    conv_norm_[i]->CollectParameters(Join(p, "norm"), out);
  }
  out.push_back({Join(prefix, "expand_w"), expand_w_});
  out.push_back({Join(prefix, "expand_b"), expand_b_});
}

StcmStack::StcmStack(int64_t dim, int blocks, const StcmConfig& cfg, Rng& rng) {
  Require(blocks > 0, "STCM stack needs at least one block");
  for (int i = 0; i < blocks; ++i) blocks_.push_back(std::make_unique<Stcm>(dim, cfg, rng));
}

Tensor StcmStack::Forward(const Tensor& x) const {
  Tensor h = x;
  for (const auto& b : blocks_) h = b->Forward(h);
  return h;
}

void StcmStack::CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const {
  for (size_t i = 0; i < blocks_.size(); ++i) blocks_[i]->CollectParameters(Join(prefix, "block" + std::to_string(i)), out);
}

}  // namespace ssi::nn
