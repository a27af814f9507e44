#include "ssi/losses/composite.h"

#include "ssi/common/error.h"
#include "ssi/nn/spectral.h"

namespace ssi::losses {

using nn::Tensor;

void LossWeights::Validate() const {
  for (double v : {stage1.si_snr, stage1.plc, stage1.adv, stage1.feature_matching, stage2.si_snr, stage2.plc,
                   stage2.mag}) {
    Require(v >= 0.0, "loss weights must be non-negative");
  }
  Require(plc_exponent > 0.0 && plc_exponent <= 1.0, "plc_exponent must be in (0, 1]");
}

void to_json(nlohmann::json& j, const LossWeights& w) {
  j = nlohmann::json{{"stage1",
                      {{"si_snr", w.stage1.si_snr},
                       {"plc", w.stage1.plc},
                       {"adv", w.stage1.adv},
                       {"feature_matching", w.stage1.feature_matching}}},
                     {"stage2", {{"si_snr", w.stage2.si_snr}, {"plc", w.stage2.plc}, {"mag", w.stage2.mag}}},
                     {"plc_exponent", w.plc_exponent}};
}

void from_json(const nlohmann::json& j, LossWeights& w) {
  w = LossWeights{};
  if (j.contains("stage1")) {
    const auto& s = j.at("stage1");
    w.stage1.si_snr = s.value("si_snr", w.stage1.si_snr);
    w.stage1.plc = s.value("plc", w.stage1.plc);
    w.stage1.adv = s.value("adv", w.stage1.adv);
    w.stage1.feature_matching = s.value("feature_matching", w.stage1.feature_matching);
  }
  if (j.contains("stage2")) {
    const auto& s = j.at("stage2");
    w.stage2.si_snr = s.value("si_snr", w.stage2.si_snr);
    w.stage2.plc = s.value("plc", w.stage2.plc);
    w.stage2.mag = s.value("mag", w.stage2.mag);
  }
  w.plc_exponent = j.value("plc_exponent", w.plc_exponent);
  w.Validate();
}

Stage1Terms Stage1Loss(const Tensor& est, const Tensor& ref, const MultiDiscriminator* disc, const LossWeights& w,
                       const SpectralSetup& s) {
  Stage1Terms t;
  t.si_snr = SiSnrLoss(est, ref);
  t.plc = PlcLoss(nn::StftOp(est, s.stft, s.sample_rate), nn::StftOp(ref, s.stft, s.sample_rate), w.plc_exponent);
  t.adv = Tensor::Scalar(0.0);
  t.feature_matching = Tensor::Scalar(0.0);
  const bool need_disc = w.stage1.adv > 0.0 || w.stage1.feature_matching > 0.0;
  if (need_disc) {
    Require(disc != nullptr, "stage-1 loss with adversarial terms needs a discriminator");
    const auto fake = disc->Forward(est);
    t.adv = LsganGenLoss(fake);
    if (w.stage1.feature_matching > 0.0) {
      std::vector<DiscOutput> real;
      {
        nn::NoGradGuard guard;
        real = disc->Forward(ref);
      }
      t.feature_matching = FeatureMatchingLoss(real, fake);
    }
  }
  t.total = nn::Add(nn::MulScalar(t.si_snr, w.stage1.si_snr), nn::MulScalar(t.plc, w.stage1.plc));
  if (need_disc) {
    t.total = nn::Add(t.total, nn::MulScalar(t.adv, w.stage1.adv));
    if (w.stage1.feature_matching > 0.0) {
      t.total = nn::Add(t.total, nn::MulScalar(t.feature_matching, w.stage1.feature_matching));
    }
  }
  return t;
}

Stage2Terms Stage2Loss(const Tensor& est, const Tensor& ref, const LossWeights& w, const SpectralSetup& s) {
  Stage2Terms t;
  const Tensor est_spec = nn::StftOp(est, s.stft, s.sample_rate);
  const Tensor ref_spec = nn::StftOp(ref, s.stft, s.sample_rate);
  t.si_snr = SiSnrLoss(est, ref);
  t.plc = PlcLoss(est_spec, ref_spec, w.plc_exponent);
  t.mag = MagMseLoss(est_spec, ref_spec);
  t.total = nn::Add(nn::Add(nn::MulScalar(t.si_snr, w.stage2.si_snr), nn::MulScalar(t.plc, w.stage2.plc)),
                    nn::MulScalar(t.mag, w.stage2.mag));
  return t;
}

}  // namespace ssi::losses
