#include <gtest/gtest.h>

#include <cmath>

#include "oracles.h"
#include "ssi/common/error.h"
#include "ssi/losses/composite.h"
#include "ssi/nn/spectral.h"

namespace ssi::losses {
namespace {

using nn::Tensor;
using ssi::testing::GradCheck;
using ssi::testing::RandomTensor;

constexpr double kGradTol = 1e-4;

SpectralSetup SmallSetup() {
  SpectralSetup s;
  s.stft.frame_ms = 2.0;
  s.stft.hop_ms = 1.0;
  s.stft.fft_size = 128;
  return s;
}

Tensor ScaledCopy(const Tensor& x, double a) {
  std::vector<double> v(x.data().begin(), x.data().end());
  for (double& e : v) e *= a;
  return Tensor::FromData(x.shape(), std::move(v));
}

DiscOutput Constant(double v, nn::Shape shape = {2, 1, 3, 2}) {
  DiscOutput d;
  d.score = Tensor::Full(shape, v);
  return d;
}

TEST(SiSnr, IdenticalSignalsHitTheCap) {
  Rng rng(1);
  const Tensor ref = RandomTensor({2, 500}, rng);
  EXPECT_DOUBLE_EQ(SiSnrLoss(ref, ref).item(), -kSiSnrCapDb);
}

TEST(SiSnr, ScaleInvariant) {
  Rng rng(2);
  const Tensor ref = RandomTensor({3, 400}, rng);
  Tensor est = RandomTensor({3, 400}, rng, 0.3);
  est = nn::Add(est, ref);
  const double base = SiSnrLoss(est, ref).item();
  for (double a : {0.01, 0.5, 3.0, 1000.0}) EXPECT_NEAR(SiSnrLoss(ScaledCopy(est, a), ref).item(), base, 1e-6);
  EXPECT_NEAR(SiSnrLoss(ScaledCopy(ref, 7.0), ref).item(), -kSiSnrCapDb, 1e-6);
}

TEST(SiSnr, GramSchmidtNoiseGivesTenDb) {
  Rng rng(3);
  const int64_t len = 1000;
  std::vector<double> r(len), n(len);
  for (auto& v : r) v = rng.Normal();
  for (auto& v : n) v = rng.Normal();
  auto center = [](std::vector<double>& x) {
    double m = 0;
    for (double v : x) m += v;
    m /= x.size();
    for (double& v : x) v -= m;
  };
  center(r);
  center(n);
  double rn = 0, rr = 0;
  for (int64_t i = 0; i < len; ++i) {
    rn += r[i] * n[i];
    rr += r[i] * r[i];
  }
  for (int64_t i = 0; i < len; ++i) n[i] -= rn / rr * r[i];
  double nn_ = 0;
  for (double v : n) nn_ += v * v;
  const double scale = std::sqrt(0.1 * rr / nn_);
  std::vector<double> est(len);
  for (int64_t i = 0; i < len; ++i) est[i] = r[i] + scale * n[i];
  const Tensor loss = SiSnrLoss(Tensor::FromData({1, len}, est), Tensor::FromData({1, len}, r));
  EXPECT_NEAR(loss.item(), -10.0, 1e-6);
}

TEST(SiSnr, RejectsSilentReferenceAndShapeMismatch) {
  Rng rng(4);
  EXPECT_THROW(SiSnrLoss(RandomTensor({1, 100}, rng), Tensor::Full({1, 100}, 0.3)), ValidationError);
  EXPECT_THROW(SiSnrLoss(RandomTensor({1, 100}, rng), RandomTensor({1, 90}, rng)), ValidationError);
}

TEST(Plc, IdenticalIsZeroAndSymmetric) {
  Rng rng(5);
  const Tensor a = RandomTensor({2, 2, 9, 4}, rng), b = RandomTensor({2, 2, 9, 4}, rng);
  EXPECT_EQ(PlcLoss(a, a).item(), 0.0);
  EXPECT_NEAR(PlcLoss(a, b).item(), PlcLoss(b, a).item(), 1e-14);
}

TEST(Plc, SingleBinClosedForm) {
  const double a = 0.6, b = -0.8, c = 0.2, d = 0.3, p = 0.3;
  const Tensor est = Tensor::FromData({1, 2, 1, 1}, {a, b}), ref = Tensor::FromData({1, 2, 1, 1}, {c, d});
  const double me = std::sqrt(a * a + b * b + 1e-12), mr = std::sqrt(c * c + d * d + 1e-12);
  const double se = std::pow(me, p - 1), sr = std::pow(mr, p - 1);
  const double expected = std::pow(std::pow(me, p) - std::pow(mr, p), 2) +
                          std::pow(se * a - sr * c, 2) + std::pow(se * b - sr * d, 2);
  EXPECT_NEAR(PlcLoss(est, ref, p).item(), expected, 1e-14);
}

TEST(MagMse, IdentityScalingAndBruteForce) {
  Rng rng(6);
  const Tensor a = RandomTensor({2, 2, 5, 3}, rng), b = RandomTensor({2, 2, 5, 3}, rng);
  EXPECT_EQ(MagMseLoss(a, a).item(), 0.0);
  // Unit-magnitude reference, estimate scaled by 2.
  std::vector<double> unit(2 * 2 * 5 * 3);
  for (int n = 0; n < 2; ++n)
    for (int i = 0; i < 15; ++i) {
      const double phase = rng.Uniform(0.0, 6.28);
      unit[(n * 2 + 0) * 15 + i] = std::cos(phase);
      unit[(n * 2 + 1) * 15 + i] = std::sin(phase);
    }
  const Tensor ref = Tensor::FromData({2, 2, 5, 3}, unit);
  EXPECT_NEAR(MagMseLoss(ScaledCopy(ref, 2.0), ref).item(), 1.0, 1e-9);
  double acc = 0;
  for (int n = 0; n < 2; ++n)
    for (int i = 0; i < 15; ++i) {
      const double ma = std::hypot(a.data()[(n * 2) * 15 + i], a.data()[(n * 2 + 1) * 15 + i]);
      const double mb = std::hypot(b.data()[(n * 2) * 15 + i], b.data()[(n * 2 + 1) * 15 + i]);
      acc += (ma - mb) * (ma - mb);
    }
  EXPECT_NEAR(MagMseLoss(a, b).item(), acc / 30, 1e-9);
}

TEST(Losses, GradChecks) {
  Rng rng(7);
  Tensor est = RandomTensor({2, 300}, rng), ref = RandomTensor({2, 300}, rng);
  EXPECT_LT(GradCheck([&] { return SiSnrLoss(est, ref); }, {est, ref}, rng), kGradTol);
  Tensor se = RandomTensor({2, 2, 6, 3}, rng), sr = RandomTensor({2, 2, 6, 3}, rng);
  EXPECT_LT(GradCheck([&] { return PlcLoss(se, sr); }, {se, sr}, rng), kGradTol);
  EXPECT_LT(GradCheck([&] { return MagMseLoss(se, sr); }, {se, sr}, rng), kGradTol);
}

TEST(Discriminator, PeriodViewOfRamp) {
  std::vector<double> ramp(10);
  for (int i = 0; i < 10; ++i) ramp[i] = i;
  const Tensor w = Tensor::FromData({1, 10}, ramp);
  const Tensor v2 = PeriodView(w, 2);
  ASSERT_EQ(v2.shape(), (nn::Shape{1, 1, 5, 2}));
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 2; ++c) EXPECT_EQ(v2.at({0, 0, r, c}), 2 * r + c);
  const Tensor v3 = PeriodView(w, 3);
  ASSERT_EQ(v3.shape(), (nn::Shape{1, 1, 4, 3}));
  EXPECT_EQ(v3.at({0, 0, 3, 0}), 9.0);
  EXPECT_EQ(v3.at({0, 0, 3, 1}), 0.0);
  EXPECT_EQ(v3.at({0, 0, 3, 2}), 0.0);
}

TEST(Discriminator, FiniteAndDeterministicOnOneSecond) {
  const MultiDiscriminator a(DiscriminatorConfig{}, 3), b(DiscriminatorConfig{}, 3);
  Rng rng(8);
  const Tensor wave = RandomTensor({1, 48000}, rng, 0.1);
  nn::NoGradGuard guard;
  const auto oa = a.Forward(wave), ob = b.Forward(wave);
  ASSERT_EQ(oa.size(), 8u);
  for (size_t k = 0; k < oa.size(); ++k) {
    for (double v : oa[k].score.data()) ASSERT_TRUE(std::isfinite(v));
    ASSERT_EQ(oa[k].score.shape(), ob[k].score.shape());
    for (int64_t i = 0; i < oa[k].score.numel(); ++i) ASSERT_EQ(oa[k].score.data()[i], ob[k].score.data()[i]);
    EXPECT_FALSE(oa[k].features.empty());
  }
}

TEST(Lsgan, ClosedForms) {
  const std::vector<DiscOutput> ones{Constant(1.0), Constant(1.0, {1, 1, 7})};
  const std::vector<DiscOutput> zeros{Constant(0.0), Constant(0.0, {1, 1, 7})};
  const std::vector<DiscOutput> halves{Constant(0.5), Constant(0.5, {1, 1, 7})};
  EXPECT_EQ(LsganDiscLoss(ones, zeros).item(), 0.0);
  EXPECT_EQ(LsganGenLoss(ones).item(), 0.0);
  EXPECT_DOUBLE_EQ(LsganGenLoss(halves).item(), 0.25);
  EXPECT_DOUBLE_EQ(LsganDiscLoss(halves, halves).item(), 0.5);
}

TEST(Lsgan, GradChecksThroughDiscriminator) {
  const MultiDiscriminator disc(DiscriminatorConfig::Tiny(), 9);
  Rng rng(10);
  Tensor fake = RandomTensor({1, 400}, rng, 0.3);
  const Tensor real = RandomTensor({1, 400}, rng, 0.3);
  EXPECT_LT(GradCheck([&] { return LsganGenLoss(disc.Forward(fake)); }, {fake}, rng, 40), kGradTol);
  std::vector<Tensor> params;
  for (const auto& p : disc.Parameters()) params.push_back(p.tensor);
  EXPECT_LT(GradCheck([&] { return LsganDiscLoss(disc.Forward(real), disc.Forward(fake.Detach())); }, params, rng, 4),
            kGradTol);
  std::vector<DiscOutput> real_out;
  {
    nn::NoGradGuard guard;
    real_out = disc.Forward(real);
  }
  EXPECT_LT(GradCheck([&] { return FeatureMatchingLoss(real_out, disc.Forward(fake)); }, {fake}, rng, 40), kGradTol);
  EXPECT_LT(FeatureMatchingLoss(real_out, real_out).item(), 1e-5);
}

TEST(Composite, Stage1ComponentSums) {
  const MultiDiscriminator disc(DiscriminatorConfig::Tiny(), 11);
  Rng rng(12);
  const Tensor est = RandomTensor({2, 480}, rng, 0.2), ref = RandomTensor({2, 480}, rng, 0.2);
  LossWeights w;
  const SpectralSetup s = SmallSetup();
  const Stage1Terms t = Stage1Loss(est, ref, &disc, w, s);
  EXPECT_NEAR(t.total.item(), t.si_snr.item() + 10 * t.plc.item() + 15 * t.adv.item(), 1e-9);
  // Components recomputed outside the composite.
  EXPECT_NEAR(t.si_snr.item(), SiSnrLoss(est, ref).item(), 1e-12);
  EXPECT_NEAR(t.plc.item(),
              PlcLoss(nn::StftOp(est, s.stft, s.sample_rate), nn::StftOp(ref, s.stft, s.sample_rate)).item(), 1e-12);
  EXPECT_NEAR(t.adv.item(), LsganGenLoss(disc.Forward(est)).item(), 1e-12);

  LossWeights no_adv = w;
  no_adv.stage1.adv = 0.0;
  const Stage1Terms t0 = Stage1Loss(est, ref, nullptr, no_adv, s);
  EXPECT_NEAR(t0.total.item(), t.si_snr.item() + 10 * t.plc.item(), 1e-9);
  LossWeights double_plc = no_adv;
  double_plc.stage1.plc = 20.0;
  EXPECT_NEAR(Stage1Loss(est, ref, nullptr, double_plc, s).total.item() - t0.total.item(), 10 * t.plc.item(), 1e-9);
  EXPECT_THROW(Stage1Loss(est, ref, nullptr, w, s), ValidationError);

  LossWeights with_fm = w;
  with_fm.stage1.feature_matching = 2.0;
  const Stage1Terms tf = Stage1Loss(est, ref, &disc, with_fm, s);
  EXPECT_NEAR(tf.total.item(),
              tf.si_snr.item() + 10 * tf.plc.item() + 15 * tf.adv.item() + 2 * tf.feature_matching.item(), 1e-9);
}

TEST(Composite, Stage2ComponentSumsAndIdentity) {
  Rng rng(13);
  const Tensor est = RandomTensor({2, 480}, rng, 0.2), ref = RandomTensor({2, 480}, rng, 0.2);
  const SpectralSetup s = SmallSetup();
  const Stage2Terms t = Stage2Loss(est, ref, LossWeights{}, s);
  EXPECT_NEAR(t.total.item(), t.si_snr.item() + t.plc.item() + t.mag.item(), 1e-9);
  const Tensor se = nn::StftOp(est, s.stft, s.sample_rate), sr = nn::StftOp(ref, s.stft, s.sample_rate);
  EXPECT_NEAR(t.mag.item(), MagMseLoss(se, sr).item(), 1e-12);
  EXPECT_NEAR(t.plc.item(), PlcLoss(se, sr).item(), 1e-12);
  const Stage2Terms same = Stage2Loss(ref, ref, LossWeights{}, s);
  EXPECT_DOUBLE_EQ(same.total.item(), -kSiSnrCapDb);
  EXPECT_EQ(same.plc.item(), 0.0);
  EXPECT_EQ(same.mag.item(), 0.0);
}

TEST(Composite, GradientIsSumOfComponentGradients) {
  Rng rng(14);
  const SpectralSetup s = SmallSetup();
  Tensor est = RandomTensor({1, 480}, rng, 0.2);
  const Tensor ref = RandomTensor({1, 480}, rng, 0.2);
  est.set_requires_grad(true);
  auto grad_of = [&](const Tensor& loss) {
    est.ZeroGrad();
    loss.Backward();
    return std::vector<double>(est.grad().begin(), est.grad().end());
  };
  const Stage2Terms t = Stage2Loss(est, ref, LossWeights{}, s);
  const auto g_total = grad_of(t.total);
  const auto g_si = grad_of(Stage2Loss(est, ref, LossWeights{}, s).si_snr);
  const auto g_plc = grad_of(Stage2Loss(est, ref, LossWeights{}, s).plc);
  const auto g_mag = grad_of(Stage2Loss(est, ref, LossWeights{}, s).mag);
  for (size_t i = 0; i < g_total.size(); ++i) EXPECT_NEAR(g_total[i], g_si[i] + g_plc[i] + g_mag[i], 1e-9);
  EXPECT_LT(GradCheck([&] { return Stage2Loss(est, ref, LossWeights{}, s).total; }, {est}, rng, 40), kGradTol);
  const MultiDiscriminator disc(DiscriminatorConfig::Tiny(), 15);
  EXPECT_LT(GradCheck([&] { return Stage1Loss(est, ref, &disc, LossWeights{}, s).total; }, {est}, rng, 40), kGradTol);
}

TEST(Composite, WeightsJsonAndValidation) {
  LossWeights w;
  w.stage1.feature_matching = 1.5;
  const nlohmann::json j = w;
  EXPECT_EQ(nlohmann::json(j.get<LossWeights>()), j);
  w.plc_exponent = 0.0;
  EXPECT_THROW(w.Validate(), ValidationError);
  DiscriminatorConfig d;
  d.msd_kernels.pop_back();
  EXPECT_THROW(d.Validate(), ValidationError);
}

}  // namespace
}  // namespace ssi::losses
