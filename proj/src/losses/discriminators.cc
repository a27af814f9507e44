#include "ssi/losses/discriminators.h"

#include "ssi/common/error.h"

namespace ssi::losses {

using nn::Tensor;

void DiscriminatorConfig::Validate() const {
  Require(!periods.empty() || num_scales > 0, "need at least one discriminator");
  for (int p : periods) Require(p > 0, "periods must be positive");
  Require(!mpd_channels.empty(), "mpd_channels must not be empty");
  for (int64_t c : mpd_channels) Require(c > 0, "mpd_channels must be positive");
  Require(num_scales >= 0, "num_scales must be non-negative");
  Require(!msd_channels.empty() && msd_channels.size() == msd_kernels.size() &&
              msd_channels.size() == msd_strides.size(),
          "msd channels, kernels and strides must have equal non-zero length");
  for (size_t i = 0; i < msd_channels.size(); ++i) {
    Require(msd_channels[i] > 0 && msd_kernels[i] > 0 && msd_strides[i] > 0, "msd sizes must be positive");
  }
}

DiscriminatorConfig DiscriminatorConfig::Tiny() {
  DiscriminatorConfig c;
  c.mpd_channels = {4, 8, 8};
  c.msd_channels = {4, 8, 8};
  c.msd_kernels = {15, 11, 11};
  c.msd_strides = {1, 4, 4};
  return c;
}

void to_json(nlohmann::json& j, const DiscriminatorConfig& c) {
  j = nlohmann::json{{"periods", c.periods},         {"mpd_channels", c.mpd_channels},
                     {"num_scales", c.num_scales},   {"msd_channels", c.msd_channels},
                     {"msd_kernels", c.msd_kernels}, {"msd_strides", c.msd_strides},
                     {"leaky_slope", c.leaky_slope}};
}

void from_json(const nlohmann::json& j, DiscriminatorConfig& c) {
  c = DiscriminatorConfig{};
  if (j.contains("periods")) j.at("periods").get_to(c.periods);
  if (j.contains("mpd_channels")) j.at("mpd_channels").get_to(c.mpd_channels);
  if (j.contains("num_scales")) j.at("num_scales").get_to(c.num_scales);
  if (j.contains("msd_channels")) j.at("msd_channels").get_to(c.msd_channels);
  if (j.contains("msd_kernels")) j.at("msd_kernels").get_to(c.msd_kernels);
  if (j.contains("msd_strides")) j.at("msd_strides").get_to(c.msd_strides);
  if (j.contains("leaky_slope")) j.at("leaky_slope").get_to(c.leaky_slope);
  c.Validate();
}

Tensor PeriodView(const Tensor& wave, int period) {
  Require(wave.rank() == 2, "period view expects [N, L]");
  Require(period > 0, "period must be positive");
  const int64_t len = wave.dim(1);
  const int64_t rows = (len + period - 1) / period;
  const Tensor padded = rows * period == len ? wave : nn::Pad(wave, 1, 0, rows * period - len);
  return nn::Reshape(padded, {wave.dim(0), 1, rows, period});
}

PeriodDiscriminator::PeriodDiscriminator(int period, const DiscriminatorConfig& cfg, Rng& rng)
    : period_(period), slope_(cfg.leaky_slope) {
  int64_t in = 1;
  for (int64_t c : cfg.mpd_channels) {
    w_.push_back(nn::FanInParameter({c, in, 5, 1}, in * 5, rng));
    b_.push_back(nn::FanInParameter({c}, in * 5, rng));
    in = c;
  }
  post_w_ = nn::FanInParameter({1, in, 3, 1}, in * 3, rng);
  post_b_ = nn::FanInParameter({1}, in * 3, rng);
}

DiscOutput PeriodDiscriminator::Forward(const Tensor& wave) const {
  DiscOutput out;
  Tensor h = PeriodView(wave, period_);
  for (size_t i = 0; i < w_.size(); ++i) {
    nn::Conv2dGeometry g;
    g.stride_h = i + 1 < w_.size() ? 3 : 1;
    g.pad_top = g.pad_bottom = 2;
    h = nn::LeakyRelu(nn::Conv2d(h, w_[i], b_[i], g), slope_);
    out.features.push_back(h);
  }
  nn::Conv2dGeometry g;
  g.pad_top = g.pad_bottom = 1;
  out.score = nn::Conv2d(h, post_w_, post_b_, g);
  return out;
}

void PeriodDiscriminator::CollectParameters(const std::string& prefix, std::vector<nn::NamedParameter>& out) const {
  for (size_t i = 0; i < w_.size(); ++i) {
    out.push_back({nn::Join(prefix, "conv" + std::to_string(i) + ".w"), w_[i]});
    out.push_back({nn::Join(prefix, "conv" + std::to_string(i) + ".b"), b_[i]});
  }
  out.push_back({nn::Join(prefix, "post.w"), post_w_});
  out.push_back({nn::Join(prefix, "post.b"), post_b_});
}

ScaleDiscriminator::ScaleDiscriminator(const DiscriminatorConfig& cfg, Rng& rng)
    : slope_(cfg.leaky_slope), kernels_(cfg.msd_kernels), strides_(cfg.msd_strides) {
  int64_t in = 1;
  for (size_t i = 0; i < cfg.msd_channels.size(); ++i) {
    const int64_t c = cfg.msd_channels[i];
    const int k = cfg.msd_kernels[i];
    w_.push_back(nn::FanInParameter({c, in, 1, k}, in * k, rng));
    b_.push_back(nn::FanInParameter({c}, in * k, rng));
    in = c;
  }
  post_w_ = nn::FanInParameter({1, in, 1, 3}, in * 3, rng);
  post_b_ = nn::FanInParameter({1}, in * 3, rng);
}

DiscOutput ScaleDiscriminator::Forward(const Tensor& wave) const {
  Require(wave.rank() == 2, "scale discriminator expects [N, L]");
  DiscOutput out;
  Tensor h = nn::Reshape(wave, {wave.dim(0), 1, 1, wave.dim(1)});
  for (size_t i = 0; i < w_.size(); ++i) {
    nn::Conv2dGeometry g;
    g.stride_w = strides_[i];
    g.pad_left = g.pad_right = kernels_[i] / 2;
    h = nn::LeakyRelu(nn::Conv2d(h, w_[i], b_[i], g), slope_);
    out.features.push_back(h);
  }
  nn::Conv2dGeometry g;
  g.pad_left = g.pad_right = 1;
  out.score = nn::Conv2d(h, post_w_, post_b_, g);
  return out;
}

void ScaleDiscriminator::CollectParameters(const std::string& prefix, std::vector<nn::NamedParameter>& out) const {
  for (size_t i = 0; i < w_.size(); ++i) {
    out.push_back({nn::Join(prefix, "conv" + std::to_string(i) + ".w"), w_[i]});
    out.push_back({nn::Join(prefix, "conv" + std::to_string(i) + ".b"), b_[i]});
  }
  out.push_back({nn::Join(prefix, "post.w"), post_w_});
  out.push_back({nn::Join(prefix, "post.b"), post_b_});
}

MultiDiscriminator::MultiDiscriminator(const DiscriminatorConfig& cfg, uint64_t seed) : cfg_(cfg) {
  cfg.Validate();
  Rng rng(seed);
  for (int p : cfg.periods) mpd_.push_back(std::make_unique<PeriodDiscriminator>(p, cfg, rng));
  for (int s = 0; s < cfg.num_scales; ++s) msd_.push_back(std::make_unique<ScaleDiscriminator>(cfg, rng));
}

std::vector<DiscOutput> MultiDiscriminator::Forward(const Tensor& wave) const {
  std::vector<DiscOutput> out;
  for (const auto& d : mpd_) out.push_back(d->Forward(wave));
  Tensor scaled = wave;
  for (size_t s = 0; s < msd_.size(); ++s) {
    if (s > 0) {
      const Tensor pooled = nn::AvgPoolLast(nn::Reshape(scaled, {scaled.dim(0), 1, 1, scaled.dim(1)}), 4, 2, 2);
      scaled = nn::Reshape(pooled, {scaled.dim(0), pooled.dim(3)});
    }
    out.push_back(msd_[s]->Forward(scaled));
  }
  return out;
}

void MultiDiscriminator::CollectParameters(const std::string& prefix, std::vector<nn::NamedParameter>& out) const {
  for (size_t i = 0; i < mpd_.size(); ++i) {
    mpd_[i]->CollectParameters(nn::Join(prefix, "mpd" + std::to_string(cfg_.periods[i])), out);
  }
  for (size_t i = 0; i < msd_.size(); ++i) msd_[i]->CollectParameters(nn::Join(prefix, "msd" + std::to_string(i)), out);
}

Tensor LsganDiscLoss(const std::vector<DiscOutput>& real, const std::vector<DiscOutput>& fake) {
  Require(!real.empty() && real.size() == fake.size(), "real and fake discriminator outputs must pair up");
  Tensor total = Tensor::Scalar(0.0);
  for (size_t k = 0; k < real.size(); ++k) {
    total = nn::Add(total, nn::Mean(nn::Square(nn::AddScalar(real[k].score, -1.0))));
    total = nn::Add(total, nn::Mean(nn::Square(fake[k].score)));
  }
  return nn::MulScalar(total, 1.0 / static_cast<double>(real.size()));
}

Tensor LsganGenLoss(const std::vector<DiscOutput>& fake) {
  Require(!fake.empty(), "no discriminator outputs");
  Tensor total = Tensor::Scalar(0.0);
  for (const auto& f : fake) total = nn::Add(total, nn::Mean(nn::Square(nn::AddScalar(f.score, -1.0))));
  return nn::MulScalar(total, 1.0 / static_cast<double>(fake.size()));
}

Tensor FeatureMatchingLoss(const std::vector<DiscOutput>& real, const std::vector<DiscOutput>& fake) {
  Require(!real.empty() && real.size() == fake.size(), "real and fake discriminator outputs must pair up");
  Tensor total = Tensor::Scalar(0.0);
  int64_t layers = 0;
  for (size_t k = 0; k < real.size(); ++k) {
    for (size_t i = 0; i < real[k].features.size(); ++i) {
      const Tensor d = nn::Sub(fake[k].features[i], real[k].features[i].Detach());
      total = nn::Add(total, nn::Mean(nn::Sqrt(nn::AddScalar(nn::Square(d), 1e-12))));
      ++layers;
    }
  }
  return layers ? nn::MulScalar(total, 1.0 / static_cast<double>(layers)) : total;
}

}  // namespace ssi::losses
