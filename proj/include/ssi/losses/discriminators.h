#pragma once

#include <memory>
#include <vector>

#include <json.hpp>

#include "ssi/nn/module.h"
#include "ssi/nn/ops.h"

namespace ssi::losses {

struct DiscriminatorConfig {
  std::vector<int> periods = {2, 3, 5, 7, 11};
  // Conv channels of each period discriminator (kernel (5,1), stride (3,1)
  // except the last, which has stride 1).
  std::vector<int64_t> mpd_channels = {8, 32, 128, 256, 256};
  int num_scales = 3;  // waveform, 2x and 4x average-pooled
  // Conv channels, kernels and strides of each scale discriminator.
  std::vector<int64_t> msd_channels = {32, 32, 64, 128, 256, 256, 256};
  std::vector<int> msd_kernels = {15, 41, 41, 41, 41, 41, 5};
  std::vector<int> msd_strides = {1, 2, 2, 4, 4, 1, 1};
  double leaky_slope = 0.1;

  void Validate() const;
  // Small configuration for fast tests.
  static DiscriminatorConfig Tiny();
};

void to_json(nlohmann::json& j, const DiscriminatorConfig& c);
void from_json(const nlohmann::json& j, DiscriminatorConfig& c);

struct DiscOutput {
  nn::Tensor score;                  // final score map
  std::vector<nn::Tensor> features;  // activations after each hidden layer
};

// [N, L] -> [N, 1, ceil(L/p), p]; the tail is zero-padded to a multiple of p.
nn::Tensor PeriodView(const nn::Tensor& wave, int period);

class PeriodDiscriminator : public nn::Module {
 public:
  PeriodDiscriminator(int period, const DiscriminatorConfig& cfg, Rng& rng);
  DiscOutput Forward(const nn::Tensor& wave) const;
  void CollectParameters(const std::string& prefix, std::vector<nn::NamedParameter>& out) const override;

 private:
  int period_;
  double slope_;
  std::vector<nn::Tensor> w_, b_;
  nn::Tensor post_w_, post_b_;
};

class ScaleDiscriminator : public nn::Module {
 public:
  ScaleDiscriminator(const DiscriminatorConfig& cfg, Rng& rng);
  // wave is [N, L] at this discriminator's scale.
  DiscOutput Forward(const nn::Tensor& wave) const;
  void CollectParameters(const std::string& prefix, std::vector<nn::NamedParameter>& out) const override;

 private:
  double slope_;
  std::vector<int> kernels_, strides_;
  std::vector<nn::Tensor> w_, b_;
  nn::Tensor post_w_, post_b_;
};

// All period and scale discriminators; one output per sub-discriminator.
class MultiDiscriminator : public nn::Module {
 public:
  MultiDiscriminator(const DiscriminatorConfig& cfg, uint64_t seed);
  std::vector<DiscOutput> Forward(const nn::Tensor& wave) const;
  void CollectParameters(const std::string& prefix, std::vector<nn::NamedParameter>& out) const override;
  const DiscriminatorConfig& config() const { return cfg_; }

 private:
  DiscriminatorConfig cfg_;
  std::vector<std::unique_ptr<PeriodDiscriminator>> mpd_;
  std::vector<std::unique_ptr<ScaleDiscriminator>> msd_;
};

// Least-squares GAN objectives averaged over sub-discriminators:
// disc = mean_k [mean((D_k(real) - 1)^2) + mean(D_k(fake)^2)],
// gen = mean_k mean((D_k(fake) - 1)^2).
nn::Tensor LsganDiscLoss(const std::vector<DiscOutput>& real, const std::vector<DiscOutput>& fake);
nn::Tensor LsganGenLoss(const std::vector<DiscOutput>& fake);
// Mean L1 distance between real and fake features, averaged over layers.
nn::Tensor FeatureMatchingLoss(const std::vector<DiscOutput>& real, const std::vector<DiscOutput>& fake);

}  // namespace ssi::losses
