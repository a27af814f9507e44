#pragma once

#include <memory>
#include <vector>

#include "ssi/nn/complex.h"

namespace ssi::nn {

struct StcmConfig {
  int64_t hidden = 64;
  int kernel = 3;
  std::vector<int> dilations = {1, 2};
};

// Squeezed temporal convolution module on a sequence [N, D, 1, T]:
// 1x1 squeeze to `hidden`, dilated causal temporal convs (each followed by
// PReLU and per-frame normalization), 1x1 expansion back to D, residual add.
// Causal padding replicates the first frame so a constant input maps to a
// constant output.
class Stcm : public Module {
 public:
  Stcm(int64_t dim, const StcmConfig& cfg, Rng& rng);
  Tensor Forward(const Tensor& x) const;
  void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const override;

 private:
  int64_t dim_;
  StcmConfig cfg_;
  Tensor squeeze_w_, squeeze_b_;
  std::unique_ptr<NormAct> squeeze_norm_;
  std::vector<Tensor> conv_w_, conv_b_;
  std::vector<std::unique_ptr<NormAct>> conv_norm_;
  Tensor expand_w_, expand_b_;
};

// Several STCMs in sequence.
class StcmStack : public Module {
 public:
  StcmStack(int64_t dim, int blocks, const StcmConfig& cfg, Rng& rng);
  Tensor Forward(const Tensor& x) const;
  void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const override;

 private:
  std::vector<std::unique_ptr<Stcm>> blocks_;
};

}  // namespace ssi::nn
