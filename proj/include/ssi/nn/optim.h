#pragma once

#include <vector>

#include "ssi/nn/module.h"

namespace ssi::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double clip_norm = 5.0;  // <= 0 disables clipping
};

// Global L2 norm of the gradients of `params` (parameters without a grad
// buffer count as zero).
double GradNorm(const std::vector<NamedParameter>& params);
// Rescales gradients so their global norm is at most max_norm. Returns the
// norm before clipping.
double ClipGradNorm(const std::vector<NamedParameter>& params, double max_norm);

// Adam over the parameters that require grad at construction time. Frozen
// parameters get no moment buffers and are never touched.
class Adam {
 public:
  Adam(const std::vector<NamedParameter>& params, const AdamConfig& cfg);

  // Clips, then applies one update. Returns the pre-clip gradient norm.
  // Throws NumericalError if the gradient norm is not finite.
  double Step();
  void ZeroGrad();

  double lr() const { return cfg_.lr; }
  void set_lr(double lr) { cfg_.lr = lr; }
  int64_t steps() const { return step_; }
  const std::vector<NamedParameter>& parameters() const { return params_; }

 private:
  AdamConfig cfg_;
  std::vector<NamedParameter> params_;
  std::vector<std::vector<double>> m_, v_;
  int64_t step_ = 0;
};

}  // namespace ssi::nn
