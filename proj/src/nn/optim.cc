#include "ssi/nn/optim.h"

#include <cmath>

#include "ssi/common/error.h"

namespace ssi::nn {

double GradNorm(const std::vector<NamedParameter>& params) {
  double sq = 0.0;
  for (const auto& p : params) {
    if (!p.tensor.has_grad()) continue;
    for (double g : p.tensor.grad()) sq += g * g;
  }
  return std::sqrt(sq);
}

double ClipGradNorm(const std::vector<NamedParameter>& params, double max_norm) {
  const double norm = GradNorm(params);
  if (max_norm > 0.0 && std::isfinite(norm) && norm > max_norm) {
    const double scale = max_norm / norm;
    for (const auto& p : params) {
      Tensor t = p.tensor;
      if (!t.has_grad()) continue;
      for (double& g : t.mutable_grad()) g *= scale;
    }
  }
  return norm;
}

Adam::Adam(const std::vector<NamedParameter>& params, const AdamConfig& cfg) : cfg_(cfg) {
  Require(cfg.lr > 0.0, "learning rate must be positive");
  Require(cfg.beta1 >= 0.0 && cfg.beta1 < 1.0 && cfg.beta2 >= 0.0 && cfg.beta2 < 1.0, "Adam betas must be in [0, 1)");
  for (const auto& p : params) {
    if (!p.tensor.requires_grad()) continue;
    params_.push_back(p);
    m_.emplace_back(p.tensor.numel(), 0.0);
    v_.emplace_back(p.tensor.numel(), 0.0);
  }
}

double Adam::Step() {
  const double norm = ClipGradNorm(params_, cfg_.clip_norm);
  if (!std::isfinite(norm)) throw NumericalError("non-finite gradient norm");
  ++step_;
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
  for (size_t i = 0; i < params_.size(); ++i) {
    Tensor t = params_[i].tensor;
    if (!t.has_grad()) continue;
    auto w = t.mutable_data();
    const auto g = t.grad();
    auto& m = m_[i];
    auto& v = v_[i];
    for (size_t j = 0; j < w.size(); ++j) {
      m[j] = cfg_.beta1 * m[j] + (1.0 - cfg_.beta1) * g[j];
      v[j] = cfg_.beta2 * v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
      w[j] -= cfg_.lr * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg_.eps);
    }
  }
  return norm;
}

void Adam::ZeroGrad() {
  for (const auto& p : params_) {
    Tensor t = p.tensor;
    t.ZeroGrad();
  }
}

}  // namespace ssi::nn
