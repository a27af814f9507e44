#include "ssi/nn/module.h"

#include <cmath>

namespace ssi::nn {

std::vector<NamedParameter> Module::Parameters() const {
  std::vector<NamedParameter> out;
  CollectParameters("", out);
  return out;
}

int64_t Module::NumParameters() const {
  int64_t n = 0;
  for (const auto& p : Parameters()) n += p.tensor.numel();
  return n;
}

void Module::SetRequiresGrad(bool r) const {
  for (auto& p : Parameters()) {
    Tensor t = p.tensor;
    t.set_requires_grad(r);
  }
}

void Module::ZeroGrad() const {
  for (auto& p : Parameters()) {
    Tensor t = p.tensor;
    t.ZeroGrad();
  }
}

Tensor UniformParameter(const Shape& shape, double bound, Rng& rng) {
  std::vector<double> v(NumElements(shape));
  for (double& x : v) x = rng.Uniform(-bound, bound);
  return Tensor::Parameter(shape, std::move(v));
}

Tensor FanInParameter(const Shape& shape, int64_t fan_in, Rng& rng) {
  return UniformParameter(shape, 1.0 / std::sqrt(static_cast<double>(std::max<int64_t>(fan_in, 1))), rng);
}

Tensor ConstantParameter(const Shape& shape, double v) {
  return Tensor::Parameter(shape, std::vector<double>(NumElements(shape), v));
}

}  // namespace ssi::nn
