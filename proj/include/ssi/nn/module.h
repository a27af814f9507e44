#pragma once

#include <string>
#include <vector>

#include "ssi/common/rng.h"
#include "ssi/nn/tensor.h"

namespace ssi::nn {

struct NamedParameter {
  std::string name;
  Tensor tensor;
};

class Module {
 public:
  virtual ~Module() = default;

  // Appends this module's parameters, names prefixed with `prefix`.
  virtual void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const = 0;

  std::vector<NamedParameter> Parameters() const;
  int64_t NumParameters() const;
  void SetRequiresGrad(bool r) const;
  void ZeroGrad() const;
};

// U(-bound, bound) parameter.
Tensor UniformParameter(const Shape& shape, double bound, Rng& rng);
// PyTorch-style default: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
Tensor FanInParameter(const Shape& shape, int64_t fan_in, Rng& rng);
Tensor ConstantParameter(const Shape& shape, double v);

inline std::string Join(const std::string& prefix, const std::string& name) {
  return prefix.empty() ? name : prefix + "." + name;
}

}  // namespace ssi::nn
