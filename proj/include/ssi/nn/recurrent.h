#pragma once

#include <memory>
#include <vector>

#include "ssi/nn/module.h"

namespace ssi::nn {

// Unidirectional multi-layer LSTM, gate order (i, f, g, o), separate input
// and recurrent biases. Zero initial state.
class Lstm : public Module {
 public:
  Lstm(int64_t input_size, int64_t hidden_size, int layers, Rng& rng);

  // x [T, N, input] -> [T, N, hidden].
  Tensor Forward(const Tensor& x) const;
  void CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const override;

  int64_t hidden_size() const { return hidden_; }

 private:
  struct Layer {
    Tensor w_ih, w_hh, b_ih, b_hh;
  };
  int64_t input_, hidden_;
  std::vector<Layer> layers_;
};

}  // namespace ssi::nn
