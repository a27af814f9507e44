#include "ssi/nn/recurrent.h"

#include "ssi/common/error.h"
#include "ssi/nn/ops.h"

namespace ssi::nn {

Lstm::Lstm(int64_t input_size, int64_t hidden_size, int layers, Rng& rng)
    : input_(input_size), hidden_(hidden_size) {
  Require(input_size > 0 && hidden_size > 0 && layers > 0, "LSTM sizes must be positive");
  for (int l = 0; l < layers; ++l) {
    const int64_t in = l == 0 ? input_size : hidden_size;
    Layer layer;
    layer.w_ih = FanInParameter({4 * hidden_size, in}, hidden_size, rng);
    layer.w_hh = FanInParameter({4 * hidden_size, hidden_size}, hidden_size, rng);
    layer.b_ih = FanInParameter({4 * hidden_size}, hidden_size, rng);
    layer.b_hh = FanInParameter({4 * hidden_size}, hidden_size, rng);
    layers_.push_back(std::move(layer));
  }
}

Tensor Lstm::Forward(const Tensor& x) const {
  Require(x.rank() == 3 && x.dim(2) == input_,
          "LSTM expects [T, N, " + std::to_string(input_) + "], got " + ShapeString(x.shape()));
  const int64_t steps = x.dim(0), batch = x.dim(1), h = hidden_;
  Tensor seq = Reshape(x, {steps * batch, input_});
  for (const Layer& layer : layers_) {
    const Tensor proj = Linear(seq, layer.w_ih, layer.b_ih);
    Tensor hidden = Tensor::Zeros({batch, h});
    Tensor cell = Tensor::Zeros({batch, h});
    std::vector<Tensor> outputs;
    outputs.reserve(steps);
    for (int64_t t = 0; t < steps; ++t) {
      const Tensor pre = Add(Slice(proj, 0, t * batch, (t + 1) * batch), Linear(hidden, layer.w_hh, layer.b_hh));
      const Tensor in_gate = Sigmoid(Slice(pre, 1, 0, h));
      const Tensor forget_gate = Sigmoid(Slice(pre, 1, h, 2 * h));
      const Tensor candidate = Tanh(Slice(pre, 1, 2 * h, 3 * h));
      const Tensor out_gate = Sigmoid(Slice(pre, 1, 3 * h, 4 * h));
      cell = Add(Mul(forget_gate, cell), Mul(in_gate, candidate));
      hidden = Mul(out_gate, Tanh(cell));
      outputs.push_back(hidden);
    }
    seq = Concat(outputs, 0);
  }
  return Reshape(seq, {steps, batch, h});
}

void Lstm::CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const {
  for (size_t l = 0; l < layers_.size(); ++l) {
    const std::string p = Join(prefix, "layer" + std::to_string(l));
    out.push_back({Join(p, "w_ih"), layers_[l].w_ih});
    out.push_back({Join(p, "w_hh"), layers_[l].w_hh});
    out.push_back({Join(p, "b_ih"), layers_[l].b_ih});
    out.push_back({Join(p, "b_hh"), layers_[l].b_hh});
  }
}

}  // namespace ssi::nn
