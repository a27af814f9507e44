#include "ssi/nn/complex.h"

#include "ssi/common/error.h"

namespace ssi::nn {

ComplexTensor::ComplexTensor(Tensor stacked) : data_(std::move(stacked)) {
  Require(data_.rank() == 4 && data_.dim(1) % 2 == 0,
          "complex tensor must be [N, 2C, F, T], got " + ShapeString(data_.shape()));
}

ComplexTensor ComplexTensor::FromParts(const Tensor& real, const Tensor& imag) {
  Require(real.shape() == imag.shape(), "real and imaginary parts differ in shape");
  return ComplexTensor(Concat({real, imag}, 1));
}

Tensor ComplexTensor::Real() const { return Slice(data_, 1, 0, channels()); }
Tensor ComplexTensor::Imag() const { return Slice(data_, 1, channels(), 2 * channels()); }

ComplexTensor ConcatChannels(const ComplexTensor& a, const ComplexTensor& b) {
  return ComplexTensor(Concat({a.Real(), b.Real(), a.Imag(), b.Imag()}, 1));
}

ComplexTensor ApplyRealMask(const ComplexTensor& x, const Tensor& mask) {
  return ComplexTensor(Mul(x.data(), Concat({mask, mask}, 1)));
}

Conv2dGeometry EncoderGeometry(const ConvSpec& s) {
  Conv2dGeometry g;
  g.stride_h = s.stride_f;
  g.dilation_w = s.dilation_t;
  g.pad_top = g.pad_bottom = s.pad_f;
  g.pad_left = (s.kernel_t - 1) * s.dilation_t;
  return g;
}

Conv2dGeometry DecoderGeometry(const ConvSpec& s) {
  Conv2dGeometry g = EncoderGeometry(s);
  g.pad_right = g.pad_left;
  g.pad_left = 0;
  return g;
}

int64_t EncodedFreq(int64_t in_f, const ConvSpec& s) {
  return ConvOutputSize(in_f, s.kernel_f, s.stride_f, 1, s.pad_f, s.pad_f);
}

namespace {

void RequireChannels(const ComplexTensor& x, int64_t expected, const char* what) {
  Require(x.channels() == expected, std::string(what) + ": expected " + std::to_string(expected) +
                                        " complex channels, got " + std::to_string(x.channels()));
}

}  // namespace

ComplexConv2d::ComplexConv2d(int64_t in_channels, int64_t out_channels, ConvSpec spec, Rng& rng)
    : in_(in_channels), out_(out_channels), spec_(spec) {
  Require(in_channels > 0 && out_channels > 0, "complex conv channels must be positive");
  const Shape shape{out_channels, in_channels, spec.kernel_f, spec.kernel_t};
  const int64_t fan_in = 2 * in_channels * spec.kernel_f * spec.kernel_t;
  weight_real = FanInParameter(shape, fan_in, rng);
  weight_imag = FanInParameter(shape, fan_in, rng);
  bias = FanInParameter({2 * out_channels}, fan_in, rng);
}

ComplexTensor ComplexConv2d::Forward(const ComplexTensor& x) const {
  RequireChannels(x, in_, "ComplexConv2d");
  const Tensor w = Concat({Concat({weight_real, Neg(weight_imag)}, 1), Concat({weight_imag, weight_real}, 1)}, 0);
  return ComplexTensor(Conv2d(x.data(), w, bias, EncoderGeometry(spec_)));
}

void ComplexConv2d::CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const {
  out.push_back({Join(prefix, "weight_real"), weight_real});
  out.push_back({Join(prefix, "weight_imag"), weight_imag});
  out.push_back({Join(prefix, "bias"), bias});
}

ComplexConvTranspose2d::ComplexConvTranspose2d(int64_t in_channels, int64_t out_channels, ConvSpec spec, Rng& rng)
    : in_(in_channels), out_(out_channels), spec_(spec) {
  Require(in_channels > 0 && out_channels > 0, "complex transposed conv channels must be positive");
  const Shape shape{in_channels, out_channels, spec.kernel_f, spec.kernel_t};
  const int64_t fan_in = 2 * in_channels * spec.kernel_f * spec.kernel_t;
  weight_real = FanInParameter(shape, fan_in, rng);
  weight_imag = FanInParameter(shape, fan_in, rng);
  bias = FanInParameter({2 * out_channels}, fan_in, rng);
}

ComplexTensor ComplexConvTranspose2d::Forward(const ComplexTensor& x, int64_t out_freq) const {
  RequireChannels(x, in_, "ComplexConvTranspose2d");
  const Tensor w = Concat({Concat({weight_real, weight_imag}, 1), Concat({Neg(weight_imag), weight_real}, 1)}, 0);
  return ComplexTensor(ConvTranspose2d(x.data(), w, bias, DecoderGeometry(spec_), out_freq, x.time()));
}

void ComplexConvTranspose2d::CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const {
  out.push_back({Join(prefix, "weight_real"), weight_real});
  out.push_back({Join(prefix, "weight_imag"), weight_imag});
  out.push_back({Join(prefix, "bias"), bias});
}

GatedComplexConv2d::GatedComplexConv2d(int64_t in_channels, int64_t out_channels, ConvSpec spec, Rng& rng)
    : feature(in_channels, out_channels, spec, rng), spec_(spec) {
  const int64_t fan_in = 2 * in_channels * spec.kernel_f * spec.kernel_t;
  gate_weight = FanInParameter({out_channels, 2 * in_channels, spec.kernel_f, spec.kernel_t}, fan_in, rng);
  gate_bias = FanInParameter({out_channels}, fan_in, rng);
}

Tensor GatedComplexConv2d::Gate(const ComplexTensor& x) const {
  return Sigmoid(Conv2d(x.data(), gate_weight, gate_bias, EncoderGeometry(spec_)));
}

ComplexTensor GatedComplexConv2d::Forward(const ComplexTensor& x) const {
  return ApplyRealMask(feature.Forward(x), Gate(x));
}

void GatedComplexConv2d::CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const {
  feature.CollectParameters(Join(prefix, "feature"), out);
  out.push_back({Join(prefix, "gate_weight"), gate_weight});
  out.push_back({Join(prefix, "gate_bias"), gate_bias});
}

GatedComplexConvTranspose2d::GatedComplexConvTranspose2d(int64_t in_channels, int64_t out_channels, ConvSpec spec,
                                                         Rng& rng)
    : feature(in_channels, out_channels, spec, rng), spec_(spec) {
  const int64_t fan_in = 2 * in_channels * spec.kernel_f * spec.kernel_t;
  gate_weight = FanInParameter({2 * in_channels, out_channels, spec.kernel_f, spec.kernel_t}, fan_in, rng);
  gate_bias = FanInParameter({out_channels}, fan_in, rng);
}

ComplexTensor GatedComplexConvTranspose2d::Forward(const ComplexTensor& x, int64_t out_freq) const {
  const Tensor gate =
      Sigmoid(ConvTranspose2d(x.data(), gate_weight, gate_bias, DecoderGeometry(spec_), out_freq, x.time()));
  return ApplyRealMask(feature.Forward(x, out_freq), gate);
}

void GatedComplexConvTranspose2d::CollectParameters(const std::string& prefix,
                                                    std::vector<NamedParameter>& out) const {
  feature.CollectParameters(Join(prefix, "feature"), out);
  out.push_back({Join(prefix, "gate_weight"), gate_weight});
  out.push_back({Join(prefix, "gate_bias"), gate_bias});
}

NormAct::NormAct(int64_t channels)
    : gain(ConstantParameter({channels}, 1.0)),
      bias(ConstantParameter({channels}, 0.0)),
      alpha(ConstantParameter({1}, 0.25)) {}

Tensor NormAct::Forward(const Tensor& x) const { return PRelu(FrameNorm(x, gain, bias), alpha); }

void NormAct::CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const {
  out.push_back({Join(prefix, "gain"), gain});
  out.push_back({Join(prefix, "bias"), bias});
  out.push_back({Join(prefix, "alpha"), alpha});
}

ComplexDenseBlock::ComplexDenseBlock(int64_t in_channels, int64_t channels, int depth, int kernel_f, int kernel_t,
                                     Rng& rng) {
  Require(depth >= 1, "dense block depth must be at least 1");
  Require(kernel_f % 2 == 1, "dense block frequency kernel must be odd to keep the frequency size");
  for (int i = 0; i < depth; ++i) {
    ConvSpec spec;
    spec.kernel_f = kernel_f;
    spec.kernel_t = kernel_t;
    spec.stride_f = 1;
    spec.pad_f = kernel_f / 2;
    spec.dilation_t = 1 << i;
    convs_.push_back(std::make_unique<ComplexConv2d>(in_channels + i * channels, channels, spec, rng));
    norms_.push_back(std::make_unique<NormAct>(2 * channels));
  }
}

ComplexTensor ComplexDenseBlock::Forward(const ComplexTensor& x) const {
  ComplexTensor features = x;
  ComplexTensor y;
  for (size_t i = 0; i < convs_.size(); ++i) {
    y = ComplexTensor(norms_[i]->Forward(convs_[i]->Forward(features).data()));
    if (i + 1 < convs_.size()) features = ConcatChannels(features, y);
  }
  return y;
}

void ComplexDenseBlock::CollectParameters(const std::string& prefix, std::vector<NamedParameter>& out) const {
  for (size_t i = 0; i < convs_.size(); ++i) {
    convs_[i]->CollectParameters(Join(prefix, "conv" + std::to_string(i)), out);
    norms_[i]->CollectParameters(Join(prefix, "norm" + std::to_string(i)), out);
  }
}

}  // namespace ssi::nn
