#include "ssi/losses/losses.h"

#include <cmath>
#include <numbers>

#include "ssi/common/error.h"
#include "ssi/nn/ops.h"

namespace ssi::losses {

using nn::Tensor;

namespace {

constexpr double kPowerEps = 1e-12;
constexpr double kMagEps = 1e-12;

void RequirePair(const Tensor& est, const Tensor& ref, int rank, const char* what) {
  Require(est.rank() == rank && est.shape() == ref.shape(),
          std::string(what) + ": estimate " + nn::ShapeString(est.shape()) + " and reference " +
              nn::ShapeString(ref.shape()) + " must match");
}

Tensor Center(const Tensor& x) { return nn::AddAlong(x, nn::Neg(nn::MeanAxis(x, 1)), 0); }

void RequireAudibleRef(const Tensor& ref) {
  const int64_t n = ref.dim(0), len = ref.dim(1);
  const auto r = ref.data();
  for (int64_t b = 0; b < n; ++b) {
    double mean = 0.0;
    for (int64_t i = 0; i < len; ++i) mean += r[b * len + i];
    mean /= static_cast<double>(len);
    double energy = 0.0;
    for (int64_t i = 0; i < len; ++i) energy += (r[b * len + i] - mean) * (r[b * len + i] - mean);
    Require(energy > kPowerEps, "SI-SNR reference is silent");
  }
}

// SI-SNR in dB per row, clamped to [-cap, cap].
Tensor SiSnrRows(const Tensor& est, const Tensor& ref, double cap_db) {
  RequirePair(est, ref, 2, "SI-SNR");
  RequireAudibleRef(ref);
  const Tensor e = Center(est);
  const Tensor r = Center(ref);
  const Tensor alpha = nn::Div(nn::SumAxis(nn::Mul(e, r), 1), nn::SumAxis(nn::Square(r), 1));
  const Tensor target = nn::MulAlong(r, alpha, 0);
  const Tensor noise = nn::Sub(e, target);
  const Tensor ratio = nn::Div(nn::AddScalar(nn::SumAxis(nn::Square(target), 1), kPowerEps),
                               nn::AddScalar(nn::SumAxis(nn::Square(noise), 1), kPowerEps));
  return nn::Clamp(nn::MulScalar(nn::Log(ratio), 10.0 / std::numbers::ln10), -cap_db, cap_db);
}

}  // namespace

Tensor SiSnrLoss(const Tensor& est, const Tensor& ref, double cap_db) {
  return nn::Neg(nn::Mean(SiSnrRows(est, ref, cap_db)));
}

std::vector<double> SiSnrDb(const Tensor& est, const Tensor& ref, double cap_db) {
  nn::NoGradGuard guard;
  const Tensor rows = SiSnrRows(est, ref, cap_db);
  return {rows.data().begin(), rows.data().end()};
}

Tensor Magnitude(const Tensor& spec) {
  Require(spec.rank() == 4 && spec.dim(1) == 2, "spectrum must be [N, 2, F, T]");
  const Tensor re = nn::Slice(spec, 1, 0, 1);
  const Tensor im = nn::Slice(spec, 1, 1, 2);
  const Tensor mag = nn::Sqrt(nn::AddScalar(nn::Add(nn::Square(re), nn::Square(im)), kMagEps));
  return nn::Reshape(mag, {spec.dim(0), spec.dim(2), spec.dim(3)});
}

Tensor PlcLoss(const Tensor& est_spec, const Tensor& ref_spec, double c) {
  RequirePair(est_spec, ref_spec, 4, "PLC loss");
  Require(c > 0.0 && c <= 1.0, "PLC exponent must be in (0, 1]");
  auto compress = [c](const Tensor& spec, Tensor& mag_c) {
    const Tensor mag = Magnitude(spec);
    mag_c = nn::Pow(mag, c);
    // Complex value scaled by |S|^(c-1): keeps the phase, magnitude |S|^c.
    const Tensor scale = nn::Reshape(nn::Pow(mag, c - 1.0), {spec.dim(0), 1, spec.dim(2), spec.dim(3)});
    return nn::Mul(spec, nn::Concat({scale, scale}, 1));
  };
  Tensor est_mag, ref_mag;
  const Tensor est_c = compress(est_spec, est_mag);
  const Tensor ref_c = compress(ref_spec, ref_mag);
  const Tensor mag_term = nn::Mean(nn::Square(nn::Sub(est_mag, ref_mag)));
  // Sum over (re, im), mean over bins.
  const Tensor complex_term = nn::MulScalar(nn::Mean(nn::Square(nn::Sub(est_c, ref_c))), 2.0);
  return nn::Add(mag_term, complex_term);
}

Tensor MagMseLoss(const Tensor& est_spec, const Tensor& ref_spec) {
  RequirePair(est_spec, ref_spec, 4, "magnitude MSE");
  return nn::Mean(nn::Square(nn::Sub(Magnitude(est_spec), Magnitude(ref_spec))));
}

}  // namespace ssi::losses
