#pragma once

#include <vector>

#include "ssi/nn/tensor.h"

namespace ssi::losses {

constexpr double kSiSnrCapDb = 50.0;
constexpr double kPlcExponent = 0.3;

// Negative scale-invariant SNR in dB, averaged over the batch. est/ref are
// [N, L]; both are made zero-mean per row. Clamped to [-cap, cap].
nn::Tensor SiSnrLoss(const nn::Tensor& est, const nn::Tensor& ref, double cap_db = kSiSnrCapDb);

// Per-row SI-SNR in dB (not negated, not clamped beyond the cap), no graph.
std::vector<double> SiSnrDb(const nn::Tensor& est, const nn::Tensor& ref, double cap_db = kSiSnrCapDb);

// Spectra are [N, 2, F, T] (real, imag). Magnitude |S| = sqrt(re^2 + im^2 + eps).

// Power-law compressed loss: mean over bins of (|E|^c - |R|^c)^2 plus mean
// over bins of |E|^c e^{j angle E} - |R|^c e^{j angle R}|^2.
nn::Tensor PlcLoss(const nn::Tensor& est_spec, const nn::Tensor& ref_spec, double c = kPlcExponent);

// Mean over bins of (|E| - |R|)^2.
nn::Tensor MagMseLoss(const nn::Tensor& est_spec, const nn::Tensor& ref_spec);

// Magnitude [N, F, T] of a stacked spectrum.
nn::Tensor Magnitude(const nn::Tensor& spec);

}  // namespace ssi::losses
