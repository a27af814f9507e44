#pragma once

#include <span>

#include "ssi/audio/stft.h"

namespace ssi::audio {

constexpr double kMetricSiSnrCapDb = 50.0;
constexpr double kLsdMagnitudeFloor = 1e-8;

// Scale-invariant SNR in dB after mean removal, clamped to [-cap, cap].
// Throws if the reference is silent or the lengths differ.
double SiSnrDb(std::span<const double> est, std::span<const double> ref, double cap_db = kMetricSiSnrCapDb);

// Log-spectral distance in dB: mean over frames of the RMS over bins of
// 10 log10(|E|^2 / |R|^2), magnitudes floored at `floor`.
double Lsd(const ComplexSpectrogram& est, const ComplexSpectrogram& ref, double floor = kLsdMagnitudeFloor);
double Lsd(const Waveform& est, const Waveform& ref, const StftConfig& cfg = {});

// Fraction of samples with |x| >= threshold.
double ClippedFraction(const Waveform& w, double threshold = 0.999);

}  // namespace ssi::audio
