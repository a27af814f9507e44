#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "ssi/audio/waveform.h"

namespace ssi::audio {

// Frames used for the active-power measurement.
inline constexpr double kActivityFrameMs = 20.0;
// Frames whose RMS is below this level (dBFS) do not count as active.
inline constexpr double kActivityFloorDb = -50.0;

// Full linear convolution via FFT; length a.size() + b.size() - 1.
std::vector<double> FftConvolve(std::span<const double> a, std::span<const double> b);

// Reverberates `w` with `rir`: full convolution truncated to len(w), then
// rescaled so the output peak equals the input peak.
Waveform ConvolveRir(const Waveform& w, const Waveform& rir);

// Mean square over 20 ms frames whose RMS exceeds -50 dBFS. Throws
// ValidationError when no frame is active.
double ActivePower(const Waveform& w);
bool HasActiveFrames(const Waveform& w);

// Noise looped from `offset` (mod noise length) to exactly `length` samples.
Waveform TileNoise(const Waveform& noise, std::size_t length, std::size_t offset = 0);

struct MixResult {
  Waveform mixture;
  Waveform scaled_noise;
  double noise_gain = 0.0;
};

// Scales the (tiled) noise so that 10 log10(ActivePower(speech) /
// MeanSquare(scaled noise)) == snr_db and returns speech + scaled noise.
MixResult MixAtSnr(const Waveform& speech, const Waveform& noise, double snr_db,
                   std::size_t noise_offset = 0);

// Measured SNR in dB using the same power definitions as MixAtSnr.
double MeasureSnrDb(const Waveform& speech, const Waveform& noise);

}  // namespace ssi::audio
