#pragma once

#include <cstdint>
#include <vector>

#include "ssi/audio/waveform.h"
#include "ssi/common/rng.h"
#include "ssi/degrade/sim_config.h"

namespace ssi::degrade {

// Bandwidth limitation: linear-phase FIR lowpass at 0.9 x the target Nyquist,
// downsample to `target_rate`, upsample back. Output length equals input length.
audio::Waveform ApplyLowpassColoration(const audio::Waveform& w, int target_rate,
                                       double stopband_db = 60.0);

// out[i] = clamp(in[i], -eta, eta), eta in (0, 1).
audio::Waveform ApplyClipping(const audio::Waveform& w, double eta);

// Partitions the clip into non-overlapping windows aligned to sample 0 (the
// last one may be partial) and zeroes each with probability `zero_prob`. The
// mask is a pure function of `mask_seed`.
audio::Waveform ApplyDiscontinuity(const audio::Waveform& w, double window_ms, double zero_prob,
                                   uint64_t mask_seed);

// Per-window zero flags used by ApplyDiscontinuity for a clip of
// `num_samples` samples.
std::vector<bool> DiscontinuityMask(size_t num_samples, int sample_rate, double window_ms, double zero_prob,
                                    uint64_t mask_seed);

audio::Waveform ApplyLoudness(const audio::Waveform& w, double scale);

double SampleLoudnessScale(const SimConfig& cfg, Rng& rng);

}  // namespace ssi::degrade
