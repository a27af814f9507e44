#pragma once

#include <span>
#include <vector>

#include "ssi/audio/waveform.h"

namespace ssi::audio {

// Kaiser-windowed sinc lowpass. `cutoff_hz` is the -6 dB point, the
// transition band is centred on it. The tap count is odd so the filter has an
// integer group delay of (taps - 1) / 2. Taps sum to `gain`.
std::vector<double> DesignLowpass(double cutoff_hz, double transition_hz, double sample_rate,
                                  double stopband_db, double gain = 1.0);

// Zero-phase ("same" mode) FIR filtering: output[i] aligns with input[i].
std::vector<double> FilterSame(std::span<const double> x, std::span<const double> taps);

// Rational polyphase resampler. The anti-alias/anti-image filter passes up
// to 0.9 of the lower Nyquist and reaches >= 80 dB rejection at that Nyquist.
// Output length is ceil(len * target / source).
Waveform Resample(const Waveform& w, int target_rate);

}  // namespace ssi::audio
