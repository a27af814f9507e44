#include "ssi/degrade/distortions.h"

#include <algorithm>
#include <cmath>

#include "ssi/audio/resample.h"
#include "ssi/common/error.h"

namespace ssi::degrade {

using audio::Waveform;

Waveform ApplyLowpassColoration(const Waveform& w, int target_rate, double stopband_db) {
  w.Validate();
  Require(target_rate > 0 && target_rate < w.sample_rate,
          "lowpass target rate must be positive and below the input rate");
  const double nyquist = target_rate / 2.0;
  const std::vector<double> taps =
      audio::DesignLowpass(0.9 * nyquist, 0.2 * nyquist, w.sample_rate, stopband_db);
  Waveform filtered(audio::FilterSame(w.samples, taps), w.sample_rate);
  Waveform restored = audio::Resample(audio::Resample(filtered, target_rate), w.sample_rate);
  restored.samples.resize(w.size(), 0.0);
  return restored;
}

Waveform ApplyClipping(const Waveform& w, double eta) {
  Require(eta > 0.0 && eta < 1.0, "clipping eta must lie in (0, 1)");
  Waveform out = w;
  for (double& s : out.samples) s = std::clamp(s, -eta, eta);
  return out;
}

namespace {

size_t DiscontinuityWindow(int sample_rate, double window_ms) {
  const auto window = static_cast<size_t>(std::lround(window_ms * sample_rate / 1000.0));
  Require(window > 0, "discontinuity window is shorter than one sample");
  return window;
}

}  // namespace

std::vector<bool> DiscontinuityMask(size_t num_samples, int sample_rate, double window_ms, double zero_prob,
                                    uint64_t mask_seed) {
  Require(zero_prob >= 0.0 && zero_prob <= 1.0, "zero probability must lie in [0, 1]");
  const size_t window = DiscontinuityWindow(sample_rate, window_ms);
  Require(num_samples >= window, "signal is shorter than one discontinuity window");
  Rng rng(mask_seed);
  std::vector<bool> mask((num_samples + window - 1) / window);
  for (size_t i = 0; i < mask.size(); ++i) mask[i] = rng.Bernoulli(zero_prob);
  return mask;
}

Waveform ApplyDiscontinuity(const Waveform& w, double window_ms, double zero_prob, uint64_t mask_seed) {
  w.Validate();
  const size_t window = DiscontinuityWindow(w.sample_rate, window_ms);
  const std::vector<bool> mask = DiscontinuityMask(w.size(), w.sample_rate, window_ms, zero_prob, mask_seed);
  Waveform out = w;
  for (size_t i = 0; i < mask.size(); ++i) {
    if (!mask[i]) continue;
    const size_t start = i * window;
    std::fill(out.samples.begin() + static_cast<long>(start),
              out.samples.begin() + static_cast<long>(std::min(out.size(), start + window)), 0.0);
  }
  return out;
}

Waveform ApplyLoudness(const Waveform& w, double scale) {
  Require(std::isfinite(scale) && scale > 0.0, "loudness scale must be positive");
  Waveform out = w;
  for (double& s : out.samples) s *= scale;
  return out;
}

double SampleLoudnessScale(const SimConfig& cfg, Rng& rng) {
  return rng.Uniform(cfg.loudness_scale_min, cfg.loudness_scale_max);
}

}  // namespace ssi::degrade
