#pragma once

#include <cstddef>
#include <vector>

namespace ssi::audio {

inline constexpr int kFullBandRate = 48000;

// Mono signal. Samples are nominally in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = kFullBandRate;

  Waveform() = default;
  Waveform(std::vector<double> s, int rate) : samples(std::move(s)), sample_rate(rate) {}

  std::size_t size() const { return samples.size(); }
  bool empty() const { return samples.empty(); }
  double DurationSeconds() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }

  // Throws ValidationError on a non-positive rate or non-finite samples.
  void Validate() const;
};

double Peak(const Waveform& w);
double MeanSquare(const Waveform& w);

}  // namespace ssi::audio
