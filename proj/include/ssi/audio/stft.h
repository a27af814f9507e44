#pragma once

#include <complex>
#include <vector>

#include "ssi/audio/waveform.h"

namespace ssi::audio {

enum class WindowType { kSqrtHann, kHann, kRect };

// Analysis/synthesis framing. A 20 ms frame at 48 kHz is 960 samples and is
// zero-padded to fft_size before the transform.
struct StftConfig {
  double frame_ms = 20.0;
  double hop_ms = 10.0;
  int fft_size = 1024;
  WindowType window = WindowType::kSqrtHann;

  int FrameLength(int sample_rate) const;
  int HopLength(int sample_rate) const;
  int Bins() const { return fft_size / 2 + 1; }
  // Frame count for a signal of `num_samples`: one frame per hop-aligned
  // position that fits entirely inside the signal.
  int NumFrames(int num_samples, int sample_rate) const;
  void Validate(int sample_rate) const;
};

// Periodic window of the given length.
std::vector<double> MakeWindow(WindowType type, int length);

// values are stored frame-major: values[frame * bins + bin].
struct ComplexSpectrogram {
  int frames = 0;
  int bins = 0;
  std::vector<std::complex<double>> values;
  StftConfig config;
  int sample_rate = kFullBandRate;

  std::complex<double>& at(int frame, int bin) { return values[static_cast<size_t>(frame) * bins + bin]; }
  const std::complex<double>& at(int frame, int bin) const {
    return values[static_cast<size_t>(frame) * bins + bin];
  }
};

ComplexSpectrogram Stft(const Waveform& w, const StftConfig& config = {});

// Weighted overlap-add with the synthesis window, normalized by the summed
// squared window. Samples where that sum vanishes are set to zero. Output
// length is (frames - 1) * hop + frame_length.
Waveform Istft(const ComplexSpectrogram& s);

}  // namespace ssi::audio
