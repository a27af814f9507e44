#include "ssi/audio/stft.h"

#include <cmath>
#include <numbers>
#include <string>

#include "ssi/audio/fft.h"
#include "ssi/common/error.h"

namespace ssi::audio {

namespace {

int MsToSamples(double ms, int rate, const char* what) {
  const double exact = ms * rate / 1000.0;
  const double rounded = std::round(exact);
  Require(std::abs(exact - rounded) < 1e-9,
          std::string(what) + " is not an integer number of samples at this sample rate");
  return static_cast<int>(rounded);
}

constexpr double kNormFloor = 1e-10;

}  // namespace

int StftConfig::FrameLength(int sample_rate) const {
  return MsToSamples(frame_ms, sample_rate, "frame length");
}

int StftConfig::HopLength(int sample_rate) const {
  return MsToSamples(hop_ms, sample_rate, "hop length");
}

int StftConfig::NumFrames(int num_samples, int sample_rate) const {
  const int frame = FrameLength(sample_rate);
  const int hop = HopLength(sample_rate);
  if (num_samples < frame) return 0;
  return 1 + (num_samples - frame) / hop;
}

void StftConfig::Validate(int sample_rate) const {
  Require(sample_rate > 0, "sample rate must be positive");
  Require(frame_ms > 0 && hop_ms > 0, "frame and hop must be positive");
  Require(hop_ms <= frame_ms, "hop must not exceed the frame length");
  const int frame = FrameLength(sample_rate);
  HopLength(sample_rate);
  Require(fft_size >= frame, "fft_size must be at least the frame length");
}

std::vector<double> MakeWindow(WindowType type, int length) {
  std::vector<double> w(length, 1.0);
  if (type == WindowType::kRect) return w;
  for (int n = 0; n < length; ++n) {
    const double hann = 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * n / length);
    w[n] = type == WindowType::kHann ? hann : std::sqrt(hann);
  }
  return w;
}

ComplexSpectrogram Stft(const Waveform& w, const StftConfig& config) {
  w.Validate();
  Require(!w.empty(), "cannot take the STFT of an empty signal");
  config.Validate(w.sample_rate);
  const int frame = config.FrameLength(w.sample_rate);
  const int hop = config.HopLength(w.sample_rate);
  const int frames = config.NumFrames(static_cast<int>(w.size()), w.sample_rate);
  Require(frames > 0, "signal is shorter than one analysis frame");

  const std::vector<double> window = MakeWindow(config.window, frame);
  RealFft fft(config.fft_size);
  ComplexSpectrogram s;
  s.frames = frames;
  s.bins = config.Bins();
  s.config = config;
  s.sample_rate = w.sample_rate;
  s.values.resize(static_cast<size_t>(frames) * s.bins);
  std::vector<double> buf(config.fft_size, 0.0);
  for (int t = 0; t < frames; ++t) {
    const size_t start = static_cast<size_t>(t) * hop;
    for (int n = 0; n < frame; ++n) buf[n] = w.samples[start + n] * window[n];
    fft.Forward(buf, std::span(s.values).subspan(static_cast<size_t>(t) * s.bins, s.bins));
  }
  return s;
}

Waveform Istft(const ComplexSpectrogram& s) {
  s.config.Validate(s.sample_rate);
  Require(s.frames > 0, "cannot invert an empty spectrogram");
  Require(s.bins == s.config.Bins(), "spectrogram bins do not match fft_size");
  Require(s.values.size() == static_cast<size_t>(s.frames) * s.bins, "spectrogram storage size mismatch");
  for (const auto& v : s.values) {
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
      throw ValidationError("spectrogram contains non-finite values");
    }
  }
  const int frame = s.config.FrameLength(s.sample_rate);
  const int hop = s.config.HopLength(s.sample_rate);
  const size_t length = static_cast<size_t>(s.frames - 1) * hop + frame;
  const std::vector<double> window = MakeWindow(s.config.window, frame);
  RealFft fft(s.config.fft_size);
  std::vector<double> out(length, 0.0), norm(length, 0.0), buf(s.config.fft_size);
  const double scale = 1.0 / s.config.fft_size;
  for (int t = 0; t < s.frames; ++t) {
    fft.Inverse(std::span(s.values).subspan(static_cast<size_t>(t) * s.bins, s.bins), buf);
    const size_t start = static_cast<size_t>(t) * hop;
    for (int n = 0; n < frame; ++n) {
      out[start + n] += buf[n] * scale * window[n];
      norm[start + n] += window[n] * window[n];
    }
  }
  for (size_t i = 0; i < length; ++i) out[i] = norm[i] > kNormFloor ? out[i] / norm[i] : 0.0;
  return Waveform(std::move(out), s.sample_rate);
}

}  // namespace ssi::audio
