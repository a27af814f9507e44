#include "ssi/degrade/toy_corpus.h"

#include <cmath>
#include <filesystem>
#include <numbers>

#include "ssi/audio/mixing.h"
#include "ssi/audio/wav_io.h"
#include "ssi/common/error.h"
#include "ssi/degrade/manifest.h"

namespace ssi::degrade {

namespace fs = std::filesystem;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void NormalizePeak(audio::Waveform& w, double peak) {
  const double p = audio::Peak(w);
  if (p > 0.0) {
    for (double& s : w.samples) s *= peak / p;
  }
}

}  // namespace

audio::Waveform SynthSpeech(double seconds, Rng& rng, int sample_rate) {
  Require(seconds > 0.0, "clip length must be positive");
  audio::Waveform w;
  w.sample_rate = sample_rate;
  w.samples.assign(static_cast<size_t>(seconds * sample_rate), 0.0);
  const double nyquist = 0.5 * sample_rate;
  size_t pos = static_cast<size_t>(rng.Uniform(0.0, 0.05) * sample_rate);
  while (pos < w.size()) {
    const size_t len = static_cast<size_t>(rng.Uniform(0.12, 0.3) * sample_rate);
    const double f0 = rng.Uniform(100.0, 220.0);
    const double glide = rng.Uniform(-0.3, 0.3);
    const double tilt = rng.Uniform(0.8, 1.4);
    const double formant = rng.Uniform(400.0, 2500.0);
    double phase = 0.0;
    for (size_t i = 0; i < len && pos + i < w.size(); ++i) {
      const double u = static_cast<double>(i) / static_cast<double>(len);
      const double f = f0 * (1.0 + glide * u);
      phase += kTwoPi * f / sample_rate;
      const double env = std::sin(std::numbers::pi * u);
      double v = 0.0;
      for (int k = 1; k * f < 0.8 * nyquist && k <= 60; ++k) {
        const double fk = k * f;
        const double resonance = 1.0 + 2.0 * std::exp(-std::pow((fk - formant) / 300.0, 2));
        v += resonance * std::sin(k * phase) / std::pow(k, tilt);
      }
      w.samples[pos + i] += env * v;
    }
    pos += len;
    if (rng.Bernoulli(0.3)) {
      // Fricative: differenced (high-tilted) noise burst.
      const size_t flen = static_cast<size_t>(rng.Uniform(0.03, 0.08) * sample_rate);
      double prev = 0.0;
      for (size_t i = 0; i < flen && pos + i < w.size(); ++i) {
        const double u = static_cast<double>(i) / static_cast<double>(flen);
        const double n = rng.Normal();
        w.samples[pos + i] += 0.4 * std::sin(std::numbers::pi * u) * (n - prev);
        prev = n;
      }
      pos += flen;
    }
    pos += static_cast<size_t>(rng.Uniform(0.02, 0.1) * sample_rate);
  }
  NormalizePeak(w, 0.5);
  return w;
}

audio::Waveform SynthNoise(double seconds, Rng& rng, int sample_rate) {
  Require(seconds > 0.0, "clip length must be positive");
  audio::Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(static_cast<size_t>(seconds * sample_rate));
  // One-pole lowpass of white noise; pole chosen per clip for varied colour.
  const double pole = rng.Uniform(0.0, 0.98);
  const double hum = rng.Bernoulli(0.5) ? rng.Uniform(0.0, 0.5) : 0.0;
  const double hum_f = rng.Bernoulli(0.5) ? 50.0 : 60.0;
  double state = 0.0;
  for (size_t i = 0; i < w.size(); ++i) {
    state = pole * state + (1.0 - pole) * rng.Normal();
    w.samples[i] = state + hum * std::sin(kTwoPi * hum_f * static_cast<double>(i) / sample_rate);
  }
  const double rms = std::sqrt(audio::MeanSquare(w));
  if (rms > 0.0) {
    for (double& s : w.samples) s *= 0.1 / rms;
  }
  return w;
}

audio::Waveform SynthRir(double rt60_s, Rng& rng, int sample_rate) {
  Require(rt60_s > 0.0, "RT60 must be positive");
  audio::Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(static_cast<size_t>(std::min(rt60_s, 0.5) * sample_rate));
  const double decay = std::log(1000.0) / (rt60_s * sample_rate);  // -60 dB after rt60
  const size_t onset = static_cast<size_t>(0.002 * sample_rate);
  w.samples[0] = 1.0;
  for (size_t i = onset; i < w.size(); ++i) w.samples[i] = 0.3 * rng.Normal() * std::exp(-decay * i);
  return w;
}

std::string WriteToyCorpus(const std::string& dir, const ToyCorpusSpec& spec) {
  Require(spec.speech > 0, "toy corpus needs at least one speech clip");
  fs::create_directories(dir);
  CorpusManifest m;
  auto write = [&](const std::string& name, const audio::Waveform& w, SourceKind kind,
                   std::vector<ManifestEntry>& list) {
    audio::WriteWav((fs::path(dir) / name).string(), w, audio::WavSampleFormat::kFloat32);
    list.push_back({name, kind, w.DurationSeconds()});
  };
  for (int i = 0; i < spec.speech; ++i) {
    Rng rng = Rng::Derive({spec.seed, 1, static_cast<uint64_t>(i)});
    write("speech_" + std::to_string(i) + ".wav", SynthSpeech(spec.speech_seconds, rng), SourceKind::kSpeech,
          m.speech);
  }
  for (int i = 0; i < spec.noise; ++i) {
    Rng rng = Rng::Derive({spec.seed, 2, static_cast<uint64_t>(i)});
    write("noise_" + std::to_string(i) + ".wav", SynthNoise(spec.noise_seconds, rng), SourceKind::kNoise, m.noise);
  }
  for (int i = 0; i < spec.rir; ++i) {
    Rng rng = Rng::Derive({spec.seed, 3, static_cast<uint64_t>(i)});
    write("rir_" + std::to_string(i) + ".wav", SynthRir(rng.Uniform(0.15, 0.5), rng), SourceKind::kRir, m.rir);
  }
  const std::string path = (fs::path(dir) / "manifest.jsonl").string();
  WriteManifest(path, m);
  return path;
}

}  // namespace ssi::degrade
