#pragma once

#include <cstdint>
#include <string>

#include "ssi/audio/waveform.h"
#include "ssi/common/rng.h"

namespace ssi::degrade {

// Synthetic speech-like clip: harmonic "syllables" with a gliding pitch and
// spectral tilt, separated by short pauses, plus noise-burst fricatives.
// Peak 0.5.
audio::Waveform SynthSpeech(double seconds, Rng& rng, int sample_rate = audio::kFullBandRate);
// Stationary coloured noise with an optional mains hum. RMS 0.1.
audio::Waveform SynthNoise(double seconds, Rng& rng, int sample_rate = audio::kFullBandRate);
// Exponentially decaying noise tail after a unit direct-path impulse.
audio::Waveform SynthRir(double rt60_s, Rng& rng, int sample_rate = audio::kFullBandRate);

struct ToyCorpusSpec {
  int speech = 8;
  int noise = 4;
  int rir = 4;
  double speech_seconds = 1.0;
  double noise_seconds = 2.0;
  uint64_t seed = 0;
};

// Writes float32 WAVs plus manifest.jsonl into `dir` (created if missing).
// Returns the manifest path.
std::string WriteToyCorpus(const std::string& dir, const ToyCorpusSpec& spec);

}  // namespace ssi::degrade
