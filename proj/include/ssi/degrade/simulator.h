#pragma once

#include <string>
#include <vector>

#include "ssi/audio/waveform.h"
#include "ssi/common/rng.h"
#include "ssi/degrade/recipe.h"
#include "ssi/degrade/sim_config.h"

namespace ssi::degrade {

struct AudioBank {
  std::vector<std::string> ids;
  std::vector<audio::Waveform> clips;

  bool empty() const { return clips.empty(); }
  std::size_t size() const { return clips.size(); }
  void Add(std::string id, audio::Waveform w) {
    ids.push_back(std::move(id));
    clips.push_back(std::move(w));
  }
};

struct SimResult {
  audio::Waveform input;
  audio::Waveform target;
  DistortionRecipe recipe;
  // Stage 2 bookkeeping, before mix_gain: input == mix_gain * (speech + noise).
  audio::Waveform speech_component;
  audio::Waveform noise_component;
};

DistortionRecipe SampleStage1Recipe(const SimConfig& cfg, Rng& rng);
audio::Waveform ApplyStage1(const audio::Waveform& clean, const DistortionRecipe& recipe,
                            const SimConfig& cfg);
// Exactly one stage-1 category per clip; target is the clean input.
SimResult SimulateStage1(const audio::Waveform& clean, const SimConfig& cfg, Rng& rng);

DistortionRecipe SampleStage2Recipe(const SimConfig& cfg, Rng& rng, const AudioBank& noise_bank,
                                    const AudioBank& rir_bank);
SimResult ApplyStage2(const audio::Waveform& clean, const DistortionRecipe& recipe,
                      const SimConfig& cfg, const AudioBank& noise_bank, const AudioBank& rir_bank);
// Stage-1 degradation, then reverb with probability reverb_prob, then noise at
// an SNR drawn from [snr_min_db, snr_max_db]. The target is the dry clean clip.
// A recipe whose degraded speech has no active frame is redrawn (up to 8
// draws).
SimResult SimulateStage2(const audio::Waveform& clean, const SimConfig& cfg, Rng& rng,
                         const AudioBank& noise_bank, const AudioBank& rir_bank);

// Offset of a `length`-sample crop with at least one active frame; up to 16
// random draws, then a crop centred on the source peak.
size_t PickCropOffset(const audio::Waveform& source, size_t length, Rng& rng);

// Dispatches on recipe.stage.
SimResult ApplyRecipe(const audio::Waveform& clean, const DistortionRecipe& recipe,
                      const SimConfig& cfg, const AudioBank& noise_bank, const AudioBank& rir_bank);

}  // namespace ssi::degrade
