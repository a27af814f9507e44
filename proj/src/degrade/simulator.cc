#include "ssi/degrade/simulator.h"

#include <algorithm>
#include <cmath>

#include "ssi/audio/mixing.h"
#include "ssi/common/error.h"
#include "ssi/degrade/distortions.h"

namespace ssi::degrade {

using audio::Waveform;

DistortionRecipe SampleStage1Recipe(const SimConfig& cfg, Rng& rng) {
  DistortionRecipe r;
  r.stage = 1;
  const double u = rng.Uniform();
  if (u < cfg.p_coloration) {
    r.category = Category::kColoration;
    if (rng.Bernoulli(cfg.p_lowpass_within_coloration)) {
      r.branch = ColorationBranch::kLowpass;
      r.lowpass_rate = cfg.lowpass_rates[rng.UniformInt(cfg.lowpass_rates.size())];
    } else {
      r.branch = ColorationBranch::kClipping;
      r.clip_eta = rng.Uniform(cfg.clip_eta_min, cfg.clip_eta_max);
    }
  } else if (u < cfg.p_coloration + cfg.p_discontinuity) {
    r.category = Category::kDiscontinuity;
    r.mask_seed = rng.NextU64();
  } else {
    r.category = Category::kLoudness;
    r.loudness_scale = SampleLoudnessScale(cfg, rng);
  }
  return r;
}

Waveform ApplyStage1(const Waveform& clean, const DistortionRecipe& recipe, const SimConfig& cfg) {
  switch (recipe.category) {
    case Category::kColoration:
      if (recipe.branch == ColorationBranch::kLowpass) {
        return ApplyLowpassColoration(clean, recipe.lowpass_rate, cfg.lowpass_stopband_db);
      }
      Require(recipe.branch == ColorationBranch::kClipping, "coloration recipe without a branch");
      return ApplyClipping(clean, recipe.clip_eta);
    case Category::kDiscontinuity:
      return ApplyDiscontinuity(clean, cfg.disc_window_ms, cfg.disc_zero_prob, recipe.mask_seed);
    case Category::kLoudness:
      return ApplyLoudness(clean, recipe.loudness_scale);
  }
  throw ValidationError("unknown distortion category");
}

SimResult SimulateStage1(const Waveform& clean, const SimConfig& cfg, Rng& rng) {
  cfg.Validate();
  clean.Validate();
  SimResult out;
  out.recipe = SampleStage1Recipe(cfg, rng);
  out.input = ApplyStage1(clean, out.recipe, cfg);
  out.target = clean;
  return out;
}

DistortionRecipe SampleStage2Recipe(const SimConfig& cfg, Rng& rng, const AudioBank& noise_bank,
                                    const AudioBank& rir_bank) {
  Require(!noise_bank.empty(), "stage-2 simulation needs a non-empty noise bank");
  Require(!rir_bank.empty(), "stage-2 simulation needs a non-empty RIR bank");
  DistortionRecipe r = SampleStage1Recipe(cfg, rng);
  r.stage = 2;
  r.reverb = rng.Bernoulli(cfg.reverb_prob);
  if (r.reverb) {
    r.rir_index = static_cast<int>(rng.UniformInt(rir_bank.size()));
    r.rir_id = rir_bank.ids[r.rir_index];
  }
  r.noise_index = static_cast<int>(rng.UniformInt(noise_bank.size()));
  r.noise_id = noise_bank.ids[r.noise_index];
  r.noise_offset = rng.UniformInt(noise_bank.clips[r.noise_index].size());
  r.snr_db = rng.Uniform(cfg.snr_min_db, cfg.snr_max_db);
  return r;
}

namespace {

constexpr int kStage2Draws = 8;
constexpr int kCropDraws = 16;

Waveform DegradedSpeech(const Waveform& clean, const DistortionRecipe& recipe, const SimConfig& cfg,
                        const AudioBank& rir_bank) {
  Waveform speech = ApplyStage1(clean, recipe, cfg);
  if (recipe.reverb) {
    Require(recipe.rir_index >= 0 && static_cast<size_t>(recipe.rir_index) < rir_bank.size(),
            "recipe RIR index is out of range for the RIR bank");
    speech = audio::ConvolveRir(speech, rir_bank.clips[recipe.rir_index]);
  }
  return speech;
}

SimResult MixStage2(const Waveform& clean, Waveform speech, const DistortionRecipe& recipe,
                    const AudioBank& noise_bank) {
  Require(recipe.noise_index >= 0 && static_cast<size_t>(recipe.noise_index) < noise_bank.size(),
          "recipe noise index is out of range for the noise bank");
  SimResult out;
  out.recipe = recipe;
  out.target = clean;
  audio::MixResult mix =
      audio::MixAtSnr(speech, noise_bank.clips[recipe.noise_index], recipe.snr_db, recipe.noise_offset);
  out.input = std::move(mix.mixture);
  if (recipe.mix_gain != 1.0) {
    for (double& s : out.input.samples) s *= recipe.mix_gain;
  }
  out.speech_component = std::move(speech);
  out.noise_component = std::move(mix.scaled_noise);
  return out;
}

}  // namespace

SimResult ApplyStage2(const Waveform& clean, const DistortionRecipe& recipe, const SimConfig& cfg,
                      const AudioBank& noise_bank, const AudioBank& rir_bank) {
  Require(recipe.stage == 2, "not a stage-2 recipe");
  return MixStage2(clean, DegradedSpeech(clean, recipe, cfg, rir_bank), recipe, noise_bank);
}

SimResult SimulateStage2(const Waveform& clean, const SimConfig& cfg, Rng& rng,
                         const AudioBank& noise_bank, const AudioBank& rir_bank) {
  cfg.Validate();
  clean.Validate();
  DistortionRecipe recipe;
  Waveform speech;
  for (int draw = 0;; ++draw) {
    recipe = SampleStage2Recipe(cfg, rng, noise_bank, rir_bank);
    speech = DegradedSpeech(clean, recipe, cfg, rir_bank);
    if (audio::HasActiveFrames(speech) || draw + 1 == kStage2Draws) break;
  }
  SimResult out = MixStage2(clean, std::move(speech), recipe, noise_bank);
  const double peak = audio::Peak(out.input);
  if (peak > 1.0) {
    // Recorded in the recipe so replay reproduces the scaled mixture.
    out.recipe.mix_gain = 1.0 / peak;
    for (double& s : out.input.samples) s *= out.recipe.mix_gain;
  }
  return out;
}

size_t PickCropOffset(const Waveform& source, size_t length, Rng& rng) {
  Require(length > 0 && length <= source.size(), "crop length must fit inside the source clip");
  const size_t span = source.size() - length + 1;
  for (int draw = 0; draw < kCropDraws; ++draw) {
    const size_t offset = rng.UniformInt(span);
    Waveform crop;
    crop.sample_rate = source.sample_rate;
    crop.samples.assign(source.samples.begin() + static_cast<long>(offset),
                        source.samples.begin() + static_cast<long>(offset + length));
    if (audio::HasActiveFrames(crop)) return offset;
  }
  size_t peak = 0;
  for (size_t i = 1; i < source.size(); ++i) {
    if (std::abs(source.samples[i]) > std::abs(source.samples[peak])) peak = i;
  }
  return std::min(span - 1, peak > length / 2 ? peak - length / 2 : 0);
}

SimResult ApplyRecipe(const Waveform& clean, const DistortionRecipe& recipe, const SimConfig& cfg,
                      const AudioBank& noise_bank, const AudioBank& rir_bank) {
  if (recipe.stage == 2) return ApplyStage2(clean, recipe, cfg, noise_bank, rir_bank);
  SimResult out;
  out.recipe = recipe;
  out.input = ApplyStage1(clean, recipe, cfg);
  out.target = clean;
  return out;
}

}  // namespace ssi::degrade
