#pragma once

#include <array>
#include <cstdint>

#include <json.hpp>

namespace ssi::degrade {

// Global probabilities and ranges of the distortion simulator.
struct SimConfig {
  // Stage-1 category mix; must sum to one.
  double p_coloration = 0.60;
  double p_discontinuity = 0.25;
  double p_loudness = 0.15;
  // Split of the coloration category.
  double p_lowpass_within_coloration = 0.60;
  double p_clip_within_coloration = 0.40;
  std::array<int, 4> lowpass_rates = {4000, 8000, 16000, 24000};
  // eta is drawn uniformly from this sub-range of (0, 1).
  double clip_eta_min = 0.1;
  double clip_eta_max = 0.9;
  double disc_window_ms = 20.0;
  double disc_zero_prob = 0.10;
  double loudness_scale_min = 0.1;
  double loudness_scale_max = 0.5;
  // Stage 2.
  double snr_min_db = 0.0;
  double snr_max_db = 20.0;
  double reverb_prob = 0.50;
  // Coloration lowpass: passband to 0.8, stopband from 1.0 of the target
  // Nyquist (centre 0.9), with this rejection.
  double lowpass_stopband_db = 60.0;
  uint64_t seed = 0;

  void Validate() const;
};

void to_json(nlohmann::json& j, const SimConfig& c);
void from_json(const nlohmann::json& j, SimConfig& c);

}  // namespace ssi::degrade
