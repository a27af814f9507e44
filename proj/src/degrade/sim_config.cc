#include "ssi/degrade/sim_config.h"

#include <cmath>

#include "ssi/common/error.h"

namespace ssi::degrade {

namespace {

bool IsProbability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

void SimConfig::Validate() const {
  Require(IsProbability(p_coloration) && IsProbability(p_discontinuity) && IsProbability(p_loudness),
          "category probabilities must lie in [0, 1]");
  Require(std::abs(p_coloration + p_discontinuity + p_loudness - 1.0) < 1e-9,
          "category probabilities must sum to 1");
  Require(IsProbability(p_lowpass_within_coloration) && IsProbability(p_clip_within_coloration),
          "coloration branch probabilities must lie in [0, 1]");
  Require(std::abs(p_lowpass_within_coloration + p_clip_within_coloration - 1.0) < 1e-9,
          "coloration branch probabilities must sum to 1");
  for (int r : lowpass_rates) Require(r > 0 && r < 48000, "lowpass rates must lie in (0, 48000)");
  Require(clip_eta_min > 0.0 && clip_eta_max < 1.0 && clip_eta_min <= clip_eta_max,
          "clipping eta range must lie inside (0, 1)");
  Require(disc_window_ms > 0.0, "discontinuity window must be positive");
  Require(IsProbability(disc_zero_prob), "discontinuity probability must lie in [0, 1]");
  Require(loudness_scale_min > 0.0 && loudness_scale_min <= loudness_scale_max,
          "loudness scale range is invalid");
  Require(snr_min_db <= snr_max_db, "SNR range is invalid");
  Require(IsProbability(reverb_prob), "reverb probability must lie in [0, 1]");
  Require(lowpass_stopband_db > 0.0, "lowpass stopband must be positive");
}

void to_json(nlohmann::json& j, const SimConfig& c) {
  j = nlohmann::json{{"p_coloration", c.p_coloration},
                     {"p_discontinuity", c.p_discontinuity},
                     {"p_loudness", c.p_loudness},
                     {"p_lowpass_within_coloration", c.p_lowpass_within_coloration},
                     {"p_clip_within_coloration", c.p_clip_within_coloration},
                     {"lowpass_rates", c.lowpass_rates},
                     {"clip_eta_min", c.clip_eta_min},
                     {"clip_eta_max", c.clip_eta_max},
                     {"disc_window_ms", c.disc_window_ms},
                     {"disc_zero_prob", c.disc_zero_prob},
                     {"loudness_scale_min", c.loudness_scale_min},
                     {"loudness_scale_max", c.loudness_scale_max},
                     {"snr_min_db", c.snr_min_db},
                     {"snr_max_db", c.snr_max_db},
                     {"reverb_prob", c.reverb_prob},
                     {"lowpass_stopband_db", c.lowpass_stopband_db},
                     {"seed", c.seed}};
}

void from_json(const nlohmann::json& j, SimConfig& c) {
  SimConfig d;
  c.p_coloration = j.value("p_coloration", d.p_coloration);
  c.p_discontinuity = j.value("p_discontinuity", d.p_discontinuity);
  c.p_loudness = j.value("p_loudness", d.p_loudness);
  c.p_lowpass_within_coloration = j.value("p_lowpass_within_coloration", d.p_lowpass_within_coloration);
  c.p_clip_within_coloration = j.value("p_clip_within_coloration", d.p_clip_within_coloration);
  c.lowpass_rates = j.value("lowpass_rates", d.lowpass_rates);
  c.clip_eta_min = j.value("clip_eta_min", d.clip_eta_min);
  c.clip_eta_max = j.value("clip_eta_max", d.clip_eta_max);
  c.disc_window_ms = j.value("disc_window_ms", d.disc_window_ms);
  c.disc_zero_prob = j.value("disc_zero_prob", d.disc_zero_prob);
  c.loudness_scale_min = j.value("loudness_scale_min", d.loudness_scale_min);
  c.loudness_scale_max = j.value("loudness_scale_max", d.loudness_scale_max);
  c.snr_min_db = j.value("snr_min_db", d.snr_min_db);
  c.snr_max_db = j.value("snr_max_db", d.snr_max_db);
  c.reverb_prob = j.value("reverb_prob", d.reverb_prob);
  c.lowpass_stopband_db = j.value("lowpass_stopband_db", d.lowpass_stopband_db);
  c.seed = j.value("seed", d.seed);
}

}  // namespace ssi::degrade
