#pragma once

#include <json.hpp>

#include "ssi/audio/stft.h"
#include "ssi/losses/discriminators.h"
#include "ssi/losses/losses.h"

namespace ssi::losses {

struct Stage1Weights {
  double si_snr = 1.0;
  double plc = 10.0;
  double adv = 15.0;
  double feature_matching = 0.0;  // 0 disables feature matching
};

struct Stage2Weights {
  double si_snr = 1.0;
  double plc = 1.0;
  double mag = 1.0;
};

struct LossWeights {
  Stage1Weights stage1;
  Stage2Weights stage2;
  double plc_exponent = kPlcExponent;

  void Validate() const;
};

void to_json(nlohmann::json& j, const LossWeights& w);
void from_json(const nlohmann::json& j, LossWeights& w);

// Spectral front end used by the spectral loss terms.
struct SpectralSetup {
  audio::StftConfig stft;
  int sample_rate = audio::kFullBandRate;
};

struct Stage1Terms {
  nn::Tensor si_snr, plc, adv, feature_matching, total;
};

struct Stage2Terms {
  nn::Tensor si_snr, plc, mag, total;
};

// L = w_si * SI-SNR + w_plc * PLC + w_adv * LSGAN-gen (+ w_fm * FM). Waves are
// [N, L]; spectra come from the STFT of the waves. `disc` may be null when
// the adversarial and feature-matching weights are zero.
Stage1Terms Stage1Loss(const nn::Tensor& est, const nn::Tensor& ref, const MultiDiscriminator* disc,
                       const LossWeights& w, const SpectralSetup& s);

// L = w_si * SI-SNR + w_plc * PLC + w_mag * magnitude MSE.
Stage2Terms Stage2Loss(const nn::Tensor& est, const nn::Tensor& ref, const LossWeights& w, const SpectralSetup& s);

}  // namespace ssi::losses
