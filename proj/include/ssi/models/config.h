#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssi/audio/stft.h"
#include "ssi/nn/complex.h"
#include "ssi/nn/stcm.h"

namespace ssi::models {

enum class ModelKind {
  kDccrn,
  kGateDccrn,
  kSDccrn,
  kSDccsn,
  kCascadeSDccrn,  // GateDCCRN followed by S-DCCRN
  kCascadeSDccsn,  // GateDCCRN followed by S-DCCSN
};

std::string ToString(ModelKind k);
ModelKind ModelKindFromString(const std::string& s);
bool IsCascade(ModelKind k);

// Architecture hyperparameters. Channel lists count complex channels as
// real + imaginary, so each part of a layer gets half of the listed value.
struct ModelConfig {
  int sample_rate = 48000;
  audio::StftConfig stft;

  // DCCRN / GateDCCRN.
  std::vector<int64_t> dccrn_channels = {16, 32, 64, 128, 256, 256};
  int kernel_f = 5;
  int kernel_t = 2;
  int stride_f = 2;
  int lstm_layers = 2;
  int64_t lstm_hidden = 256;

  // S-DCCRN / S-DCCSN.
  std::vector<int64_t> sdccsn_channels = {64, 64, 64, 64, 128, 128};
  int64_t ced_cfd_channels = 32;
  int64_t dense_channels = 32;
  int dense_depth = 5;
  int dense_kernel_f = 3;
  int dense_kernel_t = 2;
  int sub_bands = 4;
  int sdccrn_lstm_layers = 2;
  int64_t sdccrn_lstm_hidden = 256;
  int64_t stcm_hidden = 64;
  int stcm_kernel = 3;
  std::vector<int> stcm_dilations = {1, 2};
  int stcm_blocks = 24;

  void Validate() const;
  // Narrow variant of every network for tests and quick experiments.
  static ModelConfig Tiny();
  // Number of frequency bins the networks see: the STFT bins minus Nyquist.
  int64_t NetworkBins() const { return stft.fft_size / 2; }
  nn::ConvSpec UNetSpec() const;
  nn::StcmConfig Stcm() const;
};

void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace ssi::models
