#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "ssi/degrade/sim_config.h"
#include "ssi/losses/composite.h"
#include "ssi/models/config.h"

namespace ssi::train {

struct TrainConfig {
  int stage = 1;
  // Stage 1 trains a single network (normally gate_dccrn); stage 2 trains
  // the second half of a cascade kind.
  models::ModelKind model_kind = models::ModelKind::kGateDccrn;
  models::ModelConfig model;
  degrade::SimConfig sim;
  losses::DiscriminatorConfig disc;
  losses::LossWeights loss;

  double lr0 = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double clip_norm = 5.0;
  int patience = 2;
  int batch_size = 4;
  int epochs = 10;
  int64_t max_steps = 0;  // 0: no limit
  double segment_seconds = 2.0;
  uint64_t seed = 0;
  bool dynamic_mixing = true;

  std::string manifest;
  std::string val_manifest;  // empty: validate on the training speech
  int val_size = 16;
  std::string checkpoint_dir = "checkpoints";
  std::string init_ckpt;  // stage 2: stage-1 checkpoint
  bool freeze_stage1 = true;

  void Validate() const;
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);
TrainConfig LoadTrainConfig(const std::string& path);

}  // namespace ssi::train
