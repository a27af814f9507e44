#include "ssi/train/train_config.h"

#include <fstream>

#include "ssi/common/error.h"

namespace ssi::train {

void TrainConfig::Validate() const {
  Require(stage == 1 || stage == 2, "stage must be 1 or 2");
  if (stage == 2) {
    Require(models::IsCascade(model_kind), "stage 2 trains a cascade model kind");
    Require(!init_ckpt.empty(), "stage 2 needs a stage-1 checkpoint (init_ckpt)");
  } else {
    Require(!models::IsCascade(model_kind), "stage 1 trains a single network, not a cascade");
  }
  model.Validate();
  sim.Validate();
  disc.Validate();
  loss.Validate();
  Require(lr0 > 0.0, "lr0 must be positive");
  Require(patience >= 1, "patience must be at least 1");
  Require(batch_size >= 1, "batch_size must be at least 1");
  Require(epochs >= 1, "epochs must be at least 1");
  Require(max_steps >= 0, "max_steps must be non-negative");
  Require(segment_seconds > 0.0, "segment_seconds must be positive");
  Require(val_size >= 0, "val_size must be non-negative");
}

void to_json(nlohmann::json& j, const TrainConfig& c) {
  j = nlohmann::json{{"stage", c.stage},
                     {"model_kind", models::ToString(c.model_kind)},
                     {"model", c.model},
                     {"sim", c.sim},
                     {"disc", c.disc},
                     {"loss", c.loss},
                     {"lr0", c.lr0},
                     {"beta1", c.beta1},
                     {"beta2", c.beta2},
                     {"clip_norm", c.clip_norm},
                     {"patience", c.patience},
                     {"batch_size", c.batch_size},
                     {"epochs", c.epochs},
                     {"max_steps", c.max_steps},
                     {"segment_seconds", c.segment_seconds},
                     {"seed", c.seed},
                     {"dynamic_mixing", c.dynamic_mixing},
                     {"manifest", c.manifest},
                     {"val_manifest", c.val_manifest},
                     {"val_size", c.val_size},
                     {"checkpoint_dir", c.checkpoint_dir},
                     {"init_ckpt", c.init_ckpt},
                     {"freeze_stage1", c.freeze_stage1}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
  c = TrainConfig{};
  c.stage = j.value("stage", c.stage);
  if (c.stage == 2) c.model_kind = models::ModelKind::kCascadeSDccsn;
  if (j.contains("model_kind")) c.model_kind = models::ModelKindFromString(j.at("model_kind").get<std::string>());
  if (j.contains("model")) j.at("model").get_to(c.model);
  if (j.contains("sim")) j.at("sim").get_to(c.sim);
  if (j.contains("disc")) j.at("disc").get_to(c.disc);
  if (j.contains("loss")) j.at("loss").get_to(c.loss);
  c.lr0 = j.value("lr0", c.lr0);
  c.beta1 = j.value("beta1", c.beta1);
  c.beta2 = j.value("beta2", c.beta2);
  c.clip_norm = j.value("clip_norm", c.clip_norm);
  c.patience = j.value("patience", c.patience);
  c.batch_size = j.value("batch_size", c.batch_size);
  c.epochs = j.value("epochs", c.epochs);
  c.max_steps = j.value("max_steps", c.max_steps);
  c.segment_seconds = j.value("segment_seconds", c.segment_seconds);
  c.seed = j.value("seed", c.seed);
  c.dynamic_mixing = j.value("dynamic_mixing", c.dynamic_mixing);
  c.manifest = j.value("manifest", c.manifest);
  c.val_manifest = j.value("val_manifest", c.val_manifest);
  c.val_size = j.value("val_size", c.val_size);
  c.checkpoint_dir = j.value("checkpoint_dir", c.checkpoint_dir);
  c.init_ckpt = j.value("init_ckpt", c.init_ckpt);
  c.freeze_stage1 = j.value("freeze_stage1", c.freeze_stage1);
}

TrainConfig LoadTrainConfig(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open training config: " + path);
  try {
    return nlohmann::json::parse(f).get<TrainConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed training config " + path + ": " + e.what());
  }
}

}  // namespace ssi::train
