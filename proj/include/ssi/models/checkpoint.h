#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssi/models/networks.h"

namespace ssi::models {

// Checkpoint container, all integers little-endian:
//   bytes 0..7   magic "SSICKPT\0"
//   bytes 8..11  format version (u32, currently 1)
//   bytes 12..19 header length H (u64)
//   H bytes      UTF-8 JSON header: {"kind", "stage", "config", "extra",
//                "params": [{"name", "shape", "offset"}]}; offset counts
//                float64 values from the start of the data block
//   rest         parameter data, IEEE-754 float64 little-endian
struct StoredParam {
  nn::Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  ModelKind kind = ModelKind::kGateDccrn;
  int stage = 1;
  ModelConfig config;
  nlohmann::json extra = nlohmann::json::object();
  std::map<std::string, StoredParam> params;
};

constexpr uint32_t kCheckpointVersion = 1;

Checkpoint MakeCheckpoint(const SpectralModel& model, int stage, nlohmann::json extra = nlohmann::json::object());
void SaveCheckpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint LoadCheckpoint(const std::string& path);

// Copies stored values into the module's parameters. Every parameter of the
// module must be present under `prefix + name` with a matching shape.
void LoadParameters(const nn::Module& module, const Checkpoint& ckpt, const std::string& prefix = "");
// Rebuilds the model described by the checkpoint and loads its weights.
std::unique_ptr<SpectralModel> ModelFromCheckpoint(const Checkpoint& ckpt);

}  // namespace ssi::models
