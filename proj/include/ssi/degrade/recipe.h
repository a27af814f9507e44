#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

namespace ssi::degrade {

enum class Category { kColoration, kDiscontinuity, kLoudness };
enum class ColorationBranch { kNone, kLowpass, kClipping };

const char* ToString(Category c);
const char* ToString(ColorationBranch b);
Category CategoryFromString(const std::string& s);
ColorationBranch BranchFromString(const std::string& s);

// Everything sampled for one clip. Re-applying a recipe to the same sources
// reproduces the degraded signal bit for bit.
struct DistortionRecipe {
  int stage = 1;
  Category category = Category::kLoudness;
  ColorationBranch branch = ColorationBranch::kNone;
  int lowpass_rate = 0;
  double clip_eta = 0.0;
  uint64_t mask_seed = 0;
  double loudness_scale = 1.0;

  // Stage 2 only.
  bool reverb = false;
  int rir_index = -1;
  std::string rir_id;
  int noise_index = -1;
  std::string noise_id;
  uint64_t noise_offset = 0;
  double snr_db = 0.0;
  // Applied to the final mixture when its peak would exceed 1.
  double mix_gain = 1.0;
};

void to_json(nlohmann::json& j, const DistortionRecipe& r);
void from_json(const nlohmann::json& j, DistortionRecipe& r);

}  // namespace ssi::degrade
