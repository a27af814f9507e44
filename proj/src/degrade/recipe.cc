#include "ssi/degrade/recipe.h"

#include "ssi/common/error.h"

namespace ssi::degrade {

const char* ToString(Category c) {
  switch (c) {
    case Category::kColoration: return "coloration";
    case Category::kDiscontinuity: return "discontinuity";
    case Category::kLoudness: return "loudness";
  }
  return "?";
}

const char* ToString(ColorationBranch b) {
  switch (b) {
    case ColorationBranch::kNone: return "none";
    case ColorationBranch::kLowpass: return "lowpass";
    case ColorationBranch::kClipping: return "clipping";
  }
  return "?";
}

Category CategoryFromString(const std::string& s) {
  if (s == "coloration") return Category::kColoration;
  if (s == "discontinuity") return Category::kDiscontinuity;
  if (s == "loudness") return Category::kLoudness;
  throw ValidationError("unknown distortion category: " + s);
}

ColorationBranch BranchFromString(const std::string& s) {
  if (s == "none") return ColorationBranch::kNone;
  if (s == "lowpass") return ColorationBranch::kLowpass;
  if (s == "clipping") return ColorationBranch::kClipping;
  throw ValidationError("unknown coloration branch: " + s);
}

void to_json(nlohmann::json& j, const DistortionRecipe& r) {
  j = nlohmann::json{{"stage", r.stage},
                     {"category", ToString(r.category)},
                     {"branch", ToString(r.branch)},
                     {"lowpass_rate", r.lowpass_rate},
                     {"clip_eta", r.clip_eta},
                     {"mask_seed", r.mask_seed},
                     {"loudness_scale", r.loudness_scale}};
  if (r.stage == 2) {
    j["reverb"] = r.reverb;
    j["rir_index"] = r.rir_index;
    j["rir_id"] = r.rir_id;
    j["noise_index"] = r.noise_index;
    j["noise_id"] = r.noise_id;
    j["noise_offset"] = r.noise_offset;
    j["snr_db"] = r.snr_db;
    j["mix_gain"] = r.mix_gain;
  }
}

void from_json(const nlohmann::json& j, DistortionRecipe& r) {
  r = DistortionRecipe{};
  r.stage = j.at("stage").get<int>();
  r.category = CategoryFromString(j.at("category").get<std::string>());
  r.branch = BranchFromString(j.at("branch").get<std::string>());
  r.lowpass_rate = j.at("lowpass_rate").get<int>();
  r.clip_eta = j.at("clip_eta").get<double>();
  r.mask_seed = j.at("mask_seed").get<uint64_t>();
  r.loudness_scale = j.at("loudness_scale").get<double>();
  if (r.stage == 2) {
    r.reverb = j.at("reverb").get<bool>();
    r.rir_index = j.at("rir_index").get<int>();
    r.rir_id = j.at("rir_id").get<std::string>();
    r.noise_index = j.at("noise_index").get<int>();
    r.noise_id = j.at("noise_id").get<std::string>();
    r.noise_offset = j.at("noise_offset").get<uint64_t>();
    r.snr_db = j.at("snr_db").get<double>();
    r.mix_gain = j.at("mix_gain").get<double>();
  }
}

}  // namespace ssi::degrade
