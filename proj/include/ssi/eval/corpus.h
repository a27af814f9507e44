#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssi/degrade/manifest.h"
#include "ssi/degrade/recipe.h"
#include "ssi/degrade/sim_config.h"

namespace ssi::eval {

// One simulated pair on disk. Paths in pairs.jsonl are relative to the
// corpus directory; loaded entries carry resolved paths.
struct PairEntry {
  std::string id;
  std::string input;
  std::string target;
  std::size_t source_index = 0;
  std::string source_id;
  std::size_t crop_offset = 0;
  std::size_t length = 0;
  degrade::DistortionRecipe recipe;
};

struct SimulateOptions {
  std::string manifest;
  std::string out_dir;
  int stage = 1;
  int count = 100;
  double segment_seconds = 0.0;  // 0: whole clips
  uint64_t seed = 0;
  degrade::SimConfig sim;
};

// Writes <id>_input.wav / <id>_target.wav (float32), pairs.jsonl and
// corpus.json (options, for replay) into out_dir.
std::vector<PairEntry> SimulateCorpus(const SimulateOptions& opt);

// Reads pairs.jsonl; relative paths resolve against its directory.
std::vector<PairEntry> LoadPairs(const std::string& pairs_path);

struct FractionCheck {
  std::string name;
  std::size_t hits = 0;
  std::size_t total = 0;
  double expected = 0.0;
  double observed = 0.0;
  double ci_half_width = 0.0;  // 99% normal-approximation interval around expected
  bool within = false;
};

struct AuditReport {
  std::size_t pairs = 0;
  int stage = 1;
  std::vector<FractionCheck> fractions;
  // Discontinuity clips only: zeroed windows / all windows.
  std::size_t zeroed_windows = 0;
  std::size_t total_windows = 0;
  // Stage 2: largest |measured SNR - recipe SNR| over replayed pairs.
  double max_snr_error_db = 0.0;
  std::size_t replayed = 0;
  std::size_t replay_failures = 0;
  std::vector<std::string> failed_ids;
};

// Recomputes recipe statistics for a corpus written by SimulateCorpus and
// replays up to `replay_limit` pairs (0: all), comparing float32 samples.
AuditReport AuditCorpus(const std::string& dir, std::size_t replay_limit = 0);

nlohmann::json ToJson(const AuditReport& r);

}  // namespace ssi::eval
