#pragma once

#include <cstdint>
#include <vector>

#include "ssi/degrade/manifest.h"

namespace ssi::degrade {

struct TrainingPair {
  audio::Waveform input;
  audio::Waveform target;
  DistortionRecipe recipe;
};

struct Batch {
  std::vector<TrainingPair> items;
};

// Dynamic mixing: every item gets a fresh recipe each epoch. Item (epoch, i)
// depends only on (seed, epoch, i), so workers may shard by index without
// changing the stream. An epoch is one pass over the clean-speech bank.
class DynamicBatchIterator {
 public:
  DynamicBatchIterator(const CorpusBanks& banks, SimConfig cfg, int stage, int batch_size,
                       std::size_t segment_samples, uint64_t seed);

  void SetEpoch(uint64_t epoch);
  uint64_t epoch() const { return epoch_; }
  // False once the epoch is exhausted. The last batch may be short.
  bool Next(Batch& out);
  std::size_t EpochSize() const { return banks_.speech.size(); }
  std::size_t BatchesPerEpoch() const;

  TrainingPair Item(uint64_t epoch, std::size_t index) const;

  // When fixed, each clip keeps one crop and recipe for every epoch (only the
  // order is reshuffled).
  void set_fixed(bool fixed) { fixed_ = fixed; }
  bool fixed() const { return fixed_; }

 private:
  const CorpusBanks& banks_;
  SimConfig cfg_;
  int stage_;
  int batch_size_;
  std::size_t segment_samples_;
  uint64_t seed_;
  uint64_t epoch_ = 0;
  std::size_t cursor_ = 0;
  bool fixed_ = false;
  std::vector<std::size_t> order_;
};

}  // namespace ssi::degrade
