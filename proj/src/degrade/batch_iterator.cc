#include "ssi/degrade/batch_iterator.h"

#include <numeric>

#include "ssi/common/error.h"

namespace ssi::degrade {

namespace {

constexpr uint64_t kShuffleStream = 0x5348554646ULL;
constexpr uint64_t kItemStream = 0x4954454dULL;

std::vector<std::size_t> EpochOrder(std::size_t n, uint64_t seed, uint64_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  Rng rng = Rng::Derive({seed, epoch, kShuffleStream});
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.UniformInt(i)]);
  return order;
}

}  // namespace

DynamicBatchIterator::DynamicBatchIterator(const CorpusBanks& banks, SimConfig cfg, int stage,
                                           int batch_size, std::size_t segment_samples, uint64_t seed)
    : banks_(banks),
      cfg_(cfg),
      stage_(stage),
      batch_size_(batch_size),
      segment_samples_(segment_samples),
      seed_(seed) {
  cfg_.Validate();
  Require(stage == 1 || stage == 2, "stage must be 1 or 2");
  Require(batch_size > 0, "batch size must be positive");
  Require(segment_samples > 0, "segment length must be positive");
  Require(!banks.speech.empty(), "corpus has no clean speech");
  if (stage == 2) {
    Require(!banks.noise.empty() && !banks.rir.empty(), "stage 2 needs noise and RIR banks");
  }
  SetEpoch(0);
}

void DynamicBatchIterator::SetEpoch(uint64_t epoch) {
  epoch_ = epoch;
  cursor_ = 0;
  order_ = EpochOrder(banks_.speech.size(), seed_, epoch);
}

std::size_t DynamicBatchIterator::BatchesPerEpoch() const {
  return (EpochSize() + batch_size_ - 1) / batch_size_;
}

bool DynamicBatchIterator::Next(Batch& out) {
  out.items.clear();
  if (cursor_ >= order_.size()) return false;
  const std::size_t end = std::min(order_.size(), cursor_ + batch_size_);
  for (; cursor_ < end; ++cursor_) out.items.push_back(Item(epoch_, cursor_));
  return true;
}

TrainingPair DynamicBatchIterator::Item(uint64_t epoch, std::size_t index) const {
  const std::vector<std::size_t> order =
      epoch == epoch_ ? order_ : EpochOrder(banks_.speech.size(), seed_, epoch);
  Require(index < order.size(), "item index past the end of the epoch");
  Rng rng = fixed_ ? Rng::Derive({seed_, 0, order[index], kItemStream})
                   : Rng::Derive({seed_, epoch, index, kItemStream});
  const audio::Waveform& source = banks_.speech.clips[order[index]];

  audio::Waveform clean;
  clean.sample_rate = source.sample_rate;
  if (source.size() > segment_samples_) {
    const std::size_t offset = PickCropOffset(source, segment_samples_, rng);
    clean.samples.assign(source.samples.begin() + static_cast<long>(offset),
                         source.samples.begin() + static_cast<long>(offset + segment_samples_));
  } else {
    clean.samples = source.samples;
    clean.samples.resize(segment_samples_, 0.0);
  }

  SimResult sim = stage_ == 1 ? SimulateStage1(clean, cfg_, rng)
                              : SimulateStage2(clean, cfg_, rng, banks_.noise, banks_.rir);
  return TrainingPair{std::move(sim.input), std::move(sim.target), std::move(sim.recipe)};
}

}  // namespace ssi::degrade
