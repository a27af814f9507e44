#pragma once

#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ssi/degrade/batch_iterator.h"
#include "ssi/losses/composite.h"
#include "ssi/models/checkpoint.h"
#include "ssi/nn/optim.h"
#include "ssi/train/lr_schedule.h"
#include "ssi/train/train_config.h"

namespace ssi::train {

struct StepMetrics {
  double total = 0.0;
  double si_snr = 0.0;
  double plc = 0.0;
  double adv = 0.0;
  double feature_matching = 0.0;
  double mag = 0.0;
  double disc = 0.0;
  double grad_norm = 0.0;
};

struct ValPair {
  audio::Waveform input;
  audio::Waveform target;
};

struct ValMetrics {
  double composite = 0.0;
  double si_snr_in = 0.0;
  double si_snr_out = 0.0;
  double si_snr_improvement = 0.0;
  double lsd = 0.0;
  size_t count = 0;
};

// Builds the network a stage trains. Stage 2 loads the stage-1 checkpoint
// into the cascade's first half and freezes it when cfg.freeze_stage1.
std::unique_ptr<models::SpectralModel> BuildStageModel(const TrainConfig& cfg);

// Optimizer, schedule and (stage 1) discriminator around one model. Stage 1
// runs one discriminator step, then one generator step per batch.
class Trainer {
 public:
  Trainer(const TrainConfig& cfg, std::unique_ptr<models::SpectralModel> model);

  // input/target are [N, L]. Throws NumericalError on a non-finite loss
  // after writing a state dump into the checkpoint directory.
  StepMetrics Step(const nn::Tensor& input, const nn::Tensor& target);
  StepMetrics Step(const degrade::Batch& batch);
  ValMetrics Validate(const std::vector<ValPair>& pairs) const;
  // Feeds the schedule one validation loss; returns true if lr was halved.
  bool EndEpoch(double val_loss);

  models::SpectralModel& model() { return *model_; }
  const models::SpectralModel& model() const { return *model_; }
  const nn::Adam& optimizer() const { return *opt_; }
  const PlateauHalving& schedule() const { return schedule_; }
  const losses::MultiDiscriminator* discriminator() const { return disc_.get(); }
  int64_t steps() const { return steps_; }
  int64_t disc_steps() const { return disc_steps_; }

  models::Checkpoint MakeCheckpoint() const;

 private:
  double CompositeLoss(const nn::Tensor& est, const nn::Tensor& target) const;
  [[noreturn]] void AbortNumerical(const std::string& what);

  TrainConfig cfg_;
  std::unique_ptr<models::SpectralModel> model_;
  std::unique_ptr<nn::Adam> opt_;
  std::unique_ptr<losses::MultiDiscriminator> disc_;
  std::unique_ptr<nn::Adam> disc_opt_;
  PlateauHalving schedule_;
  losses::SpectralSetup spectral_;
  int64_t steps_ = 0;
  int64_t disc_steps_ = 0;
};

struct EpochRecord {
  int epoch = 0;
  int64_t steps = 0;
  double lr = 0.0;
  double train_loss = 0.0;
  ValMetrics val;
  bool halved = false;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  std::string best_checkpoint;
  std::string last_checkpoint;
  int64_t steps = 0;
};

// Stacks equally long waveforms into [N, L].
nn::Tensor StackWaves(const std::vector<const audio::Waveform*>& waves);

// Fixed validation pairs simulated once from the given speech bank.
std::vector<ValPair> BuildValidationSet(const degrade::CorpusBanks& banks, const TrainConfig& cfg);

// Full run: loads the corpus, trains for cfg.epochs (or cfg.max_steps),
// validates each epoch, appends metrics.csv and writes best.ckpt/last.ckpt
// into cfg.checkpoint_dir.
TrainResult RunTraining(const TrainConfig& cfg, std::ostream* log = nullptr);

}  // namespace ssi::train
