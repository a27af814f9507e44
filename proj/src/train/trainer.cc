#include "ssi/train/trainer.h"

#include <Eigen/Core>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <limits>

#include "ssi/audio/metrics.h"
#include "ssi/common/error.h"
#include "ssi/nn/ops.h"

namespace ssi::train {

namespace fs = std::filesystem;
using nn::Tensor;

namespace {

constexpr uint64_t kValidationEpoch = 0xFFFFFFFFull;
constexpr uint64_t kDiscSeedKey = 0xD15C;
constexpr uint64_t kModelSeedKey = 0x30DE1;

nn::AdamConfig AdamFrom(const TrainConfig& cfg) {
  nn::AdamConfig a;
  a.lr = cfg.lr0;
  a.beta1 = cfg.beta1;
  a.beta2 = cfg.beta2;
  a.clip_norm = cfg.clip_norm;
  return a;
}

losses::SpectralSetup SpectralFrom(const models::ModelConfig& m) {
  losses::SpectralSetup s;
  s.stft = m.stft;
  s.sample_rate = m.sample_rate;
  return s;
}

std::size_t SegmentSamples(const TrainConfig& cfg) {
  return static_cast<std::size_t>(std::llround(cfg.segment_seconds * cfg.model.sample_rate));
}

}  // namespace

std::unique_ptr<models::SpectralModel> BuildStageModel(const TrainConfig& cfg) {
  cfg.Validate();
  const uint64_t seed = Rng::Derive({cfg.seed, kModelSeedKey}).NextU64();
  auto model = models::BuildModel(cfg.model_kind, cfg.model, seed);
  if (cfg.stage == 2) {
    const models::Checkpoint ckpt = models::LoadCheckpoint(cfg.init_ckpt);
    if (ckpt.kind != models::ModelKind::kGateDccrn) {
      throw ValidationError("stage-1 checkpoint holds a " + models::ToString(ckpt.kind) + " model, expected " +
                            models::ToString(models::ModelKind::kGateDccrn));
    }
    auto& cascade = dynamic_cast<models::CascadeModel&>(*model);
    models::LoadParameters(cascade.stage1(), ckpt);
    cascade.SetFrozen(cfg.freeze_stage1);
  }
  return model;
}

Trainer::Trainer(const TrainConfig& cfg, std::unique_ptr<models::SpectralModel> model)
    : cfg_(cfg), model_(std::move(model)), schedule_(cfg.lr0, cfg.patience), spectral_(SpectralFrom(cfg.model)) {
  cfg_.Validate();
  Require(model_ != nullptr, "trainer needs a model");
  Eigen::setNbThreads(1);
  opt_ = std::make_unique<nn::Adam>(model_->Parameters(), AdamFrom(cfg_));
  const bool adversarial = cfg_.loss.stage1.adv > 0.0 || cfg_.loss.stage1.feature_matching > 0.0;
  if (cfg_.stage == 1 && adversarial) {
    disc_ = std::make_unique<losses::MultiDiscriminator>(cfg_.disc, Rng::Derive({cfg_.seed, kDiscSeedKey}).NextU64());
    disc_opt_ = std::make_unique<nn::Adam>(disc_->Parameters(), AdamFrom(cfg_));
  }
}

void Trainer::AbortNumerical(const std::string& what) {
  std::string dump;
  try {
    fs::create_directories(cfg_.checkpoint_dir);
    dump = (fs::path(cfg_.checkpoint_dir) / "numerical_failure.ckpt").string();
    models::SaveCheckpoint(dump, MakeCheckpoint());
  } catch (const std::exception&) {
    dump.clear();
  }
  throw NumericalError(what + " at step " + std::to_string(steps_) +
                       (dump.empty() ? std::string() : "; state dumped to " + dump));
}

StepMetrics Trainer::Step(const Tensor& input, const Tensor& target) {
  Require(input.shape() == target.shape() && input.rank() == 2, "input and target must both be [N, L]");
  StepMetrics m;
  opt_->set_lr(schedule_.lr());
  const Tensor est = models::EnhanceBatch(*model_, input);

  if (cfg_.stage == 1) {
    if (disc_) {
      disc_opt_->set_lr(schedule_.lr());
      disc_opt_->ZeroGrad();
      disc_->SetRequiresGrad(true);
      const Tensor d_loss = losses::LsganDiscLoss(disc_->Forward(target), disc_->Forward(est.Detach()));
      m.disc = d_loss.item();
      if (!std::isfinite(m.disc)) AbortNumerical("non-finite discriminator loss");
      d_loss.Backward();
      disc_opt_->Step();
      ++disc_steps_;
      disc_->SetRequiresGrad(false);
    }
    const losses::Stage1Terms t = losses::Stage1Loss(est, target, disc_.get(), cfg_.loss, spectral_);
    m.total = t.total.item();
    m.si_snr = t.si_snr.item();
    m.plc = t.plc.item();
    m.adv = t.adv.item();
    m.feature_matching = t.feature_matching.item();
    if (!std::isfinite(m.total)) AbortNumerical("non-finite stage-1 loss");
    opt_->ZeroGrad();
    t.total.Backward();
  } else {
    const losses::Stage2Terms t = losses::Stage2Loss(est, target, cfg_.loss, spectral_);
    m.total = t.total.item();
    m.si_snr = t.si_snr.item();
    m.plc = t.plc.item();
    m.mag = t.mag.item();
    if (!std::isfinite(m.total)) AbortNumerical("non-finite stage-2 loss");
    opt_->ZeroGrad();
    t.total.Backward();
  }
  try {
    m.grad_norm = opt_->Step();
  } catch (const NumericalError& e) {
    AbortNumerical(e.what());
  }
  ++steps_;
  return m;
}

Tensor StackWaves(const std::vector<const audio::Waveform*>& waves) {
  Require(!waves.empty(), "cannot stack an empty batch");
  const std::size_t len = waves.front()->size();
  std::vector<double> data;
  data.reserve(len * waves.size());
  for (const auto* w : waves) {
    Require(w->size() == len, "batch waveforms must share one length");
    data.insert(data.end(), w->samples.begin(), w->samples.end());
  }
  return Tensor::FromData({static_cast<int64_t>(waves.size()), static_cast<int64_t>(len)}, std::move(data));
}

StepMetrics Trainer::Step(const degrade::Batch& batch) {
  std::vector<const audio::Waveform*> in, tg;
  for (const auto& item : batch.items) {
    in.push_back(&item.input);
    tg.push_back(&item.target);
  }
  return Step(StackWaves(in), StackWaves(tg));
}

double Trainer::CompositeLoss(const Tensor& est, const Tensor& target) const {
  if (cfg_.stage == 1) return losses::Stage1Loss(est, target, disc_.get(), cfg_.loss, spectral_).total.item();
  return losses::Stage2Loss(est, target, cfg_.loss, spectral_).total.item();
}

ValMetrics Trainer::Validate(const std::vector<ValPair>& pairs) const {
  nn::NoGradGuard guard;
  ValMetrics v;
  for (const auto& p : pairs) {
    const Tensor x = StackWaves({&p.input});
    const Tensor y = StackWaves({&p.target});
    const Tensor est = models::EnhanceBatch(*model_, x);
    const audio::Waveform out(std::vector<double>(est.data().begin(), est.data().end()), p.target.sample_rate);
    v.composite += CompositeLoss(est, y);
    const double in_db = audio::SiSnrDb(p.input.samples, p.target.samples);
    const double out_db = audio::SiSnrDb(out.samples, p.target.samples);
    v.si_snr_in += in_db;
    v.si_snr_out += out_db;
    v.si_snr_improvement += out_db - in_db;
    v.lsd += audio::Lsd(out, p.target, cfg_.model.stft);
  }
  v.count = pairs.size();
  if (v.count > 0) {
    const double n = static_cast<double>(v.count);
    v.composite /= n;
    v.si_snr_in /= n;
    v.si_snr_out /= n;
    v.si_snr_improvement /= n;
    v.lsd /= n;
  }
  return v;
}

bool Trainer::EndEpoch(double val_loss) { return schedule_.Step(val_loss); }

models::Checkpoint Trainer::MakeCheckpoint() const {
  nlohmann::json extra{{"steps", steps_},
                       {"disc_steps", disc_steps_},
                       {"lr", schedule_.lr()},
                       {"best_val", std::isfinite(schedule_.best()) ? nlohmann::json(schedule_.best()) : nlohmann::json()},
                       {"bad_epochs", schedule_.bad_epochs()},
                       {"halvings", schedule_.halvings()},
                       {"train_config", cfg_}};
  return models::MakeCheckpoint(*model_, cfg_.stage, std::move(extra));
}

std::vector<ValPair> BuildValidationSet(const degrade::CorpusBanks& banks, const TrainConfig& cfg) {
  std::vector<ValPair> out;
  const std::size_t n = std::min<std::size_t>(cfg.val_size, banks.speech.size());
  const degrade::DynamicBatchIterator it(banks, cfg.sim, cfg.stage, 1, SegmentSamples(cfg), cfg.seed);
  for (std::size_t i = 0; i < n; ++i) {
    degrade::TrainingPair p = it.Item(kValidationEpoch, i);
    out.push_back({std::move(p.input), std::move(p.target)});
  }
  return out;
}

namespace {

void WriteCsvHeader(std::ofstream& f) {
  f << "epoch,steps,lr,train_loss,val_composite,val_si_snr_in,val_si_snr_out,val_si_snr_improvement,val_lsd,"
       "halved\n";
}

void WriteCsvRow(std::ofstream& f, const EpochRecord& r) {
  f << std::setprecision(10) << r.epoch << ',' << r.steps << ',' << r.lr << ',' << r.train_loss << ','
    << r.val.composite << ',' << r.val.si_snr_in << ',' << r.val.si_snr_out << ',' << r.val.si_snr_improvement
    << ',' << r.val.lsd << ',' << (r.halved ? 1 : 0) << '\n';
  f.flush();
}

}  // namespace

TrainResult RunTraining(const TrainConfig& cfg, std::ostream* log) {
  cfg.Validate();
  Require(!cfg.manifest.empty(), "training needs a manifest");
  const degrade::CorpusBanks banks = degrade::LoadCorpus(degrade::LoadManifest(cfg.manifest));
  Require(!banks.speech.empty(), "training manifest has no speech clips");
  if (cfg.stage == 2) Require(!banks.noise.empty(), "stage-2 training needs noise clips");
  std::optional<degrade::CorpusBanks> val_banks;
  if (!cfg.val_manifest.empty()) val_banks = degrade::LoadCorpus(degrade::LoadManifest(cfg.val_manifest));
  const std::vector<ValPair> val = BuildValidationSet(val_banks ? *val_banks : banks, cfg);

  fs::create_directories(cfg.checkpoint_dir);
  const fs::path dir(cfg.checkpoint_dir);
  std::ofstream csv(dir / "metrics.csv", std::ios::trunc);
  if (!csv) throw ValidationError("cannot write " + (dir / "metrics.csv").string());
  WriteCsvHeader(csv);

  Trainer trainer(cfg, BuildStageModel(cfg));
  degrade::DynamicBatchIterator it(banks, cfg.sim, cfg.stage, cfg.batch_size, SegmentSamples(cfg), cfg.seed);
  it.set_fixed(!cfg.dynamic_mixing);
  TrainResult result;
  result.best_checkpoint = (dir / "best.ckpt").string();
  result.last_checkpoint = (dir / "last.ckpt").string();
  double best = std::numeric_limits<double>::infinity();
  bool done = false;
  for (int epoch = 0; epoch < cfg.epochs && !done; ++epoch) {
    it.SetEpoch(static_cast<uint64_t>(epoch));
    double loss_sum = 0.0;
    int64_t batches = 0;
    degrade::Batch batch;
    while (it.Next(batch)) {
      loss_sum += trainer.Step(batch).total;
      ++batches;
      if (cfg.max_steps > 0 && trainer.steps() >= cfg.max_steps) {
        done = true;
        break;
      }
    }
    EpochRecord r;
    r.epoch = epoch;
    r.steps = trainer.steps();
    r.lr = trainer.schedule().lr();
    r.train_loss = batches ? loss_sum / static_cast<double>(batches) : 0.0;
    r.val = trainer.Validate(val);
    const double val_loss = val.empty() ? r.train_loss : r.val.composite;
    r.halved = trainer.EndEpoch(val_loss);
    WriteCsvRow(csv, r);
    if (log) {
      *log << "epoch " << epoch << " steps " << r.steps << " lr " << r.lr << " train " << r.train_loss << " val "
           << val_loss << " si-snr-imp " << r.val.si_snr_improvement << (r.halved ? " (lr halved)" : "") << '\n';
    }
    const models::Checkpoint ckpt = trainer.MakeCheckpoint();
    models::SaveCheckpoint(result.last_checkpoint, ckpt);
    if (val_loss < best) {
      best = val_loss;
      models::SaveCheckpoint(result.best_checkpoint, ckpt);
    }
    result.history.push_back(r);
  }
  result.steps = trainer.steps();
  return result;
}

}  // namespace ssi::train
