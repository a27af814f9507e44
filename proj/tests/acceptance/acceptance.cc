// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.h"
#include "ssi/audio/mixing.h"
#include "ssi/audio/stft.h"
#include "ssi/degrade/distortions.h"
#include "ssi/degrade/simulator.h"
#include "ssi/degrade/toy_corpus.h"
#include "ssi/losses/composite.h"
#include "ssi/models/rtf.h"
#include "ssi/nn/complex.h"
#include "ssi/nn/spectral.h"
#include "ssi/nn/stcm.h"
#include "ssi/nn/unet.h"
#include "ssi/train/trainer.h"

namespace {

using namespace ssi;
using nn::Tensor;
using testing::GradCheck;
using testing::RandomTensor;
namespace fs = std::filesystem;

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void Report(const std::string& name, const std::function<Outcome()>& run) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = run();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (!o.pass) ++failures;
  std::printf("%s %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string Fmt(const char* f, double a) {
  char buf[128];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

Tensor Project(const Tensor& y, uint64_t seed = 99) {
  Rng rng(seed);
  return nn::Sum(nn::Mul(y, RandomTensor(y.shape(), rng)));
}

std::vector<Tensor> Params(const nn::Module& m) {
  std::vector<Tensor> out;
  for (const auto& p : m.Parameters()) out.push_back(p.tensor);
  return out;
}

// Parameter counts against the published model sizes.
Outcome ParamCounts() {
  struct Row {
    models::ModelKind kind;
    double reference;
    double tol;
  };
  const Row rows[] = {{models::ModelKind::kDccrn, 5.05e6, 0.10},
                      {models::ModelKind::kGateDccrn, 6.70e6, 0.10},
                      {models::ModelKind::kCascadeSDccrn, 9.70e6, 0.10},
                      {models::ModelKind::kCascadeSDccsn, 10.00e6, 0.10},
                      {models::ModelKind::kSDccsn, 3.30e6, 0.15}};
  Outcome o{true, ""};
  for (const auto& r : rows) {
    const auto m = models::BuildModel(r.kind, {}, 0);
    const double n = static_cast<double>(models::CountParams(m.get()));
    const double rel = n / r.reference - 1.0;
    o.pass &= std::abs(rel) <= r.tol;
    std::ostringstream s;
    s << models::ToString(r.kind) << "=" << static_cast<int64_t>(n) << " (" << Fmt("%+.1f%%", 100 * rel) << ") ";
    o.detail += s.str();
  }
  return o;
}

Outcome StftRoundTrip() {
  Rng rng(2024);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = 4800 + rng.UniformInt(48000);
    std::vector<double> s(n);
    for (double& v : s) v = rng.Uniform(-1.0, 1.0);
    const audio::Waveform w(std::move(s), audio::kFullBandRate);
    const audio::Waveform back = audio::Istft(audio::Stft(w));
    double err = 0, ref = 0;
    for (std::size_t i = 960; i + 960 < back.size(); ++i) {
      err += (back.samples[i] - w.samples[i]) * (back.samples[i] - w.samples[i]);
      ref += w.samples[i] * w.samples[i];
    }
    worst = std::max(worst, std::sqrt(err / ref));
  }
  return {worst < 1e-6, Fmt("worst relative L2 %.2e over 100 signals (bound 1e-6)", worst)};
}

Outcome GradChecks() {
  std::vector<std::pair<std::string, double>> block_errs, unet_errs;
  {
    Rng rng(11);
    nn::ComplexConv2d conv(2, 3, nn::ConvSpec{}, rng);
    nn::ComplexConvTranspose2d deconv(3, 2, nn::ConvSpec{}, rng);
    Tensor x = RandomTensor({1, 4, 9, 4}, rng);
    auto p = Params(conv);
    for (const auto& t : Params(deconv)) p.push_back(t);
    p.push_back(x);
    block_errs.push_back(
        {"complex_conv", GradCheck([&] { return Project(deconv.Forward(conv.Forward(nn::ComplexTensor(x)), 9).data()); }, p, rng)});
  }
  {
    Rng rng(15);
    nn::GatedComplexConv2d g(2, 3, nn::ConvSpec{}, rng);
    nn::GatedComplexConvTranspose2d gd(3, 2, nn::ConvSpec{}, rng);
    Tensor x = RandomTensor({1, 4, 9, 4}, rng);
    auto p = Params(g);
    for (const auto& t : Params(gd)) p.push_back(t);
    p.push_back(x);
    block_errs.push_back(
        {"gated_conv", GradCheck([&] { return Project(gd.Forward(g.Forward(nn::ComplexTensor(x)), 9).data()); }, p, rng)});
  }
  {
    Rng rng(19);
    nn::StcmStack stack(6, 2, nn::StcmConfig{4, 3, {1, 2}}, rng);
    Tensor x = RandomTensor({2, 6, 1, 7}, rng);
    auto p = Params(stack);
    p.push_back(x);
    block_errs.push_back({"stcm", GradCheck([&] { return Project(stack.Forward(x)); }, p, rng)});
  }
  {
    Rng rng(22);
    nn::ComplexDenseBlock block(2, 3, 3, 3, 2, rng);
    Tensor x = RandomTensor({1, 4, 6, 6}, rng);
    auto p = Params(block);
    p.push_back(x);
    block_errs.push_back(
        {"dense_block", GradCheck([&] { return Project(block.Forward(nn::ComplexTensor(x)).data()); }, p, rng)});
  }
  {
    Rng rng(7);
    Tensor est = RandomTensor({2, 300}, rng), ref = RandomTensor({2, 300}, rng);
    block_errs.push_back({"si_snr", GradCheck([&] { return losses::SiSnrLoss(est, ref); }, {est, ref}, rng)});
    Tensor se = RandomTensor({2, 2, 6, 3}, rng), sr = RandomTensor({2, 2, 6, 3}, rng);
    block_errs.push_back({"plc", GradCheck([&] { return losses::PlcLoss(se, sr); }, {se, sr}, rng)});
    block_errs.push_back({"mag_mse", GradCheck([&] { return losses::MagMseLoss(se, sr); }, {se, sr}, rng)});
  }
  {
    const losses::MultiDiscriminator disc(losses::DiscriminatorConfig::Tiny(), 9);
    Rng rng(10);
    Tensor fake = RandomTensor({1, 400}, rng, 0.3);
    const Tensor real = RandomTensor({1, 400}, rng, 0.3);
    block_errs.push_back({"lsgan_gen", GradCheck([&] { return losses::LsganGenLoss(disc.Forward(fake)); }, {fake}, rng, 40)});
    block_errs.push_back({"lsgan_disc", GradCheck([&] {
                            return losses::LsganDiscLoss(disc.Forward(real), disc.Forward(fake.Detach()));
                          }, Params(disc), rng, 4)});
    std::vector<losses::DiscOutput> real_out;
    {
      nn::NoGradGuard guard;
      real_out = disc.Forward(real);
    }
    block_errs.push_back({"feature_matching",
                          GradCheck([&] { return losses::FeatureMatchingLoss(real_out, disc.Forward(fake)); }, {fake}, rng, 40)});
    losses::SpectralSetup s;
    s.stft.frame_ms = 2.0;
    s.stft.hop_ms = 1.0;
    s.stft.fft_size = 128;
    Tensor est = RandomTensor({1, 480}, rng, 0.2);
    const Tensor ref = RandomTensor({1, 480}, rng, 0.2);
    block_errs.push_back({"stage1_composite", GradCheck([&] {
                            return losses::Stage1Loss(est, ref, &disc, losses::LossWeights{}, s).total;
                          }, {est}, rng, 40)});
    block_errs.push_back({"stage2_composite", GradCheck([&] {
                            return losses::Stage2Loss(est, ref, losses::LossWeights{}, s).total;
                          }, {est}, rng, 40)});
  }
  for (auto kind : {nn::BottleneckKind::kLstm, nn::BottleneckKind::kStcm}) {
    for (bool gated : {false, true}) {
      Rng rng(25);
      nn::UNetConfig cfg;
      cfg.channels = {4, 4, 8};
      cfg.gated = gated;
      cfg.bottleneck.kind = kind;
      cfg.bottleneck.lstm_hidden = 5;
      cfg.bottleneck.lstm_layers = 1;
      cfg.bottleneck.stcm_blocks = 1;
      cfg.bottleneck.stcm = nn::StcmConfig{3, 3, {1, 2}};
      nn::ComplexUNet unet(cfg, 12, rng);
      Tensor x = RandomTensor({1, 2, 12, 4}, rng);
      auto p = Params(unet);
      p.push_back(x);
      const std::string name = std::string("unet_") + (kind == nn::BottleneckKind::kLstm ? "lstm" : "stcm") +
                               (gated ? "_gated" : "");
      unet_errs.push_back({name, GradCheck([&] { return Project(unet.Forward(nn::ComplexTensor(x)).data()); }, p, rng, 6)});
    }
  }
  Outcome o{true, ""};
  double worst_block = 0, worst_unet = 0;
  for (const auto& [name, e] : block_errs) {
    worst_block = std::max(worst_block, e);
    if (e >= 1e-4) {
      o.pass = false;
      o.detail += name + Fmt("=%.1e ", e);
    }
  }
  for (const auto& [name, e] : unet_errs) {
    worst_unet = std::max(worst_unet, e);
    if (e >= 1e-3) {
      o.pass = false;
      o.detail += name + Fmt("=%.1e ", e);
    }
  }
  o.detail += std::to_string(block_errs.size()) + Fmt(" block/loss checks worst %.1e (bound 1e-4), ", worst_block) +
              std::to_string(unet_errs.size()) + Fmt(" encoder/decoder checks worst %.1e (bound 1e-3)", worst_unet);
  return o;
}

degrade::CorpusBanks ToyBanks(uint64_t seed) {
  Rng rng(seed);
  degrade::CorpusBanks b;
  for (int i = 0; i < 8; ++i) b.speech.Add("s" + std::to_string(i), degrade::SynthSpeech(0.25, rng));
  for (int i = 0; i < 4; ++i) b.noise.Add("n" + std::to_string(i), degrade::SynthNoise(1.0, rng));
  for (int i = 0; i < 4; ++i) b.rir.Add("r" + std::to_string(i), degrade::SynthRir(0.2 + 0.1 * i, rng));
  return b;
}

Outcome SimulatorStats() {
  constexpr int kN = 10000;
  const degrade::SimConfig cfg;
  const degrade::CorpusBanks banks = ToyBanks(77);

  // Stage 1: applied clips, category and branch shares, zeroed windows.
  Rng rng1(1);
  int cat[3] = {0, 0, 0}, lowpass = 0;
  std::size_t zeroed = 0, windows = 0, mask_mismatch = 0;
  for (int i = 0; i < kN; ++i) {
    const audio::Waveform& clean = banks.speech.clips[i % banks.speech.size()];
    const degrade::SimResult r = degrade::SimulateStage1(clean, cfg, rng1);
    ++cat[static_cast<int>(r.recipe.category)];
    if (r.recipe.category == degrade::Category::kColoration) {
      lowpass += r.recipe.branch == degrade::ColorationBranch::kLowpass;
    }
    if (r.recipe.category == degrade::Category::kDiscontinuity) {
      const auto mask = degrade::DiscontinuityMask(clean.size(), audio::kFullBandRate, cfg.disc_window_ms,
                                                   cfg.disc_zero_prob, r.recipe.mask_seed);
      const auto win = static_cast<std::size_t>(std::llround(cfg.disc_window_ms * audio::kFullBandRate / 1000.0));
      for (std::size_t k = 0; k < mask.size(); ++k) {
        zeroed += mask[k];
        ++windows;
        if (mask[k]) {
          for (std::size_t t = k * win; t < std::min(clean.size(), (k + 1) * win); ++t) {
            if (r.input.samples[t] != 0.0) {
              ++mask_mismatch;
              break;
            }
          }
        }
      }
    }
  }
  const double pc = cat[0] / double(kN), pd = cat[1] / double(kN), pl = cat[2] / double(kN);
  const double plp = lowpass / double(cat[0]);
  const double zr = zeroed / double(windows);

  // Stage 2: reverb share and achieved SNR from the mixture.
  Rng rng2(2);
  int reverb = 0;
  double worst_snr = 0;
  for (int i = 0; i < kN; ++i) {
    const audio::Waveform& clean = banks.speech.clips[i % banks.speech.size()];
    const degrade::SimResult r = degrade::SimulateStage2(clean, cfg, rng2, banks.noise, banks.rir);
    reverb += r.recipe.reverb;
    double pn = 0;
    for (std::size_t k = 0; k < clean.size(); ++k) {
      const double n = r.input.samples[k] / r.recipe.mix_gain - r.speech_component.samples[k];
      pn += n * n;
    }
    pn /= static_cast<double>(clean.size());
    const double snr = 10 * std::log10(audio::ActivePower(r.speech_component) / pn);
    worst_snr = std::max(worst_snr, std::abs(snr - r.recipe.snr_db));
  }
  const double pr = reverb / double(kN);

  const bool ok = std::abs(pc - 0.60) <= 0.015 && std::abs(pd - 0.25) <= 0.015 && std::abs(pl - 0.15) <= 0.015 &&
                  std::abs(plp - 0.60) <= 0.02 && zr >= 0.09 && zr <= 0.11 && mask_mismatch == 0 &&
                  std::abs(pr - 0.5) <= 0.02 && worst_snr <= 0.1;
  std::ostringstream s;
  s << "categories " << Fmt("%.4f", pc) << "/" << Fmt("%.4f", pd) << "/" << Fmt("%.4f", pl)
    << Fmt(", lowpass share %.4f", plp) << Fmt(", zeroed windows %.4f", zr) << " (" << windows << " windows, "
    << mask_mismatch << " mismatched)" << Fmt(", reverb %.4f", pr) << Fmt(", worst SNR error %.2e dB", worst_snr);
  return {ok, s.str()};
}

Outcome LossIdentities() {
  Rng rng(5);
  const Tensor ref = RandomTensor({3, 4800}, rng, 0.2);
  const Tensor est = nn::Add(ref, RandomTensor({3, 4800}, rng, 0.1));
  const double base = losses::SiSnrLoss(est, ref).item();
  double worst_scale = 0;
  for (double a : {1e-3, 0.1, 2.0, 50.0, 1e3}) {
    std::vector<double> v(est.data().begin(), est.data().end());
    for (double& e : v) e *= a;
    worst_scale = std::max(worst_scale, std::abs(losses::SiSnrLoss(Tensor::FromData(est.shape(), v), ref).item() - base));
  }
  const losses::MultiDiscriminator disc(losses::DiscriminatorConfig::Tiny(), 3);
  const losses::SpectralSetup s;
  const losses::LossWeights w;
  const auto t1 = losses::Stage1Loss(est, ref, &disc, w, s);
  const auto t2 = losses::Stage2Loss(est, ref, w, s);
  const double e1 = std::abs(t1.total.item() - (t1.si_snr.item() + 10 * t1.plc.item() + 15 * t1.adv.item()));
  const double e2 = std::abs(t2.total.item() - (t2.si_snr.item() + t2.plc.item() + t2.mag.item()));
  const bool weights_ok = w.stage1.si_snr == 1 && w.stage1.plc == 10 && w.stage1.adv == 15 && w.stage2.si_snr == 1 &&
                          w.stage2.plc == 1 && w.stage2.mag == 1;
  return {worst_scale <= 1e-6 && e1 <= 1e-9 && e2 <= 1e-9 && weights_ok,
          Fmt("scale invariance %.1e (bound 1e-6)", worst_scale) + Fmt(", stage-1 sum error %.1e", e1) +
              Fmt(", stage-2 sum error %.1e (bound 1e-9)", e2)};
}

Outcome LrTraces() {
  struct Trace {
    std::vector<double> vals;
    std::vector<bool> halved;
    double lr;
  };
  const Trace traces[] = {
      {{1.0, 0.9, 0.8, 0.7}, {false, false, false, false}, 1.0},
      {{1.0, 1.1, 1.2}, {false, false, true}, 0.5},
      {{1.0, 1.0, 1.0}, {false, false, true}, 0.5},
      {{1.0, 1.1, 0.9, 1.0, 1.1}, {false, false, false, false, true}, 0.5},
      {{1.0, 1.1, 1.2, 1.3, 1.4}, {false, false, true, false, true}, 0.25},
      {{1.0, 1.1, 1.0, 0.5, 0.6, 0.4, 0.7, 0.8}, {false, false, true, false, false, false, false, true}, 0.25},
  };
  int ok = 0, n = 0;
  for (const auto& t : traces) {
    train::PlateauHalving s(1.0, 2);
    bool match = true;
    for (std::size_t i = 0; i < t.vals.size(); ++i) match &= s.Step(t.vals[i]) == t.halved[i];
    match &= s.lr() == t.lr;
    ok += match;
    ++n;
  }
  return {ok == n, std::to_string(ok) + "/" + std::to_string(n) + " traces reproduce the expected halvings"};
}

struct ToySetup {
  testing::TempDir dir{"acceptance"};
  std::string manifest;
  degrade::CorpusBanks banks;
  std::string stage1_ckpt;
  train::TrainConfig Config(int stage) const {
    train::TrainConfig c;
    c.stage = stage;
    c.lr0 = 3e-3;
    c.model = models::ModelConfig::Tiny();
    c.disc = losses::DiscriminatorConfig::Tiny();
    c.batch_size = 8;
    c.segment_seconds = 0.25;
    c.dynamic_mixing = false;
    c.manifest = manifest;
    c.val_size = 4;
    c.checkpoint_dir = dir.path() + "/ck" + std::to_string(stage);
    if (stage == 2) {
      c.model_kind = models::ModelKind::kCascadeSDccsn;
      c.init_ckpt = stage1_ckpt;
    }
    return c;
  }
  degrade::Batch FixedBatch(int stage) const {
    degrade::DynamicBatchIterator it(banks, degrade::SimConfig{}, stage, 8, 12000, 0);
    it.set_fixed(true);
    degrade::Batch b;
    it.Next(b);
    return b;
  }
};

constexpr int kOverfitSteps = 300;
constexpr int kTailSteps = 10;

struct OverfitRun {
  double first = 0, tail = 0;
  bool Dropped() const { return tail <= first - 0.8 * std::abs(first); }
};

OverfitRun Overfit(train::Trainer& tr, const degrade::Batch& b) {
  OverfitRun r;
  for (int s = 0; s < kOverfitSteps; ++s) {
    const double total = tr.Step(b).total;
    if (s == 0) r.first = total;
    if (s >= kOverfitSteps - kTailSteps) r.tail += total / kTailSteps;
  }
  return r;
}

Outcome OverfitAndFreeze(ToySetup& toy, Outcome& freeze) {
  // Stage 1.
  const train::TrainConfig c1 = toy.Config(1);
  train::Trainer t1(c1, train::BuildStageModel(c1));
  const OverfitRun r1 = Overfit(t1, toy.FixedBatch(1));
  fs::create_directories(c1.checkpoint_dir);
  toy.stage1_ckpt = c1.checkpoint_dir + "/overfit.ckpt";
  models::SaveCheckpoint(toy.stage1_ckpt, t1.MakeCheckpoint());

  // Stage 2 on top of the stage-1 weights.
  const train::TrainConfig c2 = toy.Config(2);
  train::Trainer t2(c2, train::BuildStageModel(c2));
  const degrade::Batch b2 = toy.FixedBatch(2);
  const OverfitRun r2 = Overfit(t2, b2);
  std::vector<train::ValPair> pairs;
  for (const auto& item : b2.items) pairs.push_back({item.input, item.target});
  const train::ValMetrics vm = t2.Validate(pairs);

  // Freeze contract: full stage-2 training run, then compare stored weights.
  const models::Checkpoint init = models::LoadCheckpoint(toy.stage1_ckpt);
  train::TrainConfig full = toy.Config(2);
  full.batch_size = 4;
  full.segment_seconds = 0.1;
  full.epochs = 3;
  full.dynamic_mixing = true;
  full.checkpoint_dir = toy.dir.path() + "/ck2_full";
  const train::TrainResult tr = train::RunTraining(full);
  std::size_t compared = 0, differing = 0;
  auto compare = [&](const models::CascadeModel& cascade) {
    for (const auto& p : cascade.stage1().Parameters()) {
      const auto& stored = init.params.at(p.name).values;
      ++compared;
      if (stored.size() != p.tensor.data().size() ||
          std::memcmp(stored.data(), p.tensor.data().data(), stored.size() * sizeof(double)) != 0) {
        ++differing;
      }
    }
  };
  for (const std::string& path : {tr.last_checkpoint, tr.best_checkpoint}) {
    const auto m = models::ModelFromCheckpoint(models::LoadCheckpoint(path));
    compare(dynamic_cast<const models::CascadeModel&>(*m));
  }
  compare(dynamic_cast<const models::CascadeModel&>(t2.model()));
  freeze.pass = compared > 0 && differing == 0 && tr.steps > 0;
  freeze.detail = std::to_string(compared) + " stage-1 tensors compared after " + std::to_string(tr.steps) +
                  " stage-2 steps plus the " + std::to_string(kOverfitSteps) + "-step overfit run, " +
                  std::to_string(differing) + " differ";

  std::ostringstream s;
  s << "stage 1 " << Fmt("%.2f", r1.first) << " -> " << Fmt("%.2f", r1.tail) << ", stage 2 " << Fmt("%.2f", r2.first)
    << " -> " << Fmt("%.2f", r2.tail) << " (need final <= first - 0.8|first|, mean of last " << kTailSteps
    << " of " << kOverfitSteps << " steps), stage-2 SI-SNR " << Fmt("%.2f", vm.si_snr_in) << " -> "
    << Fmt("%.2f dB", vm.si_snr_out) << Fmt(" (improvement %+.2f dB)", vm.si_snr_improvement);
  return {r1.Dropped() && r2.Dropped() && vm.si_snr_improvement > 0.0, s.str()};
}

Outcome Rtf() {
  const auto model = models::BuildModel(models::ModelKind::kCascadeSDccsn, {}, 0);
  const models::RtfResult r = models::MeasureRtf(*model, 2.0, 1);
  return {r.rtf > 0.0 && std::isfinite(r.rtf) && !r.hardware.empty(),
          Fmt("cascade RTF %.3f on 2 s, 1 thread", r.rtf) + ", hardware \"" + r.hardware +
              "\" (published reference 1.478, context only)"};
}

}  // namespace

int main() {
  Report("param_counts", ParamCounts);
  Report("stft_round_trip", StftRoundTrip);
  Report("gradient_checks", GradChecks);
  Report("simulator_statistics", SimulatorStats);
  Report("loss_identities", LossIdentities);

  ToySetup toy;
  {
    degrade::ToyCorpusSpec spec;
    spec.speech = 8;
    spec.speech_seconds = 0.5;
    toy.manifest = degrade::WriteToyCorpus(toy.dir.path() + "/toy", spec);
    toy.banks = degrade::LoadCorpus(degrade::LoadManifest(toy.manifest));
  }
  Outcome freeze{false, "not run"};
  Report("overfit_sanity", [&] { return OverfitAndFreeze(toy, freeze); });
  Report("freeze_contract", [&] { return freeze; });
  Report("lr_schedule", LrTraces);
  Report("rtf", Rtf);
  std::printf("%s: %d failing\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
