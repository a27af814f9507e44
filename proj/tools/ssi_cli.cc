// Command-line front end: corpus simulation, training, enhancement,
// evaluation and model inspection.

#include <CLI11.hpp>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "ssi/audio/wav_io.h"
#include "ssi/common/error.h"
#include "ssi/degrade/toy_corpus.h"
#include "ssi/eval/corpus.h"
#include "ssi/eval/evaluate.h"
#include "ssi/models/checkpoint.h"
#include "ssi/models/rtf.h"
#include "ssi/train/trainer.h"

namespace {

using namespace ssi;

constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;

nlohmann::json ReadJsonFile(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ValidationError("cannot open " + path);
  try {
    return nlohmann::json::parse(f);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("malformed JSON in " + path + ": " + e.what());
  }
}

models::ModelConfig ModelConfigFrom(const std::string& path) {
  if (path.empty()) return {};
  try {
    return ReadJsonFile(path).get<models::ModelConfig>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("bad model config " + path + ": " + e.what());
  }
}

void WriteJson(const nlohmann::json& j, const std::string& path) {
  if (path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream f(path);
  if (!f) throw ValidationError("cannot write " + path);
  f << j.dump(2) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage speech signal improvement toolkit"};
  app.require_subcommand(1);

  // simulate
  eval::SimulateOptions sim_opt;
  std::string sim_config_path;
  auto* simulate = app.add_subcommand("simulate", "Write degraded/clean pairs with recipes");
  simulate->add_option("--manifest", sim_opt.manifest, "Corpus manifest (JSON lines)")->required();
  simulate->add_option("--out", sim_opt.out_dir, "Output directory")->required();
  simulate->add_option("--stage", sim_opt.stage, "Simulation stage (1 or 2)")->check(CLI::IsMember({1, 2}));
  simulate->add_option("--count", sim_opt.count, "Number of pairs");
  simulate->add_option("--segment-seconds", sim_opt.segment_seconds, "Crop length, 0 keeps whole clips");
  simulate->add_option("--seed", sim_opt.seed, "Random seed");
  simulate->add_option("--sim-config", sim_config_path, "Simulator config JSON");

  // train
  std::string train_config_path, train_init_ckpt;
  int train_stage = 0;
  std::optional<uint64_t> train_seed;
  auto* train = app.add_subcommand("train", "Train stage 1 (GateDCCRN) or stage 2 (frozen cascade)");
  train->add_option("--config", train_config_path, "Training config JSON")->required();
  train->add_option("--stage", train_stage, "Override the config's stage")->check(CLI::IsMember({1, 2}));
  train->add_option("--init-ckpt", train_init_ckpt, "Stage-1 checkpoint for stage 2");
  train->add_option("--seed", train_seed, "Override the config's seed");

  // enhance
  std::string enh_ckpt, enh_in, enh_out;
  auto* enhance = app.add_subcommand("enhance", "Enhance one WAV file");
  enhance->add_option("--ckpt", enh_ckpt, "Model checkpoint")->required();
  enhance->add_option("--in", enh_in, "Input WAV")->required();
  enhance->add_option("--out", enh_out, "Output WAV (float32)")->required();

  // evaluate
  std::string ev_ckpt, ev_pairs, ev_json, ev_csv;
  bool ev_identity = false;
  double ev_rtf_seconds = 0.0;
  auto* evaluate = app.add_subcommand("evaluate", "Score a model on simulated pairs");
  evaluate->add_option("--ckpt", ev_ckpt, "Model checkpoint");
  evaluate->add_flag("--identity", ev_identity, "Score the unprocessed inputs instead of a model");
  evaluate->add_option("--pairs", ev_pairs, "pairs.jsonl written by simulate")->required();
  evaluate->add_option("--out-json", ev_json, "JSON report path")->required();
  evaluate->add_option("--out-csv", ev_csv, "CSV report path");
  evaluate->add_option("--rtf-seconds", ev_rtf_seconds, "Also measure RTF on this much audio");

  // count-params
  std::string cp_model = "all", cp_config;
  auto* count = app.add_subcommand("count-params", "Print parameter counts");
  count->add_option("--model", cp_model, "Model kind or 'all'");
  count->add_option("--config", cp_config, "Model config JSON");

  // measure-rtf
  std::string rtf_ckpt, rtf_model = "gate_dccrn+s_dccsn", rtf_config;
  double rtf_seconds = 30.0;
  int rtf_runs = 3;
  auto* rtf = app.add_subcommand("measure-rtf", "Single-thread real-time factor");
  rtf->add_option("--ckpt", rtf_ckpt, "Checkpoint (otherwise a randomly initialised --model)");
  rtf->add_option("--model", rtf_model, "Model kind");
  rtf->add_option("--config", rtf_config, "Model config JSON");
  rtf->add_option("--seconds", rtf_seconds, "Audio duration");
  rtf->add_option("--runs", rtf_runs, "Runs (median reported)");

  // audit-corpus
  std::string audit_dir, audit_out;
  std::size_t audit_replay = 0;
  auto* audit = app.add_subcommand("audit-corpus", "Recipe statistics and replay check of a simulated corpus");
  audit->add_option("--dir", audit_dir, "Corpus directory")->required();
  audit->add_option("--replay", audit_replay, "Pairs to replay, 0 for all");
  audit->add_option("--out", audit_out, "Report JSON (stdout if omitted)");

  // make-toy-corpus
  std::string toy_dir;
  degrade::ToyCorpusSpec toy;
  auto* toy_cmd = app.add_subcommand("make-toy-corpus", "Write a small synthetic corpus and manifest");
  toy_cmd->add_option("--out", toy_dir, "Output directory")->required();
  toy_cmd->add_option("--speech", toy.speech, "Speech clips");
  toy_cmd->add_option("--noise", toy.noise, "Noise clips");
  toy_cmd->add_option("--rir", toy.rir, "Room impulse responses");
  toy_cmd->add_option("--speech-seconds", toy.speech_seconds, "Speech clip length");
  toy_cmd->add_option("--seed", toy.seed, "Random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitValidation;
  }

  try {
    if (*simulate) {
      if (!sim_config_path.empty()) sim_opt.sim = ReadJsonFile(sim_config_path).get<degrade::SimConfig>();
      const auto pairs = eval::SimulateCorpus(sim_opt);
      std::cout << "wrote " << pairs.size() << " pairs to " << sim_opt.out_dir << '\n';
    } else if (*train) {
      train::TrainConfig cfg = train::LoadTrainConfig(train_config_path);
      if (train_stage != 0) {
        cfg.stage = train_stage;
        if (cfg.stage == 2 && !models::IsCascade(cfg.model_kind)) cfg.model_kind = models::ModelKind::kCascadeSDccsn;
      }
      if (!train_init_ckpt.empty()) cfg.init_ckpt = train_init_ckpt;
      if (train_seed) cfg.seed = *train_seed;
      const train::TrainResult r = train::RunTraining(cfg, &std::cout);
      std::cout << "best checkpoint: " << r.best_checkpoint << '\n';
    } else if (*enhance) {
      const auto model = models::ModelFromCheckpoint(models::LoadCheckpoint(enh_ckpt));
      const audio::Waveform out = models::Enhance(*model, audio::ReadWav(enh_in));
      audio::WriteWav(enh_out, out, audio::WavSampleFormat::kFloat32);
    } else if (*evaluate) {
      Require(ev_identity != !ev_ckpt.empty(), "pass exactly one of --ckpt or --identity");
      const auto pairs = eval::LoadPairs(ev_pairs);
      eval::EvalReport report;
      if (ev_identity) {
        report = eval::Evaluate(pairs, [](const audio::Waveform& w) { return w; });
        report.model.kind = "identity";
      } else {
        const auto model = models::ModelFromCheckpoint(models::LoadCheckpoint(ev_ckpt));
        report = eval::Evaluate(pairs, [&](const audio::Waveform& w) { return models::Enhance(*model, w); },
                                model->config().stft);
        report.model.kind = models::ToString(model->kind());
        report.model.params = models::CountParams(model.get());
        report.model.hardware = models::HardwareString();
        if (ev_rtf_seconds > 0.0) report.model.rtf = models::MeasureRtf(*model, ev_rtf_seconds, 1).rtf;
      }
      eval::WriteReportJson(ev_json, report);
      if (!ev_csv.empty()) eval::WriteReportCsv(ev_csv, report);
      std::cout << "mean SI-SNR improvement " << report.aggregate.si_snr_improvement << " dB, LSD "
                << report.aggregate.lsd << " dB over " << report.files.size() << " files\n";
    } else if (*count) {
      const models::ModelConfig cfg = ModelConfigFrom(cp_config);
      std::vector<models::ModelKind> kinds;
      if (cp_model == "all") {
        kinds = {models::ModelKind::kDccrn, models::ModelKind::kGateDccrn, models::ModelKind::kSDccrn,
                 models::ModelKind::kSDccsn, models::ModelKind::kCascadeSDccrn, models::ModelKind::kCascadeSDccsn};
      } else {
        kinds = {models::ModelKindFromString(cp_model)};
      }
      for (auto k : kinds) {
        const auto m = models::BuildModel(k, cfg, 0);
        const int64_t n = models::CountParams(m.get());
        std::cout << models::ToString(k) << '\t' << n << '\t' << (static_cast<double>(n) / 1e6) << " M\n";
      }
    } else if (*rtf) {
      std::unique_ptr<models::SpectralModel> model =
          rtf_ckpt.empty() ? models::BuildModel(models::ModelKindFromString(rtf_model), ModelConfigFrom(rtf_config), 0)
                           : models::ModelFromCheckpoint(models::LoadCheckpoint(rtf_ckpt));
      const models::RtfResult r = models::MeasureRtf(*model, rtf_seconds, rtf_runs);
      WriteJson({{"model", models::ToString(model->kind())},
                 {"rtf", r.rtf},
                 {"runs", r.run_rtfs},
                 {"seconds", r.seconds},
                 {"threads", 1},
                 {"hardware", r.hardware}},
                "");
    } else if (*audit) {
      const eval::AuditReport r = eval::AuditCorpus(audit_dir, audit_replay);
      WriteJson(eval::ToJson(r), audit_out);
      if (r.replay_failures > 0) {
        std::cerr << r.replay_failures << " pairs failed replay\n";
        return kExitValidation;
      }
    } else if (*toy_cmd) {
      std::cout << degrade::WriteToyCorpus(toy_dir, toy) << '\n';
    }
  } catch (const ssi::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const ssi::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::filesystem::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitValidation;
  }
  return 0;
}
