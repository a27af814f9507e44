#include "ssi/eval/corpus.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "ssi/audio/mixing.h"
#include "ssi/audio/wav_io.h"
#include "ssi/common/error.h"
#include "ssi/common/rng.h"
#include "ssi/degrade/distortions.h"
#include "ssi/degrade/simulator.h"

namespace ssi::eval {

namespace fs = std::filesystem;

namespace {

constexpr double kCiZ = 2.576;

std::string PairId(int i) {
  std::ostringstream s;
  s << "pair_" << std::setw(6) << std::setfill('0') << i;
  return s.str();
}

audio::Waveform Crop(const audio::Waveform& w, std::size_t offset, std::size_t length) {
  Require(offset + length <= w.size(), "crop exceeds the source clip");
  audio::Waveform out;
  out.sample_rate = w.sample_rate;
  out.samples.assign(w.samples.begin() + static_cast<long>(offset),
                     w.samples.begin() + static_cast<long>(offset + length));
  return out;
}

nlohmann::json PairJson(const PairEntry& p) {
  return {{"id", p.id},
          {"input", fs::path(p.input).filename().string()},
          {"target", fs::path(p.target).filename().string()},
          {"source_index", p.source_index},
          {"source_id", p.source_id},
          {"crop_offset", p.crop_offset},
          {"length", p.length},
          {"recipe", p.recipe}};
}

bool SameAsFloat32(const audio::Waveform& a, const audio::Waveform& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (static_cast<float>(a.samples[i]) != static_cast<float>(b.samples[i])) return false;
  }
  return true;
}

FractionCheck Fraction(const std::string& name, std::size_t hits, std::size_t total, double expected) {
  FractionCheck f;
  f.name = name;
  f.hits = hits;
  f.total = total;
  f.expected = expected;
  f.observed = total ? static_cast<double>(hits) / static_cast<double>(total) : 0.0;
  f.ci_half_width = total ? kCiZ * std::sqrt(expected * (1.0 - expected) / static_cast<double>(total)) : 0.0;
  f.within = total > 0 && std::abs(f.observed - expected) <= f.ci_half_width;
  return f;
}

}  // namespace

std::vector<PairEntry> SimulateCorpus(const SimulateOptions& opt) {
  opt.sim.Validate();
  Require(opt.stage == 1 || opt.stage == 2, "stage must be 1 or 2");
  Require(opt.count > 0, "count must be positive");
  Require(opt.segment_seconds >= 0.0, "segment length must be non-negative");
  const degrade::CorpusBanks banks = degrade::LoadCorpus(degrade::LoadManifest(opt.manifest));
  Require(!banks.speech.empty(), "manifest has no speech clips");
  if (opt.stage == 2) Require(!banks.noise.empty() && !banks.rir.empty(), "stage 2 needs noise and RIR clips");

  fs::create_directories(opt.out_dir);
  const fs::path dir(opt.out_dir);
  std::ofstream pairs(dir / "pairs.jsonl", std::ios::trunc);
  if (!pairs) throw ValidationError("cannot write " + (dir / "pairs.jsonl").string());

  std::vector<PairEntry> out;
  for (int i = 0; i < opt.count; ++i) {
    Rng rng = Rng::Derive({opt.seed, static_cast<uint64_t>(i)});
    PairEntry p;
    p.id = PairId(i);
    p.source_index = static_cast<std::size_t>(i) % banks.speech.size();
    p.source_id = banks.speech.ids[p.source_index];
    const audio::Waveform& source = banks.speech.clips[p.source_index];
    const auto segment = static_cast<std::size_t>(std::llround(opt.segment_seconds * audio::kFullBandRate));
    p.length = segment > 0 && segment < source.size() ? segment : source.size();
    p.crop_offset = p.length < source.size() ? degrade::PickCropOffset(source, p.length, rng) : 0;
    const audio::Waveform clean = Crop(source, p.crop_offset, p.length);
    const degrade::SimResult sim = opt.stage == 1 ? degrade::SimulateStage1(clean, opt.sim, rng)
                                                  : degrade::SimulateStage2(clean, opt.sim, rng, banks.noise, banks.rir);
    p.recipe = sim.recipe;
    p.input = (dir / (p.id + "_input.wav")).string();
    p.target = (dir / (p.id + "_target.wav")).string();
    audio::WriteWav(p.input, sim.input, audio::WavSampleFormat::kFloat32);
    audio::WriteWav(p.target, sim.target, audio::WavSampleFormat::kFloat32);
    pairs << PairJson(p).dump() << '\n';
    out.push_back(std::move(p));
  }

  nlohmann::json meta{{"manifest", fs::absolute(opt.manifest).string()},
                      {"stage", opt.stage},
                      {"count", opt.count},
                      {"segment_seconds", opt.segment_seconds},
                      {"seed", opt.seed},
                      {"sim", opt.sim}};
  std::ofstream(dir / "corpus.json") << meta.dump(2) << '\n';
  return out;
}

std::vector<PairEntry> LoadPairs(const std::string& pairs_path) {
  std::ifstream in(pairs_path);
  if (!in) throw ValidationError("cannot open pairs file: " + pairs_path);
  const fs::path base = fs::path(pairs_path).parent_path();
  std::vector<PairEntry> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      PairEntry p;
      p.id = j.at("id").get<std::string>();
      auto resolve = [&](const std::string& s) {
        fs::path q(s);
        return (q.is_relative() ? base / q : q).lexically_normal().string();
      };
      p.input = resolve(j.at("input").get<std::string>());
      p.target = resolve(j.at("target").get<std::string>());
      p.source_index = j.value("source_index", std::size_t{0});
      p.source_id = j.value("source_id", std::string());
      p.crop_offset = j.value("crop_offset", std::size_t{0});
      p.length = j.value("length", std::size_t{0});
      if (j.contains("recipe")) p.recipe = j.at("recipe").get<degrade::DistortionRecipe>();
      out.push_back(std::move(p));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(pairs_path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

AuditReport AuditCorpus(const std::string& dir, std::size_t replay_limit) {
  const fs::path root(dir);
  Require(fs::is_directory(root), "corpus directory does not exist: " + dir);
  const fs::path pairs_path = root / "pairs.jsonl";
  const fs::path meta_path = root / "corpus.json";
  Require(fs::exists(pairs_path) && fs::exists(meta_path), "no simulated corpus found in " + dir);
  const std::vector<PairEntry> pairs = LoadPairs(pairs_path.string());
  Require(!pairs.empty(), "corpus is empty: " + dir);

  nlohmann::json meta;
  std::ifstream(meta_path) >> meta;
  const degrade::SimConfig sim = meta.at("sim").get<degrade::SimConfig>();
  AuditReport r;
  r.pairs = pairs.size();
  r.stage = meta.at("stage").get<int>();

  std::size_t coloration = 0, discontinuity = 0, loudness = 0, lowpass = 0, reverb = 0;
  for (const auto& p : pairs) {
    switch (p.recipe.category) {
      case degrade::Category::kColoration:
        ++coloration;
        if (p.recipe.branch == degrade::ColorationBranch::kLowpass) ++lowpass;
        break;
      case degrade::Category::kDiscontinuity: {
        ++discontinuity;
        const auto mask = degrade::DiscontinuityMask(p.length, audio::kFullBandRate, sim.disc_window_ms,
                                                     sim.disc_zero_prob, p.recipe.mask_seed);
        for (bool z : mask) r.zeroed_windows += z ? 1 : 0;
        r.total_windows += mask.size();
        break;
      }
      case degrade::Category::kLoudness: ++loudness; break;
    }
    if (p.recipe.reverb) ++reverb;
  }
  const std::size_t n = pairs.size();
  r.fractions.push_back(Fraction("coloration", coloration, n, sim.p_coloration));
  r.fractions.push_back(Fraction("discontinuity", discontinuity, n, sim.p_discontinuity));
  r.fractions.push_back(Fraction("loudness", loudness, n, sim.p_loudness));
  r.fractions.push_back(Fraction("lowpass_within_coloration", lowpass, coloration, sim.p_lowpass_within_coloration));
  r.fractions.push_back(Fraction("zeroed_windows", r.zeroed_windows, r.total_windows, sim.disc_zero_prob));
  if (r.stage == 2) r.fractions.push_back(Fraction("reverb", reverb, n, sim.reverb_prob));

  // Replay from the original sources.
  const degrade::CorpusBanks banks =
      degrade::LoadCorpus(degrade::LoadManifest(meta.at("manifest").get<std::string>()));
  const std::size_t limit = replay_limit == 0 ? n : std::min(n, replay_limit);
  for (std::size_t i = 0; i < limit; ++i) {
    const PairEntry& p = pairs[i];
    bool ok = p.source_index < banks.speech.size() && banks.speech.ids[p.source_index] == p.source_id;
    if (ok) {
      const audio::Waveform clean = Crop(banks.speech.clips[p.source_index], p.crop_offset, p.length);
      const degrade::SimResult sim_out = degrade::ApplyRecipe(clean, p.recipe, sim, banks.noise, banks.rir);
      ok = SameAsFloat32(sim_out.input, audio::ReadWav(p.input)) &&
           SameAsFloat32(sim_out.target, audio::ReadWav(p.target));
      if (r.stage == 2) {
        const double snr = audio::MeasureSnrDb(sim_out.speech_component, sim_out.noise_component);
        r.max_snr_error_db = std::max(r.max_snr_error_db, std::abs(snr - p.recipe.snr_db));
      }
    }
    ++r.replayed;
    if (!ok) {
      ++r.replay_failures;
      r.failed_ids.push_back(p.id);
    }
  }
  return r;
}

nlohmann::json ToJson(const AuditReport& r) {
  nlohmann::json fractions = nlohmann::json::array();
  for (const auto& f : r.fractions) {
    fractions.push_back({{"name", f.name},
                         {"hits", f.hits},
                         {"total", f.total},
                         {"expected", f.expected},
                         {"observed", f.observed},
                         {"ci99_half_width", f.ci_half_width},
                         {"within_ci", f.within}});
  }
  return {{"pairs", r.pairs},
          {"stage", r.stage},
          {"fractions", fractions},
          {"zeroed_windows", r.zeroed_windows},
          {"total_windows", r.total_windows},
          {"max_snr_error_db", r.max_snr_error_db},
          {"replayed", r.replayed},
          {"replay_failures", r.replay_failures},
          {"failed_ids", r.failed_ids}};
}

}  // namespace ssi::eval
