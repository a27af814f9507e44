#include "ssi/degrade/manifest.h"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "ssi/audio/resample.h"
#include "ssi/audio/wav_io.h"
#include "ssi/common/error.h"

namespace ssi::degrade {

namespace fs = std::filesystem;

namespace {

SourceKind KindFromString(const std::string& s) {
  if (s == "speech") return SourceKind::kSpeech;
  if (s == "noise") return SourceKind::kNoise;
  if (s == "rir") return SourceKind::kRir;
  throw ValidationError("unknown manifest kind: " + s);
}

const char* KindName(SourceKind k) {
  switch (k) {
    case SourceKind::kSpeech: return "speech";
    case SourceKind::kNoise: return "noise";
    case SourceKind::kRir: return "rir";
  }
  return "?";
}

void LoadInto(AudioBank& bank, const std::vector<ManifestEntry>& entries) {
  for (const auto& e : entries) {
    audio::Waveform w = audio::ReadWav(e.path);
    if (w.sample_rate != audio::kFullBandRate) w = audio::Resample(w, audio::kFullBandRate);
    Require(!w.empty(), "manifest file is empty: " + e.path);
    bank.Add(fs::path(e.path).stem().string(), std::move(w));
  }
}

}  // namespace

CorpusManifest LoadManifest(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open manifest: " + path);
  const fs::path base = fs::path(path).parent_path();
  CorpusManifest m;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
    ManifestEntry e;
    fs::path p = j.at("path").get<std::string>();
    if (p.is_relative()) p = base / p;
    e.path = p.lexically_normal().string();
    e.kind = KindFromString(j.at("kind").get<std::string>());
    e.duration_s = j.value("duration_s", 0.0);
    Require(fs::exists(e.path), "manifest references a missing file: " + e.path);
    switch (e.kind) {
      case SourceKind::kSpeech: m.speech.push_back(e); break;
      case SourceKind::kNoise: m.noise.push_back(e); break;
      case SourceKind::kRir: m.rir.push_back(e); break;
    }
  }
  return m;
}

void WriteManifest(const std::string& path, const CorpusManifest& m) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write manifest: " + path);
  for (const auto* list : {&m.speech, &m.noise, &m.rir}) {
    for (const auto& e : *list) {
      out << nlohmann::json{{"path", e.path}, {"kind", KindName(e.kind)}, {"duration_s", e.duration_s}}.dump()
          << "\n";
    }
  }
}

CorpusBanks LoadCorpus(const CorpusManifest& m) {
  CorpusBanks b;
  LoadInto(b.speech, m.speech);
  LoadInto(b.noise, m.noise);
  LoadInto(b.rir, m.rir);
  return b;
}

}  // namespace ssi::degrade
