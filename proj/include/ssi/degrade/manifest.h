#pragma once

#include <string>
#include <vector>

#include "ssi/degrade/simulator.h"

namespace ssi::degrade {

enum class SourceKind { kSpeech, kNoise, kRir };

struct ManifestEntry {
  std::string path;
  SourceKind kind = SourceKind::kSpeech;
  double duration_s = 0.0;
};

// JSON-lines, one {"path", "kind": "speech"|"noise"|"rir", "duration_s"} per
// line. Relative paths resolve against the manifest's directory.
struct CorpusManifest {
  std::vector<ManifestEntry> speech;
  std::vector<ManifestEntry> noise;
  std::vector<ManifestEntry> rir;
};

CorpusManifest LoadManifest(const std::string& path);
void WriteManifest(const std::string& path, const CorpusManifest& m);

struct CorpusBanks {
  AudioBank speech;
  AudioBank noise;
  AudioBank rir;
};

// Reads every referenced file; clips not at 48 kHz are resampled to it.
CorpusBanks LoadCorpus(const CorpusManifest& m);

}  // namespace ssi::degrade
