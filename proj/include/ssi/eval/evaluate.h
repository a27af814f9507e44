#pragma once

#include <functional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssi/audio/stft.h"
#include "ssi/eval/corpus.h"

namespace ssi::eval {

using Enhancer = std::function<audio::Waveform(const audio::Waveform&)>;

struct FileMetrics {
  std::string id;
  double si_snr_in = 0.0;
  double si_snr_out = 0.0;
  double si_snr_improvement = 0.0;
  double lsd = 0.0;
  double clipped_fraction = 0.0;
  double duration_s = 0.0;
};

struct ModelInfo {
  std::string kind;
  int64_t params = 0;
  double rtf = 0.0;
  std::string hardware;
};

struct EvalReport {
  std::vector<FileMetrics> files;
  FileMetrics aggregate;  // mean of the per-file values, id "mean"
  ModelInfo model;
};

// Enhances every pair's input and scores it against the target. Files are
// processed in list order; input files are only read.
EvalReport Evaluate(const std::vector<PairEntry>& pairs, const Enhancer& enhance,
                    const audio::StftConfig& stft = {});

nlohmann::json ToJson(const EvalReport& r);
void WriteReportJson(const std::string& path, const EvalReport& r);
void WriteReportCsv(const std::string& path, const EvalReport& r);

}  // namespace ssi::eval
