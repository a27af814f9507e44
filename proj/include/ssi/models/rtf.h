#pragma once

#include <string>
#include <vector>

#include "ssi/models/networks.h"

namespace ssi::models {

struct RtfResult {
  double rtf = 0.0;  // median over runs
  std::vector<double> run_rtfs;
  double seconds = 0.0;
  int runs = 0;
  std::string hardware;
};

// CPU model string from /proc/cpuinfo, or "unknown".
std::string HardwareString();

// Processing time / audio duration for `seconds` of random input, median of
// `runs` single-threaded runs.
RtfResult MeasureRtf(const SpectralModel& model, double seconds = 30.0, int runs = 3, uint64_t seed = 0);

}  // namespace ssi::models
