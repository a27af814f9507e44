#include "ssi/models/rtf.h"

#include <Eigen/Core>
#include <algorithm>
#include <chrono>
#include <fstream>

#include "ssi/common/error.h"
#include "ssi/common/rng.h"

namespace ssi::models {

std::string HardwareString() {
  std::ifstream f("/proc/cpuinfo");
  std::string line;
  while (std::getline(f, line)) {
    if (line.rfind("model name", 0) == 0) {
      const auto colon = line.find(':');
      if (colon != std::string::npos) {
        std::string s = line.substr(colon + 1);
        s.erase(0, s.find_first_not_of(' '));
        return s;
      }
    }
  }
  return "unknown";
}

RtfResult MeasureRtf(const SpectralModel& model, double seconds, int runs, uint64_t seed) {
  Require(seconds > 0.0, "RTF duration must be positive");
  Require(runs > 0, "RTF needs at least one run");
  Eigen::setNbThreads(1);
  const int rate = model.config().sample_rate;
  Rng rng(seed);
  audio::Waveform w;
  w.sample_rate = rate;
  w.samples.resize(static_cast<size_t>(seconds * rate));
  for (double& s : w.samples) s = 0.1 * rng.Normal();

  RtfResult r;
  r.seconds = w.DurationSeconds();
  r.runs = runs;
  r.hardware = HardwareString();
  for (int i = 0; i < runs; ++i) {
    const auto start = std::chrono::steady_clock::now();
    const audio::Waveform out = Enhance(model, w);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    r.run_rtfs.push_back(elapsed.count() / r.seconds);
  }
  std::vector<double> sorted = r.run_rtfs;
  std::sort(sorted.begin(), sorted.end());
  r.rtf = sorted.size() % 2 ? sorted[sorted.size() / 2]
                            : 0.5 * (sorted[sorted.size() / 2 - 1] + sorted[sorted.size() / 2]);
  return r;
}

}  // namespace ssi::models
