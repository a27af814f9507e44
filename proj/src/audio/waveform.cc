#include "ssi/audio/waveform.h"

#include <cmath>
#include <string>

#include "ssi/common/error.h"

namespace ssi::audio {

void Waveform::Validate() const {
  Require(sample_rate > 0, "sample rate must be positive, got " + std::to_string(sample_rate));
  for (double s : samples) {
    if (!std::isfinite(s)) throw ValidationError("waveform contains non-finite samples");
  }
}

double Peak(const Waveform& w) {
  double p = 0.0;
  for (double s : w.samples) p = std::max(p, std::abs(s));
  return p;
}

double MeanSquare(const Waveform& w) {
  if (w.empty()) return 0.0;
  double acc = 0.0;
  for (double s : w.samples) acc += s * s;
  return acc / static_cast<double>(w.size());
}

}  // namespace ssi::audio
