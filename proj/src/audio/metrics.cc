#include "ssi/audio/metrics.h"

#include <algorithm>
#include <cmath>

#include "ssi/common/error.h"

namespace ssi::audio {

namespace {

// Zero-mean reference energy at or below this counts as silence.
constexpr double kSilentEnergy = 1e-12;

}  // namespace

double SiSnrDb(std::span<const double> est, std::span<const double> ref, double cap_db) {
  Require(est.size() == ref.size() && !ref.empty(), "SI-SNR needs equal, non-zero lengths");
  const double n = static_cast<double>(ref.size());
  double me = 0.0, mr = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    me += est[i];
    mr += ref[i];
  }
  me /= n;
  mr /= n;
  double dot = 0.0, rr = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    dot += (est[i] - me) * (ref[i] - mr);
    rr += (ref[i] - mr) * (ref[i] - mr);
  }
  Require(rr > kSilentEnergy, "SI-SNR reference is silent");
  const double alpha = dot / rr;
  double ss = 0.0, nn = 0.0;
  for (size_t i = 0; i < ref.size(); ++i) {
    const double s = alpha * (ref[i] - mr);
    const double e = (est[i] - me) - s;
    ss += s * s;
    nn += e * e;
  }
  if (nn == 0.0) return cap_db;
  if (ss == 0.0) return -cap_db;
  return std::clamp(10.0 * std::log10(ss / nn), -cap_db, cap_db);
}

double Lsd(const ComplexSpectrogram& est, const ComplexSpectrogram& ref, double floor) {
  Require(est.frames == ref.frames && est.bins == ref.bins && est.frames > 0, "LSD needs equally shaped spectrograms");
  double total = 0.0;
  for (int t = 0; t < est.frames; ++t) {
    double acc = 0.0;
    for (int k = 0; k < est.bins; ++k) {
      const size_t i = static_cast<size_t>(t) * est.bins + k;
      const double e = std::max(std::abs(est.values[i]), floor);
      const double r = std::max(std::abs(ref.values[i]), floor);
      const double d = 20.0 * std::log10(e / r);
      acc += d * d;
    }
    total += std::sqrt(acc / est.bins);
  }
  return total / est.frames;
}

double Lsd(const Waveform& est, const Waveform& ref, const StftConfig& cfg) {
  Require(est.size() == ref.size() && est.sample_rate == ref.sample_rate, "LSD needs matching waveforms");
  return Lsd(Stft(est, cfg), Stft(ref, cfg));
}

double ClippedFraction(const Waveform& w, double threshold) {
  if (w.empty()) return 0.0;
  const auto n = std::count_if(w.samples.begin(), w.samples.end(), [&](double s) { return std::abs(s) >= threshold; });
  return static_cast<double>(n) / static_cast<double>(w.size());
}

}  // namespace ssi::audio
