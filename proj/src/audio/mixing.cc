#include "ssi/audio/mixing.h"

#include <cmath>
#include <complex>

#include "ssi/audio/fft.h"
#include "ssi/common/error.h"

namespace ssi::audio {

std::vector<double> FftConvolve(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) return {};
  const size_t out_len = a.size() + b.size() - 1;
  int n = 1;
  while (static_cast<size_t>(n) < out_len) n <<= 1;
  RealFft fft(n);
  std::vector<double> pa(n, 0.0), pb(n, 0.0);
  std::copy(a.begin(), a.end(), pa.begin());
  std::copy(b.begin(), b.end(), pb.begin());
  std::vector<std::complex<double>> fa(fft.bins()), fb(fft.bins());
  fft.Forward(pa, fa);
  fft.Forward(pb, fb);
  for (int k = 0; k < fft.bins(); ++k) fa[k] *= fb[k];
  fft.Inverse(fa, pa);
  std::vector<double> out(out_len);
  for (size_t i = 0; i < out_len; ++i) out[i] = pa[i] / n;
  return out;
}

Waveform ConvolveRir(const Waveform& w, const Waveform& rir) {
  w.Validate();
  rir.Validate();
  Require(w.sample_rate == rir.sample_rate, "speech and RIR sample rates differ");
  Require(!rir.empty(), "RIR is empty");
  if (w.empty()) return w;
  std::vector<double> full = FftConvolve(w.samples, rir.samples);
  full.resize(w.size());
  Waveform out(std::move(full), w.sample_rate);
  const double in_peak = Peak(w);
  const double out_peak = Peak(out);
  if (out_peak > 0.0) {
    const double g = in_peak / out_peak;
    for (double& s : out.samples) s *= g;
  }
  return out;
}

namespace {

struct Activity {
  double energy = 0.0;
  size_t count = 0;
};

Activity MeasureActivity(const Waveform& w) {
  const size_t frame = static_cast<size_t>(std::lround(kActivityFrameMs * w.sample_rate / 1000.0));
  const double floor_ms = std::pow(10.0, kActivityFloorDb / 10.0);
  Activity a;
  for (size_t start = 0; start < w.size(); start += frame) {
    const size_t end = std::min(w.size(), start + frame);
    double e = 0.0;
    for (size_t i = start; i < end; ++i) e += w.samples[i] * w.samples[i];
    if (e / static_cast<double>(end - start) > floor_ms) {
      a.energy += e;
      a.count += end - start;
    }
  }
  return a;
}

}  // namespace

double ActivePower(const Waveform& w) {
  w.Validate();
  Require(!w.empty(), "cannot measure the power of an empty signal");
  const Activity a = MeasureActivity(w);
  Require(a.count > 0, "signal has no active frames above the -50 dBFS floor");
  return a.energy / static_cast<double>(a.count);
}

bool HasActiveFrames(const Waveform& w) { return !w.empty() && MeasureActivity(w).count > 0; }

Waveform TileNoise(const Waveform& noise, size_t length, size_t offset) {
  Require(!noise.empty(), "noise is empty");
  Waveform out;
  out.sample_rate = noise.sample_rate;
  out.samples.resize(length);
  const size_t n = noise.size();
  size_t pos = offset % n;
  for (size_t i = 0; i < length; ++i) {
    out.samples[i] = noise.samples[pos];
    if (++pos == n) pos = 0;
  }
  return out;
}

MixResult MixAtSnr(const Waveform& speech, const Waveform& noise, double snr_db, size_t noise_offset) {
  speech.Validate();
  noise.Validate();
  Require(speech.sample_rate == noise.sample_rate, "speech and noise sample rates differ");
  Require(std::isfinite(snr_db), "SNR must be finite");
  const double speech_power = ActivePower(speech);
  Waveform tiled = TileNoise(noise, speech.size(), noise_offset);
  const double noise_power = MeanSquare(tiled);
  Require(noise_power > 0.0, "noise is silent");

  MixResult r;
  r.noise_gain = std::sqrt(speech_power / (noise_power * std::pow(10.0, snr_db / 10.0)));
  r.scaled_noise = std::move(tiled);
  for (double& s : r.scaled_noise.samples) s *= r.noise_gain;
  r.mixture = speech;
  for (size_t i = 0; i < speech.size(); ++i) r.mixture.samples[i] += r.scaled_noise.samples[i];
  return r;
}

double MeasureSnrDb(const Waveform& speech, const Waveform& noise) {
  const double pn = MeanSquare(noise);
  Require(pn > 0.0, "noise is silent");
  return 10.0 * std::log10(ActivePower(speech) / pn);
}

}  // namespace ssi::audio
