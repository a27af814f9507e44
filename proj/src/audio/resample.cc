#include "ssi/audio/resample.h"

#include <cmath>
#include <numbers>
#include <numeric>

#include "ssi/common/error.h"

namespace ssi::audio {

namespace {

// Zeroth-order modified Bessel function of the first kind (power series).
double BesselI0(double x) {
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double KaiserBeta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db >= 21.0) return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  return 0.0;
}

constexpr double kResampleStopbandDb = 80.0;

}  // namespace

std::vector<double> DesignLowpass(double cutoff_hz, double transition_hz, double sample_rate,
                                  double stopband_db, double gain) {
  Require(sample_rate > 0 && cutoff_hz > 0 && cutoff_hz < sample_rate / 2,
          "lowpass cutoff must lie in (0, nyquist)");
  Require(transition_hz > 0, "transition width must be positive");
  const double delta_omega = 2.0 * std::numbers::pi * transition_hz / sample_rate;
  int taps = static_cast<int>(std::ceil((stopband_db - 8.0) / (2.285 * delta_omega))) + 1;
  if (taps % 2 == 0) ++taps;
  const double beta = KaiserBeta(stopband_db);
  const double fc = cutoff_hz / sample_rate;
  const int mid = (taps - 1) / 2;
  const double i0_beta = BesselI0(beta);
  std::vector<double> h(taps);
  double sum = 0.0;
  for (int n = 0; n < taps; ++n) {
    const double m = n - mid;
    const double sinc = m == 0 ? 2.0 * fc : std::sin(2.0 * std::numbers::pi * fc * m) / (std::numbers::pi * m);
    const double r = static_cast<double>(m) / mid;
    const double win = BesselI0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0_beta;
    h[n] = sinc * win;
    sum += h[n];
  }
  for (double& v : h) v *= gain / sum;
  return h;
}

std::vector<double> FilterSame(std::span<const double> x, std::span<const double> taps) {
  const long n = static_cast<long>(x.size());
  const long k = static_cast<long>(taps.size());
  const long delay = (k - 1) / 2;
  std::vector<double> y(x.size(), 0.0);
  for (long i = 0; i < n; ++i) {
    // y[i] = sum_j taps[j] * x[i + delay - j]
    const long j_lo = std::max(0L, i + delay - (n - 1));
    const long j_hi = std::min(k - 1, i + delay);
    double acc = 0.0;
    for (long j = j_lo; j <= j_hi; ++j) acc += taps[j] * x[i + delay - j];
    y[i] = acc;
  }
  return y;
}

Waveform Resample(const Waveform& w, int target_rate) {
  Require(target_rate > 0, "target sample rate must be positive");
  w.Validate();
  if (target_rate == w.sample_rate) return w;

  const long g = std::gcd(static_cast<long>(w.sample_rate), static_cast<long>(target_rate));
  const long up = target_rate / g;
  const long down = w.sample_rate / g;
  const double high_rate = static_cast<double>(w.sample_rate) * up;
  const double nyquist = std::min(w.sample_rate, target_rate) / 2.0;
  // Passband edge 0.9 * nyquist, stopband edge at nyquist.
  const std::vector<double> h =
      DesignLowpass(0.95 * nyquist, 0.1 * nyquist, high_rate, kResampleStopbandDb, static_cast<double>(up));
  const long taps = static_cast<long>(h.size());
  const long delay = (taps - 1) / 2;

  const long in_len = static_cast<long>(w.size());
  const long out_len = (in_len * up + down - 1) / down;
  std::vector<double> y(out_len, 0.0);
  for (long m = 0; m < out_len; ++m) {
    // Upsampled index j = m * down + delay - tap; only j divisible by `up` carry samples.
    const long j0 = m * down + delay;
    long tap = j0 % up;
    double acc = 0.0;
    for (; tap < taps; tap += up) {
      const long src = (j0 - tap) / up;
      if (src < 0) break;
      if (src < in_len) acc += h[tap] * w.samples[src];
    }
    y[m] = acc;
  }
  return Waveform(std::move(y), target_rate);
}

}  // namespace ssi::audio
