#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "oracles.h"
#include "ssi/audio/fft.h"
#include "ssi/audio/metrics.h"
#include "ssi/audio/mixing.h"
#include "ssi/audio/resample.h"
#include "ssi/audio/stft.h"
#include "ssi/audio/wav_io.h"
#include "ssi/common/error.h"

namespace ssi::audio {
namespace {

using ssi::testing::DirectConvolve;
using ssi::testing::DirectDft;

Waveform Noise(size_t n, Rng& rng, double scale = 0.3) {
  std::vector<double> s(n);
  for (double& x : s) x = scale * rng.Normal();
  return Waveform(std::move(s), kFullBandRate);
}

Waveform Sine(double freq, double amp, size_t n, int rate) {
  std::vector<double> s(n);
  for (size_t i = 0; i < n; ++i) s[i] = amp * std::sin(2.0 * std::numbers::pi * freq * i / rate);
  return Waveform(std::move(s), rate);
}

// Least-squares amplitude of a sinusoid at `freq` over [begin, end).
double FitAmplitude(const Waveform& w, double freq, size_t begin, size_t end) {
  double ss = 0, sc = 0, cc = 0, ys = 0, yc = 0;
  for (size_t i = begin; i < end; ++i) {
    const double a = 2.0 * std::numbers::pi * freq * i / w.sample_rate;
    const double s = std::sin(a), c = std::cos(a);
    ss += s * s;
    sc += s * c;
    cc += c * c;
    ys += w.samples[i] * s;
    yc += w.samples[i] * c;
  }
  const double det = ss * cc - sc * sc;
  const double a = (ys * cc - yc * sc) / det;
  const double b = (yc * ss - ys * sc) / det;
  return std::hypot(a, b);
}

TEST(Fft, MatchesDirectDft) {
  Rng rng(1);
  for (int n : {16, 30, 1024}) {
    std::vector<double> x(n);
    for (double& v : x) v = rng.Normal();
    RealFft fft(n);
    std::vector<std::complex<double>> out(fft.bins());
    fft.Forward(x, out);
    const auto ref = DirectDft(x, n);
    for (int k = 0; k < fft.bins(); ++k) EXPECT_LT(std::abs(out[k] - ref[k]), 1e-9 * n);
    std::vector<double> back(n);
    fft.Inverse(out, back);
    for (int i = 0; i < n; ++i) EXPECT_NEAR(back[i] / n, x[i], 1e-12);
  }
}

TEST(Stft, FramingAt48k) {
  StftConfig cfg;
  EXPECT_EQ(cfg.FrameLength(48000), 960);
  EXPECT_EQ(cfg.HopLength(48000), 480);
  EXPECT_EQ(cfg.Bins(), 513);
  EXPECT_EQ(cfg.NumFrames(48000, 48000), 99);
  EXPECT_EQ(cfg.NumFrames(959, 48000), 0);
}

TEST(Stft, FramesMatchWindowedDirectDft) {
  Rng rng(2);
  const Waveform w = Noise(3000, rng);
  const StftConfig cfg;
  const auto s = Stft(w, cfg);
  const auto win = MakeWindow(cfg.window, 960);
  for (int t : {0, 2, s.frames - 1}) {
    std::vector<double> frame(960);
    for (int n = 0; n < 960; ++n) frame[n] = w.samples[t * 480 + n] * win[n];
    const auto ref = DirectDft(frame, cfg.fft_size);
    for (int k = 0; k < s.bins; k += 7) EXPECT_LT(std::abs(s.at(t, k) - ref[k]), 1e-9) << t << " " << k;
  }
}

TEST(Stft, SineConcentratesInItsBin) {
  // 1875 Hz sits exactly on bin 40 of a 1024-point FFT at 48 kHz.
  const double freq = 40.0 * 48000.0 / 1024.0;
  const Waveform w = Sine(freq, 0.5, 48000, 48000);
  const auto s = Stft(w);
  for (int t = 0; t < s.frames; ++t) {
    double total = 0, near = 0;
    for (int k = 0; k < s.bins; ++k) {
      const double e = std::norm(s.at(t, k));
      total += e;
      if (std::abs(k - 40) <= 2) near += e;
    }
    EXPECT_GE(near / total, 0.95);
  }
}

TEST(Stft, RoundTripInterior) {
  Rng rng(3);
  for (int trial = 0; trial < 5; ++trial) {
    const Waveform w = Noise(9600 + 480 * trial + 17, rng);
    const Waveform back = Istft(Stft(w));
    double err = 0, ref = 0;
    for (size_t i = 960; i + 960 < back.size(); ++i) {
      err += (back.samples[i] - w.samples[i]) * (back.samples[i] - w.samples[i]);
      ref += w.samples[i] * w.samples[i];
    }
    EXPECT_LT(std::sqrt(err / ref), 1e-6);
  }
}

TEST(Stft, SingleFrameInverseIsWindowNormalizedFrame) {
  Rng rng(4);
  const Waveform w = Noise(960, rng);
  const Waveform back = Istft(Stft(w));
  ASSERT_EQ(back.size(), 960u);
  EXPECT_EQ(back.samples[0], 0.0);  // window is zero there
  for (size_t i = 1; i < 960; ++i) EXPECT_NEAR(back.samples[i], w.samples[i], 1e-9);
}

TEST(Stft, ConsistencyProjectionIsIdempotent) {
  Rng rng(5);
  ComplexSpectrogram s;
  s.frames = 12;
  s.bins = 513;
  s.values.resize(s.frames * s.bins);
  for (auto& v : s.values) v = {rng.Normal(), rng.Normal()};
  for (int t = 0; t < s.frames; ++t) {
    s.at(t, 0).imag(0.0);
    s.at(t, 512).imag(0.0);
  }
  const auto p1 = Stft(Istft(s));
  const auto p2 = Stft(Istft(p1));
  double err = 0, ref = 0;
  for (size_t i = 0; i < p1.values.size(); ++i) {
    err += std::norm(p2.values[i] - p1.values[i]);
    ref += std::norm(p1.values[i]);
  }
  EXPECT_LT(std::sqrt(err / ref), 1e-6);
}

TEST(Stft, RejectsShortAndNonFinite) {
  EXPECT_THROW(Stft(Waveform(std::vector<double>(100, 0.0), 48000)), ValidationError);
  std::vector<double> bad(2000, 0.0);
  bad[5] = std::nan("");
  EXPECT_THROW(Stft(Waveform(bad, 48000)), ValidationError);
}

TEST(Resample, IdentityAtSameRate) {
  Rng rng(6);
  const Waveform w = Noise(1000, rng);
  const Waveform r = Resample(w, 48000);
  EXPECT_EQ(r.samples, w.samples);
}

TEST(Resample, LengthsFollowRateRatio) {
  Rng rng(7);
  const Waveform w = Noise(48001, rng);
  EXPECT_NEAR(static_cast<double>(Resample(w, 24000).size()), 24000.5, 1.0);
  EXPECT_EQ(Resample(w, 16000).sample_rate, 16000);
  EXPECT_EQ(Resample(w, 16000).size(), 16001u);
}

TEST(Resample, SineAmplitudeSurvivesDownsampling) {
  const Waveform w = Sine(1000.0, 0.5, 48000, 48000);
  const Waveform r = Resample(w, 8000);
  ASSERT_EQ(r.sample_rate, 8000);
  const double amp = FitAmplitude(r, 1000.0, 800, r.size() - 800);
  EXPECT_LT(std::abs(amp / 0.5 - 1.0), 0.01);
}

TEST(ConvolveRir, UnitImpulseIsIdentity) {
  Rng rng(8);
  const Waveform w = Noise(500, rng);
  const Waveform out = ConvolveRir(w, Waveform({1.0}, 48000));
  for (size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(out.samples[i], w.samples[i], 1e-12);
}

TEST(ConvolveRir, ScaledImpulseIsRenormalized) {
  Rng rng(9);
  const Waveform w = Noise(500, rng);
  const Waveform out = ConvolveRir(w, Waveform({0.5, 0.0, 0.0}, 48000));
  EXPECT_NEAR(Peak(out), Peak(w), 1e-12);
  for (size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(out.samples[i], w.samples[i], 1e-12);
}

TEST(ConvolveRir, TwoTapMatchesDirectConvolution) {
  const Waveform w({0.1, -0.4, 0.3, 0.2, -0.05}, 48000);
  const Waveform rir({1.0, 0.5}, 48000);
  auto ref = DirectConvolve(w.samples, rir.samples);
  ref.resize(w.size());
  double peak = 0;
  for (double v : ref) peak = std::max(peak, std::abs(v));
  const Waveform out = ConvolveRir(w, rir);
  ASSERT_EQ(out.size(), w.size());
  for (size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(out.samples[i], ref[i] * 0.4 / peak, 1e-12);
}

TEST(FftConvolve, MatchesDirect) {
  Rng rng(10);
  std::vector<double> a(300), b(77);
  for (double& v : a) v = rng.Normal();
  for (double& v : b) v = rng.Normal();
  const auto fast = FftConvolve(a, b);
  const auto ref = DirectConvolve(a, b);
  ASSERT_EQ(fast.size(), ref.size());
  for (size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(fast[i], ref[i], 1e-10);
}

TEST(ActivePower, ConstantSignal) {
  EXPECT_NEAR(ActivePower(Waveform(std::vector<double>(4800, 0.5), 48000)), 0.25, 1e-12);
}

TEST(ActivePower, SilentSignalThrows) {
  EXPECT_THROW(ActivePower(Waveform(std::vector<double>(4800, 0.0), 48000)), ValidationError);
}

TEST(ActivePower, HalfSilentUsesActiveHalf) {
  Rng rng(11);
  std::vector<double> s(9600, 0.0);
  double ms = 0;
  for (size_t i = 4800; i < 9600; ++i) {
    s[i] = 0.2 * rng.Normal();
    ms += s[i] * s[i];
  }
  EXPECT_NEAR(ActivePower(Waveform(s, 48000)), ms / 4800, 1e-12);
}

TEST(MixAtSnr, ZeroDbMatchesPowers) {
  Rng rng(12);
  const Waveform speech = Noise(9600, rng, 0.2), noise = Noise(5000, rng, 0.05);
  const auto mix = MixAtSnr(speech, noise, 0.0);
  EXPECT_LT(std::abs(10 * std::log10(MeanSquare(mix.scaled_noise) / ActivePower(speech))), 0.01);
  ASSERT_EQ(mix.mixture.size(), speech.size());
}

TEST(MixAtSnr, TwentyDbIsOnePercent) {
  Rng rng(13);
  const Waveform speech = Noise(9600, rng, 0.2), noise = Noise(9600, rng, 0.5);
  const auto mix = MixAtSnr(speech, noise, 20.0);
  EXPECT_NEAR(MeanSquare(mix.scaled_noise) / ActivePower(speech), 0.01, 1e-9);
}

TEST(MixAtSnr, RecomputedSnrFromComponents) {
  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const Waveform speech = Noise(4800 + 100 * trial, rng, 0.1 + 0.01 * trial);
    const Waveform noise = Noise(3000, rng, 0.3);
    const double snr = rng.Uniform(-5.0, 25.0);
    const auto mix = MixAtSnr(speech, noise, snr, trial * 37);
    std::vector<double> residual(speech.size());
    for (size_t i = 0; i < speech.size(); ++i) residual[i] = mix.mixture.samples[i] - speech.samples[i];
    double pn = 0;
    for (double v : residual) pn += v * v;
    pn /= residual.size();
    EXPECT_NEAR(10 * std::log10(ActivePower(speech) / pn), snr, 0.1);
  }
}

TEST(TileNoise, LoopsFromOffset) {
  const Waveform n({1, 2, 3}, 48000);
  EXPECT_EQ(TileNoise(n, 7, 1).samples, (std::vector<double>{2, 3, 1, 2, 3, 1, 2}));
}

TEST(WavIo, Float32RoundTripAndPcm16) {
  ssi::testing::TempDir dir("wav");
  const Waveform w({0.0, 0.25, -0.5, 0.999, -1.0}, 16000);
  WriteWav(dir.path() + "/a.wav", w);
  const Waveform r = ReadWav(dir.path() + "/a.wav");
  EXPECT_EQ(r.sample_rate, 16000);
  ASSERT_EQ(r.size(), w.size());
  for (size_t i = 0; i < w.size(); ++i) EXPECT_EQ(r.samples[i], static_cast<double>(static_cast<float>(w.samples[i])));
  WriteWav(dir.path() + "/b.wav", w, WavSampleFormat::kPcm16);
  const Waveform p = ReadWav(dir.path() + "/b.wav");
  ASSERT_EQ(p.size(), w.size());
  for (size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(p.samples[i], w.samples[i], 1.0 / 32767);
  EXPECT_THROW(ReadWav(dir.path() + "/missing.wav"), ValidationError);
}

TEST(Metrics, SiSnrCapAndScaleInvariance) {
  Rng rng(15);
  const Waveform ref = Noise(4000, rng);
  EXPECT_DOUBLE_EQ(SiSnrDb(ref.samples, ref.samples), 50.0);
  std::vector<double> est(ref.samples);
  for (size_t i = 0; i < est.size(); ++i) est[i] += 0.1 * rng.Normal();
  std::vector<double> scaled(est);
  for (double& v : scaled) v *= 3.7;
  EXPECT_NEAR(SiSnrDb(est, ref.samples), SiSnrDb(scaled, ref.samples), 1e-9);
  EXPECT_THROW(SiSnrDb(est, std::vector<double>(est.size(), 0.0)), ValidationError);
}

TEST(Metrics, LsdIdentityAndTenfold) {
  Rng rng(16);
  const Waveform w = Noise(4800, rng);
  const auto s = Stft(w);
  EXPECT_NEAR(Lsd(s, s), 0.0, 1e-12);
  auto louder = s;
  for (auto& v : louder.values) v *= 10.0;
  EXPECT_NEAR(Lsd(louder, s), 20.0, 1e-9);
}

TEST(Metrics, LsdMatchesBruteForce) {
  Rng rng(17);
  const auto a = Stft(Noise(4800, rng)), b = Stft(Noise(4800, rng));
  double total = 0;
  for (int t = 0; t < a.frames; ++t) {
    double acc = 0;
    for (int k = 0; k < a.bins; ++k) {
      const double ea = std::max(std::abs(a.at(t, k)), 1e-8), eb = std::max(std::abs(b.at(t, k)), 1e-8);
      const double d = 10 * std::log10(ea * ea / (eb * eb));
      acc += d * d;
    }
    total += std::sqrt(acc / a.bins);
  }
  EXPECT_NEAR(Lsd(a, b), total / a.frames, 1e-9);
}

TEST(Metrics, ClippedFraction) {
  const Waveform w({1.0, -1.0, 0.5, 0.9995, 0.1}, 48000);
  EXPECT_DOUBLE_EQ(ClippedFraction(w), 3.0 / 5.0);
}

}  // namespace
}  // namespace ssi::audio
