#include "ssi/nn/spectral.h"

#include <complex>

#include "ssi/audio/fft.h"
#include "ssi/common/error.h"

namespace ssi::nn {

namespace {

constexpr double kNormFloor = 1e-10;

struct Framing {
  int frame, hop, fft_size, bins;
  std::vector<double> window;
};

Framing MakeFraming(const audio::StftConfig& cfg, int sample_rate) {
  cfg.Validate(sample_rate);
  Framing f;
  f.frame = cfg.FrameLength(sample_rate);
  f.hop = cfg.HopLength(sample_rate);
  f.fft_size = cfg.fft_size;
  f.bins = cfg.Bins();
  f.window = audio::MakeWindow(cfg.window, f.frame);
  return f;
}

}  // namespace

Tensor StftOp(const Tensor& wave, const audio::StftConfig& cfg, int sample_rate) {
  Require(wave.rank() == 2, "StftOp expects [N, L]");
  const Framing f = MakeFraming(cfg, sample_rate);
  const int64_t n = wave.dim(0), len = wave.dim(1);
  const int64_t frames = cfg.NumFrames(static_cast<int>(len), sample_rate);
  Require(frames > 0, "signal is shorter than one analysis frame");
  const int64_t plane = f.bins * frames;
  std::vector<double> out(static_cast<size_t>(n * 2 * plane));
  const audio::RealFft fft(f.fft_size);
  std::vector<double> buf(f.fft_size, 0.0);
  std::vector<std::complex<double>> spec(f.bins);
  const auto x = wave.data();
  for (int64_t b = 0; b < n; ++b) {
    for (int64_t t = 0; t < frames; ++t) {
      const double* src = x.data() + b * len + t * f.hop;
      for (int i = 0; i < f.frame; ++i) buf[i] = src[i] * f.window[i];
      fft.Forward(buf, spec);
      double* re = out.data() + b * 2 * plane;
      double* im = re + plane;
      for (int k = 0; k < f.bins; ++k) {
        re[k * frames + t] = spec[k].real();
        im[k * frames + t] = spec[k].imag();
      }
    }
  }
  return MakeResult({n, 2, f.bins, frames}, std::move(out), {wave}, [f, n, len, frames, plane](Node& self) {
    Node* p = GradTarget(self, 0);
    if (!p) return;
    const audio::RealFft fft(f.fft_size);
    std::vector<std::complex<double>> g(f.bins);
    std::vector<double> buf(f.fft_size);
    for (int64_t b = 0; b < n; ++b) {
      const double* gre = self.grad.data() + b * 2 * plane;
      const double* gim = gre + plane;
      for (int64_t t = 0; t < frames; ++t) {
        for (int k = 0; k < f.bins; ++k) {
          const double s = (k == 0 || 2 * k == f.fft_size) ? 1.0 : 0.5;
          g[k] = {s * gre[k * frames + t], s * gim[k * frames + t]};
        }
        fft.Inverse(g, buf);
        double* dst = p->grad.data() + b * len + t * f.hop;
        for (int i = 0; i < f.frame; ++i) dst[i] += buf[i] * f.window[i];
      }
    }
  });
}

Tensor IstftOp(const Tensor& spec, const audio::StftConfig& cfg, int sample_rate, int64_t length) {
  const Framing f = MakeFraming(cfg, sample_rate);
  Require(spec.rank() == 4 && spec.dim(1) == 2 && spec.dim(2) == f.bins, "IstftOp expects [N, 2, bins, frames]");
  Require(length > 0, "IstftOp length must be positive");
  const int64_t n = spec.dim(0), frames = spec.dim(3), plane = f.bins * frames;
  const int64_t covered = (frames - 1) * f.hop + f.frame;
  std::vector<double> norm(covered, 0.0);
  for (int64_t t = 0; t < frames; ++t) {
    for (int i = 0; i < f.frame; ++i) norm[t * f.hop + i] += f.window[i] * f.window[i];
  }
  // Per-sample factor applied after overlap-add.
  std::vector<double> inv(covered);
  for (int64_t i = 0; i < covered; ++i) inv[i] = norm[i] > kNormFloor ? 1.0 / (norm[i] * f.fft_size) : 0.0;

  std::vector<double> out(static_cast<size_t>(n * length), 0.0);
  const audio::RealFft fft(f.fft_size);
  std::vector<std::complex<double>> y(f.bins);
  std::vector<double> buf(f.fft_size);
  const auto s = spec.data();
  for (int64_t b = 0; b < n; ++b) {
    const double* re = s.data() + b * 2 * plane;
    const double* im = re + plane;
    double* dst = out.data() + b * length;
    for (int64_t t = 0; t < frames; ++t) {
      for (int k = 0; k < f.bins; ++k) y[k] = {re[k * frames + t], im[k * frames + t]};
      fft.Inverse(y, buf);
      for (int i = 0; i < f.frame; ++i) {
        const int64_t m = t * f.hop + i;
        if (m < length) dst[m] += buf[i] * f.window[i] * inv[m];
      }
    }
  }
  return MakeResult({n, length}, std::move(out), {spec},
                    [f, n, frames, plane, length, inv = std::move(inv)](Node& self) {
                      Node* p = GradTarget(self, 0);
                      if (!p) return;
                      const audio::RealFft fft(f.fft_size);
                      std::vector<double> h(f.fft_size, 0.0);
                      std::vector<std::complex<double>> g(f.bins);
                      for (int64_t b = 0; b < n; ++b) {
                        const double* gy = self.grad.data() + b * length;
                        double* dre = p->grad.data() + b * 2 * plane;
                        double* dim = dre + plane;
                        for (int64_t t = 0; t < frames; ++t) {
                          for (int i = 0; i < f.frame; ++i) {
                            const int64_t m = t * f.hop + i;
                            h[i] = m < length ? gy[m] * f.window[i] * inv[m] : 0.0;
                          }
                          fft.Forward(h, g);
                          for (int k = 0; k < f.bins; ++k) {
                            const bool edge = k == 0 || 2 * k == f.fft_size;
                            dre[k * frames + t] += (edge ? 1.0 : 2.0) * g[k].real();
                            if (!edge) dim[k * frames + t] += 2.0 * g[k].imag();
                          }
                        }
                      }
                    });
}

}  // namespace ssi::nn
