#pragma once

#include <complex>
#include <span>

namespace ssi::audio {

// Unnormalized real FFT of a fixed power-of-two-or-not size backed by FFTW.
// Plans are cached process-wide; Forward/Inverse are safe to call concurrently.
class RealFft {
 public:
  explicit RealFft(int size);

  int size() const { return size_; }
  int bins() const { return size_ / 2 + 1; }

  // in: size() samples, out: bins() values. X_k = sum_n x_n e^{-2 pi i k n / N}.
  void Forward(std::span<const double> in, std::span<std::complex<double>> out) const;
  // in: bins() values, out: size() samples. Unnormalized: Inverse(Forward(x)) == N x.
  // Imaginary parts of the DC and Nyquist bins are ignored.
  void Inverse(std::span<const std::complex<double>> in, std::span<double> out) const;

 private:
  int size_;
  void* forward_plan_;
  void* inverse_plan_;
};

}  // namespace ssi::audio
