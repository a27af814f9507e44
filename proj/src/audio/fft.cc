#include "ssi/audio/fft.h"

#include <fftw3.h>

#include <algorithm>
#include <map>
#include <memory>
#include <mutex>

#include "ssi/common/error.h"

namespace ssi::audio {

namespace {

struct Plans {
  fftw_plan forward;
  fftw_plan inverse;
};

std::mutex& PlanMutex() {
  static std::mutex m;
  return m;
}

Plans GetPlans(int n) {
  static std::map<int, Plans> cache;
  std::lock_guard<std::mutex> lock(PlanMutex());
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  double* r = fftw_alloc_real(n);
  fftw_complex* c = fftw_alloc_complex(n / 2 + 1);
  Plans p;
  p.forward = fftw_plan_dft_r2c_1d(n, r, c, FFTW_ESTIMATE);
  p.inverse = fftw_plan_dft_c2r_1d(n, c, r, FFTW_ESTIMATE);
  fftw_free(r);
  fftw_free(c);
  cache.emplace(n, p);
  return p;
}

struct FftwDeleter {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

RealFft::RealFft(int size) : size_(size) {
  Require(size > 0, "fft size must be positive");
  Plans p = GetPlans(size);
  forward_plan_ = p.forward;
  inverse_plan_ = p.inverse;
}

void RealFft::Forward(std::span<const double> in, std::span<std::complex<double>> out) const {
  Require(static_cast<int>(in.size()) == size_ && static_cast<int>(out.size()) == bins(),
          "RealFft::Forward size mismatch");
  std::unique_ptr<double, FftwDeleter> r(fftw_alloc_real(size_));
  std::unique_ptr<fftw_complex, FftwDeleter> c(fftw_alloc_complex(bins()));
  std::copy(in.begin(), in.end(), r.get());
  fftw_execute_dft_r2c(static_cast<fftw_plan>(forward_plan_), r.get(), c.get());
  for (int k = 0; k < bins(); ++k) out[k] = {c.get()[k][0], c.get()[k][1]};
}

void RealFft::Inverse(std::span<const std::complex<double>> in, std::span<double> out) const {
  Require(static_cast<int>(in.size()) == bins() && static_cast<int>(out.size()) == size_,
          "RealFft::Inverse size mismatch");
  std::unique_ptr<double, FftwDeleter> r(fftw_alloc_real(size_));
  std::unique_ptr<fftw_complex, FftwDeleter> c(fftw_alloc_complex(bins()));
  for (int k = 0; k < bins(); ++k) {
    c.get()[k][0] = in[k].real();
    c.get()[k][1] = in[k].imag();
  }
  c.get()[0][1] = 0.0;
  if (size_ % 2 == 0) c.get()[bins() - 1][1] = 0.0;
  fftw_execute_dft_c2r(static_cast<fftw_plan>(inverse_plan_), c.get(), r.get());
  std::copy(r.get(), r.get() + size_, out.begin());
}

}  // namespace ssi::audio
