#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

namespace ssi {

// Thin wrapper over mt19937_64. Distributions are computed here instead of
// through <random> distributions so streams are identical across standard
// library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : engine_(seed) {}

  // Independent stream keyed by a tuple, e.g. (seed, epoch, item index).
  static Rng Derive(std::initializer_list<uint64_t> keys);

  uint64_t NextU64() { return engine_(); }
  // Uniform in [0, 1).
  double Uniform();
  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }
  // Uniform integer in [0, n).
  uint64_t UniformInt(uint64_t n);
  bool Bernoulli(double p) { return Uniform() < p; }
  double Normal();

 private:
  std::mt19937_64 engine_;
};

}  // namespace ssi
