#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>

namespace hbtrain {

/// Deterministic random stream. Wraps std::mt19937_64 (whose output sequence
/// is pinned by the standard) and maps raw words to doubles itself, so the
/// same seed produces the same draws on every platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double uniform_pos() { return 1.0 - uniform(); }

  /// Standard real Gaussian, Box-Muller.
  double gaussian() {
    const double r = std::sqrt(-2.0 * std::log(uniform_pos()));
    return r * std::cos(2.0 * M_PI * uniform());
  }

  /// Circularly-symmetric complex Gaussian with unit variance
  /// (real and imaginary parts each have variance 1/2).
  std::complex<double> complex_gaussian() {
    const double r = std::sqrt(-std::log(uniform_pos()));
    const double phi = 2.0 * M_PI * uniform();
    return {r * std::cos(phi), r * std::sin(phi)};
  }

  /// Uniform phase in [0, 2*pi).
  double phase() { return 2.0 * M_PI * uniform(); }

  std::uint64_t raw() { return engine_(); }

  /// Independent substream for (seed, stream ids). SplitMix64 finalizer mixes
  /// the words so that consecutive ids give unrelated seeds.
  static Rng derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                    std::uint64_t c = 0) {
    std::uint64_t x = seed;
    for (std::uint64_t w : {a, b, c}) {
      x += 0x9e3779b97f4a7c15ULL + w;
      x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
      x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
      x = x ^ (x >> 31);
    }
    return Rng(x);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace hbtrain
