#ifndef OTFSMIMO_RNG_HPP
#define OTFSMIMO_RNG_HPP

#include <cstdint>
#include <random>

#include "otfsmimo/types.hpp"

namespace otfsmimo {

/// Named substreams carved out of one master seed. Every stochastic stage of
/// a scenario owns its own stream so results are reproducible bit-for-bit
/// regardless of evaluation order or worker count.
enum class StreamTag : std::uint64_t {
  AlphaZf = 1,       // principal ZF normalization estimate (FZF-H / PZF)
  AlphaZfCheck = 2,  // independent alpha_FZF,L estimate for the 2% check
  Moments = 3,       // steering-moment sampling
  Realization = 4,   // SE Monte Carlo channel draws
};

std::uint64_t substream_seed(std::uint64_t master, StreamTag tag,
                             std::uint64_t a = 0, std::uint64_t b = 0);

/// Deterministic generator: mt19937_64 (sequence pinned by the standard)
/// with hand-rolled transforms, so draws do not depend on the standard
/// library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  /// Uniform on [0, 1) with 53-bit resolution.
  double uniform() {
    return static_cast<double>(gen_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on {lo, ..., hi} inclusive.
  int uniform_int(int lo, int hi) {
    const int span = hi - lo + 1;
    int v = lo + static_cast<int>(uniform() * span);
    return v > hi ? hi : v;
  }

  /// Standard normal via Box-Muller; caches the second deviate.
  double gaussian();

  /// Circularly-symmetric complex Gaussian with the given variance per real
  /// dimension.
  Complex cgaussian(double var_per_dim) {
    const double s = std::sqrt(var_per_dim);
    const double re = s * gaussian();
    const double im = s * gaussian();
    return {re, im};
  }

 private:
  std::mt19937_64 gen_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace otfsmimo

#endif  // OTFSMIMO_RNG_HPP
