#include "otfsmimo/rng.hpp"

#include <cmath>

namespace otfsmimo {

namespace {

// splitmix64 step; used only to decorrelate substream seeds.
std::uint64_t mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t substream_seed(std::uint64_t master, StreamTag tag,
                             std::uint64_t a, std::uint64_t b) {
  std::uint64_t s = mix(master ^ 0x6a09e667f3bcc908ULL);
  s = mix(s ^ static_cast<std::uint64_t>(tag) * 0xbb67ae8584caa73bULL);
  s = mix(s ^ a * 0x3c6ef372fe94f82bULL);
  s = mix(s ^ b * 0xa54ff53a5f1d36f1ULL);
  return s;
}

double Rng::gaussian() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  // Box-Muller; u1 is kept away from 0 so log() stays finite.
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * M_PI * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

}  // namespace otfsmimo
