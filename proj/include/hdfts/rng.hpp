#pragma once

#include <cmath>
#include <cstdint>

namespace hdfts {

// Deterministic generator with an explicit state; output does not depend on
// the standard library's distribution implementations, so identical seeds
// give identical streams on every platform and under any thread count.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    // splitmix64
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller; consumes two uniforms per pair
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // uniform on (-sqrt3, sqrt3): mean 0, variance 1
  double scaled_uniform() {
    return (2.0 * uniform() - 1.0) * 1.7320508075688772935274463415059;
  }

  // +/-1 with equal probability: mean 0, variance 1
  double rademacher() { return (next_u64() >> 63) ? 1.0 : -1.0; }

private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Stable seed derivation for (base, stream, substream) triples; replicates and
// grid points get independent streams regardless of scheduling order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b = 0) {
  Rng mix(base ^ 0x5851f42d4c957f2dULL);
  std::uint64_t s = mix.next_u64();
  s ^= a * 0xd1342543de82ef95ULL + 0x2545f4914f6cdd1dULL;
  Rng mix2(s);
  s = mix2.next_u64() ^ (b * 0x9e3779b97f4a7c15ULL + 0x6a09e667f3bcc909ULL);
  Rng mix3(s);
  return mix3.next_u64();
}

}  // namespace hdfts
