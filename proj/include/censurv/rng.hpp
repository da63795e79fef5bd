#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace censurv {

// Seeded random stream. All draws go through hand-rolled transforms of the
// raw 64-bit output so that results depend only on the engine, not on
// standard-library distribution internals. Streams are caller-owned and
// never shared between threads.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform on [0, 1), 53-bit resolution.
  double u01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer on {lo, ..., hi}, inclusive. Requires lo <= hi.
  int uniform_int(int lo, int hi) {
    const int span = hi - lo + 1;
    int k = static_cast<int>(u01() * span);
    if (k >= span) k = span - 1;
    return lo + k;
  }

  // Standard normal via Box-Muller. Two uniform draws per call.
  double normal() {
    const double u1 = 1.0 - u01();  // (0, 1]
    const double u2 = u01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Independent stream derived from this stream's seed and a tag.
  // Derivation is stateless: the same (seed, tag) always yields the same child.
  Rng child(std::uint64_t tag) const { return Rng(mix(seed_, tag)); }

  std::uint64_t seed() const { return seed_; }

  // splitmix64-style mixing of a seed with a stream tag.
  static std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    std::uint64_t z = a + 0x9e3779b97f4a7c15ULL * (b + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
};

// Seeded in-place Fisher-Yates shuffle (std::shuffle is implementation-defined).
template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
    const int j = rng.uniform_int(0, i);
    std::swap(v[i], v[static_cast<std::size_t>(j)]);
  }
}

}  // namespace censurv
