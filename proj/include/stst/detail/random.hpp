#pragma once

#include <cstdint>
#include <cmath>
#include <random>

namespace stst::detail {

// SplitMix64 finalizer; turns (seed, stream index) into well-mixed seeds so
// trials can be generated in any order and still reproduce bit-for-bit.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t stream_seed(std::uint64_t seed,
                                    std::uint64_t stream) noexcept {
  return splitmix64(splitmix64(seed) ^ splitmix64(stream + 0x632BE59BD9B4E019ull));
}

using Engine = std::mt19937_64;

inline Engine make_engine(std::uint64_t seed, std::uint64_t stream) {
  return Engine(stream_seed(seed, stream));
}

// Uniform double in [0, 1) from the top 53 bits. std::uniform_real_distribution
// is fine too, but this keeps the bit pattern independent of the library.
inline double uniform01(Engine& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

// Marsaglia polar method; portable across standard library implementations,
// unlike std::normal_distribution.
class NormalSampler {
 public:
  double operator()(Engine& eng) {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01(eng) - 1.0;
      v = 2.0 * uniform01(eng) - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    has_spare_ = true;
    return u * f;
  }

 private:
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// Uniform index in [0, n) by rejection, no modulo bias.
inline std::uint64_t uniform_index(Engine& eng, std::uint64_t n) {
  const std::uint64_t limit = Engine::max() - Engine::max() % n;
  std::uint64_t r;
  do {
    r = eng();
  } while (r >= limit);
  return r % n;
}

// Fisher-Yates with uniform_index; std::shuffle's draw sequence is
// implementation-defined.
template <class RandomIt>
void shuffle(RandomIt first, RandomIt last, Engine& eng) {
  const auto n = static_cast<std::uint64_t>(last - first);
  for (std::uint64_t i = n; i > 1; --i) {
    const auto j = uniform_index(eng, i);
    using std::swap;
    swap(first[i - 1], first[j]);
  }
}

}  // namespace stst::detail
