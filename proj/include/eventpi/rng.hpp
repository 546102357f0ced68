#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>

#include "eventpi/mathfn.hpp"

namespace eventpi {

inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ull);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Collapses (master seed, stream indices...) into one stream seed. Streams
// derived from distinct index tuples are independent for Monte Carlo
// purposes, which is what makes replicate-level work order-insensitive.
inline std::uint64_t derive_seed(std::uint64_t master,
                                 std::initializer_list<std::uint64_t> ids) {
  std::uint64_t s = master;
  (void)splitmix64_next(s);
  for (std::uint64_t id : ids) {
    s ^= id + 0x9E3779B97F4A7C15ull + (s << 6) + (s >> 2);
    (void)splitmix64_next(s);
  }
  return splitmix64_next(s);
}

// mt19937_64 engine with hand-rolled variate transforms so that draws are
// bit-identical across platforms (std distributions are not portable).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  static Rng stream(std::uint64_t master,
                    std::initializer_list<std::uint64_t> ids) {
    return Rng(derive_seed(master, ids));
  }

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on the open interval (0,1): safe to feed into quantile functions.
  double uniform01() {
    return (static_cast<double>(eng_() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double a, double b) { return a + (b - a) * uniform01(); }

  double normal() { return norm_quantile(uniform01()); }

  double exponential(double rate) { return -std::log1p(-uniform01()) / rate; }

  int bernoulli(double p) { return uniform01() < p ? 1 : 0; }

 private:
  std::mt19937_64 eng_;
};

}  // namespace eventpi
