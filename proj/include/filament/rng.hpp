#ifndef FILAMENT_RNG_HPP
#define FILAMENT_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>

namespace filament {

// Deterministic random source. All stochastic code in the library draws
// through this wrapper so that a run is reproducible from a single seed;
// worker streams are derived by counter via derive().
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; pairs are cached.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u = 1.0 - uniform();  // (0, 1], keeps log finite
    double r = std::sqrt(-2.0 * std::log(u));
    double a = 6.283185307179586476925286766559 * uniform();
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Independent stream for worker/draw `index`, stable across worker counts.
  Rng derive(std::uint64_t index) const { return Rng(derive_seed(seed_, index)); }

  static std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    return splitmix64(seed ^ (0x9E3779B97F4A7C15ULL * (index + 1)));
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace filament

#endif  // FILAMENT_RNG_HPP
