#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>

namespace skelimg {

// SplitMix64 (Steele, Lea & Flood). Fixed algorithm so generated data is
// reproducible across platforms; the std:: distributions are not.
//
// Test vector: seed 1234567 -> 6457827717110365317, 3203168211198807973,
// 9817491932198370423, 4593380528125082431, 16408922859458223821.
class SplitMix64
{
 public:
   explicit constexpr SplitMix64(uint64_t seed = 0) noexcept : state_(seed) {}

   static constexpr uint64_t k_golden = 0x9E3779B97F4A7C15ull;

   static constexpr uint64_t mix(uint64_t z) noexcept
   {
      z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
      z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
      return z ^ (z >> 31);
   }

   constexpr uint64_t next() noexcept { return mix(state_ += k_golden); }

   /// Uniform in [0, 1) with 53 random bits.
   constexpr double uniform() noexcept { return double(next() >> 11) * 0x1.0p-53; }

   /// Uniform in [lo, hi); exactly lo when lo == hi.
   constexpr double uniform(double lo, double hi) noexcept
   {
      return lo + (hi - lo) * uniform();
   }

   /// Standard normal via Box-Muller (one value per call, no caching).
   double normal() noexcept
   {
      const double u1 = 1.0 - uniform(); // (0, 1]
      const double u2 = uniform();
      return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
   }

   uint64_t state() const noexcept { return state_; }

   // Independent stream for item `index` of a run seeded with `seed`.
   static constexpr SplitMix64 stream(uint64_t seed, uint64_t index) noexcept
   {
      return SplitMix64(mix(seed ^ mix(index + k_golden)));
   }

 private:
   uint64_t state_;
};

} // namespace skelimg
