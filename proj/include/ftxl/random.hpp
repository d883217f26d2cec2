#pragma once

#include <cstdint>
#include <random>
#include <span>

namespace ftxl {

/// SplitMix64 finalizer; used only to derive well-separated seeds.
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept
{
   x += 0x9e3779b97f4a7c15ULL;
   x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
   x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
   return x ^ (x >> 31);
}

/// Seed of substream `stream` of trial `trial` under `master`.
constexpr std::uint64_t substream_seed(std::uint64_t master, std::uint64_t trial,
                                       std::uint64_t stream = 0) noexcept
{
   return splitmix64(splitmix64(splitmix64(master) ^ trial) ^ (stream + 0x632be59bd9b4e019ULL));
}

/// Random source for one trial. mt19937_64's output sequence is fixed by the
/// standard, and uniforms are built from its top 53 bits, so draws do not
/// depend on the standard library in use.
class Rng {
  public:
   explicit Rng(std::uint64_t seed) : engine_(seed) {}

   static Rng for_trial(std::uint64_t master, std::uint64_t trial, std::uint64_t stream = 0)
   {
      return Rng(substream_seed(master, trial, stream));
   }

   /// Uniform on [0, 1).
   double uniform() { return static_cast< double >(engine_() >> 11) * 0x1.0p-53; }

   double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

   /// Inverse-CDF draw from a probability vector, in stored order.
   std::size_t categorical(std::span< const double > probs)
   {
      const double u = uniform();
      double cumulative = 0.0;
      std::size_t last_positive = 0;
      for(std::size_t k = 0; k < probs.size(); ++k) {
         if(probs[k] > 0.0) {
            last_positive = k;
         }
         cumulative += probs[k];
         if(u < cumulative) {
            return k;
         }
      }
      // rounding left the cumulative sum just under 1
      return last_positive;
   }

  private:
   std::mt19937_64 engine_;
};

}  // namespace ftxl
