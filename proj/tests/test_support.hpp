#pragma once

#include <random>
#include <span>
#include <vector>

#include "ftxl/player_vectors.hpp"

namespace test_support {

/// Random interior point of the product of simplices (normalized exponentials).
inline ftxl::MixedProfile random_profile(std::span< const std::size_t > counts, std::mt19937_64& gen)
{
   std::exponential_distribution< double > e(1.0);
   ftxl::MixedProfile x(counts);
   for(std::size_t i = 0; i < counts.size(); ++i) {
      double total = 0.0;
      for(auto& p : x[i]) {
         p = e(gen) + 1e-3;
         total += p;
      }
      for(auto& p : x[i]) {
         p /= total;
      }
   }
   return x;
}

inline std::vector< double > random_vector(std::size_t n, double lo, double hi, std::mt19937_64& gen)
{
   std::uniform_real_distribution< double > u(lo, hi);
   std::vector< double > v(n);
   for(auto& x : v) {
      x = u(gen);
   }
   return v;
}

inline std::vector< std::size_t > counts(std::initializer_list< std::size_t > c)
{
   return std::vector< std::size_t >(c);
}

}  // namespace test_support
