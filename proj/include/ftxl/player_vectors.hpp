#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ftxl/errors.hpp"

namespace ftxl {

/// Ragged per-player storage: one real vector per player, laid out contiguously.
///
/// The tag parameter keeps scores, momenta, strategies and payoff estimates
/// from being mixed up; `retag` converts explicitly when that is intended.
template < typename Tag >
class PerPlayer {
  public:
   PerPlayer() = default;

   explicit PerPlayer(std::span< const std::size_t > action_counts, double fill = 0.0)
   {
      offsets_.reserve(action_counts.size() + 1);
      for(auto count : action_counts) {
         offsets_.push_back(offsets_.back() + count);
      }
      data_.assign(offsets_.back(), fill);
   }

   static PerPlayer from_nested(const std::vector< std::vector< double > >& nested)
   {
      std::vector< std::size_t > counts;
      counts.reserve(nested.size());
      for(const auto& v : nested) {
         counts.push_back(v.size());
      }
      PerPlayer out(counts);
      for(std::size_t i = 0; i < nested.size(); ++i) {
         std::copy(nested[i].begin(), nested[i].end(), out[i].begin());
      }
      return out;
   }

   std::size_t num_players() const noexcept { return offsets_.size() - 1; }
   std::size_t size(std::size_t player) const { return offsets_[player + 1] - offsets_[player]; }
   std::size_t total_size() const noexcept { return data_.size(); }

   std::span< double > operator[](std::size_t player)
   {
      return {data_.data() + offsets_[player], size(player)};
   }
   std::span< const double > operator[](std::size_t player) const
   {
      return {data_.data() + offsets_[player], size(player)};
   }

   std::span< double > flat() noexcept { return data_; }
   std::span< const double > flat() const noexcept { return data_; }
   std::span< const std::size_t > offsets() const noexcept { return offsets_; }

   std::vector< std::size_t > action_counts() const
   {
      std::vector< std::size_t > counts(num_players());
      for(std::size_t i = 0; i < counts.size(); ++i) {
         counts[i] = size(i);
      }
      return counts;
   }

   template < typename OtherTag >
   bool same_shape(const PerPlayer< OtherTag >& other) const noexcept
   {
      return std::ranges::equal(offsets_, other.offsets());
   }

   bool same_shape(std::span< const std::size_t > action_counts) const
   {
      if(action_counts.size() != num_players()) {
         return false;
      }
      for(std::size_t i = 0; i < action_counts.size(); ++i) {
         if(action_counts[i] != size(i)) {
            return false;
         }
      }
      return true;
   }

   bool all_finite() const
   {
      return std::ranges::all_of(data_, [](double v) { return std::isfinite(v); });
   }

   template < typename OtherTag >
   PerPlayer< OtherTag > retag() const
   {
      PerPlayer< OtherTag > out(action_counts());
      std::ranges::copy(data_, out.flat().begin());
      return out;
   }

   std::vector< std::vector< double > > to_nested() const
   {
      std::vector< std::vector< double > > out(num_players());
      for(std::size_t i = 0; i < out.size(); ++i) {
         out[i].assign((*this)[i].begin(), (*this)[i].end());
      }
      return out;
   }

   bool operator==(const PerPlayer&) const = default;

  private:
   std::vector< std::size_t > offsets_{0};
   std::vector< double > data_;
};

struct ScoreTag;
struct MomentumTag;
struct StrategyTag;
struct PayoffTag;

/// Cumulative (momentum-aggregated) payoff scores y.
using ScoreVector = PerPlayer< ScoreTag >;
/// Momentum p, the discrete analogue of dy/dt.
using MomentumVector = PerPlayer< MomentumTag >;
/// One point of the product of simplices.
using MixedProfile = PerPlayer< StrategyTag >;
/// Per-player payoff vectors, exact or estimated.
using PayoffVectors = PerPlayer< PayoffTag >;

/// One action index per player.
struct PureProfile {
   std::vector< std::size_t > actions;

   std::size_t size() const noexcept { return actions.size(); }
   std::size_t operator[](std::size_t player) const { return actions[player]; }
   std::size_t& operator[](std::size_t player) { return actions[player]; }
   bool operator==(const PureProfile&) const = default;
};

inline constexpr double simplex_tolerance = 1e-12;

inline void validate_pure_profile(const PureProfile& profile,
                                  std::span< const std::size_t > action_counts)
{
   if(profile.size() != action_counts.size()) {
      throw InvalidProfile("pure profile has " + std::to_string(profile.size())
                           + " entries, game has " + std::to_string(action_counts.size())
                           + " players");
   }
   for(std::size_t i = 0; i < profile.size(); ++i) {
      if(profile[i] >= action_counts[i]) {
         throw InvalidProfile("action " + std::to_string(profile[i]) + " of player "
                              + std::to_string(i) + " out of range");
      }
   }
}

inline void validate_mixed_profile(const MixedProfile& x, std::span< const std::size_t > action_counts)
{
   if(not x.same_shape(action_counts)) {
      throw InvalidProfile("mixed profile shape does not match the game's action sets");
   }
   for(std::size_t i = 0; i < x.num_players(); ++i) {
      double total = 0.0;
      for(double p : x[i]) {
         if(not(p >= 0.0) or not std::isfinite(p)) {
            throw InvalidProfile("negative or non-finite probability for player "
                                 + std::to_string(i));
         }
         total += p;
      }
      if(std::abs(total - 1.0) > simplex_tolerance) {
         throw InvalidProfile("strategy of player " + std::to_string(i) + " sums to "
                              + std::to_string(total));
      }
   }
}

/// Point mass on a pure profile.
inline MixedProfile point_mass(const PureProfile& profile, std::span< const std::size_t > action_counts)
{
   validate_pure_profile(profile, action_counts);
   MixedProfile x(action_counts);
   for(std::size_t i = 0; i < profile.size(); ++i) {
      x[i][profile[i]] = 1.0;
   }
   return x;
}

inline MixedProfile uniform_profile(std::span< const std::size_t > action_counts)
{
   MixedProfile x(action_counts);
   for(std::size_t i = 0; i < action_counts.size(); ++i) {
      std::ranges::fill(x[i], 1.0 / static_cast< double >(action_counts[i]));
   }
   return x;
}

inline double dot(std::span< const double > a, std::span< const double > b)
{
   if(a.size() != b.size()) {
      throw ShapeMismatch("dot product of vectors with different lengths");
   }
   return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

/// Odometer over all pure profiles, last player varying fastest (row-major).
template < typename Fn >
void for_each_profile(std::span< const std::size_t > action_counts, Fn&& fn)
{
   PureProfile profile{std::vector< std::size_t >(action_counts.size(), 0)};
   if(std::ranges::any_of(action_counts, [](std::size_t c) { return c == 0; })) {
      return;
   }
   while(true) {
      fn(std::as_const(profile));
      std::size_t pos = action_counts.size();
      while(pos > 0) {
         --pos;
         if(++profile[pos] < action_counts[pos]) {
            break;
         }
         profile[pos] = 0;
         if(pos == 0) {
            return;
         }
      }
      if(action_counts.empty()) {
         return;
      }
   }
}

}  // namespace ftxl
