#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "ftxl/errors.hpp"
#include "ftxl/game.hpp"
#include "ftxl/player_vectors.hpp"

namespace ftxl {

/// Symmetric two-road congestion game, stored through its cost functions.
///
/// Action 0 is the road with fixed delay, action 1 the road whose delay depends
/// on its load d (number of players on it, the mover included). Payoffs are
/// negated costs. The default load cost is d / N.
class CongestionGame {
  public:
   static constexpr std::size_t fixed_road = 0;
   static constexpr std::size_t shared_road = 1;

   using LoadCost = std::function< double(std::size_t load) >;

   CongestionGame(std::size_t num_players, double fixed_cost, LoadCost load_cost = {})
       : num_players_(num_players),
         fixed_cost_(fixed_cost),
         load_cost_(std::move(load_cost)),
         action_counts_(num_players, 2)
   {
      if(num_players == 0) {
         throw InvalidGame("congestion game needs at least one player");
      }
      if(not std::isfinite(fixed_cost)) {
         throw InvalidGame("fixed cost must be finite");
      }
      if(not load_cost_) {
         const double n = static_cast< double >(num_players);
         load_cost_ = [n](std::size_t load) { return static_cast< double >(load) / n; };
      }
      for(std::size_t d = 1; d <= num_players; ++d) {
         if(not std::isfinite(load_cost_(d))) {
            throw InvalidGame("load cost must be finite");
         }
      }
   }

   std::size_t num_players() const noexcept { return num_players_; }
   std::span< const std::size_t > action_counts() const noexcept { return action_counts_; }
   double fixed_cost() const noexcept { return fixed_cost_; }
   double load_cost(std::size_t load) const { return load_cost_(load); }

   std::size_t shared_load(const PureProfile& a) const
   {
      std::size_t load = 0;
      for(auto action : a.actions) {
         load += action == shared_road ? 1 : 0;
      }
      return load;
   }

   std::vector< double > pure_payoff(const PureProfile& a) const
   {
      validate_pure_profile(a, action_counts_);
      const double shared = -load_cost_(shared_load(a));
      std::vector< double > u(num_players_);
      for(std::size_t i = 0; i < u.size(); ++i) {
         u[i] = a[i] == shared_road ? shared : -fixed_cost_;
      }
      return u;
   }

   std::vector< double > pure_payoff_vector(std::size_t player, const PureProfile& a) const
   {
      check_player(player);
      validate_pure_profile(a, action_counts_);
      const std::size_t others = shared_load(a) - (a[player] == shared_road ? 1 : 0);
      return {-fixed_cost_, -load_cost_(others + 1)};
   }

   /// Exact expectation over the opponents' load, whose law is Poisson-binomial
   /// in their probabilities of taking the shared road.
   std::vector< double > payoff_vector(std::size_t player, const MixedProfile& x) const
   {
      check_player(player);
      validate_mixed_profile(x, action_counts_);
      const auto law = opponent_load_distribution(player, x);
      double expected = 0.0;
      for(std::size_t d = 0; d < law.size(); ++d) {
         if(law[d] != 0.0) {
            expected += law[d] * load_cost_(d + 1);
         }
      }
      return {-fixed_cost_, -expected};
   }

   std::vector< double > mixed_payoff(const MixedProfile& x) const
   {
      std::vector< double > u(num_players_);
      for(std::size_t i = 0; i < u.size(); ++i) {
         u[i] = dot(payoff_vector(i, x), x[i]);
      }
      return u;
   }

   PayoffRange payoff_range() const
   {
      PayoffRange range{-fixed_cost_, -fixed_cost_};
      for(std::size_t d = 1; d <= num_players_; ++d) {
         range.min = std::min(range.min, -load_cost_(d));
         range.max = std::max(range.max, -load_cost_(d));
      }
      return range;
   }

   /// P(d opponents on the shared road), d = 0..N-1.
   std::vector< double > opponent_load_distribution(std::size_t player, const MixedProfile& x) const
   {
      std::vector< double > law(num_players_, 0.0);
      law[0] = 1.0;
      std::size_t seen = 0;
      for(std::size_t j = 0; j < num_players_; ++j) {
         if(j == player) {
            continue;
         }
         const double q = x[j][shared_road];
         ++seen;
         for(std::size_t d = seen; d > 0; --d) {
            law[d] = law[d] * (1.0 - q) + law[d - 1] * q;
         }
         law[0] *= 1.0 - q;
      }
      return law;
   }

  private:
   void check_player(std::size_t player) const
   {
      if(player >= num_players_) {
         throw InvalidProfile("player index " + std::to_string(player) + " out of range");
      }
   }

   std::size_t num_players_;
   double fixed_cost_;
   LoadCost load_cost_;
   std::vector< std::size_t > action_counts_;
};

static_assert(FiniteGame< CongestionGame >);

}  // namespace ftxl
