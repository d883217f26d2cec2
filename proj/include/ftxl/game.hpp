#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "ftxl/errors.hpp"
#include "ftxl/player_vectors.hpp"

namespace ftxl {

struct PayoffRange {
   double min;
   double max;
};

/// What the learners and feedback oracles need from a game.
///
/// `pure_payoff_vector(i, a)` reads only the opponents' entries of `a`; the
/// player's own entry is ignored (but must still be a valid index).
template < typename G >
concept FiniteGame = requires(const G& g, std::size_t i, const PureProfile& a, const MixedProfile& x) {
   { g.num_players() } -> std::convertible_to< std::size_t >;
   { g.action_counts() } -> std::convertible_to< std::span< const std::size_t > >;
   { g.pure_payoff(a) } -> std::same_as< std::vector< double > >;
   { g.mixed_payoff(x) } -> std::same_as< std::vector< double > >;
   { g.payoff_vector(i, x) } -> std::same_as< std::vector< double > >;
   { g.pure_payoff_vector(i, a) } -> std::same_as< std::vector< double > >;
   { g.payoff_range() } -> std::same_as< PayoffRange >;
};

/// Finite game stored as a dense payoff tensor.
///
/// Layout is row-major over (player, a_1, ..., a_N): the payoff of player i at
/// profile a sits at `i * num_profiles() + linear(a)`, last action index fastest.
class NormalFormGame {
  public:
   NormalFormGame(std::vector< std::size_t > action_counts, std::vector< double > payoffs)
       : action_counts_(std::move(action_counts)), payoffs_(std::move(payoffs))
   {
      if(action_counts_.empty()) {
         throw InvalidGame("a game needs at least one player");
      }
      num_profiles_ = 1;
      for(auto c : action_counts_) {
         if(c == 0) {
            throw InvalidGame("every player needs at least one action");
         }
         num_profiles_ *= c;
      }
      strides_.assign(action_counts_.size(), 1);
      for(std::size_t i = action_counts_.size() - 1; i > 0; --i) {
         strides_[i - 1] = strides_[i] * action_counts_[i];
      }
      if(payoffs_.size() != action_counts_.size() * num_profiles_) {
         throw InvalidGame("payoff tensor has " + std::to_string(payoffs_.size())
                           + " entries, expected "
                           + std::to_string(action_counts_.size() * num_profiles_));
      }
      if(not std::ranges::all_of(payoffs_, [](double u) { return std::isfinite(u); })) {
         throw InvalidGame("payoffs must be finite");
      }
   }

   /// Two-player game from row-player and column-player matrices.
   static NormalFormGame from_bimatrix(const std::vector< std::vector< double > >& row_payoffs,
                                       const std::vector< std::vector< double > >& col_payoffs)
   {
      const std::size_t rows = row_payoffs.size();
      const std::size_t cols = rows ? row_payoffs.front().size() : 0;
      if(col_payoffs.size() != rows) {
         throw InvalidGame("bimatrix shapes differ");
      }
      std::vector< double > flat;
      flat.reserve(2 * rows * cols);
      for(const auto* matrix : {&row_payoffs, &col_payoffs}) {
         for(const auto& row : *matrix) {
            if(row.size() != cols) {
               throw InvalidGame("ragged payoff matrix");
            }
            flat.insert(flat.end(), row.begin(), row.end());
         }
      }
      return NormalFormGame({rows, cols}, std::move(flat));
   }

   std::size_t num_players() const noexcept { return action_counts_.size(); }
   std::span< const std::size_t > action_counts() const noexcept { return action_counts_; }
   std::size_t num_profiles() const noexcept { return num_profiles_; }
   std::span< const double > payoffs() const noexcept { return payoffs_; }

   std::size_t linear_index(const PureProfile& a) const
   {
      std::size_t idx = 0;
      for(std::size_t j = 0; j < a.size(); ++j) {
         idx += a[j] * strides_[j];
      }
      return idx;
   }

   double payoff(std::size_t player, const PureProfile& a) const
   {
      return payoffs_[player * num_profiles_ + linear_index(a)];
   }

   std::vector< double > pure_payoff(const PureProfile& a) const
   {
      validate_pure_profile(a, action_counts_);
      std::vector< double > u(num_players());
      const std::size_t idx = linear_index(a);
      for(std::size_t i = 0; i < u.size(); ++i) {
         u[i] = payoffs_[i * num_profiles_ + idx];
      }
      return u;
   }

   /// Full multilinear expectation, enumerating every pure profile.
   std::vector< double > mixed_payoff(const MixedProfile& x) const
   {
      validate_mixed_profile(x, action_counts_);
      std::vector< double > u(num_players(), 0.0);
      std::size_t idx = 0;
      for_each_profile(action_counts_, [&](const PureProfile& a) {
         double weight = 1.0;
         for(std::size_t j = 0; j < a.size(); ++j) {
            weight *= x[j][a[j]];
         }
         if(weight != 0.0) {
            for(std::size_t i = 0; i < u.size(); ++i) {
               u[i] += weight * payoffs_[i * num_profiles_ + idx];
            }
         }
         ++idx;
      });
      return u;
   }

   std::vector< double > payoff_vector(std::size_t player, const MixedProfile& x) const
   {
      check_player(player);
      validate_mixed_profile(x, action_counts_);
      std::vector< double > v(action_counts_[player], 0.0);
      const double* u = payoffs_.data() + player * num_profiles_;
      std::size_t idx = 0;
      for_each_profile(action_counts_, [&](const PureProfile& a) {
         double weight = 1.0;
         for(std::size_t j = 0; j < a.size(); ++j) {
            if(j != player) {
               weight *= x[j][a[j]];
            }
         }
         v[a[player]] += weight * u[idx];
         ++idx;
      });
      return v;
   }

   std::vector< double > pure_payoff_vector(std::size_t player, const PureProfile& a) const
   {
      check_player(player);
      validate_pure_profile(a, action_counts_);
      std::vector< double > v(action_counts_[player]);
      PureProfile probe = a;
      for(std::size_t k = 0; k < v.size(); ++k) {
         probe[player] = k;
         v[k] = payoff(player, probe);
      }
      return v;
   }

   PayoffRange payoff_range() const
   {
      auto [lo, hi] = std::ranges::minmax_element(payoffs_);
      return {*lo, *hi};
   }

  private:
   void check_player(std::size_t player) const
   {
      if(player >= num_players()) {
         throw InvalidProfile("player index " + std::to_string(player) + " out of range");
      }
   }

   std::vector< std::size_t > action_counts_;
   std::vector< double > payoffs_;
   std::vector< std::size_t > strides_;
   std::size_t num_profiles_ = 1;
};

static_assert(FiniteGame< NormalFormGame >);

/// A strict Nash equilibrium together with its drift constant c and score threshold M.
struct StrictEquilibrium {
   PureProfile profile;
   double drift;
   double threshold;
};

/// Payoff gaps u_i(a*) - u_i(a_i; a*_{-i}) for every player and every deviation,
/// as (player, action, gap) triples.
struct DeviationGap {
   std::size_t player;
   std::size_t action;
   double gap;
};

template < FiniteGame G >
std::vector< DeviationGap > deviation_gaps(const G& game, const PureProfile& profile)
{
   validate_pure_profile(profile, game.action_counts());
   std::vector< DeviationGap > gaps;
   for(std::size_t i = 0; i < game.num_players(); ++i) {
      const auto v = game.pure_payoff_vector(i, profile);
      for(std::size_t k = 0; k < v.size(); ++k) {
         if(k != profile[i]) {
            gaps.push_back({i, k, v[profile[i]] - v[k]});
         }
      }
   }
   return gaps;
}

template < FiniteGame G >
bool is_strict_nash(const G& game, const PureProfile& profile)
{
   return std::ranges::all_of(deviation_gaps(game, profile),
                              [](const DeviationGap& d) { return d.gap > 0.0; });
}

/// Largest action set in the game.
template < FiniteGame G >
std::size_t max_action_count(const G& game)
{
   return std::ranges::max(game.action_counts());
}

/// Conservative logit-tail fallback for the score threshold M.
template < FiniteGame G >
double fallback_score_threshold(const G& game, double drift)
{
   const auto range = game.payoff_range();
   const double spread = std::max(range.max - range.min, drift);
   return std::log(static_cast< double >(max_action_count(game)) * spread / drift) + 1.0;
}

namespace detail {

/// Vertices of the logit image of {y_i : y_{i,a*} - y_{i,a} >= g for all a != a*}.
/// Each vertex puts weight w on a subset S of the non-equilibrium actions and the
/// rest on a*, with w / x_{a*} = exp(-g).
inline std::vector< std::vector< double > > advantage_region_vertices(std::size_t num_actions,
                                                                      std::size_t eq_action,
                                                                      double advantage)
{
   std::vector< std::size_t > others;
   for(std::size_t k = 0; k < num_actions; ++k) {
      if(k != eq_action) {
         others.push_back(k);
      }
   }
   const double ratio = std::exp(-advantage);
   std::vector< std::vector< double > > vertices;
   for(std::size_t mask = 0; mask < (std::size_t{1} << others.size()); ++mask) {
      std::vector< double > x(num_actions, 0.0);
      std::size_t members = 0;
      for(std::size_t b = 0; b < others.size(); ++b) {
         members += (mask >> b) & 1U;
      }
      const double denom = 1.0 + static_cast< double >(members) * ratio;
      x[eq_action] = 1.0 / denom;
      for(std::size_t b = 0; b < others.size(); ++b) {
         if((mask >> b) & 1U) {
            x[others[b]] = ratio / denom;
         }
      }
      vertices.push_back(std::move(x));
   }
   return vertices;
}

}  // namespace detail

inline constexpr std::size_t max_threshold_lattice = 4096;

/// Number of vertex combinations the threshold lattice check would visit, or 0
/// when it exceeds `max_threshold_lattice`.
template < FiniteGame G >
std::size_t threshold_lattice_size(const G& game)
{
   std::size_t combos = 1;
   for(auto c : game.action_counts()) {
      if(c - 1 >= 20) {
         return 0;
      }
      combos *= std::size_t{1} << (c - 1);
      if(combos > max_threshold_lattice) {
         return 0;
      }
   }
   return combos;
}

/// Checks that every payoff gap at the equilibrium exceeds `drift` whenever every
/// player's equilibrium score leads each other score by at least `advantage`
/// (logit choice). The gaps are multilinear in the opponents' strategies, so
/// checking the vertex lattice of that region is exact.
template < FiniteGame G >
bool advantage_secures_drift(const G& game, const PureProfile& eq, double drift, double advantage)
{
   const auto counts = game.action_counts();
   std::vector< std::vector< std::vector< double > > > vertices(counts.size());
   for(std::size_t j = 0; j < counts.size(); ++j) {
      vertices[j] = detail::advantage_region_vertices(counts[j], eq[j], advantage);
   }
   std::vector< std::size_t > lattice_sizes(counts.size());
   for(std::size_t j = 0; j < counts.size(); ++j) {
      lattice_sizes[j] = vertices[j].size();
   }
   MixedProfile x(counts);
   bool secured = true;
   for_each_profile(lattice_sizes, [&](const PureProfile& choice) {
      if(not secured) {
         return;
      }
      for(std::size_t j = 0; j < counts.size(); ++j) {
         std::ranges::copy(vertices[j][choice[j]], x[j].begin());
      }
      for(std::size_t i = 0; i < counts.size() and secured; ++i) {
         const auto v = game.payoff_vector(i, x);
         for(std::size_t k = 0; k < v.size(); ++k) {
            if(k != eq[i] and not(v[eq[i]] - v[k] > drift)) {
               secured = false;
               break;
            }
         }
      }
   });
   return secured;
}

/// Score-gap threshold M: smallest g in {1, 2, 4, ...} that secures the drift on
/// the verification lattice, or the logit-tail fallback for games too large to
/// check.
template < FiniteGame G >
double score_threshold(const G& game, const PureProfile& eq, double drift)
{
   if(threshold_lattice_size(game) == 0) {
      return fallback_score_threshold(game, drift);
   }
   for(double g = 1.0; g <= 1048576.0; g *= 2.0) {
      if(advantage_secures_drift(game, eq, drift, g)) {
         return g;
      }
   }
   return fallback_score_threshold(game, drift);
}

/// c = (1/2) min over players and deviations of the equilibrium payoff gap.
template < FiniteGame G >
StrictEquilibrium drift_constant(const G& game, const PureProfile& profile)
{
   const auto gaps = deviation_gaps(game, profile);
   double min_gap = std::numeric_limits< double >::infinity();
   for(const auto& d : gaps) {
      if(not(d.gap > 0.0)) {
         throw NotStrictEquilibrium("player " + std::to_string(d.player) + " loses nothing by deviating to action "
                                    + std::to_string(d.action));
      }
      min_gap = std::min(min_gap, d.gap);
   }
   if(gaps.empty()) {
      throw NotStrictEquilibrium("no player has a deviation, drift is undefined");
   }
   const double drift = 0.5 * min_gap;
   return {profile, drift, score_threshold(game, profile, drift)};
}

/// Distances between a mixed profile and a pure equilibrium.
struct EquilibriumDistance {
   /// ||x - x*||_inf over the whole profile.
   double sup;
   /// Mean over players of ||x_i - x*_i||_1 (each term lies in [0, 2]).
   double l1;
};

/// Mass player i puts off the equilibrium action; equals 1 - x_{i,a*} without cancellation.
inline double off_equilibrium_mass(std::span< const double > x_i, std::size_t eq_action)
{
   double mass = 0.0;
   for(std::size_t k = 0; k < x_i.size(); ++k) {
      if(k != eq_action) {
         mass += x_i[k];
      }
   }
   return mass;
}

inline EquilibriumDistance equilibrium_distance(const MixedProfile& x, const PureProfile& eq)
{
   if(x.num_players() != eq.size()) {
      throw ShapeMismatch("profile and equilibrium have different player counts");
   }
   double sup = 0.0;
   double l1 = 0.0;
   for(std::size_t i = 0; i < eq.size(); ++i) {
      const double off = off_equilibrium_mass(x[i], eq[i]);
      sup = std::max(sup, off);
      l1 += 2.0 * off;
   }
   return {sup, l1 / static_cast< double >(eq.size())};
}

}  // namespace ftxl
