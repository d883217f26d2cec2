#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ftxl/errors.hpp"
#include "ftxl/game.hpp"
#include "ftxl/learners.hpp"
#include "ftxl/player_vectors.hpp"
#include "ftxl/random.hpp"

namespace ftxl {

/// Which payoff oracle the players face, and the exploration schedule
/// eps_n = eps / n^kappa used by the bandit estimator.
struct FeedbackConfig {
   FeedbackModel model = FeedbackModel::full;
   double exploration = 0.1;
   double exploration_exponent = 0.0;
   std::uint64_t seed = 0;

   void validate() const
   {
      if(model != FeedbackModel::bandit) {
         return;
      }
      if(not(exploration > 0.0 and exploration <= 1.0)) {
         throw InvalidConfiguration("exploration must lie in (0, 1]");
      }
      if(not(exploration_exponent >= 0.0 and exploration_exponent < 0.5)) {
         throw InvalidConfiguration("exploration exponent must lie in [0, 1/2)");
      }
   }

   /// True when the schedule decays as the bandit convergence guarantee requires (kappa > 0).
   bool within_bandit_theory() const noexcept
   {
      return exploration_exponent > 0.0 and exploration_exponent < 0.5;
   }

   double exploration_at(std::size_t n) const
   {
      return exploration / std::pow(static_cast< double >(n), exploration_exponent);
   }
};

/// Everything that happened in one round of play.
struct RoundOutcome {
   std::optional< PureProfile > sampled;
   std::vector< double > realized_payoffs;
   FeedbackSignal signal;
   /// Sampling distribution actually used (bandit only).
   std::optional< MixedProfile > perturbed;
};

template < FiniteGame G >
FeedbackSignal full_signal(const G& game, const MixedProfile& x)
{
   validate_mixed_profile(x, game.action_counts());
   FeedbackSignal signal{PayoffVectors(game.action_counts()), FeedbackModel::full};
   for(std::size_t i = 0; i < game.num_players(); ++i) {
      const auto v = game.payoff_vector(i, x);
      std::ranges::copy(v, signal.estimates[i].begin());
   }
   return signal;
}

/// Independent inverse-CDF draw per player.
inline PureProfile sample_profile(const MixedProfile& x, Rng& rng)
{
   PureProfile a{std::vector< std::size_t >(x.num_players())};
   for(std::size_t i = 0; i < x.num_players(); ++i) {
      a[i] = rng.categorical(x[i]);
   }
   return a;
}

/// Counterfactual payoff vectors against the realized opponents' actions.
template < FiniteGame G >
PayoffVectors realization_estimate(const G& game, const PureProfile& a)
{
   PayoffVectors v(game.action_counts());
   for(std::size_t i = 0; i < game.num_players(); ++i) {
      std::ranges::copy(game.pure_payoff_vector(i, a), v[i].begin());
   }
   return v;
}

/// One shared profile a ~ x feeds every player's what-if payoff vector.
template < FiniteGame G >
RoundOutcome realization_signal(const G& game, const MixedProfile& x, Rng& rng)
{
   validate_mixed_profile(x, game.action_counts());
   RoundOutcome out;
   out.sampled = sample_profile(x, rng);
   out.realized_payoffs = game.pure_payoff(*out.sampled);
   out.signal = {realization_estimate(game, *out.sampled), FeedbackModel::realization};
   return out;
}

/// x_hat_i = (1 - eps) x_i + eps * uniform.
inline MixedProfile explore(const MixedProfile& x, double eps)
{
   MixedProfile mixed = x;
   for(std::size_t i = 0; i < x.num_players(); ++i) {
      const double share = eps / static_cast< double >(x.size(i));
      for(auto& p : mixed[i]) {
         p = (1.0 - eps) * p + share;
      }
   }
   return mixed;
}

/// Importance-weighted estimate: zero except at the played action, where it is
/// the realized payoff divided by that action's sampling probability.
inline PayoffVectors importance_weighted_estimate(const MixedProfile& sampling, const PureProfile& a,
                                                  std::span< const double > realized)
{
   PayoffVectors v(sampling.action_counts());
   for(std::size_t i = 0; i < sampling.num_players(); ++i) {
      v[i][a[i]] = realized[i] / sampling[i][a[i]];
   }
   return v;
}

template < FiniteGame G >
RoundOutcome bandit_signal(const G& game, const MixedProfile& x, std::size_t n,
                           const FeedbackConfig& cfg, Rng& rng)
{
   validate_mixed_profile(x, game.action_counts());
   if(n == 0) {
      throw InvalidConfiguration("rounds are numbered from 1");
   }
   RoundOutcome out;
   out.perturbed = explore(x, cfg.exploration_at(n));
   out.sampled = sample_profile(*out.perturbed, rng);
   out.realized_payoffs = game.pure_payoff(*out.sampled);
   out.signal = {importance_weighted_estimate(*out.perturbed, *out.sampled, out.realized_payoffs),
                 FeedbackModel::bandit};
   return out;
}

/// Dispatches on the configured model.
template < FiniteGame G >
RoundOutcome observe(const G& game, const MixedProfile& x, std::size_t n, const FeedbackConfig& cfg,
                     Rng& rng)
{
   switch(cfg.model) {
      case FeedbackModel::full: {
         RoundOutcome out;
         out.signal = full_signal(game, x);
         return out;
      }
      case FeedbackModel::realization: return realization_signal(game, x, rng);
      case FeedbackModel::bandit: return bandit_signal(game, x, n, cfg, rng);
   }
   throw InvalidConfiguration("unknown feedback model");
}

/// Split of a signal into mean payoff field, zero-mean noise and systematic bias:
/// v_hat = v(x) + noise + bias.
struct SignalDecomposition {
   PayoffVectors noise;
   PayoffVectors bias;
};

/// Bias of the importance-weighted estimator at step n: v(x_hat) - v(x).
template < FiniteGame G >
PayoffVectors exploration_bias(const G& game, const MixedProfile& x, std::size_t n,
                               const FeedbackConfig& cfg)
{
   const auto mixed = explore(x, cfg.exploration_at(n));
   PayoffVectors bias(game.action_counts());
   for(std::size_t i = 0; i < game.num_players(); ++i) {
      const auto at_mixed = game.payoff_vector(i, mixed);
      const auto at_x = game.payoff_vector(i, x);
      for(std::size_t k = 0; k < at_x.size(); ++k) {
         bias[i][k] = at_mixed[k] - at_x[k];
      }
   }
   return bias;
}

template < FiniteGame G >
SignalDecomposition decompose_signal(const G& game, const MixedProfile& x, const RoundOutcome& round,
                                     std::size_t n, const FeedbackConfig& cfg)
{
   SignalDecomposition parts{PayoffVectors(game.action_counts()), PayoffVectors(game.action_counts())};
   if(round.signal.model == FeedbackModel::bandit) {
      parts.bias = exploration_bias(game, x, n, cfg);
   }
   for(std::size_t i = 0; i < game.num_players(); ++i) {
      const auto mean = game.payoff_vector(i, x);
      for(std::size_t k = 0; k < mean.size(); ++k) {
         parts.noise[i][k] = round.signal.estimates[i][k] - mean[k] - parts.bias[i][k];
      }
   }
   return parts;
}

}  // namespace ftxl
