#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>

#include "ftxl/errors.hpp"
#include "ftxl/player_vectors.hpp"
#include "ftxl/regularizers.hpp"

namespace ftxl {

enum class Algorithm { ftrl, ftxl, ftxl_vanishing, ftxl_constant };

enum class FeedbackModel { full, realization, bandit };

inline std::string_view to_string(Algorithm alg)
{
   switch(alg) {
      case Algorithm::ftrl: return "ftrl";
      case Algorithm::ftxl: return "ftxl";
      case Algorithm::ftxl_vanishing: return "ftxl-vf";
      case Algorithm::ftxl_constant: return "ftxl-cf";
   }
   return "?";
}

inline std::string_view to_string(FeedbackModel model)
{
   switch(model) {
      case FeedbackModel::full: return "full";
      case FeedbackModel::realization: return "realization";
      case FeedbackModel::bandit: return "bandit";
   }
   return "?";
}

/// Per-player payoff-vector estimates delivered in one round.
struct FeedbackSignal {
   PayoffVectors estimates;
   FeedbackModel model = FeedbackModel::full;
};

struct LearnerParams {
   Algorithm algorithm = Algorithm::ftxl;
   double step_size = 0.01;
   double friction = 0.0;
};

/// Evolving state of one learning run: scores, momentum and the 1-based step counter.
struct LearnerState {
   ScoreVector scores;
   MomentumVector momentum;
   std::size_t step = 1;
   double step_size = 0.01;
   double friction = 0.0;
   Algorithm algorithm = Algorithm::ftxl;

   bool operator==(const LearnerState&) const = default;
};

inline void validate(const LearnerParams& params)
{
   if(not(params.step_size > 0.0) or not std::isfinite(params.step_size)) {
      throw InvalidConfiguration("step size must be positive");
   }
   if(not(params.friction >= 0.0) or not std::isfinite(params.friction)) {
      throw InvalidConfiguration("friction must be nonnegative");
   }
   const double damping = params.step_size * params.friction;
   if(params.algorithm == Algorithm::ftxl_constant and damping >= 1.0) {
      throw InvalidConfiguration("constant friction needs step_size * friction < 1");
   }
   if(params.algorithm == Algorithm::ftxl_vanishing and damping >= 1.0) {
      throw InvalidConfiguration("vanishing friction needs step_size * friction < 1 at step 1");
   }
}

/// Fresh state with zero momentum at step 1.
inline LearnerState make_learner(ScoreVector initial_scores, const LearnerParams& params)
{
   validate(params);
   if(not initial_scores.all_finite()) {
      throw InvalidConfiguration("initial scores must be finite");
   }
   LearnerState state;
   state.momentum = MomentumVector(initial_scores.action_counts());
   state.scores = std::move(initial_scores);
   state.step_size = params.step_size;
   state.friction = params.friction;
   state.algorithm = params.algorithm;
   return state;
}

namespace detail {

inline void check_shape(const LearnerState& state, const FeedbackSignal& signal)
{
   if(not state.scores.same_shape(signal.estimates)) {
      throw ShapeMismatch("signal shape does not match the learner's action sets");
   }
}

inline void require_algorithm(const LearnerState& state, Algorithm expected)
{
   if(state.algorithm != expected) {
      throw InvalidConfiguration("step function for " + std::string(to_string(expected))
                                 + " applied to a " + std::string(to_string(state.algorithm))
                                 + " learner");
   }
}

/// p <- p * damping + eta * v;  y <- y + eta * p.
inline void momentum_update(LearnerState& state, const FeedbackSignal& signal, double damping)
{
   const double eta = state.step_size;
   auto p = state.momentum.flat();
   auto y = state.scores.flat();
   const auto v = signal.estimates.flat();
   for(std::size_t k = 0; k < p.size(); ++k) {
      p[k] = p[k] * damping + eta * v[k];
      y[k] = y[k] + eta * p[k];
   }
}

}  // namespace detail

/// In-place update for whichever algorithm the state carries.
inline void advance(LearnerState& state, const FeedbackSignal& signal)
{
   detail::check_shape(state, signal);
   switch(state.algorithm) {
      case Algorithm::ftrl: {
         auto y = state.scores.flat();
         const auto v = signal.estimates.flat();
         for(std::size_t k = 0; k < y.size(); ++k) {
            y[k] = y[k] + state.step_size * v[k];
         }
         break;
      }
      case Algorithm::ftxl: {
         const double eta = state.step_size;
         auto p = state.momentum.flat();
         auto y = state.scores.flat();
         const auto v = signal.estimates.flat();
         for(std::size_t k = 0; k < p.size(); ++k) {
            p[k] = p[k] + eta * v[k];
            y[k] = y[k] + eta * p[k];
         }
         break;
      }
      case Algorithm::ftxl_vanishing: {
         const double ratio = state.step_size * state.friction / static_cast< double >(state.step);
         if(ratio >= 1.0) {
            throw InvalidConfiguration("vanishing friction factor eta*r/n must stay below 1");
         }
         detail::momentum_update(state, signal, 1.0 - ratio);
         break;
      }
      case Algorithm::ftxl_constant: {
         const double damping = state.step_size * state.friction;
         if(damping >= 1.0) {
            throw InvalidConfiguration("constant friction needs eta * r < 1");
         }
         detail::momentum_update(state, signal, 1.0 - damping);
         break;
      }
   }
   ++state.step;
}

/// y' = y + eta * v.
inline LearnerState ftrl_step(LearnerState state, const FeedbackSignal& signal)
{
   detail::require_algorithm(state, Algorithm::ftrl);
   advance(state, signal);
   return state;
}

/// p' = p + eta * v, then y' = y + eta * p'.
inline LearnerState ftxl_step(LearnerState state, const FeedbackSignal& signal)
{
   detail::require_algorithm(state, Algorithm::ftxl);
   advance(state, signal);
   return state;
}

/// p' = p (1 - eta r / n) + eta * v, then y' = y + eta * p'.
inline LearnerState ftxl_vanishing_friction_step(LearnerState state, const FeedbackSignal& signal)
{
   detail::require_algorithm(state, Algorithm::ftxl_vanishing);
   advance(state, signal);
   return state;
}

/// p' = p (1 - eta r) + eta * v, then y' = y + eta * p'.
inline LearnerState ftxl_constant_friction_step(LearnerState state, const FeedbackSignal& signal)
{
   detail::require_algorithm(state, Algorithm::ftxl_constant);
   advance(state, signal);
   return state;
}

inline LearnerState step(LearnerState state, const FeedbackSignal& signal)
{
   advance(state, signal);
   return state;
}

/// Per-player mirror map of the current scores.
inline MixedProfile strategies_of(const ScoreVector& scores, const Regularizer& reg)
{
   MixedProfile x(scores.action_counts());
   for(std::size_t i = 0; i < scores.num_players(); ++i) {
      const auto xi = mirror_map(reg, scores[i]);
      std::ranges::copy(xi, x[i].begin());
   }
   return x;
}

inline MixedProfile strategies_of(const LearnerState& state, const Regularizer& reg)
{
   return strategies_of(state.scores, reg);
}

}  // namespace ftxl
