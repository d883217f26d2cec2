#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ftxl/errors.hpp"
#include "ftxl/fitting.hpp"
#include "ftxl/game.hpp"
#include "ftxl/learners.hpp"
#include "ftxl/player_vectors.hpp"
#include "ftxl/regularizers.hpp"

namespace ftxl {

/// Damping law of the continuous dynamics: r/t (vanishing) or r (constant).
enum class FrictionKind { vanishing, constant };

/// (y, p) at time t for  dy/dt = p,  dp/dt = v(Q(y)) - friction(t) p.
struct ContinuousState {
   double time = 0.0;
   ScoreVector scores;
   MomentumVector momentum;
   double friction = 0.0;
   FrictionKind friction_kind = FrictionKind::vanishing;
};

/// Starts at rest (p = 0) from the given scores.
inline ContinuousState at_rest(ScoreVector scores, double t_start, double friction,
                               FrictionKind kind = FrictionKind::vanishing)
{
   ContinuousState s;
   s.time = t_start;
   s.momentum = MomentumVector(scores.action_counts());
   s.scores = std::move(scores);
   s.friction = friction;
   s.friction_kind = kind;
   return s;
}

struct IntegratorConfig {
   double dt = 1e-3;
   double t_start = 1e-3;
   double t_end = 10.0;
   /// Record every this many steps (the first and last states are always kept).
   std::size_t sample_every = 10;

   void validate() const
   {
      if(not(dt > 0.0) or not(t_start >= 0.0) or not(t_end > t_start)) {
         throw InvalidConfiguration("integrator needs dt > 0 and 0 <= t_start < t_end");
      }
      if(dt > (t_end - t_start) / 10.0) {
         throw InvalidConfiguration("dt must be at most a tenth of the integration span");
      }
      if(sample_every == 0) {
         throw InvalidConfiguration("sample_every must be positive");
      }
   }
};

struct StateDerivative {
   ScoreVector dy;
   MomentumVector dp;
};

template < FiniteGame G >
StateDerivative vector_field(const G& game, const Regularizer& reg, const ContinuousState& s)
{
   double damping = s.friction;
   if(s.friction_kind == FrictionKind::vanishing) {
      if(s.friction == 0.0) {
         damping = 0.0;
      } else if(not(s.time > 0.0)) {
         throw DomainError("vanishing friction r/t is undefined at t <= 0");
      } else {
         damping = s.friction / s.time;
      }
   }
   const auto x = strategies_of(s.scores, reg);
   StateDerivative d{s.momentum.retag< ScoreTag >(), MomentumVector(s.scores.action_counts())};
   for(std::size_t i = 0; i < game.num_players(); ++i) {
      const auto v = game.payoff_vector(i, x);
      const auto p = s.momentum[i];
      auto dp = d.dp[i];
      for(std::size_t k = 0; k < v.size(); ++k) {
         dp[k] = v[k] - damping * p[k];
      }
   }
   return d;
}

struct TrajectorySample {
   double time;
   ScoreVector scores;
   MomentumVector momentum;
   MixedProfile strategies;
};

using Trajectory = std::vector< TrajectorySample >;

namespace detail {

inline ContinuousState displaced(const ContinuousState& s, const StateDerivative& d, double h)
{
   ContinuousState out = s;
   out.time = s.time + h;
   auto y = out.scores.flat();
   auto p = out.momentum.flat();
   const auto dy = d.dy.flat();
   const auto dp = d.dp.flat();
   for(std::size_t k = 0; k < y.size(); ++k) {
      y[k] += h * dy[k];
      p[k] += h * dp[k];
   }
   return out;
}

}  // namespace detail

/// Fixed-step classical fourth-order Runge-Kutta integration from `init` over
/// [cfg.t_start, cfg.t_end]. The step is adjusted down so the last step lands on t_end.
template < FiniteGame G >
Trajectory integrate(const G& game, const Regularizer& reg, ContinuousState init,
                     const IntegratorConfig& cfg)
{
   cfg.validate();
   if(not init.scores.same_shape(game.action_counts()) or not init.momentum.same_shape(init.scores)) {
      throw ShapeMismatch("initial state does not match the game's action sets");
   }
   const auto steps = static_cast< std::size_t >(std::ceil((cfg.t_end - cfg.t_start) / cfg.dt - 1e-9));
   const double h = (cfg.t_end - cfg.t_start) / static_cast< double >(steps);
   init.time = cfg.t_start;

   Trajectory traj;
   traj.reserve(steps / cfg.sample_every + 2);
   auto record = [&](const ContinuousState& s) {
      traj.push_back({s.time, s.scores, s.momentum, strategies_of(s.scores, reg)});
   };

   ContinuousState s = std::move(init);
   record(s);
   for(std::size_t n = 1; n <= steps; ++n) {
      const auto k1 = vector_field(game, reg, s);
      const auto k2 = vector_field(game, reg, detail::displaced(s, k1, 0.5 * h));
      const auto k3 = vector_field(game, reg, detail::displaced(s, k2, 0.5 * h));
      const auto k4 = vector_field(game, reg, detail::displaced(s, k3, h));
      const double last_time = s.time;
      auto y = s.scores.flat();
      auto p = s.momentum.flat();
      for(std::size_t k = 0; k < y.size(); ++k) {
         y[k] += h / 6.0 * (k1.dy.flat()[k] + 2.0 * k2.dy.flat()[k] + 2.0 * k3.dy.flat()[k] + k4.dy.flat()[k]);
         p[k] += h / 6.0 * (k1.dp.flat()[k] + 2.0 * k2.dp.flat()[k] + 2.0 * k3.dp.flat()[k] + k4.dp.flat()[k]);
      }
      s.time = cfg.t_start + static_cast< double >(n) * h;
      if(not s.scores.all_finite() or not s.momentum.all_finite()) {
         throw DivergenceError("integration produced a non-finite state", last_time);
      }
      if(n % cfg.sample_every == 0 or n == steps) {
         record(s);
      }
   }
   return traj;
}

/// Quadratic-in-time fit of the log sup-distance, log d ~ intercept - coefficient * t^2.
struct RateEnvelopeFit {
   double coefficient = 0.0;
   double intercept = 0.0;
   double r_squared = 0.0;
   /// c / (2 (r + 1)), the decay coefficient guaranteed for logit choice.
   double predicted = 0.0;
   /// (coefficient - predicted) / predicted.
   double relative_error = 0.0;
   std::size_t points = 0;
};

inline RateEnvelopeFit rate_envelope(const Trajectory& traj, const StrictEquilibrium& eq, double friction)
{
   if(traj.empty()) {
      throw FitRefused("empty trajectory");
   }
   std::vector< double > dist(traj.size());
   for(std::size_t k = 0; k < traj.size(); ++k) {
      dist[k] = equilibrium_distance(traj[k].strategies, eq.profile).sup;
   }
   if(not(dist.back() < 1e-3)) {
      throw FitRefused("trajectory has not approached the equilibrium (final sup-distance "
                       + std::to_string(dist.back()) + ")");
   }
   const auto window = post_transient_window(dist);
   std::vector< double > t2;
   std::vector< double > logd;
   for(std::size_t k = window.begin; k < window.end; ++k) {
      t2.push_back(traj[k].time * traj[k].time);
      logd.push_back(std::log(dist[k]));
   }
   const auto line = fit_line(t2, logd);
   RateEnvelopeFit fit;
   fit.coefficient = -line.slope;
   fit.intercept = line.intercept;
   fit.r_squared = line.r_squared;
   fit.predicted = eq.drift / (2.0 * (friction + 1.0));
   fit.relative_error = (fit.coefficient - fit.predicted) / fit.predicted;
   fit.points = t2.size();
   return fit;
}

}  // namespace ftxl
