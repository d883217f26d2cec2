#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "ftxl/dynamics.hpp"
#include "ftxl/harness.hpp"

using namespace ftxl;

namespace {

const Regularizer logit = Regularizer::entropic();

/// Runs the single-player game with u(A) - u(B) = 1 from rest at y = 0.
Trajectory example_run(double r, FrictionKind kind, double t_start, double t_end, double dt = 1e-3)
{
   const auto game = single_player_game(1.0);
   const auto init = at_rest(ScoreVector(game.action_counts()), t_start, r, kind);
   return integrate(game, logit, init, IntegratorConfig{dt, t_start, t_end, 10});
}

/// Lead of A over B, i.e. -(z(t) - z(t_start)) for the gap z = y_B - y_A started at 0.
double lead(const TrajectorySample& s)
{
   return s.scores[0][0] - s.scores[0][1];
}

}  // namespace

namespace oracle {

/// Exact lead under vanishing friction r/t from rest at t0 with unit payoff gap:
/// p(t) = (t - t0^{r+1} t^{-r}) / (r + 1), integrated in closed form.
inline double vanishing_lead(double r, double t0, double t)
{
   const double quad = (t * t - t0 * t0) / (2.0 * (r + 1.0));
   if(t0 == 0.0) {
      return quad;
   }
   const double tail = std::abs(r - 1.0) < 1e-15 ? std::log(t / t0)
                                                  : (std::pow(t, 1.0 - r) - std::pow(t0, 1.0 - r)) / (1.0 - r);
   return quad - std::pow(t0, r + 1.0) / (r + 1.0) * tail;
}

}  // namespace oracle

TEST(VectorField, Examples)
{
   const auto game = single_player_game(1.0);
   auto s = at_rest(ScoreVector::from_nested({{0.4, -0.2}}), 1.0, 0.0);
   const auto d = vector_field(game, logit, s);
   EXPECT_EQ(d.dy.to_nested(), (std::vector< std::vector< double > >{{0.0, 0.0}}));
   EXPECT_EQ(d.dp.to_nested(), (std::vector< std::vector< double > >{{1.0, 0.0}}));

   // reduced gap coordinate: z'' = -1 - (r/t) z' for z = y_B - y_A
   s.friction = 2.0;
   s.time = 4.0;
   s.momentum = MomentumVector::from_nested({{0.7, 0.1}});
   const auto e = vector_field(game, logit, s);
   const double zdot = s.momentum[0][1] - s.momentum[0][0];
   EXPECT_NEAR(e.dp[0][1] - e.dp[0][0], -1.0 - (2.0 / 4.0) * zdot, 1e-15);

   // constant friction fixed point p = v / r
   auto c = at_rest(ScoreVector::from_nested({{0.0, 0.0}}), 0.0, 50.0, FrictionKind::constant);
   c.momentum = MomentumVector::from_nested({{1.0 / 50.0, 0.0}});
   const auto f = vector_field(game, logit, c);
   EXPECT_NEAR(f.dp[0][0], 0.0, 1e-15);
   EXPECT_NEAR(f.dp[0][1], 0.0, 1e-15);
}

TEST(VectorField, SingularAtTimeZero)
{
   const auto game = single_player_game(1.0);
   auto s = at_rest(ScoreVector(game.action_counts()), 0.0, 3.0);
   EXPECT_THROW(vector_field(game, logit, s), DomainError);
   s.time = -1.0;
   EXPECT_THROW(vector_field(game, logit, s), DomainError);
   s.friction = 0.0;
   EXPECT_NO_THROW(vector_field(game, logit, s));
}

TEST(Integrate, ExampleClosedFormWithoutFriction)
{
   const auto traj = example_run(0.0, FrictionKind::vanishing, 0.0, 10.0);
   EXPECT_DOUBLE_EQ(traj.back().time, 10.0);
   EXPECT_NEAR(lead(traj.back()), 50.0, 1e-4);
   for(const auto& s : traj) {
      EXPECT_NEAR(lead(s), s.time * s.time / 2.0, 1e-6);
      // constant field: momentum grows linearly
      EXPECT_NEAR(s.momentum[0][0], s.time, 1e-9);
   }
}

TEST(Integrate, ExampleClosedFormWithVanishingFriction)
{
   const auto traj = example_run(3.0, FrictionKind::vanishing, 1e-3, 10.0);
   EXPECT_NEAR(lead(traj.back()), 12.5, 1e-3);
   for(const auto& s : traj) {
      EXPECT_NEAR(lead(s), oracle::vanishing_lead(3.0, 1e-3, s.time), 1e-6);
   }
   // insensitive to the start time at this scale
   const auto half = example_run(3.0, FrictionKind::vanishing, 5e-4, 10.0);
   EXPECT_NEAR(lead(half.back()), lead(traj.back()), 1e-5);
}

TEST(Integrate, ExampleConstantFriction)
{
   const auto traj = example_run(1.0, FrictionKind::constant, 0.0, 5.0);
   EXPECT_NEAR(lead(traj.back()), 5.0 + std::exp(-5.0) - 1.0, 1e-3);
   EXPECT_NEAR(lead(traj.back()), 4.0067, 1e-3);
   for(const auto& s : traj) {
      EXPECT_NEAR(lead(s), s.time + std::exp(-s.time) - 1.0, 1e-9);
   }
}

TEST(Integrate, FourthOrderConvergence)
{
   // nonpolynomial trajectory: vanishing friction r = 3 from t0 = 1
   const double exact = oracle::vanishing_lead(3.0, 1.0, 3.0);
   double previous = 0.0;
   for(double dt : {0.2, 0.1, 0.05}) {
      const auto traj = example_run(3.0, FrictionKind::vanishing, 1.0, 3.0, dt);
      const double err = std::abs(lead(traj.back()) - exact);
      if(previous > 0.0) {
         EXPECT_GE(previous / err, 8.0) << "dt = " << dt;
      }
      previous = err;
   }
}

TEST(Integrate, StaysOnSimplexAndSeparatesMonotonically)
{
   const auto game = zero_sum_game();
   const PureProfile eq_profile{{0, 1}};
   const auto eq = drift_constant(game, eq_profile);
   Rng rng(0);
   const auto y0 = initial_scores(game, Initialization{InitMode::near_equilibrium, std::nullopt}, eq, rng);
   const auto traj = integrate(game, logit, at_rest(y0, 1e-3, 0.0), IntegratorConfig{1e-3, 1e-3, 8.0, 10});
   std::vector< double > last_gap(4, 0.0);
   for(std::size_t k = 0; k < traj.size(); ++k) {
      EXPECT_NO_THROW(validate_mixed_profile(traj[k].strategies, game.action_counts()));
      std::size_t j = 0;
      for(std::size_t i = 0; i < 2; ++i) {
         for(std::size_t a = 0; a < 3; ++a) {
            if(a == eq_profile[i]) {
               continue;
            }
            const double gap = traj[k].scores[i][a] - traj[k].scores[i][eq_profile[i]];
            if(k > 0) {
               EXPECT_LE(gap, last_gap[j]);
            }
            last_gap[j++] = gap;
         }
      }
   }
}

TEST(Integrate, Validation)
{
   const auto game = single_player_game(1.0);
   const auto init = at_rest(ScoreVector(game.action_counts()), 0.0, 0.0);
   EXPECT_THROW(integrate(game, logit, init, IntegratorConfig{0.0, 0.0, 1.0, 10}), InvalidConfiguration);
   EXPECT_THROW(integrate(game, logit, init, IntegratorConfig{0.5, 0.0, 1.0, 10}), InvalidConfiguration);
   EXPECT_THROW(integrate(game, logit, init, IntegratorConfig{1e-3, 1.0, 1.0, 10}), InvalidConfiguration);
   EXPECT_THROW(integrate(game, logit, init, IntegratorConfig{1e-3, 0.0, 1.0, 0}), InvalidConfiguration);
   const auto wrong = at_rest(ScoreVector::from_nested({{0, 0, 0}}), 0.0, 0.0);
   EXPECT_THROW(integrate(game, logit, wrong, IntegratorConfig{1e-3, 0.0, 1.0, 10}), ShapeMismatch);
}

TEST(Integrate, DivergenceReportsLastValidTime)
{
   const NormalFormGame huge({2}, {1e308, -1e308});
   const auto init = at_rest(ScoreVector(huge.action_counts()), 0.0, 0.0);
   try {
      integrate(huge, logit, init, IntegratorConfig{0.1, 0.0, 100.0, 1});
      FAIL() << "expected divergence";
   } catch(const DivergenceError& e) {
      EXPECT_GE(e.last_valid_time(), 0.0);
      EXPECT_LT(e.last_valid_time(), 100.0);
   }
}

TEST(RateEnvelope, ExampleCoefficient)
{
   const auto traj = example_run(0.0, FrictionKind::vanishing, 0.0, 10.0);
   const auto eq = drift_constant(single_player_game(1.0), PureProfile{{0}});
   const auto fit = rate_envelope(traj, eq, 0.0);
   EXPECT_NEAR(fit.coefficient, 0.5, 0.05 * 0.5);
   EXPECT_GT(fit.r_squared, 0.999);
   EXPECT_DOUBLE_EQ(fit.predicted, 0.25);
}

TEST(RateEnvelope, ZeroSumBeatsGuaranteedEnvelope)
{
   const auto game = zero_sum_game();
   const auto eq = drift_constant(game, PureProfile{{0, 1}});
   Rng rng(0);
   for(double r : {0.0, 1.0}) {
      const auto y0 = initial_scores(game, Initialization{InitMode::near_equilibrium, std::nullopt}, eq, rng);
      const auto traj = integrate(game, logit, at_rest(y0, 1e-3, r), IntegratorConfig{1e-3, 1e-3, 12.0, 10});
      const auto fit = rate_envelope(traj, eq, r);
      EXPECT_GE(fit.coefficient, 0.9 * eq.drift / (2.0 * (r + 1.0))) << "r = " << r;
   }
}

TEST(RateEnvelope, SyntheticQuadratic)
{
   Trajectory traj;
   for(int k = 0; k <= 50; ++k) {
      const double t = 0.1 * k;
      const double d = std::exp(-t * t);
      traj.push_back({t, ScoreVector(), MomentumVector(), MixedProfile::from_nested({{1.0 - d, d}})});
   }
   const StrictEquilibrium eq{PureProfile{{0}}, 0.5, 1.0};
   const auto fit = rate_envelope(traj, eq, 0.0);
   EXPECT_NEAR(fit.coefficient, 1.0, 1e-10);
   EXPECT_NEAR(fit.intercept, 0.0, 1e-9);
}

TEST(RateEnvelope, RefusesUnconvergedTrajectory)
{
   const auto traj = example_run(0.0, FrictionKind::vanishing, 0.0, 2.0);
   const auto eq = drift_constant(single_player_game(1.0), PureProfile{{0}});
   EXPECT_THROW(rate_envelope(traj, eq, 0.0), FitRefused);
}
