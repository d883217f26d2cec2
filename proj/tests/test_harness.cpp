#include <gtest/gtest.h>

#include <cmath>
#include <sstream>
#include <vector>

#include "ftxl/harness.hpp"

using namespace ftxl;

namespace {

ExperimentConfig zero_sum_full(Algorithm alg, std::size_t horizon = 1000)
{
   auto cfg = preset("zerosum");
   cfg.learner.algorithm = alg;
   cfg.feedback.model = FeedbackModel::full;
   cfg.horizon = horizon;
   cfg.trials = 1;
   return cfg;
}

std::string trials_csv(const std::vector< TrialRecord >& records)
{
   std::ostringstream out;
   write_trials_csv(out, records);
   return out.str();
}

TrialRecord synthetic_record(const std::vector< double >& dist)
{
   TrialRecord r;
   r.dist_sup = dist;
   r.dist_l1 = dist;
   r.converged = true;
   return r;
}

}  // namespace

TEST(Preset, ZeroSum)
{
   const auto cfg = preset("zerosum");
   EXPECT_EQ(cfg.learner.step_size, 0.01);
   EXPECT_EQ(cfg.trials, 100u);
   EXPECT_EQ(cfg.horizon, 1000u);
   EXPECT_EQ(cfg.feedback.exploration, 0.1);
   EXPECT_EQ(cfg.feedback.exploration_exponent, 0.0);
   EXPECT_EQ(cfg.init.mode, InitMode::zero);
   ASSERT_TRUE(std::holds_alternative< NormalFormGame >(cfg.game));
   EXPECT_TRUE(std::ranges::equal(std::get< NormalFormGame >(cfg.game).payoffs(), zero_sum_game().payoffs()));
   EXPECT_EQ(*cfg.target, (PureProfile{{0, 1}}));
}

TEST(Preset, Congestion)
{
   const auto cfg = preset("congestion");
   EXPECT_EQ(cfg.learner.step_size, 0.01);
   EXPECT_EQ(cfg.trials, 100u);
   EXPECT_EQ(cfg.init.mode, InitMode::uniform_random);
   EXPECT_EQ(cfg.init.low, -1.0);
   EXPECT_EQ(cfg.init.high, 1.0);
   EXPECT_EQ(cfg.feedback.exploration, 1.0);
   EXPECT_EQ(cfg.feedback.exploration_exponent, 0.25);
   const auto& g = std::get< CongestionGame >(cfg.game);
   EXPECT_EQ(g.num_players(), 100u);
   EXPECT_EQ(g.fixed_cost(), 1.1);

   // random init lands in [-1, 1] for every player and action
   const auto prep = prepare(cfg);
   Rng rng(4);
   const auto y = initial_scores(g, cfg.init, prep.equilibrium, rng);
   EXPECT_EQ(y.num_players(), 100u);
   for(double v : y.flat()) {
      EXPECT_GE(v, -1.0);
      EXPECT_LE(v, 1.0);
   }
   EXPECT_THROW(preset("prisoners"), InvalidConfiguration);
}

TEST(Initialization, NearEquilibriumLeadsByThresholdPlusMargin)
{
   const auto game = zero_sum_game();
   const auto eq = drift_constant(game, PureProfile{{0, 1}});
   Rng rng(0);
   const auto y = initial_scores(game, Initialization{InitMode::near_equilibrium, std::nullopt}, eq, rng);
   EXPECT_EQ(y.to_nested(), (std::vector< std::vector< double > >{{0.0, -eq.threshold - 0.1, -eq.threshold - 0.1},
                                                                   {-eq.threshold - 0.1, 0.0, -eq.threshold - 0.1}}));
   const auto z = initial_scores(game, Initialization{InitMode::near_equilibrium, 3.0}, eq, rng);
   EXPECT_EQ(z[0][1], -3.0);
}

TEST(RunTrial, FtxlFullInformationNearEquilibrium)
{
   auto cfg = zero_sum_full(Algorithm::ftxl);
   cfg.init.mode = InitMode::near_equilibrium;
   const auto rec = run_trial(cfg, 0);
   ASSERT_EQ(rec.dist_sup.size(), 1000u);
   EXPECT_LT(rec.dist_sup.back(), 1e-6);
   EXPECT_TRUE(rec.converged);
   EXPECT_FALSE(rec.diverged);
}

TEST(RunTrial, FtxlOutpacesFtrlTenfold)
{
   for(auto mode : {InitMode::zero, InitMode::near_equilibrium}) {
      auto fast = zero_sum_full(Algorithm::ftxl);
      auto slow = zero_sum_full(Algorithm::ftrl);
      fast.init.mode = slow.init.mode = mode;
      const auto a = run_trial(fast, 0);
      const auto b = run_trial(slow, 0);
      EXPECT_GE(b.dist_sup.back(), 10.0 * a.dist_sup.back());
      EXPECT_LT(a.dist_sup.back(), b.dist_sup.back());
   }
}

TEST(RunTrial, HorizonOne)
{
   const auto rec = run_trial(zero_sum_full(Algorithm::ftxl, 1), 0);
   ASSERT_EQ(rec.dist_sup.size(), 1u);
   EXPECT_NEAR(rec.dist_sup[0], 2.0 / 3.0, 1e-15);
   EXPECT_NEAR(rec.dist_l1[0], 4.0 / 3.0, 1e-15);
}

TEST(RunTrial, DivergenceIsFlaggedNotThrown)
{
   ExperimentConfig cfg;
   cfg.game = NormalFormGame({2}, {1e11, 0.0});
   cfg.target = PureProfile{{0}};
   cfg.learner = {Algorithm::ftxl, 0.01, 0.0};
   cfg.horizon = 1000;
   cfg.trials = 1;
   const auto rec = run_trial(cfg, 0);
   EXPECT_TRUE(rec.diverged);
   EXPECT_FALSE(rec.converged);
   EXPECT_EQ(rec.dist_sup.size(), 1000u);
}

TEST(RunTrial, DistancesWithinSimplexDiameterAndBelowBound)
{
   auto cfg = preset("zerosum");
   cfg.trials = 8;
   cfg.horizon = 600;
   std::size_t checked = 0;
   for(auto model : {FeedbackModel::full, FeedbackModel::realization, FeedbackModel::bandit}) {
      cfg.feedback.model = model;
      for(const auto& rec : run_experiment(cfg)) {
         for(std::size_t n = 0; n < rec.dist_sup.size(); ++n) {
            EXPECT_GE(rec.dist_l1[n], 0.0);
            EXPECT_LE(rec.dist_l1[n], 2.0);
            if(not std::isnan(rec.bound_sup[n])) {
               EXPECT_LE(rec.dist_sup[n], rec.bound_sup[n]);
               ++checked;
            }
         }
      }
   }
   EXPECT_GT(checked, 1000u);
}

TEST(RunRounds, SignalSeesOnlyCurrentStrategies)
{
   const auto game = zero_sum_game();
   const auto reg = Regularizer::entropic();
   auto state = make_learner(ScoreVector(game.action_counts()), {Algorithm::ftxl, 0.05, 0.0});
   std::size_t observed_step = 0;
   MixedProfile observed;
   std::vector< MixedProfile > history;
   std::size_t oracle_calls = 0;
   const auto result = run_rounds(
      game, reg, state, 200,
      [&](const MixedProfile& x, std::size_t n) {
         // the oracle runs after the observer saw step n and before any later strategy exists
         EXPECT_EQ(n, observed_step);
         EXPECT_EQ(x, observed);
         EXPECT_EQ(history.size(), n);
         ++oracle_calls;
         return full_signal(game, x);
      },
      [&](std::size_t n, const LearnerState& s, const MixedProfile& x) {
         EXPECT_EQ(s.step, n);
         EXPECT_EQ(x, strategies_of(s, reg));
         observed_step = n;
         observed = x;
         history.push_back(x);
      });
   EXPECT_EQ(oracle_calls, 199u);
   EXPECT_EQ(history.size(), 200u);
   EXPECT_EQ(result.steps_observed, 200u);
   EXPECT_EQ(result.state.step, 200u);
}

TEST(RunExperiment, ReproducibleAcrossRunsAndThreadCounts)
{
   auto cfg = preset("zerosum");
   cfg.feedback.model = FeedbackModel::bandit;
   cfg.trials = 6;
   cfg.horizon = 300;
   cfg.threads = 1;
   const auto a = trials_csv(run_experiment(cfg));
   const auto b = trials_csv(run_experiment(cfg));
   cfg.threads = 3;
   const auto c = trials_csv(run_experiment(cfg));
   EXPECT_EQ(a, b);
   EXPECT_EQ(a, c);
   cfg.feedback.seed = 99;
   EXPECT_NE(a, trials_csv(run_experiment(cfg)));

   const auto r1 = run_trial(cfg, 4);
   const auto r2 = run_trial(cfg, 4);
   EXPECT_EQ(r1.dist_sup, r2.dist_sup);
   EXPECT_EQ(r1.seed, substream_seed(99, 4));
}

TEST(Aggregate, Examples)
{
   const auto one = synthetic_record({0.5, 0.25, 0.125});
   const auto s = aggregate({one});
   EXPECT_EQ(s.mean_l1, one.dist_l1);
   EXPECT_EQ(s.std_l1, (std::vector< double >{0, 0, 0}));

   const std::vector< double > base = {1.0, 1.0, 1.0};
   const std::vector< double > d = {0.5, 0.25, 0.125};
   std::vector< double > up(3), down(3);
   for(std::size_t k = 0; k < 3; ++k) {
      up[k] = base[k] + d[k];
      down[k] = base[k] - d[k];
   }
   const auto t = aggregate({synthetic_record(up), synthetic_record(down)});
   for(std::size_t k = 0; k < 3; ++k) {
      EXPECT_DOUBLE_EQ(t.mean_l1[k], 1.0);
      EXPECT_DOUBLE_EQ(t.std_l1[k], d[k]);
   }
   EXPECT_DOUBLE_EQ(t.convergence_fraction, 1.0);
   EXPECT_THROW(aggregate({}), InvalidConfiguration);
   EXPECT_THROW(aggregate({one, synthetic_record({0.1})}), ShapeMismatch);
}

TEST(FitDiscreteRate, SyntheticExactQuadratic)
{
   std::vector< double > dist;
   for(int n = 1; n <= 40; ++n) {
      dist.push_back(std::exp(-0.001 * n * (n - 1) / 2.0));
   }
   auto report = fit_discrete_rate({synthetic_record(dist)}, 1.0, 1.0);
   EXPECT_NEAR(report.mean_slope, -0.001, 1e-12);
   EXPECT_FALSE(report.underflow_warning);

   // log-distance exactly -n(n-1)/2: hits the floor within a few steps, so the window shrinks
   dist.clear();
   for(int n = 1; n <= 40; ++n) {
      dist.push_back(std::exp(-n * (n - 1) / 2.0));
   }
   report = fit_discrete_rate({synthetic_record(dist)}, 1.0, 1.0);
   EXPECT_NEAR(report.mean_slope, -1.0, 1e-9);
   EXPECT_TRUE(report.underflow_warning);
}

TEST(FitDiscreteRate, SinglePlayerExactSlope)
{
   ExperimentConfig cfg;
   cfg.game = single_player_game(1.0);
   cfg.target = PureProfile{{0}};
   cfg.learner = {Algorithm::ftxl, 0.01, 0.0};
   cfg.feedback.model = FeedbackModel::full;
   cfg.horizon = 1000;
   cfg.trials = 1;
   const auto records = run_experiment(cfg);
   const auto report = fit_discrete_rate(records, 0.01, 0.5);
   // the single player's gap is 1, twice the drift: slope -eta^2 * 1
   EXPECT_NEAR(report.mean_slope / -1e-4, 1.0, 0.01);
   EXPECT_GT(report.min_r_squared, 0.9999);
}

TEST(FitDiscreteRate, ZeroSumBeatsFullInformationEnvelope)
{
   const auto records = run_experiment(zero_sum_full(Algorithm::ftxl));
   const auto report = fit_discrete_rate(records, 0.01, 0.5);
   EXPECT_LE(report.mean_slope, 0.8 * report.full_info_slope);
   EXPECT_DOUBLE_EQ(report.full_info_slope, -0.5e-4);
   EXPECT_GT(report.min_r_squared, 0.99);
}

TEST(FitDiscreteRate, RefusesWithoutConvergedRecords)
{
   auto rec = synthetic_record({0.5, 0.5, 0.5});
   rec.converged = false;
   EXPECT_THROW(fit_discrete_rate({rec}, 0.01, 0.5), FitRefused);
}

TEST(Envelope, Exponents)
{
   EXPECT_DOUBLE_EQ(envelope_exponent(FeedbackModel::full, 0.5, 0.01, 100.0), -0.5 * 1e-4 * 4950.0);
   EXPECT_NEAR(envelope_exponent(FeedbackModel::realization, 0.5, 0.01, 100.0),
               -0.5 * 1e-4 * 4950.0 + 0.6 * 0.5 * std::pow(0.01, 5.0 / 3.0) * std::pow(100.0, 5.0 / 3.0), 1e-12);
   EXPECT_NEAR(envelope_exponent(FeedbackModel::bandit, 0.5, 0.01, 100.0),
               -0.5 * 1e-4 * 4950.0 + 5.0 / 9.0 * 0.5 * std::pow(0.01, 1.8) * std::pow(100.0, 1.8), 1e-12);
}

TEST(Csv, TrialsRoundTripAndSummaryHeader)
{
   auto cfg = preset("zerosum");
   cfg.trials = 3;
   cfg.horizon = 50;
   const auto records = run_experiment(cfg);
   std::istringstream in(trials_csv(records));
   const auto back = read_trials_csv(in);
   ASSERT_EQ(back.size(), 3u);
   for(std::size_t t = 0; t < 3; ++t) {
      EXPECT_EQ(back[t].dist_sup, records[t].dist_sup);
      EXPECT_EQ(back[t].dist_l1, records[t].dist_l1);
   }
   std::ostringstream summary;
   write_summary_csv(summary, aggregate(records));
   EXPECT_EQ(summary.str().substr(0, summary.str().find('\n')), "step,mean_l1,std_l1,frac_converged");
   EXPECT_EQ(trials_csv(records).substr(0, 28), "trial,step,dist_sup,dist_l1\n");

   std::istringstream bad("step,x\n1,2\n");
   EXPECT_THROW(read_trials_csv(bad), InvalidConfiguration);
   std::istringstream junk("trial,step,dist_sup,dist_l1\n0,1,abc,0.1\n");
   EXPECT_THROW(read_trials_csv(junk), InvalidConfiguration);
}

TEST(Config, Validation)
{
   auto cfg = preset("zerosum");
   cfg.horizon = 0;
   EXPECT_THROW(cfg.validate(), InvalidConfiguration);
   cfg = preset("zerosum");
   cfg.trials = 0;
   EXPECT_THROW(cfg.validate(), InvalidConfiguration);
   cfg = preset("zerosum");
   cfg.target = PureProfile{{1, 0}};
   EXPECT_THROW(prepare(cfg), NotStrictEquilibrium);
   cfg.target.reset();
   EXPECT_EQ(prepare(cfg).equilibrium.profile, (PureProfile{{0, 1}}));
   cfg.regularizer = "tsallis:0.5";
   EXPECT_NO_THROW(prepare(cfg));
}
