#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <exception>
#include <istream>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "ftxl/congestion.hpp"
#include "ftxl/dynamics.hpp"
#include "ftxl/errors.hpp"
#include "ftxl/feedback.hpp"
#include "ftxl/fitting.hpp"
#include "ftxl/game.hpp"
#include "ftxl/learners.hpp"
#include "ftxl/random.hpp"
#include "ftxl/regularizers.hpp"

namespace ftxl {

using GameSpec = std::variant< NormalFormGame, CongestionGame >;

/// 3x3 zero-sum game whose strict equilibrium is (row 0, column 1).
inline NormalFormGame zero_sum_game()
{
   const std::vector< std::vector< double > > row = {{2, 1, 2}, {-2, -1, -2}, {-2, -1, -2}};
   auto col = row;
   for(auto& r : col) {
      for(auto& v : r) {
         v = -v;
      }
   }
   return NormalFormGame::from_bimatrix(row, col);
}

/// One player, two actions, u(A) - u(B) = gap; A is the strict equilibrium.
inline NormalFormGame single_player_game(double gap = 1.0)
{
   return NormalFormGame({2}, {gap, 0.0});
}

inline CongestionGame congestion_game(std::size_t players = 100, double fixed_cost = 1.1)
{
   return CongestionGame(players, fixed_cost);
}

template < FiniteGame G >
std::optional< PureProfile > find_strict_equilibrium(const G& game, std::size_t max_profiles = 1000000)
{
   if constexpr(std::is_same_v< G, CongestionGame >) {
      // symmetric game: the first k players on the shared road, k = N, ..., 0
      for(std::size_t k = game.num_players() + 1; k-- > 0;) {
         PureProfile a{std::vector< std::size_t >(game.num_players(), CongestionGame::fixed_road)};
         for(std::size_t i = 0; i < k; ++i) {
            a[i] = CongestionGame::shared_road;
         }
         if(is_strict_nash(game, a)) {
            return a;
         }
      }
      return std::nullopt;
   } else {
      std::size_t profiles = 1;
      for(auto c : game.action_counts()) {
         profiles *= c;
         if(profiles > max_profiles) {
            throw InvalidConfiguration("game too large to search for a strict equilibrium");
         }
      }
      std::optional< PureProfile > found;
      for_each_profile(game.action_counts(), [&](const PureProfile& a) {
         if(not found and is_strict_nash(game, a)) {
            found = a;
         }
      });
      return found;
   }
}

enum class InitMode { zero, near_equilibrium, uniform_random };

struct Initialization {
   InitMode mode = InitMode::zero;
   /// Score lead of the equilibrium action (near_equilibrium); defaults to M + 0.1.
   std::optional< double > gap;
   double low = -1.0;
   double high = 1.0;
};

struct ExperimentConfig {
   std::string name = "custom";
   GameSpec game = single_player_game();
   /// Equilibrium the distances are measured against; searched for when absent.
   std::optional< PureProfile > target;
   LearnerParams learner;
   std::string regularizer = "entropic";
   FeedbackConfig feedback;
   std::size_t horizon = 1000;
   std::size_t trials = 100;
   Initialization init;
   std::string output_path;
   /// Worker threads for independent trials; 0 picks the hardware concurrency.
   std::size_t threads = 0;

   void validate() const
   {
      if(horizon < 1) {
         throw InvalidConfiguration("horizon must be at least 1");
      }
      if(trials < 1) {
         throw InvalidConfiguration("need at least one trial");
      }
      ftxl::validate(learner);
      feedback.validate();
      if(init.mode == InitMode::uniform_random and not(init.low <= init.high)) {
         throw InvalidConfiguration("random initialization needs low <= high");
      }
   }
};

inline ExperimentConfig preset(std::string_view name)
{
   ExperimentConfig cfg;
   cfg.name = std::string(name);
   cfg.learner = {Algorithm::ftxl, 0.01, 0.0};
   cfg.horizon = 1000;
   cfg.trials = 100;
   cfg.feedback.model = FeedbackModel::realization;
   cfg.feedback.seed = 1;
   if(name == "zerosum") {
      cfg.game = zero_sum_game();
      cfg.target = PureProfile{{0, 1}};
      cfg.feedback.exploration = 0.1;
      cfg.feedback.exploration_exponent = 0.0;
      cfg.init.mode = InitMode::zero;
   } else if(name == "congestion") {
      cfg.game = congestion_game(100, 1.1);
      cfg.target = PureProfile{std::vector< std::size_t >(100, CongestionGame::shared_road)};
      cfg.feedback.exploration = 1.0;
      cfg.feedback.exploration_exponent = 0.25;
      cfg.init = {InitMode::uniform_random, std::nullopt, -1.0, 1.0};
   } else {
      throw InvalidConfiguration("unknown preset '" + std::string(name) + "'");
   }
   return cfg;
}

/// Per-trial output: distances to the target equilibrium at steps 1..T.
struct TrialRecord {
   std::size_t trial = 0;
   std::uint64_t seed = 0;
   std::vector< double > dist_sup;
   std::vector< double > dist_l1;
   /// max over players of the score-based distance bound; NaN where undefined.
   std::vector< double > bound_sup;
   bool converged = false;
   bool diverged = false;
   MixedProfile final_strategies;
   ScoreVector final_scores;
};

inline constexpr double convergence_tolerance = 1e-2;
inline constexpr double divergence_score = 1e12;

/// Outcome of a round loop.
struct RoundsResult {
   LearnerState state;
   std::size_t steps_observed = 0;
   bool diverged = false;
};

/// The round loop: at each step n the observer sees x_n = Q(y_n), then the
/// oracle turns x_n (and nothing later) into the round's signal, then the learner
/// advances. Stops early when any score leaves [-1e12, 1e12] or turns non-finite.
template < FiniteGame G, typename Oracle, typename Observer >
RoundsResult run_rounds(const G& game, const Regularizer& reg, LearnerState state, std::size_t horizon,
                        Oracle&& oracle, Observer&& observer)
{
   RoundsResult result;
   for(std::size_t n = 1; n <= horizon; ++n) {
      const MixedProfile x = strategies_of(state, reg);
      observer(n, std::as_const(state), x);
      result.steps_observed = n;
      if(n == horizon) {
         break;
      }
      const FeedbackSignal signal = oracle(x, n);
      advance(state, signal);
      const auto y = state.scores.flat();
      if(std::ranges::any_of(y, [](double v) { return not(std::abs(v) <= divergence_score); })) {
         result.diverged = true;
         break;
      }
   }
   (void)game;
   result.state = std::move(state);
   return result;
}

/// Everything derived once per experiment and shared by its trials.
struct PreparedExperiment {
   Regularizer regularizer;
   StrictEquilibrium equilibrium;
};

inline PreparedExperiment prepare(const ExperimentConfig& cfg)
{
   cfg.validate();
   return std::visit(
      [&](const auto& game) {
         auto target = cfg.target ? cfg.target : find_strict_equilibrium(game);
         if(not target) {
            throw NotStrictEquilibrium("game has no strict pure equilibrium to target");
         }
         return PreparedExperiment{parse_regularizer(cfg.regularizer), drift_constant(game, *target)};
      },
      cfg.game);
}

template < FiniteGame G >
ScoreVector initial_scores(const G& game, const Initialization& init, const StrictEquilibrium& eq, Rng& rng)
{
   ScoreVector y(game.action_counts());
   switch(init.mode) {
      case InitMode::zero: break;
      case InitMode::near_equilibrium: {
         const double gap = init.gap.value_or(eq.threshold + 0.1);
         for(std::size_t i = 0; i < y.num_players(); ++i) {
            for(std::size_t k = 0; k < y.size(i); ++k) {
               y[i][k] = k == eq.profile[i] ? 0.0 : -gap;
            }
         }
         break;
      }
      case InitMode::uniform_random:
         for(auto& v : y.flat()) {
            v = rng.uniform(init.low, init.high);
         }
         break;
   }
   return y;
}

inline double max_distance_bound(const Regularizer& reg, const ScoreVector& y, const PureProfile& eq)
{
   try {
      const auto bound = distance_bound(reg, y, eq);
      return *std::ranges::max_element(bound);
   } catch(const DomainError&) {
      return std::numeric_limits< double >::quiet_NaN();
   }
}

template < FiniteGame G >
TrialRecord run_trial(const G& game, const ExperimentConfig& cfg, const PreparedExperiment& prep,
                      std::size_t trial)
{
   TrialRecord record;
   record.trial = trial;
   record.seed = substream_seed(cfg.feedback.seed, trial);
   Rng rng(record.seed);
   const auto& eq = prep.equilibrium;
   auto state = make_learner(initial_scores(game, cfg.init, eq, rng), cfg.learner);
   record.dist_sup.reserve(cfg.horizon);
   record.dist_l1.reserve(cfg.horizon);
   record.bound_sup.reserve(cfg.horizon);

   auto result = run_rounds(
      game, prep.regularizer, std::move(state), cfg.horizon,
      [&](const MixedProfile& x, std::size_t n) { return observe(game, x, n, cfg.feedback, rng).signal; },
      [&](std::size_t, const LearnerState& s, const MixedProfile& x) {
         const auto d = equilibrium_distance(x, eq.profile);
         record.dist_sup.push_back(d.sup);
         record.dist_l1.push_back(d.l1);
         record.bound_sup.push_back(max_distance_bound(prep.regularizer, s.scores, eq.profile));
      });

   record.diverged = result.diverged;
   while(record.dist_sup.size() < cfg.horizon) {
      record.dist_sup.push_back(record.dist_sup.back());
      record.dist_l1.push_back(record.dist_l1.back());
      record.bound_sup.push_back(std::numeric_limits< double >::quiet_NaN());
   }
   record.converged = not record.diverged and record.dist_sup.back() < convergence_tolerance;
   record.final_strategies = strategies_of(result.state, prep.regularizer);
   record.final_scores = std::move(result.state.scores);
   return record;
}

inline TrialRecord run_trial(const ExperimentConfig& cfg, std::size_t trial)
{
   const auto prep = prepare(cfg);
   return std::visit([&](const auto& game) { return run_trial(game, cfg, prep, trial); }, cfg.game);
}

/// Runs every trial, concurrently when threads allow; results are ordered by trial.
inline std::vector< TrialRecord > run_experiment(const ExperimentConfig& cfg)
{
   const auto prep = prepare(cfg);
   std::vector< TrialRecord > records(cfg.trials);
   std::size_t workers = cfg.threads ? cfg.threads : std::max(1U, std::thread::hardware_concurrency());
   workers = std::min(workers, cfg.trials);

   std::atomic< std::size_t > next{0};
   std::exception_ptr failure;
   std::mutex failure_mutex;
   auto work = [&] {
      for(std::size_t t = next++; t < cfg.trials; t = next++) {
         try {
            records[t] = std::visit([&](const auto& game) { return run_trial(game, cfg, prep, t); }, cfg.game);
         } catch(...) {
            std::lock_guard lock(failure_mutex);
            if(not failure) {
               failure = std::current_exception();
            }
         }
      }
   };
   if(workers <= 1) {
      work();
   } else {
      std::vector< std::jthread > pool;
      for(std::size_t w = 0; w < workers; ++w) {
         pool.emplace_back(work);
      }
   }
   if(failure) {
      std::rethrow_exception(failure);
   }
   return records;
}

/// Per-step statistics across trials (population standard deviation).
struct Summary {
   std::vector< double > mean_l1;
   std::vector< double > std_l1;
   /// Fraction of trials whose sup-distance is below the convergence tolerance at each step.
   std::vector< double > frac_converged;
   /// Fraction of trials flagged converged at the horizon.
   double convergence_fraction = 0.0;
};

inline Summary aggregate(const std::vector< TrialRecord >& records)
{
   if(records.empty()) {
      throw InvalidConfiguration("nothing to aggregate");
   }
   const std::size_t steps = records.front().dist_l1.size();
   for(const auto& r : records) {
      if(r.dist_l1.size() != steps or r.dist_sup.size() != steps) {
         throw ShapeMismatch("records have different horizons");
      }
   }
   const auto count = static_cast< double >(records.size());
   Summary s;
   s.mean_l1.assign(steps, 0.0);
   s.std_l1.assign(steps, 0.0);
   s.frac_converged.assign(steps, 0.0);
   for(std::size_t n = 0; n < steps; ++n) {
      double mean = 0.0;
      for(const auto& r : records) {
         mean += r.dist_l1[n];
         s.frac_converged[n] += r.dist_sup[n] < convergence_tolerance ? 1.0 : 0.0;
      }
      mean /= count;
      double var = 0.0;
      for(const auto& r : records) {
         var += (r.dist_l1[n] - mean) * (r.dist_l1[n] - mean);
      }
      s.mean_l1[n] = mean;
      s.std_l1[n] = std::sqrt(var / count);
      s.frac_converged[n] /= count;
   }
   s.convergence_fraction =
      static_cast< double >(std::ranges::count_if(records, [](const TrialRecord& r) { return r.converged; }))
      / count;
   return s;
}

/// Exponent of the guaranteed sup-distance envelope at step n, without the
/// initialization constant: -c eta^2 n(n-1)/2, plus the subleading noise term of
/// the stochastic models.
inline double envelope_exponent(FeedbackModel model, double drift, double eta, double n)
{
   double exponent = -drift * eta * eta * n * (n - 1.0) / 2.0;
   if(model == FeedbackModel::realization) {
      exponent += 0.6 * drift * std::pow(eta, 5.0 / 3.0) * std::pow(n, 5.0 / 3.0);
   } else if(model == FeedbackModel::bandit) {
      exponent += (5.0 / 9.0) * drift * std::pow(eta, 9.0 / 5.0) * std::pow(n, 9.0 / 5.0);
   }
   return exponent;
}

/// Rate fit of one record over its post-transient window.
struct RecordRateFit {
   std::size_t trial = 0;
   /// Slope of log sup-distance against n(n-1)/2.
   double slope = 0.0;
   double intercept = 0.0;
   double r_squared = 0.0;
   /// Slope and R^2 of log sup-distance against n (the geometric-rate model).
   double linear_slope = 0.0;
   double linear_r_squared = 0.0;
   /// Coefficient of n^2 (times two) and R^2 of a full quadratic {1, n, n^2} fit.
   double quadratic_slope = 0.0;
   double quadratic_r_squared = 0.0;
   FitWindow window;
};

struct DiscreteRateReport {
   std::vector< RecordRateFit > fits;
   double mean_slope = 0.0;
   double min_r_squared = 0.0;
   /// -c eta^2, the slope guaranteed under full information.
   double full_info_slope = 0.0;
   /// mean_slope / full_info_slope; at least 1 when decay is as fast as guaranteed.
   double slope_ratio = 0.0;
   /// Envelope exponents at the last fitted step for each feedback model.
   double envelope_full = 0.0;
   double envelope_realization = 0.0;
   double envelope_bandit = 0.0;
   bool underflow_warning = false;
};

inline RecordRateFit fit_record_rate(const std::vector< double >& dist_sup, std::size_t trial = 0)
{
   RecordRateFit fit;
   fit.trial = trial;
   fit.window = post_transient_window(dist_sup);
   std::vector< double > ns;
   std::vector< double > tri;
   std::vector< double > logd;
   for(std::size_t k = fit.window.begin; k < fit.window.end; ++k) {
      const double n = static_cast< double >(k + 1);
      ns.push_back(n);
      tri.push_back(n * (n - 1.0) / 2.0);
      logd.push_back(std::log(dist_sup[k]));
   }
   const auto tri_fit = fit_line(tri, logd);
   fit.slope = tri_fit.slope;
   fit.intercept = tri_fit.intercept;
   fit.r_squared = tri_fit.r_squared;
   const auto line = fit_line(ns, logd);
   fit.linear_slope = line.slope;
   fit.linear_r_squared = line.r_squared;
   const auto quad = least_squares(
      ns, logd, {[](double) { return 1.0; }, [](double n) { return n; }, [](double n) { return n * n; }});
   fit.quadratic_slope = 2.0 * quad.coefficients[2];
   fit.quadratic_r_squared = quad.r_squared;
   return fit;
}

inline DiscreteRateReport fit_discrete_rate(const std::vector< TrialRecord >& records, double eta, double drift)
{
   DiscreteRateReport report;
   report.min_r_squared = std::numeric_limits< double >::infinity();
   double last_step = 0.0;
   for(const auto& r : records) {
      if(not r.converged) {
         continue;
      }
      auto fit = fit_record_rate(r.dist_sup, r.trial);
      report.underflow_warning = report.underflow_warning or fit.window.underflow_warning;
      report.min_r_squared = std::min(report.min_r_squared, fit.r_squared);
      report.mean_slope += fit.slope;
      last_step = std::max(last_step, static_cast< double >(fit.window.end));
      report.fits.push_back(fit);
   }
   if(report.fits.empty()) {
      throw FitRefused("no converged record to fit");
   }
   report.mean_slope /= static_cast< double >(report.fits.size());
   report.full_info_slope = -drift * eta * eta;
   report.slope_ratio = report.mean_slope / report.full_info_slope;
   report.envelope_full = envelope_exponent(FeedbackModel::full, drift, eta, last_step);
   report.envelope_realization = envelope_exponent(FeedbackModel::realization, drift, eta, last_step);
   report.envelope_bandit = envelope_exponent(FeedbackModel::bandit, drift, eta, last_step);
   return report;
}

// ---------------------------------------------------------------------------
// CSV

inline std::string format_number(double v)
{
   char buf[64];
   auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
   return std::string(buf, ptr);
}

inline void write_trials_csv(std::ostream& out, const std::vector< TrialRecord >& records)
{
   out << "trial,step,dist_sup,dist_l1\n";
   for(const auto& r : records) {
      for(std::size_t k = 0; k < r.dist_sup.size(); ++k) {
         out << r.trial << ',' << (k + 1) << ',' << format_number(r.dist_sup[k]) << ','
             << format_number(r.dist_l1[k]) << '\n';
      }
   }
}

inline void write_summary_csv(std::ostream& out, const Summary& s)
{
   out << "step,mean_l1,std_l1,frac_converged\n";
   for(std::size_t k = 0; k < s.mean_l1.size(); ++k) {
      out << (k + 1) << ',' << format_number(s.mean_l1[k]) << ',' << format_number(s.std_l1[k]) << ','
          << format_number(s.frac_converged[k]) << '\n';
   }
}

/// Reads a trials CSV back into records (distances only; converged flags recomputed).
inline std::vector< TrialRecord > read_trials_csv(std::istream& in)
{
   std::string line;
   if(not std::getline(in, line) or line.rfind("trial,step,dist_sup,dist_l1", 0) != 0) {
      throw InvalidConfiguration("expected header 'trial,step,dist_sup,dist_l1'");
   }
   std::map< std::size_t, TrialRecord > by_trial;
   std::size_t line_no = 1;
   while(std::getline(in, line)) {
      ++line_no;
      if(line.empty()) {
         continue;
      }
      std::istringstream fields(line);
      std::string cell[4];
      for(auto& c : cell) {
         if(not std::getline(fields, c, ',')) {
            throw InvalidConfiguration("malformed CSV line " + std::to_string(line_no));
         }
      }
      try {
         const auto trial = static_cast< std::size_t >(std::stoull(cell[0]));
         auto& rec = by_trial[trial];
         rec.trial = trial;
         rec.dist_sup.push_back(std::stod(cell[2]));
         rec.dist_l1.push_back(std::stod(cell[3]));
      } catch(const std::logic_error&) {
         throw InvalidConfiguration("malformed number on CSV line " + std::to_string(line_no));
      }
   }
   std::vector< TrialRecord > records;
   for(auto& [trial, rec] : by_trial) {
      rec.converged = not rec.dist_sup.empty() and rec.dist_sup.back() < convergence_tolerance;
      records.push_back(std::move(rec));
   }
   return records;
}

/// Continuous trajectory as CSV: t, every player's strategy, sup-distance.
inline void write_trajectory_csv(std::ostream& out, const Trajectory& traj, const PureProfile& eq)
{
   if(traj.empty()) {
      return;
   }
   const auto& first = traj.front().strategies;
   out << 't';
   for(std::size_t i = 0; i < first.num_players(); ++i) {
      for(std::size_t k = 0; k < first.size(i); ++k) {
         out << ",x" << i << '_' << k;
      }
   }
   out << ",dist_sup\n";
   for(const auto& s : traj) {
      out << format_number(s.time);
      for(double p : s.strategies.flat()) {
         out << ',' << format_number(p);
      }
      out << ',' << format_number(equilibrium_distance(s.strategies, eq).sup) << '\n';
   }
}

}  // namespace ftxl
