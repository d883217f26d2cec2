#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ftxl/ftxl.hpp"
#include "ftxl/game_io.hpp"

namespace {

using namespace ftxl;

struct RunOptions {
   std::string preset;
   std::string game_file;
   std::optional< std::string > algorithm;
   std::optional< double > eta;
   std::optional< double > friction;
   std::optional< std::string > regularizer;
   std::optional< std::string > feedback;
   std::optional< double > eps;
   std::optional< double > kappa;
   std::optional< std::uint64_t > seed;
   std::optional< std::size_t > trials;
   std::optional< std::size_t > horizon;
   std::optional< std::string > init;
   std::optional< double > gap;
   std::size_t threads = 0;
   std::string out;
   std::string summary;

   std::string mode = "discrete";
   double dt = 1e-3;
   double t_start = 1e-3;
   double t_end = 10.0;
   std::string friction_kind = "vanishing";
};

void add_run_options(CLI::App* cmd, RunOptions& o)
{
   auto* source = cmd->add_option_group("game source");
   source->add_option("--preset", o.preset, "zerosum | congestion");
   source->add_option("--game", o.game_file, "game description (JSON)")->check(CLI::ExistingFile);
   source->require_option(1);
   cmd->add_option("--alg", o.algorithm, "ew | ftrl | ftxl | ftxl-vf | ftxl-cf")
      ->check(CLI::IsMember({"ew", "ftrl", "ftxl", "ftxl-vf", "ftxl-cf"}));
   cmd->add_option("--eta", o.eta, "step size");
   cmd->add_option("--friction", o.friction, "friction coefficient r");
   cmd->add_option("--reg", o.regularizer, "entropic | tsallis:<q>");
   cmd->add_option("--feedback", o.feedback, "full | realization | bandit")
      ->check(CLI::IsMember({"full", "realization", "bandit"}));
   cmd->add_option("--eps", o.eps, "bandit exploration base");
   cmd->add_option("--kappa", o.kappa, "bandit exploration decay exponent");
   cmd->add_option("--seed", o.seed, "master seed (overrides FTXL_SEED)");
   cmd->add_option("--trials", o.trials, "independent trials");
   cmd->add_option("--horizon", o.horizon, "steps per trial");
   cmd->add_option("--init", o.init, "zero | near | random")->check(CLI::IsMember({"zero", "near", "random"}));
   cmd->add_option("--gap", o.gap, "equilibrium score lead for --init near (default: threshold + 0.1)");
   cmd->add_option("--threads", o.threads, "worker threads (0 = all cores)");
   cmd->add_option("--out", o.out, "trials CSV (discrete) or trajectory CSV (continuous)");
   cmd->add_option("--summary", o.summary, "per-step summary CSV (discrete)");
   cmd->add_option("--mode", o.mode, "discrete | continuous")->check(CLI::IsMember({"discrete", "continuous"}));
   cmd->add_option("--dt", o.dt, "integrator step (continuous)");
   cmd->add_option("--t-start", o.t_start, "integration start time (continuous)");
   cmd->add_option("--t-end", o.t_end, "integration end time (continuous)");
   cmd->add_option("--friction-kind", o.friction_kind, "vanishing | constant (continuous)")
      ->check(CLI::IsMember({"vanishing", "constant"}));
}

Algorithm parse_algorithm(const std::string& name)
{
   static const std::map< std::string, Algorithm > table = {{"ew", Algorithm::ftrl},
                                                            {"ftrl", Algorithm::ftrl},
                                                            {"ftxl", Algorithm::ftxl},
                                                            {"ftxl-vf", Algorithm::ftxl_vanishing},
                                                            {"ftxl-cf", Algorithm::ftxl_constant}};
   return table.at(name);
}

FeedbackModel parse_feedback(const std::string& name)
{
   if(name == "full") {
      return FeedbackModel::full;
   }
   return name == "bandit" ? FeedbackModel::bandit : FeedbackModel::realization;
}

std::optional< std::uint64_t > env_seed()
{
   const char* raw = std::getenv("FTXL_SEED");
   if(raw == nullptr or *raw == '\0') {
      return std::nullopt;
   }
   try {
      return std::stoull(raw);
   } catch(const std::exception&) {
      throw InvalidConfiguration(std::string("FTXL_SEED is not an unsigned integer: '") + raw + "'");
   }
}

ExperimentConfig build_config(const RunOptions& o)
{
   ExperimentConfig cfg;
   if(not o.preset.empty()) {
      cfg = preset(o.preset);
   } else {
      auto loaded = load_game(o.game_file);
      cfg = preset("zerosum");
      cfg.name = o.game_file;
      cfg.game = std::move(loaded.game);
      cfg.target = loaded.equilibrium;
   }
   if(o.algorithm) {
      cfg.learner.algorithm = parse_algorithm(*o.algorithm);
      if(*o.algorithm == "ew") {
         cfg.regularizer = "entropic";
      }
   }
   if(o.eta) {
      cfg.learner.step_size = *o.eta;
   }
   if(o.friction) {
      cfg.learner.friction = *o.friction;
   }
   if(o.regularizer) {
      cfg.regularizer = *o.regularizer;
   }
   if(o.feedback) {
      cfg.feedback.model = parse_feedback(*o.feedback);
   }
   if(o.eps) {
      cfg.feedback.exploration = *o.eps;
   }
   if(o.kappa) {
      cfg.feedback.exploration_exponent = *o.kappa;
   }
   if(auto s = env_seed()) {
      cfg.feedback.seed = *s;
   }
   if(o.seed) {
      cfg.feedback.seed = *o.seed;
   }
   if(o.trials) {
      cfg.trials = *o.trials;
   }
   if(o.horizon) {
      cfg.horizon = *o.horizon;
   }
   if(o.init) {
      cfg.init.mode = *o.init == "zero"   ? InitMode::zero
                      : *o.init == "near" ? InitMode::near_equilibrium
                                          : InitMode::uniform_random;
   }
   if(o.gap) {
      cfg.init.gap = *o.gap;
   }
   cfg.threads = o.threads;
   cfg.output_path = o.out;
   return cfg;
}

std::ofstream open_output(const std::string& path)
{
   std::ofstream out(path);
   if(not out) {
      throw InvalidConfiguration("cannot write '" + path + "'");
   }
   return out;
}

void report_discrete(const ExperimentConfig& cfg, const PreparedExperiment& prep,
                     const std::vector< TrialRecord >& records)
{
   const auto summary = aggregate(records);
   const auto diverged = std::ranges::count_if(records, [](const TrialRecord& r) { return r.diverged; });
   std::printf("game %s, %s, %s feedback, eta %g, friction %g, %zu trials x %zu steps, seed %llu\n",
               cfg.name.c_str(), std::string(to_string(cfg.learner.algorithm)).c_str(),
               std::string(to_string(cfg.feedback.model)).c_str(), cfg.learner.step_size, cfg.learner.friction,
               cfg.trials, cfg.horizon, static_cast< unsigned long long >(cfg.feedback.seed));
   std::printf("drift c = %g, threshold M = %g\n", prep.equilibrium.drift, prep.equilibrium.threshold);
   std::printf("converged fraction %.3f, diverged %lld, final mean l1 %.3e (std %.3e)\n",
               summary.convergence_fraction, static_cast< long long >(diverged), summary.mean_l1.back(),
               summary.std_l1.back());
   if(cfg.feedback.model == FeedbackModel::bandit and not cfg.feedback.within_bandit_theory()) {
      std::fprintf(stderr, "note: exploration exponent %g is outside (0, 1/2)\n",
                   cfg.feedback.exploration_exponent);
   }
   try {
      const auto fit = fit_discrete_rate(records, cfg.learner.step_size, prep.equilibrium.drift);
      std::printf("rate fit: mean slope vs n(n-1)/2 %.4e (full-information envelope %.4e, ratio %.2f), "
                  "min R^2 %.4f%s\n",
                  fit.mean_slope, fit.full_info_slope, fit.slope_ratio, fit.min_r_squared,
                  fit.underflow_warning ? ", window shortened by underflow" : "");
   } catch(const FitRefused& e) {
      std::printf("rate fit skipped: %s\n", e.what());
   }
}

int run_discrete(const RunOptions& o)
{
   const auto cfg = build_config(o);
   const auto prep = prepare(cfg);
   const auto records = run_experiment(cfg);
   report_discrete(cfg, prep, records);
   if(not o.out.empty()) {
      auto out = open_output(o.out);
      write_trials_csv(out, records);
   }
   if(not o.summary.empty()) {
      auto out = open_output(o.summary);
      write_summary_csv(out, aggregate(records));
   }
   return 0;
}

int run_continuous(const RunOptions& o)
{
   const auto cfg = build_config(o);
   const auto prep = prepare(cfg);
   const auto kind = o.friction_kind == "constant" ? FrictionKind::constant : FrictionKind::vanishing;
   const IntegratorConfig icfg{o.dt, o.t_start, o.t_end, 10};
   return std::visit(
      [&](const auto& game) {
         Rng rng(substream_seed(cfg.feedback.seed, 0));
         const auto y0 = initial_scores(game, cfg.init, prep.equilibrium, rng);
         const auto traj = integrate(game, prep.regularizer, at_rest(y0, o.t_start, cfg.learner.friction, kind), icfg);
         const auto final_dist = equilibrium_distance(traj.back().strategies, prep.equilibrium.profile);
         std::printf("integrated to t = %g with %zu samples, final sup-distance %.3e\n", traj.back().time,
                     traj.size(), final_dist.sup);
         try {
            const auto fit = rate_envelope(traj, prep.equilibrium, cfg.learner.friction);
            std::printf("log-distance ~ %.4f - %.4f t^2 (R^2 %.5f); guaranteed coefficient %.4f\n", fit.intercept,
                        fit.coefficient, fit.r_squared, fit.predicted);
         } catch(const FitRefused& e) {
            std::printf("rate fit skipped: %s\n", e.what());
         }
         if(not o.out.empty()) {
            auto out = open_output(o.out);
            write_trajectory_csv(out, traj, prep.equilibrium.profile);
         }
         return 0;
      },
      cfg.game);
}

int fit_rate(const std::string& input, double eta, double drift)
{
   std::ifstream in(input);
   if(not in) {
      throw InvalidConfiguration("cannot open '" + input + "'");
   }
   const auto records = read_trials_csv(in);
   const auto report = fit_discrete_rate(records, eta, drift);
   std::printf("trial,slope,intercept,r_squared,linear_slope,linear_r_squared,window_begin,window_end\n");
   for(const auto& f : report.fits) {
      std::printf("%zu,%.6e,%.6e,%.6f,%.6e,%.6f,%zu,%zu\n", f.trial, f.slope, f.intercept, f.r_squared,
                  f.linear_slope, f.linear_r_squared, f.window.begin + 1, f.window.end);
   }
   std::printf("# %zu converged records: mean slope %.4e, min R^2 %.4f, full-information envelope %.4e "
               "(ratio %.2f)\n",
               report.fits.size(), report.mean_slope, report.min_r_squared, report.full_info_slope,
               report.slope_ratio);
   std::printf("# envelope exponents at n = %zu: full %.3f, realization %.3f, bandit %.3f\n",
               report.fits.empty() ? 0 : report.fits.back().window.end, report.envelope_full,
               report.envelope_realization, report.envelope_bandit);
   if(report.underflow_warning) {
      std::fprintf(stderr, "warning: distances reached the underflow floor early; fit windows were shortened\n");
   }
   return 0;
}

int sweep(RunOptions o, const std::string& param, const std::vector< double >& values)
{
   std::printf("%s,converged_fraction,final_mean_l1,final_std_l1,mean_slope\n", param.c_str());
   const std::string base_out = o.out;
   for(double v : values) {
      if(param == "eta") {
         o.eta = v;
      } else if(param == "friction") {
         o.friction = v;
      } else if(param == "eps") {
         o.eps = v;
      } else {
         o.kappa = v;
      }
      const auto cfg = build_config(o);
      const auto prep = prepare(cfg);
      const auto records = run_experiment(cfg);
      const auto summary = aggregate(records);
      double slope = std::nan("");
      try {
         slope = fit_discrete_rate(records, cfg.learner.step_size, prep.equilibrium.drift).mean_slope;
      } catch(const FitRefused&) {
      }
      std::printf("%g,%.4f,%.6e,%.6e,%.6e\n", v, summary.convergence_fraction, summary.mean_l1.back(),
                  summary.std_l1.back(), slope);
      if(not base_out.empty()) {
         auto out = open_output(base_out + "." + param + "=" + format_number(v) + ".csv");
         write_trials_csv(out, records);
      }
   }
   return 0;
}

}  // namespace

int main(int argc, char** argv)
{
   CLI::App app{"Accelerated regularized learning in finite games"};
   app.require_subcommand(1);

   RunOptions run_opts;
   auto* run = app.add_subcommand("run", "simulate a preset or a game file");
   add_run_options(run, run_opts);

   std::string input;
   double fit_eta = 0.01;
   double fit_drift = 0.5;
   auto* fit = app.add_subcommand("fit-rate", "fit superlinear rates to a trials CSV");
   fit->add_option("--input", input, "trials CSV from `run --out`")->required()->check(CLI::ExistingFile);
   fit->add_option("--eta", fit_eta, "step size used for the run");
   fit->add_option("--drift", fit_drift, "drift constant c of the target equilibrium");

   RunOptions sweep_opts;
   std::string param;
   std::vector< double > values;
   auto* sw = app.add_subcommand("sweep", "grid sweep over one parameter");
   add_run_options(sw, sweep_opts);
   sw->add_option("--param", param, "eta | friction | eps | kappa")
      ->required()
      ->check(CLI::IsMember({"eta", "friction", "eps", "kappa"}));
   sw->add_option("--values", values, "comma-separated values")->required()->delimiter(',');

   CLI11_PARSE(app, argc, argv);

   try {
      if(run->parsed()) {
         return run_opts.mode == "continuous" ? run_continuous(run_opts) : run_discrete(run_opts);
      }
      if(fit->parsed()) {
         return fit_rate(input, fit_eta, fit_drift);
      }
      return sweep(sweep_opts, param, values);
   } catch(const ftxl::Error& e) {
      std::fprintf(stderr, "error: %s\n", e.what());
      return 2;
   }
}
