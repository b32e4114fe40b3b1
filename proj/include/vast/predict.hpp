#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "vast/data.hpp"
#include "vast/sampler.hpp"
#include "vast/types.hpp"

namespace vast {

/// Simulated future paths from the posterior predictive, plus per-horizon
/// marginal summaries. One stored path per (posterior draw, shock replicate).
struct PredictiveDraws {
  int H = 0;
  int M = 0;
  std::vector<Eigen::MatrixXd> paths;  // each H x M
  Eigen::MatrixXd mean;                // H x M
  Eigen::MatrixXd median;
  Eigen::MatrixXd variance;

  Eigen::MatrixXd quantile(double q) const;
  void finalize();  // recompute summaries from the stored paths
};

/// Iterative h-step simulation: the one-step density is Gaussian around the
/// sum of learner fits; simulated values feed back into the lag vector.
/// `history` rows are time-ascending standardized observations (>= P rows).
PredictiveDraws simulate_predictive(const std::vector<PosteriorDraw>& draws,
                                    const Eigen::MatrixXd& history, int P, int H,
                                    int n_paths_per_draw, std::uint64_t seed);

/// Conditional mean sum over learners at each covariate row.
Eigen::MatrixXd learner_fit(const PosteriorDraw& draw, const Eigen::MatrixXd& X);

double rmse(const std::vector<double>& actuals, const std::vector<double>& forecasts);

/// Average Gaussian log-density with plug-in predictive center and variance.
double lpl_gaussian(const std::vector<double>& actuals, const std::vector<double>& centers,
                    const std::vector<double>& variances);

/// Joint (multivariate Gaussian) version over a focus block.
double lpl_gaussian_joint(const Eigen::MatrixXd& actuals, const Eigen::MatrixXd& centers,
                          const std::vector<Eigen::MatrixXd>& covariances);

// ---------------------------------------------------------------------------
// Monte Carlo study: four estimation variants of the transition parameters
// fit over a grid of J on the synthetic nonlinear autoregression, one-step
// predictions over the held-out second half.
// ---------------------------------------------------------------------------

enum class Variant { estimate_both, fix_nu, fix_mu, fix_both };
const char* variant_name(Variant v);
Variant variant_from_name(const std::string& name);
void apply_variant(ModelConfig& cfg, Variant v);  // fix_nu=10 / mu / both with nu=1

struct StudySpec {
  DgpSpec dgp;
  int n_reps = 10;
  std::vector<int> J_grid{1, 5, 10, 15};
  std::vector<Variant> variants{Variant::estimate_both, Variant::fix_nu, Variant::fix_mu,
                                Variant::fix_both};
  Variant baseline = Variant::estimate_both;
  int y_lags = 1;
  int x_lags = 4;
  int n_burn = 1500;
  int n_save = 1500;
  int thin = 1;
  std::uint64_t seed = 20240501;
  int n_threads = 1;
};

struct FitMetrics {
  double rmse = 0.0;
  double lpl = 0.0;
  Eigen::VectorXd relevance;
  std::vector<double> accept_rates;  // post-freeze, per learner (NaN if fixed)
};

struct StudyResult {
  StudySpec spec;
  std::vector<std::string> covariate_labels;
  std::vector<std::uint64_t> rep_seeds;  // per-replication process seeds
  // fits[v][ji][rep]
  std::vector<std::vector<std::vector<FitMetrics>>> fits;

  double mean_rmse(int v, int ji) const;
  double mean_lpl(int v, int ji) const;
  double mean_rmse_ratio(int v, int ji) const;  // per-rep ratio to baseline, averaged
  double mean_lpl_diff(int v, int ji) const;
  int baseline_index() const;

  /// Table layout: one row per (metric, variant), one column per J.
  std::string table_delimited() const;
};

StudyResult run_simulation_study(const StudySpec& spec);

// ---------------------------------------------------------------------------
// Expanding-window one-step density evaluation on a fitted-panel design:
// refit from scratch as each held-out point joins the training sample.
// ---------------------------------------------------------------------------

struct RecursiveEvalSpec {
  ModelConfig cfg;
  ChainSettings settings;
  int start_row = 0;  // first forecast target row (training uses rows [0, start_row))
  int max_steps = -1; // -1 = run to the end of the sample
};

struct RecursiveEvalResult {
  std::vector<std::string> dates;        // forecast-target dates
  Eigen::MatrixXd marginal_lpl;          // steps x M
  std::vector<double> joint_lpl;         // per step
  double avg_joint_lpl = 0.0;
  Eigen::VectorXd avg_marginal_lpl;      // M

  std::string table_delimited(const std::vector<std::string>& names) const;
};

RecursiveEvalResult recursive_eval_vast(const Eigen::MatrixXd& Ystd,
                                        const std::vector<std::string>& dates,
                                        const RecursiveEvalSpec& spec);

}  // namespace vast
