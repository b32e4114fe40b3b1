#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "vast/conjugate.hpp"
#include "vast/learners.hpp"
#include "vast/rng.hpp"
#include "vast/types.hpp"

namespace vast {

/// Joint random-walk proposal state for the (nu, mu) Metropolis-Hastings
/// blocks, one scale pair per learner. Scales adapt in windows during the
/// first half of burn-in and are frozen afterwards.
struct MhState {
  std::vector<double> s_nu, s_mu;
  std::vector<int> window_proposals, window_accepts;
  std::vector<long> frozen_proposals, frozen_accepts;
  bool adapting = false;

  void init(int J, double scale);
};

/// Window rule: acceptance below 0.30 shrinks both scales by 0.9, above 0.60
/// grows them by 1.1; window counters reset. No-op once adaptation is frozen.
void adapt_proposals(MhState& mh);

struct ChainSettings {
  std::uint64_t seed = 1;
  int adapt_window = 50;
  double initial_proposal_scale = 0.1;
  bool check_invariants = false;
};

struct ChainDiagnostics {
  std::vector<double> loglik_trace;              // per retained draw
  std::vector<double> accept_rate_postfreeze;    // per learner; NaN if no proposals
  std::vector<double> final_s_nu, final_s_mu;
  double max_residual_drift = 0.0;
  double seconds_per_sweep = 0.0;
  long total_sweeps = 0;
};

/// Backfitting MCMC over base learners with collapsed learner-parameter
/// updates, then the conjugate error-variance and coefficient draws. The
/// cycle order is: per learner (1) categorical delta, (2) joint (nu, mu) MH,
/// both marginal of the coefficients and the error (co)variance; then
/// (3) Sigma (or sigma^2) given Z marginal of the coefficients; (4) the
/// coefficients given everything. `sur = true` selects the multivariate
/// (matrix-normal / inverse-Wishart) forms regardless of M.
class BackfitSampler {
 public:
  BackfitSampler(Eigen::MatrixXd Y, Eigen::MatrixXd X, const ModelConfig& cfg,
                 const ChainSettings& settings, bool sur);

  /// Burn-in with adaptation, then n_save thinned draws.
  std::vector<PosteriorDraw> run();

  void sweep();

  // --- state access (tests, diagnostics, joint-distribution checks) ---
  PosteriorDraw state() const;
  void set_state(const PosteriorDraw& draw);
  void simulate_response();  // Y <- Z B + E with E rows ~ N(0, Sigma)
  void set_update_learners(bool enabled) { update_learners_ = enabled; }

  int sample_delta(int j);
  bool sample_nu_mu(int j);
  /// Deterministic-proposal MH core; counts toward acceptance statistics.
  bool mh_step(int j, double nu_prop, double mu_prop);

  Eigen::MatrixXd partial_residual(int j) const;
  double residual_drift() const;  // ||F - Z B||_inf
  double loglik() const;

  const ModelConfig& config() const { return cfg_; }
  const MhState& mh_state() const { return mh_; }
  MhState& mh_state() { return mh_; }
  const ChainDiagnostics& diagnostics() const { return diag_; }
  const Eigen::MatrixXd& covariates() const { return X_; }
  const Eigen::MatrixXd& response() const { return Y_; }
  const TransitionMatrix& transition() const { return Z_; }
  Rng& rng() { return rng_; }
  int n_learners() const { return cfg_.J; }
  int n_covariates() const { return K_; }

 private:
  void update_learner(int j);
  bool mh_step_impl(const LearnerMarginal& marg, int j, double nu_prop, double mu_prop,
                    double cur_logml);
  void draw_error_and_coefficients();
  void candidate_logmls(const LearnerMarginal& marg, double nu, double mu,
                        Eigen::VectorXd& out) const;
  double log_prior_nu_mu(double nu, double mu) const;
  void refresh_response_cache();
  void sync_fit();

  Eigen::MatrixXd Y_;  // T x M
  Eigen::MatrixXd X_;  // T x K
  ModelConfig cfg_;
  ChainSettings settings_;
  bool sur_;
  int T_, K_, M_;

  std::vector<BaseLearnerParams> learners_;
  Eigen::MatrixXd B_;       // 2J x M
  Eigen::MatrixXd Sigma_;   // M x M
  Eigen::MatrixXd L_Sigma_; // chol(Sigma)
  TransitionMatrix Z_;
  Eigen::MatrixXd F_;       // running fit Z B
  Eigen::VectorXd col_mean_;
  double YtY_trace_uni_ = 0.0;   // y'y for the univariate rate
  Eigen::MatrixXd YtY_;          // M x M

  MhState mh_;
  Rng rng_;
  bool update_learners_ = true;
  long sweep_count_ = 0;
  ChainDiagnostics diag_;

  // scratch
  mutable Eigen::MatrixXd S_all_;   // T x K candidate transition columns
  mutable Eigen::MatrixXd GM_;      // G * S_all (SUR route)
  mutable Eigen::VectorXd s_buf_;
};

/// Additive smooth-transition regression chain on externally supplied
/// covariates. X should be standardized.
std::vector<PosteriorDraw> run_chain_ast(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                         const ModelConfig& cfg, const ChainSettings& settings,
                                         ChainDiagnostics* diag = nullptr);

/// Multivariate chain; the covariates are the P stacked lags of Y (K = M P),
/// built internally. Y should be standardized.
std::vector<PosteriorDraw> run_chain_vast(const Eigen::MatrixXd& Y, const ModelConfig& cfg,
                                          const ChainSettings& settings,
                                          ChainDiagnostics* diag = nullptr);

/// Per-covariate selection scores: sum over learners of the posterior mean of
/// the selection indicator.
Eigen::VectorXd variable_relevance(const std::vector<PosteriorDraw>& draws, int K);

/// Joint prior draw of all model parameters (used by the joint-distribution
/// sampler checks and for neutral chain initializations in tests).
PosteriorDraw draw_from_prior(const ModelConfig& cfg, int K, const Eigen::VectorXd& col_means,
                              bool sur, Rng& rng);

/// Sigma ~ IW(dof, S) via the Bartlett factorization.
Eigen::MatrixXd draw_inverse_wishart(double dof, const Eigen::MatrixXd& S, Rng& rng);

/// Coefficient draw B = B_bar + F G chol(Sigma)' with G standard normal and
/// F a factor of V_bar obtained from llt_Q (the factorization of V_bar^{-1}),
/// so vec(B) ~ N(vec(B_bar), Sigma (x) V_bar) without materializing the
/// 2JM x 2JM covariance.
Eigen::MatrixXd draw_coefficients_kronecker(const Eigen::MatrixXd& B_bar,
                                            const Eigen::LLT<Eigen::MatrixXd>& llt_Q,
                                            const Eigen::MatrixXd& L_sigma, Rng& rng);

/// Delimited-text sidecar with per-learner acceptance statistics and the
/// log-likelihood trace.
void write_chain_diagnostics(const std::string& path, const ChainDiagnostics& diag);

}  // namespace vast
