#pragma once

#include <Eigen/Dense>

#include "vast/learners.hpp"
#include "vast/types.hpp"

namespace vast {

/// Normal-Inverse-Gamma posterior of (beta, sigma^2) given Z, in shape/rate
/// form: sigma^2 | y ~ IG(a_bar, s_bar), beta | sigma^2, y ~ N(beta_bar, sigma^2 V_bar).
struct NigPosterior {
  Eigen::VectorXd beta_bar;  // 2J
  Eigen::MatrixXd V_bar;     // 2J x 2J
  double a_bar = 0.0;
  double s_bar = 0.0;
};

/// Matrix-Normal-Inverse-Wishart posterior: Sigma | Y ~ IW(a_bar, S_bar),
/// vec(B) | Sigma, Y ~ N(vec(B_bar), Sigma (x) V_bar).
struct MniwPosterior {
  Eigen::MatrixXd B_bar;  // 2J x M
  Eigen::MatrixXd V_bar;  // 2J x 2J
  Eigen::MatrixXd S_bar;  // M x M
  double a_bar = 0.0;
};

NigPosterior nig_posterior(const Eigen::VectorXd& y, const TransitionMatrix& Z,
                           const ModelConfig& cfg);

MniwPosterior mniw_posterior(const Eigen::MatrixXd& Y, const TransitionMatrix& Z,
                             const ModelConfig& cfg);

/// Fully normalized log marginal likelihood of the two-column model
/// R = Z_j beta_j + eps under the per-learner NIG prior
/// (beta_j | sigma^2 ~ N(0, sigma^2 (phi/J) I_2), sigma^2 ~ IG(a_sigma, b_sigma)).
/// z_cols holds the candidate learner's (S, 1-S) columns.
double collapsed_logml_uni(const Eigen::VectorXd& R, const Eigen::MatrixXd& z_cols,
                           const ModelConfig& cfg);

/// Multivariate counterpart: the marginal likelihood of the Bayesian SUR model
/// R = Z_j B_j + E with B_j | Sigma ~ MN(0, (phi/J) I_2, Sigma),
/// Sigma ~ IW(a_Sigma, S_Sigma_scale I). Fully normalized. Valid for M >= 1.
double collapsed_logml_multi(const Eigen::MatrixXd& R, const Eigen::MatrixXd& z_cols,
                             const ModelConfig& cfg);

/// log of the multivariate gamma function Gamma_M(x).
double log_multigamma(int M, double x);

/// Per-learner marginal evaluator for the backfitting hot loop. Precomputes
/// everything that does not depend on the candidate transition column, then
/// scores each candidate S-column in O(T) (NIG route) or O(T^2) (SUR route,
/// via the Gram projection G = R (S_underline + R'R)^{-1} R', which keeps the
/// candidate scan cost linear in M at fixed T).
/// Values agree with collapsed_logml_uni / collapsed_logml_multi exactly.
class LearnerMarginal {
 public:
  /// `sur` selects the multivariate marginal; defaults to R's column count.
  LearnerMarginal(const Eigen::MatrixXd& R, const ModelConfig& cfg, bool sur);
  LearnerMarginal(const Eigen::MatrixXd& R, const ModelConfig& cfg)
      : LearnerMarginal(R, cfg, R.cols() > 1) {}

  double logml(const Eigen::Ref<const Eigen::VectorXd>& s) const;

  /// Scores one candidate column per column of S_all (T x K). Same values as
  /// `logml` column by column, evaluated with batched linear algebra.
  void logml_batch(const Eigen::MatrixXd& S_all, Eigen::VectorXd& out) const;

 private:
  double score_uni(double q_ss, double q_s1, double u0) const;
  double score_multi(double q_ss, double q_s1, double c_ss, double c_s1) const;

  bool multi_;
  int T_;
  int M_;
  double ridge_;
  double exponent_;   // a_sigma + T/2 (NIG) or (a_Sigma + T)/2 (SUR)
  double half_m_;     // weight on logdet(V_bar): 1/2 or M/2
  double constant_;   // candidate-independent terms
  double b_sigma_ = 0.0;

  // NIG route
  Eigen::VectorXd r_;
  double rr_ = 0.0;
  double r_sum_ = 0.0;

  // SUR route
  double logdetA_ = 0.0;
  Eigen::MatrixXd G_;   // T x T
  Eigen::VectorXd G1_;  // G * ones
  double g11_ = 0.0;
  mutable Eigen::VectorXd gs_;  // scratch for G * s
};

namespace detail {

/// Shared full-model quantities for the conjugate (beta, error) step, computed
/// without forming V_bar explicitly. Q = (J/phi) I + Z'Z.
struct ConjugateWork {
  Eigen::LLT<Eigen::MatrixXd> llt_Q;
  Eigen::MatrixXd ZtY;    // 2J x M
  Eigen::MatrixXd B_bar;  // 2J x M
};

ConjugateWork conjugate_work(const Eigen::MatrixXd& Y, const TransitionMatrix& Z,
                             const ModelConfig& cfg);

}  // namespace detail

}  // namespace vast
