#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vast {

// Error taxonomy mirrored by the C API status codes and the CLI exit codes.
struct config_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct data_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct numeric_error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Model configuration shared by the AST (M=1) and VAST (M>1) samplers.
///
/// Prior layout: beta | sigma ~ N(0, sigma^2 * (phi/J) I) resp. N(0, Sigma (x) (phi/J) I),
/// sigma^2 ~ IG(a_sigma, b_sigma) in shape/rate form, nu_j ~ IG(a_nu, b_nu),
/// mu_j ~ N(0, sigma2_mu), Sigma ~ IW(a_Sigma, S_Sigma_scale * I).
struct ModelConfig {
  int J = 10;  // number of base learners
  int P = 1;   // lag order
  int M = 1;   // number of endogenous series (1 = AST)

  double phi = 1.0;
  double a_sigma = 0.01;
  double b_sigma = 0.01;
  double a_nu = 0.01;
  double b_nu = 0.01;
  double sigma2_mu = 10.0;
  double a_Sigma = 0.0;          // <= 0 means "use M" (proper but diffuse)
  double S_Sigma_scale = 0.01;   // underline-S = scale * I

  int n_burn = 2000;
  int n_save = 2000;
  int thin = 1;

  std::optional<double> fix_nu;  // pin every nu_j (skips its MH coordinate)
  bool fix_mu_to_mean = false;   // pin mu_j to the selected covariate's sample mean

  double wishart_dof() const { return a_Sigma > 0.0 ? a_Sigma : static_cast<double>(M); }
  double ridge() const { return static_cast<double>(J) / phi; }  // underline-V^{-1} diagonal

  void validate() const;
};

/// One base learner: transition parameters plus its location coefficients.
/// `delta` is the categorical form of the paper's one-hot selection vector,
/// stored zero-based.
struct BaseLearnerParams {
  double nu = 1.0;
  double mu = 0.0;
  int delta = 0;
  Eigen::VectorXd beta0;  // M-vector (scalar when M=1)
  Eigen::VectorXd beta1;
};

/// One retained MCMC state. `sigma` is 1x1 for the AST.
struct PosteriorDraw {
  std::vector<BaseLearnerParams> learners;
  Eigen::MatrixXd sigma;
  double loglik = 0.0;
};

/// Stacks the learners' location coefficients into the 2J x M matrix whose
/// rows pair up as (beta0_j, beta1_j).
Eigen::MatrixXd coefficient_matrix(const PosteriorDraw& draw);

/// Raw multivariate series plus the metadata needed for transformation,
/// ordering and structural identification.
struct TimeSeriesPanel {
  Eigen::MatrixXd values;          // T x M, levels as read from disk
  std::vector<std::string> names;
  std::vector<std::string> dates;
  std::vector<int> tcodes;         // in {1..7}
  std::vector<std::string> classes;  // "slow", "policy" or "fast"

  int T() const { return static_cast<int>(values.rows()); }
  int M() const { return static_cast<int>(values.cols()); }
  void validate() const;  // throws data_error on inconsistent metadata
};

struct ParameterCount {
  std::int64_t vast;
  std::int64_t linear_var;
};

/// Free-parameter counts: J(3+2M) + M(M+1)/2 for the model, M^2 P + M(M+1)/2
/// for the unrestricted linear VAR it competes with.
ParameterCount parameter_count(const ModelConfig& cfg);

inline void ModelConfig::validate() const {
  if (J < 1) throw config_error("ModelConfig: J must be >= 1");
  if (P < 1) throw config_error("ModelConfig: P must be >= 1");
  if (M < 1) throw config_error("ModelConfig: M must be >= 1");
  if (!(phi > 0.0)) throw config_error("ModelConfig: phi must be > 0");
  if (!(a_sigma > 0.0) || !(b_sigma > 0.0))
    throw config_error("ModelConfig: a_sigma, b_sigma must be > 0");
  if (!(a_nu > 0.0) || !(b_nu > 0.0))
    throw config_error("ModelConfig: a_nu, b_nu must be > 0");
  if (!(sigma2_mu > 0.0)) throw config_error("ModelConfig: sigma2_mu must be > 0");
  if (!(S_Sigma_scale > 0.0)) throw config_error("ModelConfig: S_Sigma_scale must be > 0");
  if (n_burn < 1 || n_save < 1) throw config_error("ModelConfig: n_burn, n_save must be >= 1");
  if (thin < 1) throw config_error("ModelConfig: thin must be >= 1");
  if (fix_nu && !(*fix_nu > 0.0)) throw config_error("ModelConfig: fix_nu must be > 0");
}

inline Eigen::MatrixXd coefficient_matrix(const PosteriorDraw& draw) {
  const int J = static_cast<int>(draw.learners.size());
  const int M = J > 0 ? static_cast<int>(draw.learners[0].beta0.size()) : 0;
  Eigen::MatrixXd B(2 * J, M);
  for (int j = 0; j < J; ++j) {
    B.row(2 * j) = draw.learners[j].beta0.transpose();
    B.row(2 * j + 1) = draw.learners[j].beta1.transpose();
  }
  return B;
}

inline ParameterCount parameter_count(const ModelConfig& cfg) {
  cfg.validate();
  const std::int64_t J = cfg.J, M = cfg.M, P = cfg.P;
  return {J * (3 + 2 * M) + M * (M + 1) / 2, M * M * P + M * (M + 1) / 2};
}

inline void TimeSeriesPanel::validate() const {
  const auto m = static_cast<std::size_t>(M());
  if (names.size() != m || tcodes.size() != m || classes.size() != m)
    throw data_error("TimeSeriesPanel: metadata size does not match column count");
  if (!dates.empty() && dates.size() != static_cast<std::size_t>(T()))
    throw data_error("TimeSeriesPanel: date index length does not match row count");
  for (std::size_t i = 0; i < m; ++i) {
    if (tcodes[i] < 1 || tcodes[i] > 7)
      throw data_error("TimeSeriesPanel: tcode out of range for series " + names[i]);
    if (classes[i] != "slow" && classes[i] != "policy" && classes[i] != "fast")
      throw data_error("TimeSeriesPanel: unknown class '" + classes[i] + "' for series " + names[i]);
  }
  if (!values.allFinite())
    throw data_error("TimeSeriesPanel: missing or non-finite values present");
}

}  // namespace vast
