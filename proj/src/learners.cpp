#include "vast/learners.hpp"

#include <cmath>

namespace vast {

double logistic_transition(double x_tilde, double nu, double mu) {
  if (!std::isfinite(x_tilde) || !std::isfinite(nu) || !std::isfinite(mu))
    throw numeric_error("logistic_transition: non-finite input");
  if (nu < 0.0) throw numeric_error("logistic_transition: nu must be >= 0");
  const double a = nu * (x_tilde - mu);
  if (a >= 0.0) {
    const double e = std::exp(-a);
    return 1.0 / (1.0 + e);
  }
  const double e = std::exp(a);
  return e / (1.0 + e);
}

void logistic_column(const Eigen::Ref<const Eigen::VectorXd>& x, double nu, double mu,
                     Eigen::Ref<Eigen::VectorXd> out) {
  if (!std::isfinite(nu) || !std::isfinite(mu) || nu < 0.0)
    throw numeric_error("logistic_column: invalid transition parameters");
  // element-for-element the same arithmetic as logistic_transition, so the
  // scalar and column paths agree bitwise
  const Eigen::Index n = x.size();
  for (Eigen::Index t = 0; t < n; ++t) {
    const double a = nu * (x[t] - mu);
    if (a >= 0.0) {
      const double e = std::exp(-a);
      out[t] = 1.0 / (1.0 + e);
    } else {
      const double e = std::exp(a);
      out[t] = e / (1.0 + e);
    }
  }
}

Eigen::VectorXd eval_base_learner(const BaseLearnerParams& params, double x_tilde) {
  const double s = logistic_transition(x_tilde, params.nu, params.mu);
  return s * params.beta0 + (1.0 - s) * params.beta1;
}

TransitionMatrix build_Z(const std::vector<BaseLearnerParams>& learners,
                         const Eigen::MatrixXd& X) {
  const int T = static_cast<int>(X.rows());
  const int J = static_cast<int>(learners.size());
  TransitionMatrix tm;
  tm.Z.resize(T, 2 * J);
  for (int j = 0; j < J; ++j) refresh_learner_columns(tm, j, learners[j], X);
  return tm;
}

void refresh_learner_columns(TransitionMatrix& tm, int j, const BaseLearnerParams& params,
                             const Eigen::MatrixXd& X) {
  if (j < 0 || j >= tm.J()) throw numeric_error("refresh_learner_columns: learner index out of range");
  if (params.delta < 0 || params.delta >= X.cols())
    throw data_error("refresh_learner_columns: delta does not index a covariate column");
  if (tm.T() != X.rows()) throw data_error("refresh_learner_columns: row count mismatch");
  logistic_column(X.col(params.delta), params.nu, params.mu, tm.Z.col(2 * j));
  tm.Z.col(2 * j + 1) = 1.0 - tm.Z.col(2 * j).array();
}

}  // namespace vast
