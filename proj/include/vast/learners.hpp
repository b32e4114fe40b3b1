#pragma once

#include <Eigen/Dense>

#include "vast/types.hpp"

namespace vast {

/// Logistic transition 1/(1+exp(-nu (x - mu))). Evaluated through the branch
/// that only exponentiates nonpositive arguments, so huge nu draws saturate to
/// {0,1} instead of overflowing. nu = 0 gives the constant 1/2.
double logistic_transition(double x_tilde, double nu, double mu);

/// Vectorized stable logistic over a covariate column.
void logistic_column(const Eigen::Ref<const Eigen::VectorXd>& x, double nu, double mu,
                     Eigen::Ref<Eigen::VectorXd> out);

/// One learner's contribution S*beta0 + (1-S)*beta1 at a covariate value.
Eigen::VectorXd eval_base_learner(const BaseLearnerParams& params, double x_tilde);

/// Generated-regressor matrix: row t = (S_1t, 1-S_1t, ..., S_Jt, 1-S_Jt).
/// Column-major storage keeps each learner's pair contiguous, so a single
/// learner refresh touches one block.
struct TransitionMatrix {
  Eigen::MatrixXd Z;  // T x 2J

  int T() const { return static_cast<int>(Z.rows()); }
  int J() const { return static_cast<int>(Z.cols()) / 2; }
};

TransitionMatrix build_Z(const std::vector<BaseLearnerParams>& learners,
                         const Eigen::MatrixXd& X);

/// Recomputes only columns (2j, 2j+1); equivalent to a full build_Z.
void refresh_learner_columns(TransitionMatrix& tm, int j, const BaseLearnerParams& params,
                             const Eigen::MatrixXd& X);

}  // namespace vast
