#include "vast/conjugate.hpp"

#include <cmath>

namespace vast {

namespace {

constexpr double kLogPi = 1.1447298858494001741;
constexpr double kLog2Pi = 1.8378770664093454836;

struct TwoByTwo {
  double q00, q01, q11;
  double det() const { return q00 * q11 - q01 * q01; }
  // u' Q^{-1} u
  double inv_quad(double u0, double u1) const {
    return (u0 * u0 * q11 - 2.0 * u0 * u1 * q01 + u1 * u1 * q00) / det();
  }
};

// Z'Z + ridge*I from the column sums of s, where Z = [s, 1-s].
TwoByTwo gram_with_ridge(double q_ss, double q_s1, double T, double ridge) {
  return {q_ss + ridge, q_s1 - q_ss, T - 2.0 * q_s1 + q_ss + ridge};
}

}  // namespace

double log_multigamma(int M, double x) {
  double v = 0.25 * M * (M - 1) * kLogPi;
  for (int i = 0; i < M; ++i) v += std::lgamma(x - 0.5 * i);
  return v;
}

namespace detail {

ConjugateWork conjugate_work(const Eigen::MatrixXd& Y, const TransitionMatrix& Z,
                             const ModelConfig& cfg) {
  const int n = static_cast<int>(Z.Z.cols());
  Eigen::MatrixXd Q = cfg.ridge() * Eigen::MatrixXd::Identity(n, n);
  if (Z.T() > 0) Q.selfadjointView<Eigen::Lower>().rankUpdate(Z.Z.transpose());
  Q = Q.selfadjointView<Eigen::Lower>();
  ConjugateWork w;
  w.llt_Q.compute(Q);
  if (w.llt_Q.info() != Eigen::Success)
    throw numeric_error("conjugate_work: V_bar precision not positive definite");
  w.ZtY = Z.Z.transpose() * Y;
  w.B_bar = w.llt_Q.solve(w.ZtY);
  return w;
}

}  // namespace detail

NigPosterior nig_posterior(const Eigen::VectorXd& y, const TransitionMatrix& Z,
                           const ModelConfig& cfg) {
  cfg.validate();
  if (y.size() != Z.T()) throw data_error("nig_posterior: y and Z row counts differ");
  const int T = static_cast<int>(y.size());
  auto w = detail::conjugate_work(y, Z, cfg);
  NigPosterior post;
  post.beta_bar = w.B_bar.col(0);
  post.V_bar = w.llt_Q.solve(Eigen::MatrixXd::Identity(Z.Z.cols(), Z.Z.cols()));
  post.a_bar = cfg.a_sigma + 0.5 * T;
  // beta_bar' V_bar^{-1} beta_bar = beta_bar' Z'y, since V_bar^{-1} beta_bar = Z'y.
  post.s_bar = cfg.b_sigma + 0.5 * (y.squaredNorm() - post.beta_bar.dot(w.ZtY.col(0)));
  if (!(post.s_bar > 0.0)) throw numeric_error("nig_posterior: nonpositive posterior rate");
  return post;
}

MniwPosterior mniw_posterior(const Eigen::MatrixXd& Y, const TransitionMatrix& Z,
                             const ModelConfig& cfg) {
  cfg.validate();
  if (Y.rows() != Z.T()) throw data_error("mniw_posterior: Y and Z row counts differ");
  const int T = static_cast<int>(Y.rows());
  const int M = static_cast<int>(Y.cols());
  auto w = detail::conjugate_work(Y, Z, cfg);
  MniwPosterior post;
  post.B_bar = w.B_bar;
  post.V_bar = w.llt_Q.solve(Eigen::MatrixXd::Identity(Z.Z.cols(), Z.Z.cols()));
  post.a_bar = cfg.wishart_dof() + T;
  Eigen::MatrixXd S = cfg.S_Sigma_scale * Eigen::MatrixXd::Identity(M, M);
  S += Y.transpose() * Y - post.B_bar.transpose() * w.ZtY;
  post.S_bar = 0.5 * (S + S.transpose());
  Eigen::LLT<Eigen::MatrixXd> llt(post.S_bar);
  if (llt.info() != Eigen::Success)
    throw numeric_error("mniw_posterior: posterior scale S_bar not positive definite");
  return post;
}

double collapsed_logml_uni(const Eigen::VectorXd& R, const Eigen::MatrixXd& z_cols,
                           const ModelConfig& cfg) {
  if (z_cols.cols() != 2 || z_cols.rows() != R.size())
    throw data_error("collapsed_logml_uni: z_cols must be T x 2 aligned with R");
  LearnerMarginal lm(R, cfg, /*sur=*/false);
  return lm.logml(z_cols.col(0));
}

double collapsed_logml_multi(const Eigen::MatrixXd& R, const Eigen::MatrixXd& z_cols,
                             const ModelConfig& cfg) {
  if (z_cols.cols() != 2 || z_cols.rows() != R.rows())
    throw data_error("collapsed_logml_multi: z_cols must be T x 2 aligned with R");
  LearnerMarginal lm(R, cfg, /*sur=*/true);
  return lm.logml(z_cols.col(0));
}

LearnerMarginal::LearnerMarginal(const Eigen::MatrixXd& R, const ModelConfig& cfg, bool sur)
    : multi_(sur),
      T_(static_cast<int>(R.rows())),
      M_(static_cast<int>(R.cols())),
      ridge_(cfg.ridge()) {
  const double T = static_cast<double>(T_);
  const double log_det_V_under = -2.0 * std::log(ridge_);  // log|phi/J I_2|
  if (!multi_) {
    if (M_ != 1) throw data_error("LearnerMarginal: NIG route needs a single column");
    b_sigma_ = cfg.b_sigma;
    exponent_ = cfg.a_sigma + 0.5 * T;
    half_m_ = 0.5;
    r_ = R.col(0);
    rr_ = r_.squaredNorm();
    r_sum_ = r_.sum();
    constant_ = -0.5 * T * kLog2Pi - half_m_ * log_det_V_under +
                cfg.a_sigma * std::log(cfg.b_sigma) - std::lgamma(cfg.a_sigma) +
                std::lgamma(exponent_);
  } else {
    const double nu0 = cfg.a_Sigma > 0.0 ? cfg.a_Sigma : static_cast<double>(M_);
    const double c = cfg.S_Sigma_scale;
    if (!(nu0 > M_ - 1)) throw config_error("LearnerMarginal: Wishart dof must exceed M-1");
    exponent_ = 0.5 * (nu0 + T);
    half_m_ = 0.5 * M_;
    Eigen::MatrixXd A = c * Eigen::MatrixXd::Identity(M_, M_);
    A.selfadjointView<Eigen::Lower>().rankUpdate(R.transpose());
    A = A.selfadjointView<Eigen::Lower>();
    Eigen::LLT<Eigen::MatrixXd> llt(A);
    if (llt.info() != Eigen::Success)
      throw numeric_error("LearnerMarginal: S_underline + R'R not positive definite");
    logdetA_ = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    // G = R A^{-1} R' turns every candidate's 2x2 inner matrix into three dot
    // products against precomputed vectors.
    Eigen::MatrixXd W = llt.matrixL().solve(R.transpose());  // M x T
    G_.setZero(T_, T_);
    G_.selfadjointView<Eigen::Lower>().rankUpdate(W.transpose());
    G_ = G_.selfadjointView<Eigen::Lower>();
    G1_ = G_ * Eigen::VectorXd::Ones(T_);
    g11_ = G1_.sum();
    gs_.resize(T_);
    constant_ = -0.5 * T * M_ * kLogPi - half_m_ * log_det_V_under +
                log_multigamma(M_, exponent_) - log_multigamma(M_, 0.5 * nu0) +
                0.5 * nu0 * M_ * std::log(c);
  }
}

double LearnerMarginal::score_uni(double q_ss, double q_s1, double u0) const {
  const TwoByTwo Q = gram_with_ridge(q_ss, q_s1, static_cast<double>(T_), ridge_);
  const double detQ = Q.det();
  if (!(detQ > 0.0)) throw numeric_error("LearnerMarginal: V_bar_j not positive definite");
  const double u1 = r_sum_ - u0;
  const double s_bar = b_sigma_ + 0.5 * (rr_ - Q.inv_quad(u0, u1));
  if (!(s_bar > 0.0)) throw numeric_error("LearnerMarginal: nonpositive posterior rate");
  return constant_ - half_m_ * std::log(detQ) - exponent_ * std::log(s_bar);
}

double LearnerMarginal::score_multi(double q_ss, double q_s1, double c_ss, double c_s1) const {
  const TwoByTwo Q = gram_with_ridge(q_ss, q_s1, static_cast<double>(T_), ridge_);
  const double detQ = Q.det();
  if (!(detQ > 0.0)) throw numeric_error("LearnerMarginal: V_bar_j not positive definite");
  // C = Z' G Z for Z = [s, 1-s]
  const double c00 = c_ss;
  const double c01 = c_s1 - c_ss;
  const double c11 = g11_ - 2.0 * c_s1 + c_ss;
  // det(I_2 - V_bar C) with V_bar = Q^{-1}
  const double w00 = (Q.q11 * c00 - Q.q01 * c01) / detQ;
  const double w01 = (Q.q11 * c01 - Q.q01 * c11) / detQ;
  const double w10 = (-Q.q01 * c00 + Q.q00 * c01) / detQ;
  const double w11 = (-Q.q01 * c01 + Q.q00 * c11) / detQ;
  const double detD = (1.0 - w00) * (1.0 - w11) - w01 * w10;
  if (!(detD > 0.0)) throw numeric_error("LearnerMarginal: S_bar_j not positive definite");
  return constant_ - half_m_ * std::log(detQ) - exponent_ * (logdetA_ + std::log(detD));
}

double LearnerMarginal::logml(const Eigen::Ref<const Eigen::VectorXd>& s) const {
  const double q_ss = s.squaredNorm();
  const double q_s1 = s.sum();
  if (!multi_) return score_uni(q_ss, q_s1, s.dot(r_));
  gs_.noalias() = G_ * s;
  return score_multi(q_ss, q_s1, s.dot(gs_), s.dot(G1_));
}

void LearnerMarginal::logml_batch(const Eigen::MatrixXd& S_all, Eigen::VectorXd& out) const {
  const auto K = S_all.cols();
  if (S_all.rows() != T_) throw data_error("logml_batch: row count mismatch");
  out.resize(K);
  const Eigen::VectorXd q1 = S_all.colwise().sum();
  const Eigen::VectorXd qss = S_all.colwise().squaredNorm();
  if (!multi_) {
    const Eigen::VectorXd u0 = S_all.transpose() * r_;
    for (Eigen::Index c = 0; c < K; ++c) out[c] = score_uni(qss[c], q1[c], u0[c]);
    return;
  }
  const Eigen::MatrixXd GM = G_ * S_all;  // one GEMM instead of K matvecs
  const Eigen::VectorXd css = (S_all.array() * GM.array()).colwise().sum();
  const Eigen::VectorXd cs1 = S_all.transpose() * G1_;
  for (Eigen::Index c = 0; c < K; ++c) out[c] = score_multi(qss[c], q1[c], css[c], cs1[c]);
}

}  // namespace vast
