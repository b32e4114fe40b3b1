#include "vast/sampler.hpp"

#include "vast/data.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>

namespace vast {

void MhState::init(int J, double scale) {
  s_nu.assign(J, scale);
  s_mu.assign(J, scale);
  window_proposals.assign(J, 0);
  window_accepts.assign(J, 0);
  frozen_proposals.assign(J, 0);
  frozen_accepts.assign(J, 0);
  adapting = false;
}

void adapt_proposals(MhState& mh) {
  if (!mh.adapting) return;
  for (std::size_t j = 0; j < mh.s_nu.size(); ++j) {
    if (mh.window_proposals[j] > 0) {
      const double rate = static_cast<double>(mh.window_accepts[j]) / mh.window_proposals[j];
      if (rate < 0.30) {
        mh.s_nu[j] *= 0.9;
        mh.s_mu[j] *= 0.9;
      } else if (rate > 0.60) {
        mh.s_nu[j] *= 1.1;
        mh.s_mu[j] *= 1.1;
      }
    }
    mh.window_proposals[j] = 0;
    mh.window_accepts[j] = 0;
  }
}

BackfitSampler::BackfitSampler(Eigen::MatrixXd Y, Eigen::MatrixXd X, const ModelConfig& cfg,
                               const ChainSettings& settings, bool sur)
    : Y_(std::move(Y)),
      X_(std::move(X)),
      cfg_(cfg),
      settings_(settings),
      sur_(sur),
      rng_(settings.seed) {
  cfg_.validate();
  T_ = static_cast<int>(Y_.rows());
  K_ = static_cast<int>(X_.cols());
  M_ = static_cast<int>(Y_.cols());
  if (cfg_.M != M_) throw config_error("BackfitSampler: cfg.M does not match the response");
  if (X_.rows() != T_) throw data_error("BackfitSampler: X and Y row counts differ");
  if (T_ < 2) throw data_error("BackfitSampler: need at least two observations");
  if (K_ < 1) throw data_error("BackfitSampler: need at least one covariate");
  if (!Y_.allFinite() || !X_.allFinite()) throw data_error("BackfitSampler: non-finite data");
  if (!sur_ && M_ != 1) throw config_error("BackfitSampler: univariate route needs M = 1");

  col_mean_ = X_.colwise().mean();
  mh_.init(cfg_.J, settings_.initial_proposal_scale);

  // Neutral start within prior support: random covariate, nu = 1 (or the fix
  // value), mu at the standardized mean, zero coefficients, unit error scale.
  learners_.resize(cfg_.J);
  for (auto& l : learners_) {
    l.delta = std::min(K_ - 1, static_cast<int>(rng_.uniform() * K_));
    l.nu = cfg_.fix_nu.value_or(1.0);
    l.mu = cfg_.fix_mu_to_mean ? col_mean_[l.delta] : 0.0;
    l.beta0 = Eigen::VectorXd::Zero(M_);
    l.beta1 = Eigen::VectorXd::Zero(M_);
  }
  B_ = Eigen::MatrixXd::Zero(2 * cfg_.J, M_);
  Sigma_ = Eigen::MatrixXd::Identity(M_, M_);
  L_Sigma_ = Eigen::MatrixXd::Identity(M_, M_);
  Z_ = build_Z(learners_, X_);
  F_ = Eigen::MatrixXd::Zero(T_, M_);
  refresh_response_cache();
}

void BackfitSampler::refresh_response_cache() {
  if (sur_) {
    YtY_.setZero(M_, M_);
    YtY_.selfadjointView<Eigen::Lower>().rankUpdate(Y_.transpose());
    YtY_ = YtY_.selfadjointView<Eigen::Lower>();
  } else {
    YtY_trace_uni_ = Y_.col(0).squaredNorm();
  }
}

Eigen::MatrixXd BackfitSampler::partial_residual(int j) const {
  if (j < 0 || j >= cfg_.J) throw config_error("partial_residual: learner index out of range");
  return Y_ - F_ + Z_.Z.middleCols(2 * j, 2) * B_.middleRows(2 * j, 2);
}

double BackfitSampler::residual_drift() const {
  return (F_ - Z_.Z * B_).cwiseAbs().maxCoeff();
}

void BackfitSampler::sync_fit() { F_.noalias() = Z_.Z * B_; }

double BackfitSampler::log_prior_nu_mu(double nu, double mu) const {
  double lp = 0.0;
  if (!cfg_.fix_nu) lp += -(cfg_.a_nu + 1.0) * std::log(nu) - cfg_.b_nu / nu;
  if (!cfg_.fix_mu_to_mean) lp += -0.5 * mu * mu / cfg_.sigma2_mu;
  return lp;
}

void BackfitSampler::candidate_logmls(const LearnerMarginal& marg, double nu, double mu,
                                      Eigen::VectorXd& out) const {
  S_all_.resize(T_, K_);
  for (int c = 0; c < K_; ++c) {
    const double mu_c = cfg_.fix_mu_to_mean ? col_mean_[c] : mu;
    logistic_column(X_.col(c), nu, mu_c, S_all_.col(c));
  }
  marg.logml_batch(S_all_, out);
}

int BackfitSampler::sample_delta(int j) {
  if (j < 0 || j >= cfg_.J) throw config_error("sample_delta: learner index out of range");
  const Eigen::MatrixXd R = partial_residual(j);
  const LearnerMarginal marg(R, cfg_, sur_);
  auto& l = learners_[j];

  Eigen::VectorXd logml(K_);
  candidate_logmls(marg, l.nu, l.mu, logml);
  const double mx = logml.maxCoeff();
  if (!std::isfinite(mx))
    throw numeric_error("sample_delta: all candidate log marginal likelihoods non-finite");
  // discrete uniform prior over candidates cancels in the normalization
  Eigen::VectorXd w = (logml.array() - mx).exp();
  const double total = w.sum();
  const double u = rng_.uniform() * total;
  int chosen = K_ - 1;
  double acc = 0.0;
  for (int c = 0; c < K_; ++c) {
    acc += w[c];
    if (u <= acc) {
      chosen = c;
      break;
    }
  }

  const Eigen::MatrixXd zj_old = Z_.Z.middleCols(2 * j, 2);
  l.delta = chosen;
  if (cfg_.fix_mu_to_mean) l.mu = col_mean_[chosen];
  Z_.Z.col(2 * j) = S_all_.col(chosen);
  Z_.Z.col(2 * j + 1) = 1.0 - S_all_.col(chosen).array();
  F_.noalias() += (Z_.Z.middleCols(2 * j, 2) - zj_old) * B_.middleRows(2 * j, 2);
  return chosen;
}

bool BackfitSampler::mh_step_impl(const LearnerMarginal& marg, int j, double nu_prop,
                                  double mu_prop, double cur_logml) {
  auto& l = learners_[j];
  mh_.window_proposals[j]++;
  if (!mh_.adapting) mh_.frozen_proposals[j]++;
  if (!cfg_.fix_nu && nu_prop <= 0.0) return false;  // zero prior density

  logistic_column(X_.col(l.delta), nu_prop, mu_prop, s_buf_);
  const double prop = marg.logml(s_buf_) + log_prior_nu_mu(nu_prop, mu_prop);
  const double cur = cur_logml + log_prior_nu_mu(l.nu, l.mu);
  const double log_ratio = prop - cur;
  bool accept = log_ratio >= 0.0;
  if (!accept) accept = std::log(rng_.uniform()) < log_ratio;
  if (accept) {
    l.nu = nu_prop;
    l.mu = mu_prop;
    Z_.Z.col(2 * j) = s_buf_;
    Z_.Z.col(2 * j + 1) = 1.0 - s_buf_.array();
    mh_.window_accepts[j]++;
    if (!mh_.adapting) mh_.frozen_accepts[j]++;
  }
  return accept;
}

bool BackfitSampler::mh_step(int j, double nu_prop, double mu_prop) {
  if (j < 0 || j >= cfg_.J) throw config_error("mh_step: learner index out of range");
  const Eigen::MatrixXd R = partial_residual(j);
  const LearnerMarginal marg(R, cfg_, sur_);
  s_buf_.resize(T_);
  const double cur = marg.logml(Z_.Z.col(2 * j));
  const Eigen::MatrixXd zj_old = Z_.Z.middleCols(2 * j, 2);
  const bool accept = mh_step_impl(marg, j, nu_prop, mu_prop, cur);
  if (accept)
    F_.noalias() += (Z_.Z.middleCols(2 * j, 2) - zj_old) * B_.middleRows(2 * j, 2);
  return accept;
}

bool BackfitSampler::sample_nu_mu(int j) {
  if (cfg_.fix_nu && cfg_.fix_mu_to_mean) return false;
  auto& l = learners_[j];
  const double nu_prop = cfg_.fix_nu ? l.nu : l.nu + mh_.s_nu[j] * rng_.normal();
  const double mu_prop = cfg_.fix_mu_to_mean ? l.mu : l.mu + mh_.s_mu[j] * rng_.normal();
  return mh_step(j, nu_prop, mu_prop);
}

void BackfitSampler::update_learner(int j) {
  auto& l = learners_[j];
  const Eigen::MatrixXd zj_before = Z_.Z.middleCols(2 * j, 2);
  const Eigen::MatrixXd R = Y_ - F_ + zj_before * B_.middleRows(2 * j, 2);
  const LearnerMarginal marg(R, cfg_, sur_);
  s_buf_.resize(T_);

  // Step 1: categorical draw of the selected covariate, coefficients and
  // error scale integrated out.
  double cur_logml;
  {
    Eigen::VectorXd logml(K_);
    candidate_logmls(marg, l.nu, l.mu, logml);
    const double mx = logml.maxCoeff();
    if (!std::isfinite(mx))
      throw numeric_error("sample_delta: all candidate log marginal likelihoods non-finite");
    Eigen::VectorXd w = (logml.array() - mx).exp();
    const double u = rng_.uniform() * w.sum();
    int chosen = K_ - 1;
    double acc = 0.0;
    for (int c = 0; c < K_; ++c) {
      acc += w[c];
      if (u <= acc) {
        chosen = c;
        break;
      }
    }
    l.delta = chosen;
    if (cfg_.fix_mu_to_mean) l.mu = col_mean_[chosen];
    Z_.Z.col(2 * j) = S_all_.col(chosen);
    Z_.Z.col(2 * j + 1) = 1.0 - S_all_.col(chosen).array();
    cur_logml = logml[chosen];
  }

  // Step 2: joint random-walk MH on the free transition coordinates.
  if (!(cfg_.fix_nu && cfg_.fix_mu_to_mean)) {
    const double nu_prop = cfg_.fix_nu ? l.nu : l.nu + mh_.s_nu[j] * rng_.normal();
    const double mu_prop = cfg_.fix_mu_to_mean ? l.mu : l.mu + mh_.s_mu[j] * rng_.normal();
    mh_step_impl(marg, j, nu_prop, mu_prop, cur_logml);
  }

  F_.noalias() += (Z_.Z.middleCols(2 * j, 2) - zj_before) * B_.middleRows(2 * j, 2);
}

void BackfitSampler::draw_error_and_coefficients() {
  const auto work = detail::conjugate_work(Y_, Z_, cfg_);
  if (sur_) {
    Eigen::MatrixXd S_bar = cfg_.S_Sigma_scale * Eigen::MatrixXd::Identity(M_, M_);
    S_bar += YtY_ - work.B_bar.transpose() * work.ZtY;
    S_bar = 0.5 * (S_bar + S_bar.transpose()).eval();
    Sigma_ = draw_inverse_wishart(cfg_.wishart_dof() + T_, S_bar, rng_);
    Eigen::LLT<Eigen::MatrixXd> llt(Sigma_);
    if (llt.info() != Eigen::Success)
      throw numeric_error("error covariance draw not positive definite");
    L_Sigma_ = llt.matrixL();
    B_ = draw_coefficients_kronecker(work.B_bar, work.llt_Q, L_Sigma_, rng_);
  } else {
    const double quad = work.B_bar.col(0).dot(work.ZtY.col(0));
    const double s_bar = cfg_.b_sigma + 0.5 * (YtY_trace_uni_ - quad);
    if (!(s_bar > 0.0)) throw numeric_error("nonpositive posterior rate for sigma^2");
    const double sigma2 = rng_.inv_gamma(cfg_.a_sigma + 0.5 * T_, s_bar);
    Sigma_(0, 0) = sigma2;
    L_Sigma_(0, 0) = std::sqrt(sigma2);
    B_ = draw_coefficients_kronecker(work.B_bar, work.llt_Q, L_Sigma_, rng_);
  }
  for (int j = 0; j < cfg_.J; ++j) {
    learners_[j].beta0 = B_.row(2 * j).transpose();
    learners_[j].beta1 = B_.row(2 * j + 1).transpose();
  }
  sync_fit();
}

void BackfitSampler::sweep() {
  try {
    if (update_learners_)
      for (int j = 0; j < cfg_.J; ++j) update_learner(j);
    if (settings_.check_invariants)
      diag_.max_residual_drift = std::max(diag_.max_residual_drift, residual_drift());
    draw_error_and_coefficients();
    if (!B_.allFinite() || !Sigma_.allFinite())
      throw numeric_error("non-finite sampler state");
  } catch (const numeric_error& e) {
    throw numeric_error("sweep " + std::to_string(sweep_count_) + ": " + e.what());
  }
  ++sweep_count_;
}

double BackfitSampler::loglik() const {
  constexpr double kLog2Pi = 1.8378770664093454836;
  const Eigen::MatrixXd E = Y_ - F_;
  if (!sur_) {
    const double s2 = Sigma_(0, 0);
    return -0.5 * T_ * (kLog2Pi + std::log(s2)) - 0.5 * E.squaredNorm() / s2;
  }
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma_);
  if (llt.info() != Eigen::Success) throw numeric_error("loglik: Sigma not positive definite");
  const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
  const Eigen::MatrixXd W = llt.matrixL().solve(E.transpose());
  return -0.5 * T_ * (M_ * kLog2Pi + logdet) - 0.5 * W.squaredNorm();
}

PosteriorDraw BackfitSampler::state() const {
  PosteriorDraw d;
  d.learners = learners_;
  d.sigma = Sigma_;
  d.loglik = loglik();
  return d;
}

void BackfitSampler::set_state(const PosteriorDraw& draw) {
  if (static_cast<int>(draw.learners.size()) != cfg_.J)
    throw config_error("set_state: learner count mismatch");
  for (const auto& l : draw.learners) {
    if (l.delta < 0 || l.delta >= K_) throw config_error("set_state: delta out of range");
    if (l.beta0.size() != M_ || l.beta1.size() != M_)
      throw config_error("set_state: coefficient dimension mismatch");
    if (!(l.nu >= 0.0) || !std::isfinite(l.nu))  // nu = 0 allowed for diagnostics
      throw config_error("set_state: nu must be finite and nonnegative");
  }
  if (draw.sigma.rows() != M_ || draw.sigma.cols() != M_)
    throw config_error("set_state: sigma dimension mismatch");
  learners_ = draw.learners;
  Sigma_ = draw.sigma;
  Eigen::LLT<Eigen::MatrixXd> llt(Sigma_);
  if (llt.info() != Eigen::Success)
    throw numeric_error("set_state: sigma not positive definite");
  L_Sigma_ = llt.matrixL();
  B_ = coefficient_matrix(draw);
  Z_ = build_Z(learners_, X_);
  sync_fit();
}

void BackfitSampler::simulate_response() {
  Y_ = F_ + rng_.normal_matrix(T_, M_) * L_Sigma_.transpose();
  refresh_response_cache();
}

std::vector<PosteriorDraw> BackfitSampler::run() {
  const auto t0 = std::chrono::steady_clock::now();
  const long freeze_at = cfg_.n_burn / 2;
  mh_.adapting = freeze_at > 0;
  for (int it = 0; it < cfg_.n_burn; ++it) {
    sweep();
    if (mh_.adapting && (it + 1) % settings_.adapt_window == 0) adapt_proposals(mh_);
    if (mh_.adapting && (it + 1) >= freeze_at) {
      mh_.adapting = false;
      std::fill(mh_.frozen_proposals.begin(), mh_.frozen_proposals.end(), 0L);
      std::fill(mh_.frozen_accepts.begin(), mh_.frozen_accepts.end(), 0L);
    }
  }
  std::vector<PosteriorDraw> draws;
  draws.reserve(cfg_.n_save);
  for (int d = 0; d < cfg_.n_save; ++d) {
    for (int s = 0; s < cfg_.thin; ++s) sweep();
    draws.push_back(state());
    diag_.loglik_trace.push_back(draws.back().loglik);
  }
  diag_.accept_rate_postfreeze.assign(cfg_.J, std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < cfg_.J; ++j)
    if (mh_.frozen_proposals[j] > 0)
      diag_.accept_rate_postfreeze[j] =
          static_cast<double>(mh_.frozen_accepts[j]) / mh_.frozen_proposals[j];
  diag_.final_s_nu = mh_.s_nu;
  diag_.final_s_mu = mh_.s_mu;
  diag_.total_sweeps = sweep_count_;
  const auto dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  diag_.seconds_per_sweep = sweep_count_ > 0 ? dt / sweep_count_ : 0.0;
  return draws;
}

std::vector<PosteriorDraw> run_chain_ast(const Eigen::VectorXd& y, const Eigen::MatrixXd& X,
                                         const ModelConfig& cfg, const ChainSettings& settings,
                                         ChainDiagnostics* diag) {
  ModelConfig c = cfg;
  c.M = 1;
  BackfitSampler sampler(y, X, c, settings, /*sur=*/false);
  auto draws = sampler.run();
  if (diag) *diag = sampler.diagnostics();
  return draws;
}

std::vector<PosteriorDraw> run_chain_vast(const Eigen::MatrixXd& Y, const ModelConfig& cfg,
                                          const ChainSettings& settings, ChainDiagnostics* diag) {
  ModelConfig c = cfg;
  c.M = static_cast<int>(Y.cols());
  auto [X, y_aligned] = build_lag_matrix(Y, c.P);
  BackfitSampler sampler(y_aligned, X, c, settings, /*sur=*/true);
  auto draws = sampler.run();
  if (diag) *diag = sampler.diagnostics();
  return draws;
}

Eigen::VectorXd variable_relevance(const std::vector<PosteriorDraw>& draws, int K) {
  if (draws.empty()) throw data_error("variable_relevance: no draws");
  Eigen::VectorXd score = Eigen::VectorXd::Zero(K);
  for (const auto& d : draws)
    for (const auto& l : d.learners) {
      if (l.delta < 0 || l.delta >= K)
        throw data_error("variable_relevance: delta outside covariate range");
      score[l.delta] += 1.0;
    }
  score /= static_cast<double>(draws.size());
  return score;
}

PosteriorDraw draw_from_prior(const ModelConfig& cfg, int K, const Eigen::VectorXd& col_means,
                              bool sur, Rng& rng) {
  cfg.validate();
  PosteriorDraw d;
  if (sur) {
    const Eigen::MatrixXd S0 =
        cfg.S_Sigma_scale * Eigen::MatrixXd::Identity(cfg.M, cfg.M);
    d.sigma = draw_inverse_wishart(cfg.wishart_dof(), S0, rng);
  } else {
    d.sigma.resize(1, 1);
    d.sigma(0, 0) = rng.inv_gamma(cfg.a_sigma, cfg.b_sigma);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(d.sigma);
  if (llt.info() != Eigen::Success) throw numeric_error("draw_from_prior: sigma draw failed");
  const Eigen::MatrixXd L = llt.matrixL();
  const Eigen::MatrixXd B =
      std::sqrt(cfg.phi / cfg.J) * rng.normal_matrix(2 * cfg.J, cfg.M) * L.transpose();
  d.learners.resize(cfg.J);
  for (int j = 0; j < cfg.J; ++j) {
    auto& l = d.learners[j];
    l.nu = cfg.fix_nu ? *cfg.fix_nu : rng.inv_gamma(cfg.a_nu, cfg.b_nu);
    l.delta = std::min(K - 1, static_cast<int>(rng.uniform() * K));
    l.mu = cfg.fix_mu_to_mean ? col_means[l.delta] : std::sqrt(cfg.sigma2_mu) * rng.normal();
    l.beta0 = B.row(2 * j).transpose();
    l.beta1 = B.row(2 * j + 1).transpose();
  }
  return d;
}

Eigen::MatrixXd draw_coefficients_kronecker(const Eigen::MatrixXd& B_bar,
                                            const Eigen::LLT<Eigen::MatrixXd>& llt_Q,
                                            const Eigen::MatrixXd& L_sigma, Rng& rng) {
  const Eigen::MatrixXd G =
      rng.normal_matrix(static_cast<int>(B_bar.rows()), static_cast<int>(B_bar.cols()));
  // F = U^{-1} for Q = U'U satisfies F F' = V_bar
  return B_bar + llt_Q.matrixU().solve(G) * L_sigma.transpose();
}

Eigen::MatrixXd draw_inverse_wishart(double dof, const Eigen::MatrixXd& S, Rng& rng) {
  const int M = static_cast<int>(S.rows());
  if (!(dof > M - 1)) throw config_error("draw_inverse_wishart: dof must exceed M-1");
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw numeric_error("draw_inverse_wishart: scale not positive definite");
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(M, M);
  for (int i = 0; i < M; ++i) {
    A(i, i) = std::sqrt(rng.chi_squared(dof - i));
    for (int k = 0; k < i; ++k) A(i, k) = rng.normal();
  }
  const Eigen::MatrixXd Ls = llt.matrixL();
  const Eigen::MatrixXd C = A.triangularView<Eigen::Lower>().solve(Ls.transpose());
  Eigen::MatrixXd Sigma = C.transpose() * C;
  return 0.5 * (Sigma + Sigma.transpose());
}

void write_chain_diagnostics(const std::string& path, const ChainDiagnostics& diag) {
  std::ofstream f(path);
  if (!f) throw data_error("cannot open diagnostics file: " + path);
  f << "# chain diagnostics\n";
  f << "total_sweeps\t" << diag.total_sweeps << "\n";
  f << "seconds_per_sweep\t" << diag.seconds_per_sweep << "\n";
  f << "max_residual_drift\t" << diag.max_residual_drift << "\n";
  f << "# learner\taccept_rate_postfreeze\ts_nu\ts_mu\n";
  for (std::size_t j = 0; j < diag.accept_rate_postfreeze.size(); ++j)
    f << "learner\t" << j << "\t" << diag.accept_rate_postfreeze[j] << "\t" << diag.final_s_nu[j]
      << "\t" << diag.final_s_mu[j] << "\n";
  f << "# draw\tloglik\n";
  for (std::size_t d = 0; d < diag.loglik_trace.size(); ++d)
    f << "draw\t" << d << "\t" << diag.loglik_trace[d] << "\n";
}

}  // namespace vast
