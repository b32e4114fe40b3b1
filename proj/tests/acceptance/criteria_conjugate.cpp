// Criteria 1, 2, 4: the closed-form conjugate machinery against independent
// oracles, and the Kronecker coefficient draw.

#include "acceptance.hpp"

#include <Eigen/Dense>

#include "oracles.hpp"
#include "vast/conjugate.hpp"
#include "vast/learners.hpp"
#include "vast/rng.hpp"
#include "vast/sampler.hpp"

namespace acceptance {

using namespace vast;

namespace {

Eigen::MatrixXd transition_pair(const Eigen::VectorXd& x, double nu, double mu) {
  Eigen::MatrixXd z(x.size(), 2);
  logistic_column(x, nu, mu, z.col(0));
  z.col(1) = 1.0 - z.col(0).array();
  return z;
}

}  // namespace

bool criterion_1(Check& c) {
  // (a) NIG posterior vs dense 3-D quadrature, T = 20, J = 1
  {
    Rng rng(1001);
    const int T = 20;
    const Eigen::VectorXd x = rng.normal_vector(T);
    const Eigen::MatrixXd z = transition_pair(x, 1.8, -0.1);
    Eigen::VectorXd y(T);
    for (int t = 0; t < T; ++t) y[t] = 1.1 * z(t, 0) - 0.7 * z(t, 1) + 0.6 * rng.normal();

    ModelConfig cfg;
    cfg.J = 1;
    TransitionMatrix tm;
    tm.Z = z;
    const auto post = nig_posterior(y, tm, cfg);
    const auto orc = oracle::quadrature_nig_3d(y, z, cfg.phi / cfg.J, cfg.a_sigma, cfg.b_sigma,
                                               201, 301);
    const double es2 = post.s_bar / (post.a_bar - 1.0);
    const double vs2 = post.s_bar * post.s_bar /
                       ((post.a_bar - 1.0) * (post.a_bar - 1.0) * (post.a_bar - 2.0));
    auto tol = [](double v) { return 1e-4 * std::max(1.0, std::abs(v)); };
    c.require_close(post.beta_bar[0], orc.mean_beta0, tol(orc.mean_beta0), "E[beta0]");
    c.require_close(post.beta_bar[1], orc.mean_beta1, tol(orc.mean_beta1), "E[beta1]");
    c.require_close(es2 * post.V_bar(0, 0), orc.var_beta0, tol(orc.var_beta0), "Var[beta0]");
    c.require_close(es2 * post.V_bar(1, 1), orc.var_beta1, tol(orc.var_beta1), "Var[beta1]");
    c.require_close(es2, orc.mean_sigma2, tol(orc.mean_sigma2), "E[sigma2]");
    c.require_close(vs2, orc.var_sigma2, tol(orc.var_sigma2), "Var[sigma2]");
  }

  // (b) MNIW posterior vs a full-conditional Gibbs oracle, T = 15, M = 2
  {
    Rng rng(1002);
    const int T = 15, M = 2;
    const Eigen::VectorXd x = rng.normal_vector(T);
    const Eigen::MatrixXd z = transition_pair(x, 2.2, 0.2);
    Eigen::MatrixXd Y(T, M);
    for (int t = 0; t < T; ++t) {
      Y(t, 0) = 0.8 * z(t, 0) - 0.4 * z(t, 1) + 0.5 * rng.normal();
      Y(t, 1) = -0.2 * z(t, 0) + 0.9 * z(t, 1) + 0.5 * rng.normal();
    }
    ModelConfig cfg;
    cfg.J = 1;
    cfg.M = M;
    TransitionMatrix tm;
    tm.Z = z;
    const auto post = mniw_posterior(Y, tm, cfg);
    const auto orc = oracle::gibbs_mniw_oracle(Y, z, cfg.phi / cfg.J, cfg.wishart_dof(),
                                               cfg.S_Sigma_scale, 150000, 2000, 555);
    const Eigen::MatrixXd ESigma = post.S_bar / (post.a_bar - M - 1);
    Eigen::VectorXd vecB(4);
    vecB << post.B_bar(0, 0), post.B_bar(1, 0), post.B_bar(0, 1), post.B_bar(1, 1);
    for (int i = 0; i < 4; ++i)
      c.require_z(vecB[i], orc.mean_vecB[i], orc.se_mean_vecB[i],
                  "E[vecB_" + std::to_string(i) + "]");
    for (int i = 0; i < M; ++i)
      for (int j = 0; j <= i; ++j)
        c.require_z(ESigma(i, j), orc.mean_Sigma(i, j), orc.se_mean_Sigma(i, j),
                    "E[Sigma_" + std::to_string(i) + std::to_string(j) + "]");
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j <= i; ++j) {
        const int bi = i % 2, mi = i / 2, bj = j % 2, mj = j / 2;
        c.require_z(ESigma(mi, mj) * post.V_bar(bi, bj), orc.cov_vecB(i, j),
                    std::max(orc.se_cov_vecB(i, j), 1e-12),
                    "Cov[vecB]_" + std::to_string(i) + std::to_string(j));
      }
  }
  return c.ok;
}

bool criterion_2(Check& c) {
  // collapsed univariate marginal vs quadrature, three T = 10 instances
  for (int inst = 0; inst < 3; ++inst) {
    Rng rng(2000 + inst);
    const int T = 10;
    const Eigen::VectorXd x = rng.normal_vector(T);
    const Eigen::MatrixXd z = transition_pair(x, 0.8 + inst, 0.3 * inst - 0.2);
    Eigen::VectorXd R(T);
    for (int t = 0; t < T; ++t) R[t] = 0.9 * z(t, 0) - 0.6 * z(t, 1) + 0.7 * rng.normal();
    ModelConfig cfg;
    cfg.J = 1 + inst;
    const double impl = collapsed_logml_uni(R, z, cfg);
    const auto orc = oracle::quadrature_nig_3d(R, z, cfg.phi / cfg.J, cfg.a_sigma, cfg.b_sigma,
                                               201, 301);
    c.require_close(impl, orc.logml, 1e-5 * std::max(1.0, std::abs(orc.logml)),
                    "collapsed uni log-ML, instance " + std::to_string(inst));
  }

  // collapsed SUR marginal vs importance sampling, T = 10, M = 2
  {
    Rng rng(2100);
    const int T = 10, M = 2;
    const Eigen::VectorXd x = rng.normal_vector(T);
    const Eigen::MatrixXd z = transition_pair(x, 1.4, 0.1);
    Eigen::MatrixXd R(T, M);
    for (int t = 0; t < T; ++t) {
      R(t, 0) = 0.7 * z(t, 0) - 0.3 * z(t, 1) + 0.5 * rng.normal();
      R(t, 1) = -0.5 * z(t, 0) + 0.6 * z(t, 1) + 0.5 * rng.normal();
    }
    ModelConfig cfg;
    cfg.J = 2;
    cfg.M = M;
    cfg.a_Sigma = 4.0;
    cfg.S_Sigma_scale = 0.5;
    const double impl = collapsed_logml_multi(R, z, cfg);
    const auto is = oracle::is_logml_mniw(R, z, cfg.phi / cfg.J, cfg.a_Sigma,
                                          cfg.S_Sigma_scale, 250000, 808);
    c.require_z(impl, is.logml, is.se, "collapsed SUR log-ML");
    c.note("IS standard error " + std::to_string(is.se));
  }
  return c.ok;
}

bool criterion_4(Check& c) {
  // fixed Sigma and Z: 100k Kronecker draws of B
  Rng rng(4001);
  const int T = 60, J = 3, M = 2;
  ModelConfig cfg;
  cfg.J = J;
  cfg.M = M;
  std::vector<BaseLearnerParams> learners(J);
  Eigen::MatrixXd X = rng.normal_matrix(T, 4);
  for (int j = 0; j < J; ++j) {
    learners[j].nu = 0.8 + j;
    learners[j].mu = 0.1 * j;
    learners[j].delta = j % 4;
    learners[j].beta0 = learners[j].beta1 = Eigen::VectorXd::Zero(M);
  }
  const auto Z = build_Z(learners, X);
  Eigen::MatrixXd Y(T, M);
  for (int t = 0; t < T; ++t)
    for (int m = 0; m < M; ++m) Y(t, m) = rng.normal();
  const auto post = mniw_posterior(Y, Z, cfg);
  const auto work = detail::conjugate_work(Y, Z, cfg);

  Eigen::MatrixXd Sigma(2, 2);
  Sigma << 1.0, 0.4, 0.4, 0.81;
  const Eigen::MatrixXd L_sigma = Eigen::LLT<Eigen::MatrixXd>(Sigma).matrixL();

  const int n = 100000;
  const int nv = 2 * J * M;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(nv);
  Eigen::MatrixXd second = Eigen::MatrixXd::Zero(nv, nv);
  Eigen::VectorXd v(nv);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd B = draw_coefficients_kronecker(work.B_bar, work.llt_Q, L_sigma, rng);
    for (int m = 0; m < M; ++m) v.segment(m * 2 * J, 2 * J) = B.col(m);
    mean += v;
    second.selfadjointView<Eigen::Lower>().rankUpdate(v);
  }
  mean /= n;
  Eigen::MatrixXd cov = Eigen::MatrixXd(second.selfadjointView<Eigen::Lower>()) / n -
                        mean * mean.transpose();
  cov *= static_cast<double>(n) / (n - 1);

  // expected covariance Sigma (x) V_bar, entrywise within 3 MC standard errors
  int failures = 0;
  for (int i = 0; i < nv; ++i)
    for (int j = 0; j <= i; ++j) {
      const double expect = Sigma(i / (2 * J), j / (2 * J)) * post.V_bar(i % (2 * J), j % (2 * J));
      const double se =
          std::sqrt((cov(i, i) * cov(j, j) + cov(i, j) * cov(i, j)) / (n - 1.0));
      if (std::abs(cov(i, j) - expect) >= 3.0 * se) ++failures;
    }
  c.require(failures == 0, "empirical Cov(vecB) = Sigma (x) V_bar entrywise (3 MC SE), " +
                               std::to_string(failures) + " violations of " +
                               std::to_string(nv * (nv + 1) / 2) + " entries");

  // the naive dense path: materialize D = L_sigma (x) F and check that it
  // reproduces the dense covariance and the Kronecker draw itself
  Eigen::MatrixXd F = work.llt_Q.matrixU().solve(Eigen::MatrixXd::Identity(2 * J, 2 * J));
  Eigen::MatrixXd D(nv, nv);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      D.block(a * 2 * J, b * 2 * J, 2 * J, 2 * J) = L_sigma(a, b) * F;
  Eigen::MatrixXd dense_cov(nv, nv);
  for (int a = 0; a < M; ++a)
    for (int b = 0; b < M; ++b)
      dense_cov.block(a * 2 * J, b * 2 * J, 2 * J, 2 * J) = Sigma(a, b) * post.V_bar;
  c.require((D * D.transpose() - dense_cov).cwiseAbs().maxCoeff() < 1e-10,
            "dense factor reproduces Sigma (x) V_bar");

  // draw-for-draw agreement under common standard normals
  Rng rng_a(999), rng_b(999);
  const Eigen::MatrixXd Bk = draw_coefficients_kronecker(work.B_bar, work.llt_Q, L_sigma, rng_a);
  const Eigen::MatrixXd G = rng_b.normal_matrix(2 * J, M);
  Eigen::VectorXd g(nv), vk(nv);
  for (int m = 0; m < M; ++m) g.segment(m * 2 * J, 2 * J) = G.col(m);
  Eigen::VectorXd naive = D * g;
  for (int m = 0; m < M; ++m) naive.segment(m * 2 * J, 2 * J) += work.B_bar.col(m);
  for (int m = 0; m < M; ++m) vk.segment(m * 2 * J, 2 * J) = Bk.col(m);
  c.require((naive - vk).cwiseAbs().maxCoeff() < 1e-10,
            "Kronecker path equals the dense path draw-for-draw");
  return c.ok;
}

}  // namespace acceptance
