#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>

#include "oracles.hpp"
#include "vast/conjugate.hpp"
#include "vast/data.hpp"
#include "vast/sampler.hpp"

using namespace vast;

namespace {

struct Fixture {
  Eigen::MatrixXd Y;
  Eigen::MatrixXd X;
  ModelConfig cfg;
  ChainSettings settings;
};

Fixture make_fixture(int T, int K, int J, std::uint64_t seed, bool strong_signal = false) {
  Rng rng(seed);
  Fixture f;
  f.X = rng.normal_matrix(T, K);
  f.Y.resize(T, 1);
  for (int t = 0; t < T; ++t) {
    double m = 0.0;
    if (strong_signal) m = f.X(t, 0) > 0.0 ? 2.5 : -2.5;
    f.Y(t, 0) = m + 0.5 * rng.normal();
  }
  f.cfg.J = J;
  f.cfg.M = 1;
  f.settings.seed = seed + 1;
  return f;
}

}  // namespace

TEST_CASE("sample_delta: a single candidate is always selected") {
  auto f = make_fixture(30, 1, 1, 3);
  BackfitSampler s(f.Y, f.X, f.cfg, f.settings, false);
  for (int i = 0; i < 5; ++i) CHECK(s.sample_delta(0) == 0);
}

TEST_CASE("sample_delta: nu = 0 makes all candidates equally likely") {
  auto f = make_fixture(40, 4, 1, 9, true);
  BackfitSampler s(f.Y, f.X, f.cfg, f.settings, false);
  auto st = s.state();
  st.learners[0].nu = 0.0;  // transition constant: likelihood cannot distinguish candidates
  st.learners[0].beta0.setZero();
  st.learners[0].beta1.setZero();
  s.set_state(st);
  const int n = 12000;
  Eigen::Vector4i counts = Eigen::Vector4i::Zero();
  for (int i = 0; i < n; ++i) counts[s.sample_delta(0)]++;
  const double se = std::sqrt(0.25 * 0.75 * n);
  for (int c = 0; c < 4; ++c) CHECK(std::abs(counts[c] - n * 0.25) < 3.0 * se);
}

TEST_CASE("sample_delta: selection frequencies match the analytic categorical") {
  const int T = 40, K = 3;
  auto f = make_fixture(T, K, 1, 31, true);
  BackfitSampler s(f.Y, f.X, f.cfg, f.settings, false);
  auto st = s.state();
  st.learners[0].nu = 2.0;
  st.learners[0].mu = 0.3;
  st.learners[0].delta = 1;
  st.learners[0].beta0.setZero();  // residual independent of the learner's own fit
  st.learners[0].beta1.setZero();
  s.set_state(st);

  // analytic probabilities from the public collapsed marginal
  Eigen::Vector3d logml;
  for (int c = 0; c < K; ++c) {
    Eigen::MatrixXd z(T, 2);
    logistic_column(f.X.col(c), 2.0, 0.3, z.col(0));
    z.col(1) = 1.0 - z.col(0).array();
    logml[c] = collapsed_logml_uni(f.Y.col(0), z, f.cfg);
  }
  const Eigen::Vector3d probs = (logml.array() - logml.maxCoeff()).exp() /
                                (logml.array() - logml.maxCoeff()).exp().sum();

  const int n = 10000;
  Eigen::Vector3i counts = Eigen::Vector3i::Zero();
  for (int i = 0; i < n; ++i) counts[s.sample_delta(0)]++;
  for (int c = 0; c < K; ++c) {
    const double se = std::sqrt(std::max(1e-12, probs[c] * (1.0 - probs[c]) * n));
    CHECK(std::abs(counts[c] - n * probs[c]) < 3.0 * std::max(se, 2.0));
  }
  // the strong covariate dominates
  CHECK(probs[0] > 0.9);
}

TEST_CASE("MH step: proposing the current point always accepts") {
  auto f = make_fixture(35, 2, 1, 17);
  BackfitSampler s(f.Y, f.X, f.cfg, f.settings, false);
  for (int i = 0; i < 10; ++i) {
    const auto st = s.state();
    CHECK(s.mh_step(0, st.learners[0].nu, st.learners[0].mu));
  }
}

TEST_CASE("MH step: nonpositive nu proposals are rejected outright") {
  auto f = make_fixture(35, 2, 1, 18);
  BackfitSampler s(f.Y, f.X, f.cfg, f.settings, false);
  for (double bad : {-0.1, -5.0, 0.0}) CHECK_FALSE(s.mh_step(0, bad, 0.2));
  CHECK(s.mh_state().window_proposals[0] == 3);
  CHECK(s.mh_state().window_accepts[0] == 0);
}

TEST_CASE("adapt_proposals: window rule and freezing") {
  MhState mh;
  mh.init(2, 0.1);
  mh.adapting = true;
  // inside the band: unchanged
  mh.window_proposals = {100, 100};
  mh.window_accepts = {45, 45};
  adapt_proposals(mh);
  CHECK(mh.s_nu[0] == doctest::Approx(0.1));
  CHECK(mh.window_proposals[0] == 0);  // counters reset
  // low acceptance shrinks by 0.9, high grows by 1.1
  mh.window_proposals = {100, 100};
  mh.window_accepts = {10, 70};
  adapt_proposals(mh);
  CHECK(mh.s_nu[0] == doctest::Approx(0.09));
  CHECK(mh.s_mu[0] == doctest::Approx(0.09));
  CHECK(mh.s_nu[1] == doctest::Approx(0.11));
  // frozen: nothing moves
  mh.adapting = false;
  mh.window_proposals = {100, 100};
  mh.window_accepts = {0, 100};
  for (int i = 0; i < 10000; ++i) adapt_proposals(mh);
  CHECK(mh.s_nu[0] == doctest::Approx(0.09));
  CHECK(mh.s_nu[1] == doctest::Approx(0.11));
}

TEST_CASE("fixed learners: coefficient and variance draws match the exact posterior") {
  const int T = 60;
  auto f = make_fixture(T, 2, 1, 21, true);
  f.cfg.n_burn = 2;
  f.cfg.n_save = 40000;
  BackfitSampler s(f.Y, f.X, f.cfg, f.settings, false);
  auto st = s.state();
  st.learners[0].nu = 6.0;
  st.learners[0].mu = 0.1;
  st.learners[0].delta = 0;
  s.set_state(st);
  s.set_update_learners(false);
  const auto draws = s.run();

  const auto Z = build_Z(st.learners, f.X);
  const auto post = nig_posterior(f.Y.col(0), Z, f.cfg);
  const double es2 = post.s_bar / (post.a_bar - 1.0);

  const int n = static_cast<int>(draws.size());
  std::vector<double> s2(n), b0(n), b1(n);
  for (int i = 0; i < n; ++i) {
    s2[i] = draws[i].sigma(0, 0);
    b0[i] = draws[i].learners[0].beta0[0];
    b1[i] = draws[i].learners[0].beta1[0];
  }
  // draws are iid here (sigma^2 is drawn marginal of beta), so plain MC SEs apply
  auto mean_of = [&](const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m += x;
    return m / v.size();
  };
  auto var_of = [&](const std::vector<double>& v, double m) {
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return s / (v.size() - 1);
  };
  const double m_s2 = mean_of(s2), v_s2 = var_of(s2, m_s2);
  const double m_b0 = mean_of(b0), v_b0 = var_of(b0, m_b0);
  const double m_b1 = mean_of(b1), v_b1 = var_of(b1, m_b1);
  CHECK(std::abs(m_s2 - es2) < 3.0 * std::sqrt(v_s2 / n));
  CHECK(std::abs(m_b0 - post.beta_bar[0]) < 3.0 * std::sqrt(v_b0 / n));
  CHECK(std::abs(m_b1 - post.beta_bar[1]) < 3.0 * std::sqrt(v_b1 / n));
  // marginal coefficient variance is E[sigma^2] V_bar; variance-of-variance SE ~ sqrt(2/n)
  CHECK(std::abs(v_b0 - es2 * post.V_bar(0, 0)) < 4.0 * v_b0 * std::sqrt(2.0 / n));
  CHECK(std::abs(v_b1 - es2 * post.V_bar(1, 1)) < 4.0 * v_b1 * std::sqrt(2.0 / n));
}

TEST_CASE("chains are bitwise reproducible under the same seed and settings") {
  auto f = make_fixture(50, 3, 2, 77, true);
  f.cfg.n_burn = 60;
  f.cfg.n_save = 20;
  auto d1 = run_chain_ast(f.Y.col(0), f.X, f.cfg, f.settings);
  auto d2 = run_chain_ast(f.Y.col(0), f.X, f.cfg, f.settings);
  REQUIRE(d1.size() == d2.size());
  for (std::size_t i = 0; i < d1.size(); ++i) {
    CHECK(d1[i].loglik == d2[i].loglik);
    CHECK(d1[i].sigma(0, 0) == d2[i].sigma(0, 0));
    for (int j = 0; j < f.cfg.J; ++j) {
      CHECK(d1[i].learners[j].nu == d2[i].learners[j].nu);
      CHECK(d1[i].learners[j].mu == d2[i].learners[j].mu);
      CHECK(d1[i].learners[j].delta == d2[i].learners[j].delta);
      CHECK(d1[i].learners[j].beta0[0] == d2[i].learners[j].beta0[0]);
    }
  }
  // a different seed produces a different chain
  ChainSettings other = f.settings;
  other.seed += 1;
  auto d3 = run_chain_ast(f.Y.col(0), f.X, f.cfg, other);
  bool any_diff = false;
  for (std::size_t i = 0; i < d1.size() && !any_diff; ++i)
    any_diff = d1[i].sigma(0, 0) != d3[i].sigma(0, 0);
  CHECK(any_diff);
}

TEST_CASE("maintained fits never drift from the transition matrix") {
  auto f = make_fixture(80, 5, 4, 55, true);
  f.cfg.n_burn = 150;
  f.cfg.n_save = 50;
  f.settings.check_invariants = true;
  ChainDiagnostics diag;
  run_chain_ast(f.Y.col(0), f.X, f.cfg, f.settings, &diag);
  CHECK(diag.max_residual_drift < 1e-10);

  // multivariate route too
  Rng rng(555);
  Eigen::MatrixXd Ym(70, 3);
  for (int t = 0; t < 70; ++t)
    for (int m = 0; m < 3; ++m)
      Ym(t, m) = (t > 0 ? 0.4 * Ym(t - 1, m) : 0.0) + rng.normal();
  ModelConfig cfg;
  cfg.J = 3;
  cfg.P = 2;
  cfg.n_burn = 80;
  cfg.n_save = 30;
  ChainSettings settings;
  settings.seed = 12;
  settings.check_invariants = true;
  ChainDiagnostics dm;
  run_chain_vast(Ym, cfg, settings, &dm);
  CHECK(dm.max_residual_drift < 1e-10);
  // retained multivariate draws have positive-definite covariance draws
}

TEST_CASE("posterior error-scale draws stay positive definite across the chain") {
  Rng rng(31);
  Eigen::MatrixXd Ym(60, 2);
  for (int t = 0; t < 60; ++t)
    for (int m = 0; m < 2; ++m) Ym(t, m) = (t > 0 ? 0.3 * Ym(t - 1, m) : 0.0) + rng.normal();
  ModelConfig cfg;
  cfg.J = 2;
  cfg.P = 1;
  cfg.n_burn = 60;
  cfg.n_save = 60;
  ChainSettings settings;
  settings.seed = 99;
  const auto draws = run_chain_vast(Ym, cfg, settings);
  for (const auto& d : draws) {
    Eigen::LLT<Eigen::MatrixXd> llt(d.sigma);
    CHECK(llt.info() == Eigen::Success);
  }
  const auto du = run_chain_ast(Ym.col(0), Ym.col(1), cfg, settings);
  for (const auto& d : du) CHECK(d.sigma(0, 0) > 0.0);
}

TEST_CASE("variable relevance aggregates selection indicators") {
  PosteriorDraw d;
  d.learners.resize(3);
  for (auto& l : d.learners) {
    l.beta0 = l.beta1 = Eigen::VectorXd::Zero(1);
    l.delta = 3;
  }
  d.sigma = Eigen::MatrixXd::Identity(1, 1);
  std::vector<PosteriorDraw> draws(10, d);
  const auto score = variable_relevance(draws, 5);
  CHECK(score[3] == doctest::Approx(3.0));
  CHECK(score.sum() == doctest::Approx(3.0));

  // J = 1: scores across covariates sum to one
  PosteriorDraw single = d;
  single.learners.resize(1);
  std::vector<PosteriorDraw> sd{single, single, single};
  sd[1].learners[0].delta = 0;
  const auto score1 = variable_relevance(sd, 5);
  CHECK(score1.sum() == doctest::Approx(1.0));
}

TEST_CASE("prior draws respect the fix flags and produce valid states") {
  ModelConfig cfg;
  cfg.J = 3;
  cfg.M = 2;
  cfg.a_nu = 3.0;
  cfg.b_nu = 3.0;
  Rng rng(8);
  const Eigen::VectorXd means = Eigen::VectorXd::Zero(4);
  auto d = draw_from_prior(cfg, 4, means, true, rng);
  CHECK(d.learners.size() == 3);
  for (const auto& l : d.learners) {
    CHECK(l.nu > 0.0);
    CHECK(l.delta >= 0);
    CHECK(l.delta < 4);
  }
  Eigen::LLT<Eigen::MatrixXd> llt(d.sigma);
  CHECK(llt.info() == Eigen::Success);

  cfg.fix_nu = 10.0;
  cfg.fix_mu_to_mean = true;
  auto df = draw_from_prior(cfg, 4, means, false, rng);
  for (const auto& l : df.learners) {
    CHECK(l.nu == 10.0);
    CHECK(l.mu == 0.0);
  }
}

TEST_CASE("restricted variants skip the pinned coordinates") {
  auto f = make_fixture(60, 3, 2, 91, true);
  f.cfg.n_burn = 40;
  f.cfg.n_save = 30;
  SUBCASE("fix_nu pins nu at its value") {
    f.cfg.fix_nu = 10.0;
    const auto draws = run_chain_ast(f.Y.col(0), f.X, f.cfg, f.settings);
    for (const auto& d : draws)
      for (const auto& l : d.learners) CHECK(l.nu == 10.0);
  }
  SUBCASE("fix_mu pins mu to the selected covariate's sample mean") {
    f.cfg.fix_mu_to_mean = true;
    Eigen::MatrixXd X = f.X;
    const Eigen::VectorXd col_means = X.colwise().mean();
    const auto draws = run_chain_ast(f.Y.col(0), X, f.cfg, f.settings);
    for (const auto& d : draws)
      for (const auto& l : d.learners)
        CHECK(l.mu == doctest::Approx(col_means[l.delta]).epsilon(1e-14));
  }
  SUBCASE("fix both leaves no MH proposals") {
    f.cfg.fix_nu = 1.0;
    f.cfg.fix_mu_to_mean = true;
    ChainDiagnostics diag;
    run_chain_ast(f.Y.col(0), f.X, f.cfg, f.settings, &diag);
    for (double r : diag.accept_rate_postfreeze) CHECK(std::isnan(r));
  }
}

TEST_CASE("univariate chain recovers a strong threshold signal") {
  // y depends on x0 through a step; the chain should pile delta mass on x0
  auto f = make_fixture(150, 4, 3, 101, true);
  f.cfg.n_burn = 400;
  f.cfg.n_save = 300;
  const auto draws = run_chain_ast(f.Y.col(0), f.X, f.cfg, f.settings);
  const auto score = variable_relevance(draws, 4);
  CHECK(score[0] > score[1]);
  CHECK(score[0] > score[2]);
  CHECK(score[0] > score[3]);
  CHECK(score[0] > 1.0);  // at least one learner locks on
}
