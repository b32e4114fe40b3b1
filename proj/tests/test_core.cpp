#include "doctest.h"

#include <cstdio>
#include <filesystem>

#include "vast/draw_io.hpp"
#include "vast/rng.hpp"
#include "vast/types.hpp"

using namespace vast;

namespace {

std::string temp_path(const char* stem) {
  return (std::filesystem::temp_directory_path() / stem).string();
}

PosteriorDraw random_draw(int J, int M, int K, Rng& rng) {
  PosteriorDraw d;
  d.learners.resize(J);
  for (auto& l : d.learners) {
    l.nu = 0.1 + rng.uniform() * 5.0;
    l.mu = rng.normal();
    l.delta = static_cast<int>(rng.uniform() * K);
    l.beta0 = rng.normal_vector(M);
    l.beta1 = rng.normal_vector(M);
  }
  Eigen::MatrixXd A = rng.normal_matrix(M, M);
  d.sigma = A * A.transpose() + Eigen::MatrixXd::Identity(M, M);
  d.loglik = rng.normal();
  return d;
}

}  // namespace

TEST_CASE("parameter count formulas") {
  ModelConfig cfg;
  cfg.J = 1;
  cfg.M = 1;
  cfg.P = 1;
  CHECK(parameter_count(cfg).vast == 6);

  cfg.J = 50;
  cfg.M = 80;
  cfg.P = 5;
  const auto pc = parameter_count(cfg);
  CHECK(pc.vast == 11390);
  CHECK(pc.linear_var == 35240);
}

TEST_CASE("parameter count is strictly increasing in J and M") {
  ModelConfig cfg;
  cfg.P = 2;
  long long prev = 0;
  for (int J = 1; J <= 20; ++J) {
    cfg.J = J;
    cfg.M = 3;
    const auto pc = parameter_count(cfg);
    CHECK(pc.vast > prev);
    prev = pc.vast;
  }
  prev = 0;
  for (int M = 1; M <= 20; ++M) {
    cfg.J = 5;
    cfg.M = M;
    const auto pc = parameter_count(cfg);
    CHECK(pc.vast > prev);
    prev = pc.vast;
  }
}

TEST_CASE("config invariants are enforced") {
  ModelConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  ModelConfig bad = cfg;
  bad.J = 0;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = cfg;
  bad.phi = 0.0;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = cfg;
  bad.a_sigma = -1.0;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = cfg;
  bad.n_burn = 0;
  CHECK_THROWS_AS(bad.validate(), config_error);
  bad = cfg;
  bad.fix_nu = -2.0;
  CHECK_THROWS_AS(bad.validate(), config_error);
}

TEST_CASE("panel metadata validation") {
  TimeSeriesPanel p;
  p.values = Eigen::MatrixXd::Ones(4, 2);
  p.names = {"a", "b"};
  p.tcodes = {1, 5};
  p.classes = {"slow", "fast"};
  CHECK_NOTHROW(p.validate());
  p.tcodes = {1, 9};
  CHECK_THROWS_AS(p.validate(), data_error);
  p.tcodes = {1, 5};
  p.classes = {"slow", "rapid"};
  CHECK_THROWS_AS(p.validate(), data_error);
  p.classes = {"slow", "fast"};
  p.values(2, 1) = std::nan("");
  CHECK_THROWS_AS(p.validate(), data_error);
}

TEST_CASE("posterior draws round-trip losslessly through the binary container") {
  Rng rng(1234);
  std::vector<PosteriorDraw> draws;
  const int J = 3, M = 2, K = 7;
  for (int d = 0; d < 5; ++d) draws.push_back(random_draw(J, M, K, rng));
  const auto path = temp_path("vast_draws_roundtrip.bin");
  save_draws(path, draws, K);
  const auto loaded = load_draws(path);
  CHECK(loaded.J == J);
  CHECK(loaded.M == M);
  CHECK(loaded.K == K);
  REQUIRE(loaded.draws.size() == draws.size());
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto& a = draws[d];
    const auto& b = loaded.draws[d];
    CHECK(a.loglik == b.loglik);
    for (int j = 0; j < J; ++j) {
      CHECK(a.learners[j].nu == b.learners[j].nu);
      CHECK(a.learners[j].mu == b.learners[j].mu);
      CHECK(a.learners[j].delta == b.learners[j].delta);
      CHECK((a.learners[j].beta0 - b.learners[j].beta0).cwiseAbs().maxCoeff() == 0.0);
      CHECK((a.learners[j].beta1 - b.learners[j].beta1).cwiseAbs().maxCoeff() == 0.0);
    }
    CHECK((a.sigma - b.sigma).cwiseAbs().maxCoeff() == 0.0);
  }
  std::remove(path.c_str());
}

TEST_CASE("draw file rejects garbage") {
  const auto path = temp_path("vast_draws_garbage.bin");
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("NOTAVASTFILE", f);
    std::fclose(f);
  }
  CHECK_THROWS_AS(load_draws(path), data_error);
  CHECK_THROWS_AS(load_draws("/nonexistent/path/draws.bin"), data_error);
  std::remove(path.c_str());
}

TEST_CASE("coefficient matrix stacks learner pairs") {
  Rng rng(5);
  const auto d = random_draw(2, 3, 4, rng);
  const auto B = coefficient_matrix(d);
  CHECK(B.rows() == 4);
  CHECK(B.cols() == 3);
  CHECK((B.row(0).transpose() - d.learners[0].beta0).norm() == 0.0);
  CHECK((B.row(3).transpose() - d.learners[1].beta1).norm() == 0.0);
}
