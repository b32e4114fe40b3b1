#include "vast/predict.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "vast/learners.hpp"
#include "vast/rng.hpp"

namespace vast {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Cholesky that tolerates an exactly-zero covariance (deterministic skeleton).
Eigen::MatrixXd chol_or_zero(const Eigen::MatrixXd& S) {
  if (S.isZero(0.0)) return Eigen::MatrixXd::Zero(S.rows(), S.cols());
  Eigen::LLT<Eigen::MatrixXd> llt(S);
  if (llt.info() != Eigen::Success)
    throw numeric_error("predictive simulation: error covariance not positive definite");
  return llt.matrixL();
}

double sorted_quantile(std::vector<double>& v, double q) {
  std::sort(v.begin(), v.end());
  const double pos = q * (static_cast<double>(v.size()) - 1.0);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double w = pos - static_cast<double>(lo);
  return (1.0 - w) * v[lo] + w * v[hi];
}

}  // namespace

Eigen::MatrixXd learner_fit(const PosteriorDraw& draw, const Eigen::MatrixXd& X) {
  const int T = static_cast<int>(X.rows());
  const int M = draw.learners.empty() ? 0 : static_cast<int>(draw.learners[0].beta0.size());
  Eigen::MatrixXd fit = Eigen::MatrixXd::Zero(T, M);
  Eigen::VectorXd s(T);
  for (const auto& l : draw.learners) {
    if (l.delta < 0 || l.delta >= X.cols())
      throw data_error("learner_fit: delta outside covariate range");
    logistic_column(X.col(l.delta), l.nu, l.mu, s);
    fit.noalias() += s * l.beta0.transpose();
    fit.noalias() += (1.0 - s.array()).matrix() * l.beta1.transpose();
  }
  return fit;
}

Eigen::MatrixXd PredictiveDraws::quantile(double q) const {
  if (q < 0.0 || q > 1.0) throw config_error("PredictiveDraws::quantile: q outside [0,1]");
  Eigen::MatrixXd out(H, M);
  std::vector<double> v(paths.size());
  for (int h = 0; h < H; ++h)
    for (int m = 0; m < M; ++m) {
      for (std::size_t p = 0; p < paths.size(); ++p) v[p] = paths[p](h, m);
      out(h, m) = sorted_quantile(v, q);
    }
  return out;
}

void PredictiveDraws::finalize() {
  mean.setZero(H, M);
  variance.setZero(H, M);
  for (const auto& p : paths) mean += p;
  mean /= static_cast<double>(paths.size());
  for (const auto& p : paths) variance += (p - mean).cwiseAbs2();
  variance /= std::max<double>(1.0, static_cast<double>(paths.size()) - 1.0);
  median = quantile(0.5);
}

PredictiveDraws simulate_predictive(const std::vector<PosteriorDraw>& draws,
                                    const Eigen::MatrixXd& history, int P, int H,
                                    int n_paths_per_draw, std::uint64_t seed) {
  if (H < 1) throw config_error("simulate_predictive: H must be >= 1");
  if (n_paths_per_draw < 1) throw config_error("simulate_predictive: need >= 1 path per draw");
  if (draws.empty()) throw data_error("simulate_predictive: no posterior draws");
  const int M = static_cast<int>(history.cols());
  if (history.rows() < P) throw data_error("simulate_predictive: insufficient history");

  PredictiveDraws out;
  out.H = H;
  out.M = M;
  out.paths.reserve(draws.size() * static_cast<std::size_t>(n_paths_per_draw));

  Eigen::MatrixXd lagbuf(P, M);  // row 0 = most recent
  Eigen::RowVectorXd x(M * P);
  for (std::size_t d = 0; d < draws.size(); ++d) {
    const auto& draw = draws[d];
    const Eigen::MatrixXd L = chol_or_zero(draw.sigma);
    for (int p = 0; p < n_paths_per_draw; ++p) {
      Rng rng(Rng::derive(seed, d, static_cast<std::uint64_t>(p)));
      for (int i = 0; i < P; ++i) lagbuf.row(i) = history.row(history.rows() - 1 - i);
      Eigen::MatrixXd path(H, M);
      for (int h = 0; h < H; ++h) {
        for (int i = 0; i < P; ++i) x.segment(i * M, M) = lagbuf.row(i);
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(M);
        for (const auto& l : draw.learners) {
          const double s = logistic_transition(x[l.delta], l.nu, l.mu);
          mean += s * l.beta0 + (1.0 - s) * l.beta1;
        }
        const Eigen::VectorXd y_sim = mean + L * rng.normal_vector(M);
        path.row(h) = y_sim.transpose();
        for (int i = P - 1; i > 0; --i) lagbuf.row(i) = lagbuf.row(i - 1);
        lagbuf.row(0) = y_sim.transpose();
      }
      out.paths.push_back(std::move(path));
    }
  }
  out.finalize();
  return out;
}

double rmse(const std::vector<double>& actuals, const std::vector<double>& forecasts) {
  if (actuals.empty()) throw data_error("rmse: empty input");
  if (actuals.size() != forecasts.size()) throw data_error("rmse: length mismatch");
  double ss = 0.0;
  for (std::size_t t = 0; t < actuals.size(); ++t) {
    const double e = actuals[t] - forecasts[t];
    ss += e * e;
  }
  return std::sqrt(ss / static_cast<double>(actuals.size()));
}

double lpl_gaussian(const std::vector<double>& actuals, const std::vector<double>& centers,
                    const std::vector<double>& variances) {
  if (actuals.empty()) throw data_error("lpl_gaussian: empty input");
  if (actuals.size() != centers.size() || actuals.size() != variances.size())
    throw data_error("lpl_gaussian: length mismatch");
  double sum = 0.0;
  for (std::size_t t = 0; t < actuals.size(); ++t) {
    if (!(variances[t] > 0.0)) throw numeric_error("lpl_gaussian: nonpositive variance");
    const double e = actuals[t] - centers[t];
    sum += -0.5 * (kLog2Pi + std::log(variances[t])) - 0.5 * e * e / variances[t];
  }
  return sum / static_cast<double>(actuals.size());
}

double lpl_gaussian_joint(const Eigen::MatrixXd& actuals, const Eigen::MatrixXd& centers,
                          const std::vector<Eigen::MatrixXd>& covariances) {
  const auto n = actuals.rows();
  if (n == 0) throw data_error("lpl_gaussian_joint: empty input");
  if (centers.rows() != n || static_cast<Eigen::Index>(covariances.size()) != n)
    throw data_error("lpl_gaussian_joint: length mismatch");
  const auto M = actuals.cols();
  double sum = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    Eigen::LLT<Eigen::MatrixXd> llt(covariances[t]);
    if (llt.info() != Eigen::Success)
      throw numeric_error("lpl_gaussian_joint: covariance not positive definite");
    const double logdet = 2.0 * llt.matrixLLT().diagonal().array().log().sum();
    const Eigen::VectorXd e = (actuals.row(t) - centers.row(t)).transpose();
    const Eigen::VectorXd w = llt.matrixL().solve(e);
    sum += -0.5 * (M * kLog2Pi + logdet) - 0.5 * w.squaredNorm();
  }
  return sum / static_cast<double>(n);
}

const char* variant_name(Variant v) {
  switch (v) {
    case Variant::estimate_both: return "estimate-both";
    case Variant::fix_nu: return "fix-nu";
    case Variant::fix_mu: return "fix-mu";
    case Variant::fix_both: return "fix-both";
  }
  return "?";
}

Variant variant_from_name(const std::string& name) {
  for (Variant v : {Variant::estimate_both, Variant::fix_nu, Variant::fix_mu, Variant::fix_both})
    if (name == variant_name(v)) return v;
  throw config_error("unknown variant '" + name + "'");
}

void apply_variant(ModelConfig& cfg, Variant v) {
  switch (v) {
    case Variant::estimate_both:
      break;
    case Variant::fix_nu:
      cfg.fix_nu = 10.0;
      break;
    case Variant::fix_mu:
      cfg.fix_mu_to_mean = true;
      break;
    case Variant::fix_both:
      cfg.fix_nu = 10.0;
      cfg.fix_mu_to_mean = true;
      break;
  }
}

namespace {

FitMetrics evaluate_fit(const StudySpec& spec, int rep, Variant variant, int J) {
  DgpSpec ds = spec.dgp;
  ds.seed = Rng::derive(spec.seed, 101, static_cast<std::uint64_t>(rep));
  const DgpData data = simulate_dgp(ds);
  DgpDesign design = build_dgp_design(data, spec.y_lags, spec.x_lags);

  // First half trains, second half is predicted one step ahead with observed
  // covariates; the model is estimated once.
  const int max_lag = std::max(spec.y_lags, spec.x_lags);
  const int t0 = ds.T / 2;
  const int n_train = t0 - max_lag;
  const int n_test = static_cast<int>(design.y.size()) - n_train;
  if (n_train < 20 || n_test < 1) throw data_error("simulation study: split leaves too little data");

  Eigen::MatrixXd X_train = design.X.topRows(n_train);
  const Standardization st = standardize(X_train);
  Eigen::MatrixXd X_test = design.X.bottomRows(n_test);
  X_test.rowwise() -= st.mean.transpose();
  X_test.array().rowwise() /= st.sd.transpose().array();

  const double y_mean = design.y.head(n_train).mean();
  const Eigen::VectorXd y_train = design.y.head(n_train).array() - y_mean;
  const Eigen::VectorXd y_test = design.y.tail(n_test).array() - y_mean;

  ModelConfig cfg;
  cfg.J = J;
  cfg.P = 1;
  cfg.M = 1;
  cfg.n_burn = spec.n_burn;
  cfg.n_save = spec.n_save;
  cfg.thin = spec.thin;
  apply_variant(cfg, variant);

  ChainSettings settings;
  settings.seed = Rng::derive(spec.seed, 202, static_cast<std::uint64_t>(rep),
                              (static_cast<std::uint64_t>(variant) << 16) ^
                                  static_cast<std::uint64_t>(J));
  ChainDiagnostics diag;
  const auto draws = run_chain_ast(y_train, X_train, cfg, settings, &diag);

  // predictive draws: one noise path per posterior draw
  const int n_draws = static_cast<int>(draws.size());
  Eigen::MatrixXd pred(n_test, n_draws);
  Rng noise(Rng::derive(settings.seed, 303));
  Eigen::VectorXd s(n_test);
  for (int d = 0; d < n_draws; ++d) {
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(n_test);
    for (const auto& l : draws[d].learners) {
      logistic_column(X_test.col(l.delta), l.nu, l.mu, s);
      mean.array() += s.array() * l.beta0[0] + (1.0 - s.array()) * l.beta1[0];
    }
    const double sd = std::sqrt(draws[d].sigma(0, 0));
    for (int t = 0; t < n_test; ++t) pred(t, d) = mean[t] + sd * noise.normal();
  }

  std::vector<double> actual(n_test), med(n_test), var(n_test);
  std::vector<double> row(n_draws);
  for (int t = 0; t < n_test; ++t) {
    for (int d = 0; d < n_draws; ++d) row[d] = pred(t, d);
    const double m = pred.row(t).mean();
    var[t] = (pred.row(t).array() - m).square().sum() / std::max(1, n_draws - 1);
    med[t] = sorted_quantile(row, 0.5);
    actual[t] = y_test[t];
  }

  FitMetrics fm;
  fm.rmse = rmse(actual, med);
  fm.lpl = lpl_gaussian(actual, med, var);
  fm.relevance = variable_relevance(draws, static_cast<int>(design.X.cols()));
  fm.accept_rates = diag.accept_rate_postfreeze;
  return fm;
}

}  // namespace

int StudyResult::baseline_index() const {
  for (std::size_t v = 0; v < spec.variants.size(); ++v)
    if (spec.variants[v] == spec.baseline) return static_cast<int>(v);
  throw config_error("StudyResult: baseline variant not in the variant set");
}

double StudyResult::mean_rmse(int v, int ji) const {
  double s = 0.0;
  for (const auto& f : fits[v][ji]) s += f.rmse;
  return s / static_cast<double>(fits[v][ji].size());
}

double StudyResult::mean_lpl(int v, int ji) const {
  double s = 0.0;
  for (const auto& f : fits[v][ji]) s += f.lpl;
  return s / static_cast<double>(fits[v][ji].size());
}

double StudyResult::mean_rmse_ratio(int v, int ji) const {
  const int b = baseline_index();
  double s = 0.0;
  for (std::size_t r = 0; r < fits[v][ji].size(); ++r) s += fits[v][ji][r].rmse / fits[b][ji][r].rmse;
  return s / static_cast<double>(fits[v][ji].size());
}

double StudyResult::mean_lpl_diff(int v, int ji) const {
  const int b = baseline_index();
  double s = 0.0;
  for (std::size_t r = 0; r < fits[v][ji].size(); ++r) s += fits[v][ji][r].lpl - fits[b][ji][r].lpl;
  return s / static_cast<double>(fits[v][ji].size());
}

std::string StudyResult::table_delimited() const {
  std::ostringstream os;
  os << "metric\tvariant";
  for (int J : spec.J_grid) os << "\tJ=" << J;
  os << "\n";
  for (std::size_t v = 0; v < spec.variants.size(); ++v) {
    os << "rmse_ratio\t" << variant_name(spec.variants[v]);
    for (std::size_t ji = 0; ji < spec.J_grid.size(); ++ji)
      os << "\t" << mean_rmse_ratio(static_cast<int>(v), static_cast<int>(ji));
    os << "\n";
  }
  for (std::size_t v = 0; v < spec.variants.size(); ++v) {
    os << "lpl_diff\t" << variant_name(spec.variants[v]);
    for (std::size_t ji = 0; ji < spec.J_grid.size(); ++ji)
      os << "\t" << mean_lpl_diff(static_cast<int>(v), static_cast<int>(ji));
    os << "\n";
  }
  for (std::size_t v = 0; v < spec.variants.size(); ++v) {
    os << "rmse\t" << variant_name(spec.variants[v]);
    for (std::size_t ji = 0; ji < spec.J_grid.size(); ++ji)
      os << "\t" << mean_rmse(static_cast<int>(v), static_cast<int>(ji));
    os << "\n";
  }
  for (std::size_t v = 0; v < spec.variants.size(); ++v) {
    os << "lpl\t" << variant_name(spec.variants[v]);
    for (std::size_t ji = 0; ji < spec.J_grid.size(); ++ji)
      os << "\t" << mean_lpl(static_cast<int>(v), static_cast<int>(ji));
    os << "\n";
  }
  return os.str();
}

StudyResult run_simulation_study(const StudySpec& spec) {
  if (spec.n_reps < 1) throw config_error("run_simulation_study: n_reps must be >= 1");
  if (spec.J_grid.empty() || spec.variants.empty())
    throw config_error("run_simulation_study: empty grid");
  StudyResult res;
  res.spec = spec;
  for (int rep = 0; rep < spec.n_reps; ++rep)
    res.rep_seeds.push_back(Rng::derive(spec.seed, 101, static_cast<std::uint64_t>(rep)));
  {
    DgpSpec ds = spec.dgp;
    ds.seed = res.rep_seeds[0];
    res.covariate_labels = build_dgp_design(simulate_dgp(ds), spec.y_lags, spec.x_lags).labels;
  }
  const int nv = static_cast<int>(spec.variants.size());
  const int nj = static_cast<int>(spec.J_grid.size());
  res.fits.assign(nv, std::vector<std::vector<FitMetrics>>(
                          nj, std::vector<FitMetrics>(spec.n_reps)));

  struct Task {
    int v, ji, rep;
  };
  std::vector<Task> tasks;
  for (int v = 0; v < nv; ++v)
    for (int ji = 0; ji < nj; ++ji)
      for (int rep = 0; rep < spec.n_reps; ++rep) tasks.push_back({v, ji, rep});

  const int n_threads = std::max(1, spec.n_threads);
  if (n_threads == 1) {
    for (const auto& t : tasks)
      res.fits[t.v][t.ji][t.rep] =
          evaluate_fit(spec, t.rep, spec.variants[t.v], spec.J_grid[t.ji]);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= tasks.size()) return;
        const auto& t = tasks[i];
        res.fits[t.v][t.ji][t.rep] =
            evaluate_fit(spec, t.rep, spec.variants[t.v], spec.J_grid[t.ji]);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return res;
}

RecursiveEvalResult recursive_eval_vast(const Eigen::MatrixXd& Ystd,
                                        const std::vector<std::string>& dates,
                                        const RecursiveEvalSpec& spec) {
  const int T = static_cast<int>(Ystd.rows());
  const int M = static_cast<int>(Ystd.cols());
  if (spec.start_row <= spec.cfg.P + 2 || spec.start_row >= T)
    throw config_error("recursive_eval_vast: start row leaves no usable split");
  const int last = spec.max_steps > 0 ? std::min(T, spec.start_row + spec.max_steps) : T;
  const int steps = last - spec.start_row;
  if (steps < 1) throw config_error("recursive_eval_vast: split exhausts the data");

  RecursiveEvalResult out;
  out.marginal_lpl.resize(steps, M);
  out.joint_lpl.resize(steps);
  for (int s = 0; s < steps; ++s) {
    const int target = spec.start_row + s;
    ModelConfig cfg = spec.cfg;
    cfg.M = M;
    ChainSettings settings = spec.settings;
    settings.seed = Rng::derive(spec.settings.seed, 404, static_cast<std::uint64_t>(s));
    const auto draws = run_chain_vast(Ystd.topRows(target), cfg, settings);
    const auto pd = simulate_predictive(draws, Ystd.topRows(target), cfg.P, 1, 1,
                                        Rng::derive(settings.seed, 505));
    // Gaussian plug-in: predictive median vector, cross-draw covariance
    Eigen::MatrixXd draws_at_h(pd.paths.size(), M);
    for (std::size_t p = 0; p < pd.paths.size(); ++p) draws_at_h.row(p) = pd.paths[p].row(0);
    const Eigen::RowVectorXd mean = draws_at_h.colwise().mean();
    Eigen::MatrixXd centered = draws_at_h.rowwise() - mean;
    Eigen::MatrixXd cov = centered.transpose() * centered /
                          std::max<double>(1.0, static_cast<double>(draws_at_h.rows()) - 1.0);
    const Eigen::VectorXd med = pd.median.row(0).transpose();
    const Eigen::VectorXd actual = Ystd.row(target).transpose();
    for (int m = 0; m < M; ++m) {
      const double v = cov(m, m);
      if (!(v > 0.0)) throw numeric_error("recursive_eval_vast: degenerate predictive variance");
      const double e = actual[m] - med[m];
      out.marginal_lpl(s, m) = -0.5 * (kLog2Pi + std::log(v)) - 0.5 * e * e / v;
    }
    Eigen::MatrixXd a(1, M), c(1, M);
    a.row(0) = actual.transpose();
    c.row(0) = med.transpose();
    out.joint_lpl[s] = lpl_gaussian_joint(a, c, {cov});
    out.dates.push_back(dates.empty() ? std::to_string(target) : dates[target]);
  }
  out.avg_marginal_lpl = out.marginal_lpl.colwise().mean();
  out.avg_joint_lpl = 0.0;
  for (double v : out.joint_lpl) out.avg_joint_lpl += v;
  out.avg_joint_lpl /= static_cast<double>(steps);
  return out;
}

std::string RecursiveEvalResult::table_delimited(const std::vector<std::string>& names) const {
  std::ostringstream os;
  os << "date";
  for (const auto& n : names) os << "\tlpl_" << n;
  os << "\tlpl_joint\n";
  for (std::size_t s = 0; s < joint_lpl.size(); ++s) {
    os << dates[s];
    for (Eigen::Index m = 0; m < marginal_lpl.cols(); ++m) os << "\t" << marginal_lpl(s, m);
    os << "\t" << joint_lpl[s] << "\n";
  }
  os << "average";
  for (Eigen::Index m = 0; m < marginal_lpl.cols(); ++m) os << "\t" << avg_marginal_lpl[m];
  os << "\t" << avg_joint_lpl << "\n";
  return os.str();
}

}  // namespace vast
