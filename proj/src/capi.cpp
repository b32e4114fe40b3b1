#include "vast/vast.h"

#include <cstring>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>

#include "vast/data.hpp"
#include "vast/draw_io.hpp"
#include "vast/predict.hpp"
#include "vast/sampler.hpp"
#include "vast/structural.hpp"
#include "vast/types.hpp"
#include "vast/version.hpp"

namespace {

thread_local std::string g_last_error;

int set_error(int code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <typename Fn>
int guarded(Fn&& fn) {
  try {
    fn();
    return VAST_OK;
  } catch (const vast::config_error& e) {
    return set_error(VAST_ERR_CONFIG, e.what());
  } catch (const vast::data_error& e) {
    return set_error(VAST_ERR_DATA, e.what());
  } catch (const vast::numeric_error& e) {
    return set_error(VAST_ERR_NUMERIC, e.what());
  } catch (const std::exception& e) {
    return set_error(VAST_ERR_NUMERIC, e.what());
  } catch (...) {
    return set_error(VAST_ERR_NUMERIC, "unknown error");
  }
}

}  // namespace

struct vast_config {
  vast::ModelConfig model;
  vast::ChainSettings chain;
  int threads = 1;
  int y_lags = 1;
  int x_lags = 4;
};

struct vast_panel {
  vast::TimeSeriesPanel panel;
};

struct vast_draws {
  vast::DrawFile file;
};

namespace {

struct Prepared {
  Eigen::MatrixXd Ystd;  // transformed + standardized
  vast::Standardization st;
  std::vector<std::string> dates;
};

Prepared prepare_panel(const vast::TimeSeriesPanel& panel) {
  Prepared p;
  auto tp = vast::transform_panel(panel);
  p.Ystd = std::move(tp.values);
  p.st = vast::standardize(p.Ystd);
  p.dates = std::move(tp.dates);
  return p;
}

int parse_int(const std::string& v, const char* key) {
  try {
    return std::stoi(v);
  } catch (const std::exception&) {
    throw vast::config_error(std::string("config: non-integer value for ") + key);
  }
}

double parse_double(const std::string& v, const char* key) {
  try {
    return std::stod(v);
  } catch (const std::exception&) {
    throw vast::config_error(std::string("config: non-numeric value for ") + key);
  }
}

}  // namespace

extern "C" {

const char* vast_version(void) { return vast::kVersion; }

const char* vast_last_error(void) { return g_last_error.c_str(); }

vast_config* vast_config_new(void) { return new vast_config(); }

void vast_config_free(vast_config* cfg) { delete cfg; }

int vast_config_set(vast_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    if (!cfg || !key || !value) throw vast::config_error("config: null argument");
    const std::string k = key, v = value;
    auto& m = cfg->model;
    if (k == "J") m.J = parse_int(v, key);
    else if (k == "P") m.P = parse_int(v, key);
    else if (k == "phi") m.phi = parse_double(v, key);
    else if (k == "a_sigma") m.a_sigma = parse_double(v, key);
    else if (k == "b_sigma") m.b_sigma = parse_double(v, key);
    else if (k == "a_nu") m.a_nu = parse_double(v, key);
    else if (k == "b_nu") m.b_nu = parse_double(v, key);
    else if (k == "sigma2_mu") m.sigma2_mu = parse_double(v, key);
    else if (k == "a_Sigma") m.a_Sigma = parse_double(v, key);
    else if (k == "S_Sigma_scale") m.S_Sigma_scale = parse_double(v, key);
    else if (k == "n_burn") m.n_burn = parse_int(v, key);
    else if (k == "n_save") m.n_save = parse_int(v, key);
    else if (k == "thin") m.thin = parse_int(v, key);
    else if (k == "fix_nu") {
      if (v == "none" || v.empty()) m.fix_nu.reset();
      else m.fix_nu = parse_double(v, key);
    } else if (k == "fix_mu_to_mean") m.fix_mu_to_mean = parse_int(v, key) != 0;
    else if (k == "seed") cfg->chain.seed = static_cast<std::uint64_t>(std::stoull(v));
    else if (k == "adapt_window") cfg->chain.adapt_window = parse_int(v, key);
    else if (k == "proposal_scale") cfg->chain.initial_proposal_scale = parse_double(v, key);
    else if (k == "threads") cfg->threads = parse_int(v, key);
    else if (k == "y_lags") cfg->y_lags = parse_int(v, key);
    else if (k == "x_lags") cfg->x_lags = parse_int(v, key);
    else throw vast::config_error("config: unknown key '" + k + "'");
  });
}

int vast_config_get(const vast_config* cfg, const char* key, char* buf, int buflen) {
  return guarded([&] {
    if (!cfg || !key || !buf || buflen <= 0) throw vast::config_error("config: null argument");
    const std::string k = key;
    std::ostringstream os;
    const auto& m = cfg->model;
    if (k == "J") os << m.J;
    else if (k == "P") os << m.P;
    else if (k == "phi") os << m.phi;
    else if (k == "a_sigma") os << m.a_sigma;
    else if (k == "b_sigma") os << m.b_sigma;
    else if (k == "a_nu") os << m.a_nu;
    else if (k == "b_nu") os << m.b_nu;
    else if (k == "sigma2_mu") os << m.sigma2_mu;
    else if (k == "a_Sigma") os << m.a_Sigma;
    else if (k == "S_Sigma_scale") os << m.S_Sigma_scale;
    else if (k == "n_burn") os << m.n_burn;
    else if (k == "n_save") os << m.n_save;
    else if (k == "thin") os << m.thin;
    else if (k == "fix_nu") { if (m.fix_nu) os << *m.fix_nu; else os << "none"; }
    else if (k == "fix_mu_to_mean") os << (m.fix_mu_to_mean ? 1 : 0);
    else if (k == "seed") os << cfg->chain.seed;
    else if (k == "adapt_window") os << cfg->chain.adapt_window;
    else if (k == "proposal_scale") os << cfg->chain.initial_proposal_scale;
    else if (k == "threads") os << cfg->threads;
    else if (k == "y_lags") os << cfg->y_lags;
    else if (k == "x_lags") os << cfg->x_lags;
    else throw vast::config_error("config: unknown key '" + k + "'");
    const std::string s = os.str();
    if (static_cast<int>(s.size()) + 1 > buflen)
      throw vast::config_error("config: buffer too small");
    std::memcpy(buf, s.c_str(), s.size() + 1);
  });
}

int vast_panel_load_csv(const char* data_csv, const char* meta_csv, vast_panel** out) {
  return guarded([&] {
    if (!data_csv || !meta_csv || !out) throw vast::data_error("panel: null argument");
    auto* p = new vast_panel{vast::load_panel_csv(data_csv, meta_csv)};
    *out = p;
  });
}

int vast_panel_from_arrays(const double* values, int T, int M, const char* const* names,
                           const int* tcodes, const char* const* classes, vast_panel** out) {
  return guarded([&] {
    if (!values || !names || !tcodes || !classes || !out || T < 1 || M < 1)
      throw vast::data_error("panel: invalid arguments");
    vast::TimeSeriesPanel panel;
    panel.values.resize(T, M);
    for (int t = 0; t < T; ++t)
      for (int m = 0; m < M; ++m) panel.values(t, m) = values[t * M + m];
    for (int m = 0; m < M; ++m) {
      panel.names.emplace_back(names[m]);
      panel.tcodes.push_back(tcodes[m]);
      panel.classes.emplace_back(classes[m]);
    }
    panel.validate();
    *out = new vast_panel{std::move(panel)};
  });
}

void vast_panel_free(vast_panel* panel) { delete panel; }

int vast_panel_dims(const vast_panel* panel, int* T, int* M) {
  return guarded([&] {
    if (!panel) throw vast::data_error("panel: null handle");
    if (T) *T = panel->panel.T();
    if (M) *M = panel->panel.M();
  });
}

int vast_dump_dgp(unsigned long long seed, const char* out_csv) {
  return guarded([&] {
    if (!out_csv) throw vast::data_error("dump_dgp: null path");
    vast::DgpSpec spec;
    spec.seed = seed;
    const auto d = vast::simulate_dgp(spec);
    Eigen::MatrixXd all(spec.T, 1 + spec.K);
    all.col(0) = d.y;
    all.rightCols(spec.K) = d.x;
    std::vector<std::string> names{"y"};
    for (int k = 1; k <= spec.K; ++k) names.push_back("x" + std::to_string(k));
    vast::write_matrix_csv(out_csv, all, names, {});
  });
}

int vast_fit(const vast_panel* panel, const vast_config* cfg, const char* draws_path,
             const char* diagnostics_path, vast_draws** out) {
  return guarded([&] {
    if (!panel || !cfg || !draws_path) throw vast::config_error("fit: null argument");
    cfg->model.validate();
    const Prepared p = prepare_panel(panel->panel);
    const int M = static_cast<int>(p.Ystd.cols());
    if (p.Ystd.rows() <= cfg->model.P + 2)
      throw vast::data_error("fit: too few observations for the lag order");
    vast::ModelConfig model = cfg->model;
    model.M = M;
    vast::ChainDiagnostics diag;
    std::vector<vast::PosteriorDraw> draws;
    int K;
    if (M > 1) {
      draws = vast::run_chain_vast(p.Ystd, model, cfg->chain, &diag);
      K = M * model.P;
    } else {
      auto [X, y] = vast::build_lag_matrix(p.Ystd, model.P);
      draws = vast::run_chain_ast(y.col(0), X, model, cfg->chain, &diag);
      K = static_cast<int>(X.cols());
    }
    vast::save_draws(draws_path, draws, K);
    if (diagnostics_path) vast::write_chain_diagnostics(diagnostics_path, diag);
    if (out) {
      auto* h = new vast_draws();
      h->file.draws = std::move(draws);
      h->file.J = model.J;
      h->file.M = M;
      h->file.K = K;
      *out = h;
    }
  });
}

int vast_draws_load(const char* path, vast_draws** out) {
  return guarded([&] {
    if (!path || !out) throw vast::data_error("draws: null argument");
    auto* h = new vast_draws{vast::load_draws(path)};
    *out = h;
  });
}

int vast_draws_save(const vast_draws* draws, const char* path) {
  return guarded([&] {
    if (!draws || !path) throw vast::data_error("draws: null argument");
    vast::save_draws(path, draws->file.draws, draws->file.K);
  });
}

void vast_draws_free(vast_draws* draws) { delete draws; }

int vast_draws_info(const vast_draws* draws, int* J, int* M, int* K, int* n_save) {
  return guarded([&] {
    if (!draws) throw vast::data_error("draws: null handle");
    if (J) *J = draws->file.J;
    if (M) *M = draws->file.M;
    if (K) *K = draws->file.K;
    if (n_save) *n_save = static_cast<int>(draws->file.draws.size());
  });
}

int vast_forecast(const vast_draws* draws, const vast_panel* panel, const vast_config* cfg,
                  int horizon, int paths_per_draw, const char* out_path) {
  return guarded([&] {
    if (!draws || !panel || !cfg || !out_path) throw vast::config_error("forecast: null argument");
    if (horizon < 1) throw vast::config_error("forecast: horizon must be >= 1");
    const Prepared p = prepare_panel(panel->panel);
    const int M = static_cast<int>(p.Ystd.cols());
    if (draws->file.M != M)
      throw vast::data_error("forecast: draw file fitted on a different variable count");
    if (draws->file.K % M != 0)
      throw vast::data_error("forecast: draw file covariates incompatible with lag recursion");
    const int P = draws->file.K / M;
    if (p.Ystd.rows() < P) throw vast::data_error("forecast: insufficient history");
    const auto pd = vast::simulate_predictive(draws->file.draws, p.Ystd, P, horizon,
                                              std::max(1, paths_per_draw), cfg->chain.seed);
    const double levels[] = {0.05, 0.16, 0.5, 0.84, 0.95};
    std::vector<Eigen::MatrixXd> qs;
    for (double q : levels) qs.push_back(pd.quantile(q));
    std::ofstream f(out_path);
    if (!f) throw vast::data_error("cannot open forecast output: " + std::string(out_path));
    f << "variable\thorizon\tmean\tq05\tq16\tq50\tq84\tq95\n";
    f.precision(10);
    for (int m = 0; m < M; ++m)
      for (int h = 0; h < horizon; ++h) {
        const double mu = p.st.mean[m], sd = p.st.sd[m];
        f << panel->panel.names[m] << "\t" << (h + 1) << "\t" << mu + sd * pd.mean(h, m);
        for (const auto& q : qs) f << "\t" << mu + sd * q(h, m);
        f << "\n";
      }
  });
}

int vast_recursive_eval(const vast_panel* panel, const vast_config* cfg, const char* start_date,
                        int max_steps, const char* out_path) {
  return guarded([&] {
    if (!panel || !cfg || !start_date || !out_path)
      throw vast::config_error("recursive_eval: null argument");
    const Prepared p = prepare_panel(panel->panel);
    int start_row = -1;
    for (std::size_t i = 0; i < p.dates.size(); ++i)
      if (p.dates[i] == start_date) {
        start_row = static_cast<int>(i);
        break;
      }
    if (start_row < 0)
      throw vast::config_error("recursive_eval: start date '" + std::string(start_date) +
                               "' not found in the sample");
    vast::RecursiveEvalSpec spec;
    spec.cfg = cfg->model;
    spec.cfg.M = static_cast<int>(p.Ystd.cols());
    spec.settings = cfg->chain;
    spec.start_row = start_row;
    spec.max_steps = max_steps;
    const auto res = vast::recursive_eval_vast(p.Ystd, p.dates, spec);
    std::ofstream f(out_path);
    if (!f) throw vast::data_error("cannot open output: " + std::string(out_path));
    f << res.table_delimited(panel->panel.names);
  });
}

int vast_girf(const vast_draws* draws, const vast_panel* panel, const vast_config* cfg,
              const char* shock_name, double w, int horizon, int n_shock_draws,
              int state_subsample, const char* out_path) {
  return guarded([&] {
    if (!draws || !panel || !cfg || !shock_name || !out_path)
      throw vast::config_error("girf: null argument");
    const Prepared p = prepare_panel(panel->panel);
    const int M = static_cast<int>(p.Ystd.cols());
    if (M < 2) throw vast::config_error("girf: needs a multivariate fit");
    if (draws->file.M != M)
      throw vast::data_error("girf: draw file fitted on a different variable count");
    int shock_index = -1;
    for (int m = 0; m < M; ++m)
      if (panel->panel.names[m] == shock_name) shock_index = m;
    if (shock_index < 0)
      throw vast::config_error("girf: shock variable '" + std::string(shock_name) +
                               "' not found");
    const auto ord = vast::make_recursive_ordering(panel->panel.classes, shock_index);
    vast::GirfSpec spec;
    spec.shock_index = shock_index;
    spec.w = w;
    spec.H = horizon;
    spec.n_shock_draws = n_shock_draws;
    spec.state_subsample = state_subsample;
    const int P = draws->file.K / M;
    auto res = vast::girf(draws->file.draws, p.Ystd, P, spec, ord, cfg->chain.seed,
                          cfg->threads);
    // report in the units of the transformed series
    for (auto& g : res.per_draw)
      g.array().rowwise() *= p.st.sd.transpose().array();
    vast::write_girf_quantiles(out_path, res, panel->panel.names);
  });
}

int vast_simulation_study(const vast_config* cfg, int n_reps, const char* j_grid_csv,
                          const char* baseline_variant, const char* out_path) {
  return guarded([&] {
    if (!cfg || !j_grid_csv || !baseline_variant || !out_path)
      throw vast::config_error("simulation_study: null argument");
    vast::StudySpec spec;
    spec.n_reps = n_reps;
    spec.J_grid.clear();
    std::stringstream ss(j_grid_csv);
    std::string tok;
    while (std::getline(ss, tok, ','))
      if (!tok.empty()) spec.J_grid.push_back(parse_int(tok, "J grid"));
    if (spec.J_grid.empty()) throw vast::config_error("simulation_study: empty J grid");
    spec.baseline = vast::variant_from_name(baseline_variant);
    spec.n_burn = cfg->model.n_burn;
    spec.n_save = cfg->model.n_save;
    spec.thin = cfg->model.thin;
    spec.seed = cfg->chain.seed;
    spec.y_lags = cfg->y_lags;
    spec.x_lags = cfg->x_lags;
    spec.n_threads = cfg->threads;
    const auto res = vast::run_simulation_study(spec);
    std::ofstream f(out_path);
    if (!f) throw vast::data_error("cannot open output: " + std::string(out_path));
    f << res.table_delimited();
  });
}

int vast_parameter_count(int J, int M, int P, long long* model_count,
                         long long* linear_var_count) {
  return guarded([&] {
    vast::ModelConfig cfg;
    cfg.J = J;
    cfg.M = M;
    cfg.P = P;
    const auto pc = vast::parameter_count(cfg);
    if (model_count) *model_count = pc.vast;
    if (linear_var_count) *linear_var_count = pc.linear_var;
  });
}

}  // extern "C"
