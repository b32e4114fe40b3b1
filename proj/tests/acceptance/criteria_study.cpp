// Criteria 5-7: the desk-scale Monte Carlo study. One shared run of the
// four-variant grid backs all three criteria.

#include "acceptance.hpp"

#include <iostream>
#include <map>

#include "vast/data.hpp"
#include "vast/predict.hpp"

namespace acceptance {

using namespace vast;

namespace {

const StudyResult& shared_study() {
  static const StudyResult res = [] {
    StudySpec spec;  // 10 reps, J in {1,5,10,15}, all four variants
    // burn long enough for the proposal-scale adaptation (x1.1 per window of
    // 50) to reach the acceptance band even for learners whose conditional is
    // prior-dominated; they need scales of order the prior spread
    spec.n_burn = 5000;
    spec.n_save = 1500;
    spec.seed = 20240501;
    std::cerr << "  (fitting " << spec.n_reps * spec.variants.size() * spec.J_grid.size()
              << " chains; this is the long criterion)\n";
    return run_simulation_study(spec);
  }();
  return res;
}

int j_index(const StudyResult& r, int J) {
  for (std::size_t i = 0; i < r.spec.J_grid.size(); ++i)
    if (r.spec.J_grid[i] == J) return static_cast<int>(i);
  throw config_error("J not in study grid");
}

int v_index(const StudyResult& r, Variant v) {
  for (std::size_t i = 0; i < r.spec.variants.size(); ++i)
    if (r.spec.variants[i] == v) return static_cast<int>(i);
  throw config_error("variant not in study set");
}

}  // namespace

bool criterion_5(Check& c) {
  const auto& res = shared_study();
  c.note("metric table:\n" + res.table_delimited());
  const int vb = v_index(res, Variant::estimate_both);
  const int vf = v_index(res, Variant::fix_both);
  const int j1 = j_index(res, 1), j10 = j_index(res, 10);

  // (a) the descending arm of the U shape: J=10 beats J=1 for the flexible fit
  c.require_lt(res.mean_rmse(vb, j10), res.mean_rmse(vb, j1),
               "(a) RMSE of estimate-both at J=10 vs J=1");
  // (b) pinning both transition parameters costs more than 1.5x at J=10
  c.require(res.mean_rmse_ratio(vf, j10) > 1.5,
            "(b) fix-both RMSE ratio at J=10 exceeds 1.5 (got " +
                std::to_string(res.mean_rmse_ratio(vf, j10)) + ")");
  // (c) the flexible variant wins on density score at every J
  for (std::size_t ji = 0; ji < res.spec.J_grid.size(); ++ji)
    c.require_lt(res.mean_lpl(vf, static_cast<int>(ji)), res.mean_lpl(vb, static_cast<int>(ji)),
                 "(c) LPL fix-both < estimate-both at J=" +
                     std::to_string(res.spec.J_grid[ji]));
  return c.ok;
}

bool criterion_6(Check& c) {
  const auto& res = shared_study();
  const int vb = v_index(res, Variant::estimate_both);
  const int j15 = j_index(res, 15);
  const auto& fit = res.fits[vb][j15][0];

  // regenerate the realization the scores came from
  DgpSpec ds = res.spec.dgp;
  ds.seed = res.rep_seeds[0];
  const auto truth = simulate_dgp(ds);

  // per-column scores; the own lag must be the single largest column
  int argmax = 0;
  for (int i = 1; i < fit.relevance.size(); ++i)
    if (fit.relevance[i] > fit.relevance[argmax]) argmax = i;
  c.require(res.covariate_labels[argmax] == "y.l1",
            "own lag y.l1 has the single largest relevance score (top: " +
                res.covariate_labels[argmax] + ", " + std::to_string(fit.relevance[argmax]) +
                ")");

  // column-level comparison: a covariate with |beta_true| > 4 is its variable's
  // first lag (the lag that carries the effect; the regressors are serially
  // independent); a zero-coefficient covariate is any column with no true
  // effect at any lag
  double max_zero = -1.0, min_strong = 1e300;
  std::string max_zero_name, min_strong_name;
  for (int col = 0; col < fit.relevance.size(); ++col) {
    const auto& label = res.covariate_labels[col];
    if (label[0] != 'x') continue;
    const int var = std::stoi(label.substr(1, label.find('.') - 1)) - 1;
    const bool lag1 = label.substr(label.find('.')) == ".l1";
    const bool zero_var = truth.beta_true[var] == 0.0 && truth.kappa_true[var] == 0.0;
    if (zero_var && fit.relevance[col] > max_zero) {
      max_zero = fit.relevance[col];
      max_zero_name = label;
    }
    if (lag1 && std::abs(truth.beta_true[var]) > 4.0 && fit.relevance[col] < min_strong) {
      min_strong = fit.relevance[col];
      min_strong_name = label;
    }
  }
  c.note("strongest zero-coefficient covariate: " + max_zero_name + " " +
         std::to_string(max_zero));
  c.note("weakest |beta|>4 covariate: " + min_strong_name + " " + std::to_string(min_strong));
  c.require(min_strong < 1e300, "the realization has at least one |beta_true| > 4 regressor");
  c.require(max_zero >= 0.0, "the realization has at least one zero-coefficient regressor");
  c.require_lt(max_zero, min_strong,
               "every zero-coefficient covariate scores below every |beta_true| > 4 covariate");
  return c.ok;
}

bool criterion_7(Check& c) {
  const auto& res = shared_study();
  int checked = 0, outside = 0;
  double lo = 1.0, hi = 0.0;
  for (std::size_t v = 0; v < res.spec.variants.size(); ++v) {
    if (res.spec.variants[v] == Variant::fix_both) continue;  // no MH coordinates
    for (std::size_t ji = 0; ji < res.spec.J_grid.size(); ++ji)
      for (const auto& fit : res.fits[v][ji])
        for (double rate : fit.accept_rates) {
          if (std::isnan(rate)) continue;
          ++checked;
          lo = std::min(lo, rate);
          hi = std::max(hi, rate);
          if (rate < 0.25 || rate > 0.65) ++outside;
        }
  }
  c.note("post-freeze acceptance range [" + std::to_string(lo) + ", " + std::to_string(hi) +
         "] over " + std::to_string(checked) + " learners");
  c.require(checked > 0, "acceptance statistics recorded");
  c.require(outside == 0, "every learner's post-freeze acceptance rate lies in [0.25, 0.65] (" +
                              std::to_string(outside) + " outside)");
  return c.ok;
}

}  // namespace acceptance
