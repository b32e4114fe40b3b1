/* C API for the additive smooth-transition regression library.
 *
 * All entry points return VAST_OK or an error code; vast_last_error() holds
 * a description of the most recent failure on the calling thread. Handles
 * are opaque and freed with the matching *_free function.
 */
#ifndef VAST_C_API_H
#define VAST_C_API_H

#ifdef __cplusplus
extern "C" {
#endif

#define VAST_OK 0
#define VAST_ERR_CONFIG 2
#define VAST_ERR_DATA 3
#define VAST_ERR_NUMERIC 4

typedef struct vast_config vast_config;
typedef struct vast_panel vast_panel;
typedef struct vast_draws vast_draws;

const char* vast_version(void);
const char* vast_last_error(void);

/* --- configuration ------------------------------------------------------ */

vast_config* vast_config_new(void);
void vast_config_free(vast_config* cfg);

/* Keys: J, P, phi, a_sigma, b_sigma, a_nu, b_nu, sigma2_mu, a_Sigma,
 * S_Sigma_scale, n_burn, n_save, thin, fix_nu ("none" clears), fix_mu_to_mean,
 * seed, adapt_window, proposal_scale, threads, y_lags, x_lags.
 * Unknown keys or unparsable values are config errors. */
int vast_config_set(vast_config* cfg, const char* key, const char* value);
int vast_config_get(const vast_config* cfg, const char* key, char* buf, int buflen);

/* --- data --------------------------------------------------------------- */

int vast_panel_load_csv(const char* data_csv, const char* meta_csv, vast_panel** out);
int vast_panel_from_arrays(const double* values /* row-major T x M */, int T, int M,
                           const char* const* names, const int* tcodes,
                           const char* const* classes, vast_panel** out);
void vast_panel_free(vast_panel* panel);
int vast_panel_dims(const vast_panel* panel, int* T, int* M);

/* Writes the synthetic study process to CSV for external inspection. */
int vast_dump_dgp(unsigned long long seed, const char* out_csv);

/* --- fitting and persistence -------------------------------------------- */

/* Transforms and standardizes the panel, then runs the chain (multivariate
 * when M > 1, univariate on its own lags when M = 1). Writes the binary draw
 * file and, if diagnostics_path is non-NULL, a delimited diagnostics sidecar.
 * On success *out (if non-NULL) receives the fitted draws. */
int vast_fit(const vast_panel* panel, const vast_config* cfg, const char* draws_path,
             const char* diagnostics_path, vast_draws** out);

int vast_draws_load(const char* path, vast_draws** out);
int vast_draws_save(const vast_draws* draws, const char* path);
void vast_draws_free(vast_draws* draws);
int vast_draws_info(const vast_draws* draws, int* J, int* M, int* K, int* n_save);

/* --- prediction and evaluation ------------------------------------------ */

/* H-step predictive quantiles (per variable and horizon) in the units of the
 * transformed series, written as delimited text. */
int vast_forecast(const vast_draws* draws, const vast_panel* panel, const vast_config* cfg,
                  int horizon, int paths_per_draw, const char* out_path);

/* Expanding-window one-step density evaluation: refits the chain as each
 * target row joins the training sample, reporting per-step marginal and
 * joint log predictive likelihoods. start_date selects the first target. */
int vast_recursive_eval(const vast_panel* panel, const vast_config* cfg, const char* start_date,
                        int max_steps, const char* out_path);

/* --- structural analysis ------------------------------------------------- */

/* Generalized impulse responses to a shock in the named variable, identified
 * recursively from the panel's slow/policy/fast classes. w is the shock size
 * in structural standard deviations (signed). Writes per-variable quantiles. */
int vast_girf(const vast_draws* draws, const vast_panel* panel, const vast_config* cfg,
              const char* shock_name, double w, int horizon, int n_shock_draws,
              int state_subsample, const char* out_path);

/* --- Monte Carlo study ---------------------------------------------------- */

/* Fits the four transition-estimation variants over a J grid on replications
 * of the synthetic process and writes the metric matrix (RMSE ratios and LPL
 * differences against the baseline variant) as delimited text. */
int vast_simulation_study(const vast_config* cfg, int n_reps, const char* j_grid_csv,
                          const char* baseline_variant, const char* out_path);

/* --- misc ----------------------------------------------------------------- */

int vast_parameter_count(int J, int M, int P, long long* model_count,
                         long long* linear_var_count);

#ifdef __cplusplus
}
#endif

#endif /* VAST_C_API_H */
