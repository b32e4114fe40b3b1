// Command-line front end: fit, simulate, forecast, girf. Links the C API
// only; every run writes a manifest sufficient to reproduce it bitwise.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "vast/vast.h"

namespace {

using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitNumeric = 4;

[[noreturn]] void fail(int code, const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  std::exit(code);
}

void check(int rc) {
  if (rc != VAST_OK) fail(rc, vast_last_error());
}

std::string fnv1a_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) fail(kExitData, "cannot open input for hashing: " + path);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  char buf[1 << 16];
  while (f.read(buf, sizeof buf) || f.gcount() > 0) {
    for (std::streamsize i = 0; i < f.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ULL;
    }
    if (!f) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof hex, "%016llx", static_cast<unsigned long long>(h));
  return hex;
}

struct ConfigHandle {
  vast_config* cfg = vast_config_new();
  ~ConfigHandle() { vast_config_free(cfg); }
};

struct PanelHandle {
  vast_panel* panel = nullptr;
  ~PanelHandle() { vast_panel_free(panel); }
};

struct DrawsHandle {
  vast_draws* draws = nullptr;
  ~DrawsHandle() { vast_draws_free(draws); }
};

const std::vector<std::string> kConfigKeys = {
    "J",          "P",        "phi",        "a_sigma",       "b_sigma",
    "a_nu",       "b_nu",     "sigma2_mu",  "a_Sigma",       "S_Sigma_scale",
    "n_burn",     "n_save",   "thin",       "fix_nu",        "fix_mu_to_mean",
    "seed",       "adapt_window", "proposal_scale", "threads", "y_lags", "x_lags"};

void apply_config_file(vast_config* cfg, const std::string& path) {
  std::ifstream f(path);
  if (!f) fail(kExitConfig, "cannot open config file: " + path);
  json j;
  try {
    f >> j;
  } catch (const std::exception& e) {
    fail(kExitConfig, std::string("config file parse error: ") + e.what());
  }
  if (j.contains("config") && j["config"].is_object()) j = j["config"];  // manifest reuse
  for (auto it = j.begin(); it != j.end(); ++it) {
    std::string v = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
    check(vast_config_set(cfg, it.key().c_str(), v.c_str()));
  }
}

json config_echo(const vast_config* cfg) {
  json j;
  char buf[128];
  for (const auto& k : kConfigKeys) {
    check(vast_config_get(cfg, k.c_str(), buf, sizeof buf));
    j[k] = std::string(buf);
  }
  return j;
}

void write_manifest(const std::string& path, const std::string& command,
                    const std::vector<std::string>& argv, const vast_config* cfg,
                    const json& args, const std::map<std::string, std::string>& input_hashes,
                    const std::vector<std::string>& outputs, double wall_seconds) {
  json m;
  m["command"] = command;
  m["argv"] = argv;
  m["config"] = config_echo(cfg);
  m["args"] = args;
  m["input_hashes"] = input_hashes;
  m["outputs"] = outputs;
  m["library_version"] = vast_version();
  m["wall_clock_seconds"] = wall_seconds;
  std::ofstream f(path);
  if (!f) fail(kExitData, "cannot write manifest: " + path);
  f << m.dump(2) << "\n";
}

struct CommonOpts {
  std::string config_file;
  std::string data_csv, meta_csv;

  void add_config(CLI::App* app) {
    app->add_option("--config", config_file, "JSON config file (flags take precedence)");
  }
  void add_data(CLI::App* app, bool required) {
    auto* d = app->add_option("--data", data_csv, "data CSV (dates + mnemonics header)");
    auto* m = app->add_option("--meta", meta_csv, "metadata CSV (mnemonic,tcode,class)");
    if (required) {
      d->required();
      m->required();
    }
  }
};

// flag spellings -> config keys, applied only when the user set them
struct ModelFlags {
  std::map<std::string, std::string> values;

  void add(CLI::App* app) {
    auto opt = [&](const char* flag, const char* key, const char* help) {
      app->add_option_function<std::string>(
             flag, [this, key](const std::string& v) { values[key] = v; }, help)
          ->expected(1);
    };
    opt("--J", "J", "number of base learners");
    opt("--P", "P", "lag order");
    opt("--burn", "n_burn", "burn-in sweeps");
    opt("--save", "n_save", "retained draws");
    opt("--thin", "thin", "thinning interval");
    opt("--seed", "seed", "RNG seed");
    opt("--phi", "phi", "prior scale phi");
    opt("--sigma2-mu", "sigma2_mu", "threshold prior variance");
    opt("--fix-nu", "fix_nu", "pin every nu to this value");
    opt("--threads", "threads", "worker count");
    opt("--y-lags", "y_lags", "own lags in the study design");
    opt("--x-lags", "x_lags", "covariate lags in the study design");
    app->add_flag_function(
        "--fix-mu", [this](std::int64_t) { values["fix_mu_to_mean"] = "1"; },
        "pin thresholds to the selected covariate's sample mean");
  }
  void apply(vast_config* cfg) const {
    for (const auto& [k, v] : values) check(vast_config_set(cfg, k.c_str(), v.c_str()));
  }
};

std::uint64_t seed_of(const vast_config* cfg) {
  char buf[64];
  check(vast_config_get(cfg, "seed", buf, sizeof buf));
  return std::stoull(buf);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Additive smooth-transition regression (AST/VAST): Bayesian fitting, "
               "forecasting, simulation study and generalized impulse responses"};
  app.require_subcommand(1);
  std::vector<std::string> argv_copy(argv, argv + argc);

  // ---- fit ----
  auto* fit = app.add_subcommand("fit", "fit a chain and persist the posterior draws");
  CommonOpts fit_common;
  ModelFlags fit_flags;
  std::string fit_out = "draws.bin", fit_diag, fit_manifest;
  fit_common.add_config(fit);
  fit_common.add_data(fit, true);
  fit_flags.add(fit);
  fit->add_option("--out", fit_out, "output draw file");
  fit->add_option("--diag", fit_diag, "diagnostics sidecar (default: <out>.diag.tsv)");
  fit->add_option("--manifest", fit_manifest, "manifest path (default: <out>.manifest.json)");

  // ---- simulate ----
  auto* sim = app.add_subcommand("simulate", "Monte Carlo study over variants and J");
  CommonOpts sim_common;
  ModelFlags sim_flags;
  int sim_reps = 10;
  std::string sim_j = "1,5,10,15", sim_baseline = "estimate-both";
  std::string sim_out = "simulation_table.tsv", sim_manifest, sim_dump;
  sim_common.add_config(sim);
  sim_flags.add(sim);
  sim->add_option("--reps", sim_reps, "DGP replications");
  sim->add_option("--J-grid", sim_j, "comma-separated J grid");
  sim->add_option("--baseline", sim_baseline,
                  "baseline variant (estimate-both|fix-nu|fix-mu|fix-both)");
  sim->add_option("--out", sim_out, "metric matrix output");
  sim->add_option("--dump-dgp", sim_dump, "also dump one DGP realization to CSV");
  sim->add_option("--manifest", sim_manifest, "manifest path");

  // ---- forecast ----
  auto* fc = app.add_subcommand("forecast", "predictive quantiles from a fitted chain");
  CommonOpts fc_common;
  ModelFlags fc_flags;
  std::string fc_draws, fc_out = "forecast.tsv", fc_manifest, fc_start;
  int fc_h = 8, fc_paths = 1, fc_max_steps = -1;
  bool fc_recursive = false;
  fc_common.add_config(fc);
  fc_common.add_data(fc, true);
  fc_flags.add(fc);
  fc->add_option("--draws", fc_draws, "fitted draw file (not needed with --recursive)");
  fc->add_option("--H", fc_h, "forecast horizon");
  fc->add_option("--paths-per-draw", fc_paths, "simulated paths per posterior draw");
  fc->add_flag("--recursive", fc_recursive, "expanding-window one-step evaluation");
  fc->add_option("--start", fc_start, "first forecast target date (with --recursive)");
  fc->add_option("--max-steps", fc_max_steps, "cap on expanding-window steps");
  fc->add_option("--out", fc_out, "output table");
  fc->add_option("--manifest", fc_manifest, "manifest path");

  // ---- girf ----
  auto* gi = app.add_subcommand("girf", "generalized impulse responses");
  CommonOpts gi_common;
  ModelFlags gi_flags;
  std::string gi_draws, gi_shock, gi_sizes = "1,5", gi_signs = "both";
  std::string gi_prefix = "girf", gi_manifest;
  int gi_h = 20, gi_reps = 20, gi_stride = 1;
  double gi_w = 0.0;
  bool gi_w_set = false;
  gi_common.add_config(gi);
  gi_common.add_data(gi, true);
  gi_flags.add(gi);
  gi->add_option("--draws", gi_draws, "fitted draw file")->required();
  gi->add_option("--shock", gi_shock, "shocked variable mnemonic")->required();
  gi->add_option("--sizes", gi_sizes, "comma-separated shock sizes in structural S.D.");
  gi->add_option("--signs", gi_signs, "positive|negative|both");
  gi->add_option_function<double>(
        "--w", [&](double v) { gi_w = v; gi_w_set = true; },
        "single signed shock size (overrides --sizes/--signs)");
  gi->add_option("--H", gi_h, "horizon");
  gi->add_option("--shock-draws", gi_reps, "replicates per (draw, state)");
  gi->add_option("--state-stride", gi_stride, "stride over historical states");
  gi->add_option("--out-prefix", gi_prefix, "output file prefix");
  gi->add_option("--manifest", gi_manifest, "manifest path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  };

  if (fit->parsed()) {
    ConfigHandle cfg;
    if (!fit_common.config_file.empty()) apply_config_file(cfg.cfg, fit_common.config_file);
    fit_flags.apply(cfg.cfg);
    PanelHandle panel;
    check(vast_panel_load_csv(fit_common.data_csv.c_str(), fit_common.meta_csv.c_str(),
                              &panel.panel));
    if (fit_diag.empty()) fit_diag = fit_out + ".diag.tsv";
    check(vast_fit(panel.panel, cfg.cfg, fit_out.c_str(), fit_diag.c_str(), nullptr));
    if (fit_manifest.empty()) fit_manifest = fit_out + ".manifest.json";
    write_manifest(fit_manifest, "fit", argv_copy, cfg.cfg,
                   {{"data", fit_common.data_csv}, {"meta", fit_common.meta_csv}},
                   {{"data", fnv1a_file(fit_common.data_csv)},
                    {"meta", fnv1a_file(fit_common.meta_csv)}},
                   {fit_out, fit_diag}, elapsed());
    std::cout << "wrote " << fit_out << ", " << fit_diag << ", " << fit_manifest << "\n";
    return 0;
  }

  if (sim->parsed()) {
    ConfigHandle cfg;
    check(vast_config_set(cfg.cfg, "n_burn", "1500"));
    check(vast_config_set(cfg.cfg, "n_save", "1500"));
    if (!sim_common.config_file.empty()) apply_config_file(cfg.cfg, sim_common.config_file);
    sim_flags.apply(cfg.cfg);
    if (!sim_dump.empty()) check(vast_dump_dgp(seed_of(cfg.cfg), sim_dump.c_str()));
    check(vast_simulation_study(cfg.cfg, sim_reps, sim_j.c_str(), sim_baseline.c_str(),
                                sim_out.c_str()));
    if (sim_manifest.empty()) sim_manifest = sim_out + ".manifest.json";
    json args{{"reps", sim_reps}, {"J_grid", sim_j}, {"baseline", sim_baseline}};
    write_manifest(sim_manifest, "simulate", argv_copy, cfg.cfg, args, {},
                   {sim_out}, elapsed());
    std::cout << "wrote " << sim_out << ", " << sim_manifest << "\n";
    return 0;
  }

  if (fc->parsed()) {
    ConfigHandle cfg;
    if (!fc_common.config_file.empty()) apply_config_file(cfg.cfg, fc_common.config_file);
    fc_flags.apply(cfg.cfg);
    PanelHandle panel;
    check(vast_panel_load_csv(fc_common.data_csv.c_str(), fc_common.meta_csv.c_str(),
                              &panel.panel));
    if (fc_recursive) {
      if (fc_start.empty()) fail(kExitConfig, "--recursive requires --start <date>");
      check(vast_recursive_eval(panel.panel, cfg.cfg, fc_start.c_str(), fc_max_steps,
                                fc_out.c_str()));
    } else {
      if (fc_draws.empty()) fail(kExitConfig, "forecast requires --draws (or --recursive)");
      DrawsHandle draws;
      check(vast_draws_load(fc_draws.c_str(), &draws.draws));
      check(vast_forecast(draws.draws, panel.panel, cfg.cfg, fc_h, fc_paths, fc_out.c_str()));
    }
    if (fc_manifest.empty()) fc_manifest = fc_out + ".manifest.json";
    json args{{"H", fc_h},
              {"paths_per_draw", fc_paths},
              {"recursive", fc_recursive},
              {"start", fc_start},
              {"draws", fc_draws}};
    std::map<std::string, std::string> hashes{{"data", fnv1a_file(fc_common.data_csv)},
                                              {"meta", fnv1a_file(fc_common.meta_csv)}};
    if (!fc_draws.empty()) hashes["draws"] = fnv1a_file(fc_draws);
    write_manifest(fc_manifest, "forecast", argv_copy, cfg.cfg, args, hashes, {fc_out},
                   elapsed());
    std::cout << "wrote " << fc_out << ", " << fc_manifest << "\n";
    return 0;
  }

  if (gi->parsed()) {
    ConfigHandle cfg;
    if (!gi_common.config_file.empty()) apply_config_file(cfg.cfg, gi_common.config_file);
    gi_flags.apply(cfg.cfg);
    PanelHandle panel;
    check(vast_panel_load_csv(gi_common.data_csv.c_str(), gi_common.meta_csv.c_str(),
                              &panel.panel));
    DrawsHandle draws;
    check(vast_draws_load(gi_draws.c_str(), &draws.draws));

    std::vector<double> ws;
    if (gi_w_set) {
      ws.push_back(gi_w);
    } else {
      std::vector<double> sizes;
      std::stringstream ss(gi_sizes);
      std::string tok;
      while (std::getline(ss, tok, ','))
        if (!tok.empty()) sizes.push_back(std::stod(tok));
      if (sizes.empty()) fail(kExitConfig, "empty --sizes");
      for (double s : sizes) {
        if (gi_signs == "both" || gi_signs == "positive") ws.push_back(s);
        if (gi_signs == "both" || gi_signs == "negative") ws.push_back(-s);
      }
      if (gi_signs != "both" && gi_signs != "positive" && gi_signs != "negative")
        fail(kExitConfig, "--signs must be positive, negative or both");
    }

    std::vector<std::string> outputs;
    for (double w : ws) {
      std::ostringstream name;
      name << gi_prefix << "_" << gi_shock << "_" << (w < 0 ? "neg" : "pos") << std::abs(w)
           << ".tsv";
      check(vast_girf(draws.draws, panel.panel, cfg.cfg, gi_shock.c_str(), w, gi_h, gi_reps,
                      gi_stride, name.str().c_str()));
      outputs.push_back(name.str());
    }
    if (gi_manifest.empty()) gi_manifest = gi_prefix + ".manifest.json";
    json args{{"shock", gi_shock}, {"H", gi_h},        {"shock_draws", gi_reps},
              {"stride", gi_stride}, {"sizes", gi_sizes}, {"signs", gi_signs},
              {"w_override", gi_w_set ? json(gi_w) : json()}};
    write_manifest(gi_manifest, "girf", argv_copy, cfg.cfg, args,
                   {{"data", fnv1a_file(gi_common.data_csv)},
                    {"meta", fnv1a_file(gi_common.meta_csv)},
                    {"draws", fnv1a_file(gi_draws)}},
                   outputs, elapsed());
    std::cout << "wrote " << outputs.size() << " GIRF file(s), " << gi_manifest << "\n";
    return 0;
  }

  return kExitConfig;
}
