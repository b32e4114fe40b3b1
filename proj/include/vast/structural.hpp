#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "vast/types.hpp"

namespace vast {

/// Recursive ordering slow -> policy -> shock variable -> fast. The shock
/// variable must be classed policy or fast (it reacts at least as fast as
/// the block ordered before it); a slow-classed shock is a config error.
struct VariableOrdering {
  std::vector<int> order;  // order[k] = original index of the k-th ordered variable
  int shock_position = 0;  // index of the shock variable within `order`

  void validate(int M) const;
};

VariableOrdering make_recursive_ordering(const std::vector<std::string>& classes,
                                         int shock_index);

/// Cholesky identification under the ordering. Returns the M x M impact
/// matrix in original variable order: column k is the impact of a unit
/// structural shock at ordered position k, so variables ordered before the
/// shock have exactly zero impact response.
Eigen::MatrixXd identify_recursive(const Eigen::MatrixXd& Sigma, const VariableOrdering& ord);

/// Shock experiment: size and sign w (in structural standard deviations),
/// horizon, replicates per (draw, state), and the stride over historical
/// states used to integrate out the observed state.
struct GirfSpec {
  int shock_index = 0;
  double w = 1.0;
  int H = 20;
  int n_shock_draws = 20;
  int state_subsample = 1;

  void validate() const {
    if (H < 1) throw config_error("GirfSpec: H must be >= 1");
    if (n_shock_draws < 1) throw config_error("GirfSpec: n_shock_draws must be >= 1");
    if (state_subsample < 1) throw config_error("GirfSpec: state_subsample must be >= 1");
  }
};

/// One simulated path under a pinned structural shock: at h=0 the shocked
/// structural innovation equals w, at h>=1 it is zero, all other innovations
/// are taken from the supplied block (common random numbers between the
/// shocked and the w=0 baseline path).
Eigen::MatrixXd shocked_path(const PosteriorDraw& draw, const Eigen::MatrixXd& history, int P,
                             const Eigen::MatrixXd& impact, int shock_position, double w, int H,
                             const Eigen::MatrixXd& structural_innovations);

struct GirfResult {
  int H = 0;
  int M = 0;
  std::vector<Eigen::MatrixXd> per_draw;  // posterior draws of the state-averaged GIRF

  Eigen::MatrixXd quantile(double q) const;
};

/// Generalized impulse responses: for every posterior draw, historical state
/// and replicate, difference the shocked path against its w=0 twin under
/// common random numbers, then average over states and replicates.
GirfResult girf(const std::vector<PosteriorDraw>& draws, const Eigen::MatrixXd& Ystd, int P,
                const GirfSpec& spec, const VariableOrdering& ord, std::uint64_t seed,
                int n_threads = 1);

/// Delimited per-variable, per-horizon posterior quantiles
/// (0.05/0.16/0.5/0.84/0.95).
void write_girf_quantiles(const std::string& path, const GirfResult& res,
                          const std::vector<std::string>& names);

}  // namespace vast
