#pragma once

#include <string>
#include <vector>

#include "vast/types.hpp"

namespace vast {

/// Self-describing binary container for fitted chains. Header
/// {magic "VAST", u32 version, u32 J, u32 M, u32 K, u32 n_save}, then per
/// draw: each learner as (f64 nu, f64 mu, u32 delta, f64 beta0[M],
/// f64 beta1[M]), the Sigma lower triangle row by row, and the draw's data
/// log-likelihood. Little-endian throughout.
struct DrawFile {
  std::vector<PosteriorDraw> draws;
  int J = 0;
  int M = 0;
  int K = 0;
};

void save_draws(const std::string& path, const std::vector<PosteriorDraw>& draws, int K);

DrawFile load_draws(const std::string& path);

}  // namespace vast
