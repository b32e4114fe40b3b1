#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "vast/types.hpp"

namespace vast {

/// Rows of leading data a transformation code consumes.
int tcode_loss(int code);

/// FRED-style level-to-stationary transforms, codes 1..7:
/// (1) none; (2) diff; (3) double diff; (4) log; (5) dlog; (6) double dlog;
/// (7) diff of the period-on-period gross rate minus one.
Eigen::VectorXd apply_tcode(const Eigen::Ref<const Eigen::VectorXd>& series, int code);

/// Inverse of codes 2 and 5 given the consumed initial level(s).
Eigen::VectorXd invert_tcode(const Eigen::Ref<const Eigen::VectorXd>& transformed, int code,
                             double initial_level);

struct Standardization {
  Eigen::VectorXd mean;
  Eigen::VectorXd sd;  // sample sd, n-1 convention
};

/// Centers and scales each column to mean 0, sd 1. Throws on a constant column.
Standardization standardize(Eigen::MatrixXd& X);
void unstandardize(Eigen::MatrixXd& X, const Standardization& s);

/// Lag-stacked design: row t of X is (y'_{t-1}, ..., y'_{t-P}); the aligned
/// response drops the first P rows of Y. K = M*P.
std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_lag_matrix(const Eigen::MatrixXd& Y, int P);

/// Synthetic nonlinear autoregression used by the simulation study:
/// y_t = ar*y_{t-1} + beta'x_{t-1} + kappa'x_{t-1}^2 + u_t with sparse
/// coefficient vectors and standard-normal covariates.
struct DgpSpec {
  int T = 300;
  int K = 25;
  double sparsity = 0.6;  // probability an element of beta/kappa is zeroed
  double ar = 0.9;
  double beta_mean = 3.0, beta_sd = 3.0;
  double kappa_mean = 2.0, kappa_sd = 3.0;
  std::uint64_t seed = 1;
};

struct DgpData {
  Eigen::VectorXd y;        // T
  Eigen::MatrixXd x;        // T x K, x.row(t-1) drives y_t
  Eigen::VectorXd beta_true;
  Eigen::VectorXd kappa_true;
};

DgpData simulate_dgp(const DgpSpec& spec);

/// Model-facing covariates for the simulation study: y_lags own lags plus
/// x_lags lags of every exogenous regressor. Returns (X, y) aligned rows.
struct DgpDesign {
  Eigen::MatrixXd X;
  Eigen::VectorXd y;
  std::vector<std::string> labels;  // per column, e.g. "y.l1", "x3.l2"
};
DgpDesign build_dgp_design(const DgpData& data, int y_lags, int x_lags);

/// CSV ingestion. The data file has a header of mnemonics and a leading date
/// column; the metadata file is keyed by mnemonic with tcode and class columns.
TimeSeriesPanel load_panel_csv(const std::string& data_path, const std::string& meta_path);

struct TransformedPanel {
  Eigen::MatrixXd values;          // stationary-transformed, panel-aligned
  std::vector<std::string> dates;  // surviving dates
  int rows_dropped = 0;
};

/// Applies each column's tcode and drops the panel-wide maximum lag loss so
/// all columns share one time index. Rejects panels with missing values,
/// naming the offending series.
TransformedPanel transform_panel(const TimeSeriesPanel& panel);

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& col_names,
                      const std::vector<std::string>& row_index);

}  // namespace vast
