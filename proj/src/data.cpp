#include "vast/data.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "vast/rng.hpp"

namespace vast {

int tcode_loss(int code) {
  switch (code) {
    case 1:
    case 4:
      return 0;
    case 2:
    case 5:
      return 1;
    case 3:
    case 6:
    case 7:
      return 2;
    default:
      throw data_error("tcode_loss: transformation code must be in 1..7");
  }
}

namespace {

Eigen::VectorXd diff(const Eigen::VectorXd& v) {
  return v.tail(v.size() - 1) - v.head(v.size() - 1);
}

Eigen::VectorXd log_checked(const Eigen::Ref<const Eigen::VectorXd>& v) {
  if ((v.array() <= 0.0).any()) throw data_error("apply_tcode: log of nonpositive level");
  return v.array().log();
}

}  // namespace

Eigen::VectorXd apply_tcode(const Eigen::Ref<const Eigen::VectorXd>& series, int code) {
  if (series.size() <= tcode_loss(code))
    throw data_error("apply_tcode: series shorter than the transformation's lag loss");
  switch (code) {
    case 1:
      return series;
    case 2:
      return diff(series);
    case 3:
      return diff(diff(series));
    case 4:
      return log_checked(series);
    case 5:
      return diff(log_checked(series));
    case 6:
      return diff(diff(log_checked(series)));
    case 7: {
      const auto head = series.head(series.size() - 1).array();
      if ((head == 0.0).any()) throw data_error("apply_tcode: division by zero level (code 7)");
      Eigen::VectorXd rate = (series.tail(series.size() - 1).array() / head - 1.0).matrix();
      return diff(rate);
    }
    default:
      throw data_error("apply_tcode: transformation code must be in 1..7");
  }
}

Eigen::VectorXd invert_tcode(const Eigen::Ref<const Eigen::VectorXd>& transformed, int code,
                             double initial_level) {
  const auto n = transformed.size();
  Eigen::VectorXd out(n + 1);
  switch (code) {
    case 2:
      out[0] = initial_level;
      for (Eigen::Index t = 0; t < n; ++t) out[t + 1] = out[t] + transformed[t];
      return out;
    case 5:
      out[0] = initial_level;
      for (Eigen::Index t = 0; t < n; ++t) out[t + 1] = out[t] * std::exp(transformed[t]);
      return out;
    default:
      throw data_error("invert_tcode: only codes 2 and 5 are invertible here");
  }
}

Standardization standardize(Eigen::MatrixXd& X) {
  const auto T = X.rows();
  if (T < 2) throw data_error("standardize: need at least two rows");
  Standardization s;
  s.mean = X.colwise().mean();
  X.rowwise() -= s.mean.transpose();
  s.sd = (X.array().square().colwise().sum() / static_cast<double>(T - 1)).sqrt();
  for (Eigen::Index c = 0; c < X.cols(); ++c) {
    if (!(s.sd[c] > 0.0))
      throw data_error("standardize: constant column " + std::to_string(c));
  }
  X.array().rowwise() /= s.sd.transpose().array();
  return s;
}

void unstandardize(Eigen::MatrixXd& X, const Standardization& s) {
  X.array().rowwise() *= s.sd.transpose().array();
  X.rowwise() += s.mean.transpose();
}

std::pair<Eigen::MatrixXd, Eigen::MatrixXd> build_lag_matrix(const Eigen::MatrixXd& Y, int P) {
  const int T = static_cast<int>(Y.rows());
  const int M = static_cast<int>(Y.cols());
  if (P < 1) throw data_error("build_lag_matrix: P must be >= 1");
  if (T <= P) throw data_error("build_lag_matrix: need T > P");
  Eigen::MatrixXd X(T - P, M * P);
  for (int p = 1; p <= P; ++p)
    X.middleCols((p - 1) * M, M) = Y.middleRows(P - p, T - P);
  return {X, Y.bottomRows(T - P)};
}

DgpData simulate_dgp(const DgpSpec& spec) {
  if (spec.sparsity < 0.0 || spec.sparsity > 1.0)
    throw config_error("simulate_dgp: sparsity must be in [0,1]");
  Rng rng(spec.seed);
  DgpData d;
  d.beta_true.resize(spec.K);
  d.kappa_true.resize(spec.K);
  for (int k = 0; k < spec.K; ++k) {
    d.beta_true[k] = spec.beta_mean + spec.beta_sd * rng.normal();
    d.kappa_true[k] = spec.kappa_mean + spec.kappa_sd * rng.normal();
  }
  for (int k = 0; k < spec.K; ++k)
    if (rng.uniform() < spec.sparsity) d.beta_true[k] = 0.0;
  for (int k = 0; k < spec.K; ++k)
    if (rng.uniform() < spec.sparsity) d.kappa_true[k] = 0.0;
  d.x = rng.normal_matrix(spec.T, spec.K);
  d.y.resize(spec.T);
  double prev_y = 0.0;  // y_0 = 0
  for (int t = 0; t < spec.T; ++t) {
    double mean = spec.ar * prev_y;
    if (t > 0) {
      mean += d.x.row(t - 1) * d.beta_true;
      mean += d.x.row(t - 1).array().square().matrix() * d.kappa_true;
    }
    d.y[t] = mean + rng.normal();
    prev_y = d.y[t];
  }
  return d;
}

DgpDesign build_dgp_design(const DgpData& data, int y_lags, int x_lags) {
  const int T = static_cast<int>(data.y.size());
  const int K = static_cast<int>(data.x.cols());
  const int max_lag = std::max(y_lags, x_lags);
  if (y_lags < 1 || x_lags < 1) throw config_error("build_dgp_design: lags must be >= 1");
  if (T <= max_lag) throw data_error("build_dgp_design: series shorter than max lag");
  const int rows = T - max_lag;
  DgpDesign out;
  out.X.resize(rows, y_lags + K * x_lags);
  out.y = data.y.tail(rows);
  int col = 0;
  for (int l = 1; l <= y_lags; ++l, ++col) {
    out.X.col(col) = data.y.segment(max_lag - l, rows);
    out.labels.push_back("y.l" + std::to_string(l));
  }
  for (int l = 1; l <= x_lags; ++l)
    for (int k = 0; k < K; ++k, ++col) {
      out.X.col(col) = data.x.col(k).segment(max_lag - l, rows);
      out.labels.push_back("x" + std::to_string(k + 1) + ".l" + std::to_string(l));
    }
  return out;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) {
    // trim whitespace and surrounding quotes
    auto b = field.find_first_not_of(" \t\r\"");
    auto e = field.find_last_not_of(" \t\r\"");
    fields.push_back(b == std::string::npos ? "" : field.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

std::string lower(std::string s) {
  for (auto& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

}  // namespace

TimeSeriesPanel load_panel_csv(const std::string& data_path, const std::string& meta_path) {
  std::ifstream data_file(data_path);
  if (!data_file) throw data_error("cannot open data file: " + data_path);
  std::ifstream meta_file(meta_path);
  if (!meta_file) throw data_error("cannot open metadata file: " + meta_path);

  std::string line;
  if (!std::getline(data_file, line)) throw data_error("empty data file: " + data_path);
  auto header = split_csv_line(line);
  if (header.size() < 2) throw data_error("data file needs a date column and at least one series");
  std::vector<std::string> names(header.begin() + 1, header.end());

  std::vector<std::string> dates;
  std::vector<std::vector<double>> rows;
  int line_no = 1;
  while (std::getline(data_file, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    if (fields.size() != header.size())
      throw data_error("data file row " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, expected " +
                       std::to_string(header.size()));
    dates.push_back(fields[0]);
    std::vector<double> row(names.size());
    for (std::size_t c = 0; c < names.size(); ++c) {
      const std::string& f = fields[c + 1];
      if (f.empty() || lower(f) == "na" || lower(f) == "nan")
        throw data_error("missing value in series " + names[c] + " at " + fields[0]);
      try {
        row[c] = std::stod(f);
      } catch (const std::exception&) {
        throw data_error("non-numeric value '" + f + "' in series " + names[c] + " at " + fields[0]);
      }
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw data_error("data file has no observations: " + data_path);

  // metadata: mnemonic,tcode,class (header row required, column order free)
  if (!std::getline(meta_file, line)) throw data_error("empty metadata file: " + meta_path);
  auto mh = split_csv_line(line);
  int c_name = -1, c_tcode = -1, c_class = -1;
  for (std::size_t i = 0; i < mh.size(); ++i) {
    const auto h = lower(mh[i]);
    if (h == "mnemonic" || h == "name" || h == "series") c_name = static_cast<int>(i);
    if (h == "tcode" || h == "transformation" || h == "transform") c_tcode = static_cast<int>(i);
    if (h == "class") c_class = static_cast<int>(i);
  }
  if (c_name < 0 || c_tcode < 0 || c_class < 0)
    throw data_error("metadata file must have mnemonic, tcode and class columns");
  std::map<std::string, std::pair<int, std::string>> meta;
  while (std::getline(meta_file, line)) {
    if (line.find_first_not_of(" \t\r,") == std::string::npos) continue;
    auto fields = split_csv_line(line);
    const auto need = static_cast<std::size_t>(std::max({c_name, c_tcode, c_class})) + 1;
    if (fields.size() < need) throw data_error("short metadata row: " + line);
    int tc;
    try {
      tc = std::stoi(fields[c_tcode]);
    } catch (const std::exception&) {
      throw data_error("non-numeric tcode for " + fields[c_name]);
    }
    meta[fields[c_name]] = {tc, lower(fields[c_class])};
  }

  TimeSeriesPanel panel;
  panel.names = names;
  panel.dates = std::move(dates);
  panel.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < names.size(); ++c) panel.values(r, c) = rows[r][c];
  for (const auto& name : names) {
    auto it = meta.find(name);
    if (it == meta.end()) throw data_error("metadata missing for mnemonic " + name);
    panel.tcodes.push_back(it->second.first);
    panel.classes.push_back(it->second.second);
  }
  panel.validate();
  return panel;
}

TransformedPanel transform_panel(const TimeSeriesPanel& panel) {
  panel.validate();
  const int M = panel.M();
  int max_loss = 0;
  for (int c = 0; c < M; ++c) max_loss = std::max(max_loss, tcode_loss(panel.tcodes[c]));
  TransformedPanel out;
  out.rows_dropped = max_loss;
  const int T = panel.T() - max_loss;
  if (T < 2) throw data_error("transform_panel: too few observations after transformation");
  out.values.resize(T, M);
  std::vector<std::string> bad;
  for (int c = 0; c < M; ++c) {
    Eigen::VectorXd col;
    try {
      col = apply_tcode(panel.values.col(c), panel.tcodes[c]);
    } catch (const data_error& e) {
      bad.push_back(panel.names[c] + " (" + e.what() + ")");
      continue;
    }
    out.values.col(c) = col.tail(T);
    if (!out.values.col(c).allFinite()) bad.push_back(panel.names[c] + " (non-finite after transform)");
  }
  if (!bad.empty()) {
    std::string msg = "transform_panel: offending series:";
    for (const auto& s : bad) msg += " " + s + ";";
    throw data_error(msg);
  }
  if (!panel.dates.empty())
    out.dates.assign(panel.dates.begin() + max_loss, panel.dates.end());
  return out;
}

void write_matrix_csv(const std::string& path, const Eigen::MatrixXd& values,
                      const std::vector<std::string>& col_names,
                      const std::vector<std::string>& row_index) {
  std::ofstream f(path);
  if (!f) throw data_error("cannot open output file: " + path);
  f << "date";
  for (const auto& n : col_names) f << "," << n;
  f << "\n";
  f.precision(17);
  for (Eigen::Index r = 0; r < values.rows(); ++r) {
    f << (row_index.empty() ? std::to_string(r) : row_index[r]);
    for (Eigen::Index c = 0; c < values.cols(); ++c) f << "," << values(r, c);
    f << "\n";
  }
}

}  // namespace vast
