#include "vast/structural.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <thread>

#include "vast/learners.hpp"
#include "vast/rng.hpp"

namespace vast {

void VariableOrdering::validate(int M) const {
  if (static_cast<int>(order.size()) != M)
    throw config_error("VariableOrdering: permutation length mismatch");
  std::vector<bool> seen(M, false);
  for (int idx : order) {
    if (idx < 0 || idx >= M || seen[idx])
      throw config_error("VariableOrdering: not a valid permutation");
    seen[idx] = true;
  }
  if (shock_position < 0 || shock_position >= M)
    throw config_error("VariableOrdering: shock position out of range");
}

VariableOrdering make_recursive_ordering(const std::vector<std::string>& classes,
                                         int shock_index) {
  const int M = static_cast<int>(classes.size());
  if (shock_index < 0 || shock_index >= M)
    throw config_error("make_recursive_ordering: shock index out of range");
  if (classes[shock_index] == "slow")
    throw config_error(
        "make_recursive_ordering: shock variable is classed 'slow' but must be ordered after "
        "all slow variables; class it 'policy' or 'fast'");
  VariableOrdering ord;
  for (int i = 0; i < M; ++i)
    if (classes[i] == "slow") ord.order.push_back(i);
  for (int i = 0; i < M; ++i)
    if (classes[i] == "policy" && i != shock_index) ord.order.push_back(i);
  ord.shock_position = static_cast<int>(ord.order.size());
  ord.order.push_back(shock_index);
  for (int i = 0; i < M; ++i)
    if (classes[i] == "fast" && i != shock_index) ord.order.push_back(i);
  ord.validate(M);
  return ord;
}

Eigen::MatrixXd identify_recursive(const Eigen::MatrixXd& Sigma, const VariableOrdering& ord) {
  const int M = static_cast<int>(Sigma.rows());
  ord.validate(M);
  Eigen::MatrixXd Sp(M, M);
  for (int i = 0; i < M; ++i)
    for (int k = 0; k < M; ++k) Sp(i, k) = Sigma(ord.order[i], ord.order[k]);
  Eigen::LLT<Eigen::MatrixXd> llt(Sp);
  if (llt.info() != Eigen::Success)
    throw numeric_error("identify_recursive: Cholesky factorization failed");
  const Eigen::MatrixXd L = llt.matrixL();
  Eigen::MatrixXd impact(M, M);
  for (int i = 0; i < M; ++i) impact.row(ord.order[i]) = L.row(i);
  return impact;
}

Eigen::MatrixXd shocked_path(const PosteriorDraw& draw, const Eigen::MatrixXd& history, int P,
                             const Eigen::MatrixXd& impact, int shock_position, double w, int H,
                             const Eigen::MatrixXd& structural_innovations) {
  const int M = static_cast<int>(history.cols());
  if (history.rows() < P) throw data_error("shocked_path: insufficient history");
  if (structural_innovations.rows() < H || structural_innovations.cols() != M)
    throw data_error("shocked_path: innovation block shape mismatch");
  Eigen::MatrixXd lagbuf(P, M);
  for (int i = 0; i < P; ++i) lagbuf.row(i) = history.row(history.rows() - 1 - i);
  Eigen::MatrixXd path(H, M);
  Eigen::RowVectorXd x(M * P);
  Eigen::VectorXd xi(M);
  for (int h = 0; h < H; ++h) {
    for (int i = 0; i < P; ++i) x.segment(i * M, M) = lagbuf.row(i);
    Eigen::VectorXd mean = Eigen::VectorXd::Zero(M);
    for (const auto& l : draw.learners) {
      const double s = logistic_transition(x[l.delta], l.nu, l.mu);
      mean += s * l.beta0 + (1.0 - s) * l.beta1;
    }
    xi = structural_innovations.row(h).transpose();
    xi[shock_position] = (h == 0) ? w : 0.0;
    const Eigen::VectorXd y = mean + impact * xi;
    path.row(h) = y.transpose();
    for (int i = P - 1; i > 0; --i) lagbuf.row(i) = lagbuf.row(i - 1);
    lagbuf.row(0) = y.transpose();
  }
  return path;
}

Eigen::MatrixXd GirfResult::quantile(double q) const {
  if (per_draw.empty()) throw data_error("GirfResult::quantile: no draws");
  if (q < 0.0 || q > 1.0) throw config_error("GirfResult::quantile: q outside [0,1]");
  Eigen::MatrixXd out(H, M);
  std::vector<double> v(per_draw.size());
  for (int h = 0; h < H; ++h)
    for (int m = 0; m < M; ++m) {
      for (std::size_t d = 0; d < per_draw.size(); ++d) v[d] = per_draw[d](h, m);
      std::sort(v.begin(), v.end());
      const double pos = q * (static_cast<double>(v.size()) - 1.0);
      const auto lo = static_cast<std::size_t>(std::floor(pos));
      const auto hi = static_cast<std::size_t>(std::ceil(pos));
      const double frac = pos - static_cast<double>(lo);
      out(h, m) = (1.0 - frac) * v[lo] + frac * v[hi];
    }
  return out;
}

GirfResult girf(const std::vector<PosteriorDraw>& draws, const Eigen::MatrixXd& Ystd, int P,
                const GirfSpec& spec, const VariableOrdering& ord, std::uint64_t seed,
                int n_threads) {
  spec.validate();
  if (draws.empty()) throw data_error("girf: no posterior draws");
  const int T = static_cast<int>(Ystd.rows());
  const int M = static_cast<int>(Ystd.cols());
  ord.validate(M);
  if (T < P) throw data_error("girf: empty state set");

  std::vector<int> states;
  for (int t = P - 1; t < T; t += spec.state_subsample) states.push_back(t);
  if (states.empty()) throw data_error("girf: empty state set");

  GirfResult res;
  res.H = spec.H;
  res.M = M;
  res.per_draw.assign(draws.size(), Eigen::MatrixXd());

  auto run_draw = [&](std::size_t d) {
    const Eigen::MatrixXd impact = identify_recursive(draws[d].sigma, ord);
    Eigen::MatrixXd accum = Eigen::MatrixXd::Zero(spec.H, M);
    for (int t : states) {
      const Eigen::MatrixXd history = Ystd.middleRows(t - P + 1, P);
      for (int r = 0; r < spec.n_shock_draws; ++r) {
        Rng rng(Rng::derive(seed, d, static_cast<std::uint64_t>(t),
                            static_cast<std::uint64_t>(r)));
        const Eigen::MatrixXd xi = rng.normal_matrix(spec.H, M);
        accum += shocked_path(draws[d], history, P, impact, ord.shock_position, spec.w, spec.H, xi);
        accum -= shocked_path(draws[d], history, P, impact, ord.shock_position, 0.0, spec.H, xi);
      }
    }
    res.per_draw[d] = accum / (static_cast<double>(states.size()) * spec.n_shock_draws);
  };

  if (n_threads <= 1) {
    for (std::size_t d = 0; d < draws.size(); ++d) run_draw(d);
  } else {
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
      for (;;) {
        const std::size_t d = next.fetch_add(1);
        if (d >= draws.size()) return;
        run_draw(d);
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < n_threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  return res;
}

void write_girf_quantiles(const std::string& path, const GirfResult& res,
                          const std::vector<std::string>& names) {
  std::ofstream f(path);
  if (!f) throw data_error("cannot open GIRF output file: " + path);
  const double levels[] = {0.05, 0.16, 0.5, 0.84, 0.95};
  std::vector<Eigen::MatrixXd> qs;
  for (double q : levels) qs.push_back(res.quantile(q));
  f << "variable\thorizon\tq05\tq16\tq50\tq84\tq95\n";
  f.precision(10);
  for (int m = 0; m < res.M; ++m)
    for (int h = 0; h < res.H; ++h) {
      f << (m < static_cast<int>(names.size()) ? names[m] : "v" + std::to_string(m)) << "\t" << h;
      for (const auto& q : qs) f << "\t" << q(h, m);
      f << "\n";
    }
}

}  // namespace vast
