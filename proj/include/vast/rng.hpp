#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <random>

namespace vast {

/// Seeded random stream. Parallel work units derive independent streams
/// deterministically via `derive`, so results do not depend on scheduling.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  // splitmix64-style mixing; chains arbitrarily many tags onto a base seed.
  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t derive(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0,
                              std::uint64_t c = 0) {
    std::uint64_t s = mix(seed ^ 0xa0761d6478bd642fULL);
    s = mix(s ^ a);
    s = mix(s ^ b);
    s = mix(s ^ c);
    return s;
  }

  double uniform() { return unif_(gen_); }
  double normal() { return norm_(gen_); }
  double gamma(double shape, double scale) {
    std::gamma_distribution<double> d(shape, scale);
    return d(gen_);
  }
  /// IG(shape a, rate b): density proportional to x^{-a-1} exp(-b/x).
  double inv_gamma(double a, double b) { return 1.0 / gamma(a, 1.0 / b); }
  double chi_squared(double dof) { return gamma(0.5 * dof, 2.0); }

  Eigen::VectorXd normal_vector(int n) {
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v[i] = normal();
    return v;
  }
  Eigen::MatrixXd normal_matrix(int r, int c) {
    Eigen::MatrixXd m(r, c);
    for (int j = 0; j < c; ++j)
      for (int i = 0; i < r; ++i) m(i, j) = normal();
    return m;
  }

  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
  std::uniform_real_distribution<double> unif_{0.0, 1.0};
  std::normal_distribution<double> norm_{0.0, 1.0};
};

}  // namespace vast
