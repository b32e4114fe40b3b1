#include "vast/draw_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace vast {

static_assert(std::endian::native == std::endian::little,
              "draw file I/O assumes a little-endian host");

namespace {

constexpr char kMagic[4] = {'V', 'A', 'S', 'T'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::ofstream& f, std::uint32_t v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}
void put_f64(std::ofstream& f, double v) {
  f.write(reinterpret_cast<const char*>(&v), sizeof v);
}
std::uint32_t get_u32(std::ifstream& f) {
  std::uint32_t v;
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}
double get_f64(std::ifstream& f) {
  double v;
  f.read(reinterpret_cast<char*>(&v), sizeof v);
  return v;
}

}  // namespace

void save_draws(const std::string& path, const std::vector<PosteriorDraw>& draws, int K) {
  if (draws.empty()) throw data_error("save_draws: no draws to persist");
  const int J = static_cast<int>(draws[0].learners.size());
  const int M = static_cast<int>(draws[0].sigma.rows());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot open draw file for writing: " + path);
  f.write(kMagic, 4);
  put_u32(f, kVersion);
  put_u32(f, static_cast<std::uint32_t>(J));
  put_u32(f, static_cast<std::uint32_t>(M));
  put_u32(f, static_cast<std::uint32_t>(K));
  put_u32(f, static_cast<std::uint32_t>(draws.size()));
  for (const auto& d : draws) {
    if (static_cast<int>(d.learners.size()) != J || d.sigma.rows() != M)
      throw data_error("save_draws: inconsistent draw dimensions");
    for (const auto& l : d.learners) {
      put_f64(f, l.nu);
      put_f64(f, l.mu);
      put_u32(f, static_cast<std::uint32_t>(l.delta));
      for (int m = 0; m < M; ++m) put_f64(f, l.beta0[m]);
      for (int m = 0; m < M; ++m) put_f64(f, l.beta1[m]);
    }
    for (int i = 0; i < M; ++i)
      for (int k = 0; k <= i; ++k) put_f64(f, d.sigma(i, k));
    put_f64(f, d.loglik);
  }
  if (!f) throw data_error("write failure on draw file: " + path);
}

DrawFile load_draws(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot open draw file: " + path);
  char magic[4];
  f.read(magic, 4);
  if (!f || std::memcmp(magic, kMagic, 4) != 0)
    throw data_error("not a draw file (bad magic): " + path);
  const std::uint32_t version = get_u32(f);
  if (version != kVersion)
    throw data_error("unsupported draw file version " + std::to_string(version));
  DrawFile out;
  out.J = static_cast<int>(get_u32(f));
  out.M = static_cast<int>(get_u32(f));
  out.K = static_cast<int>(get_u32(f));
  const std::uint32_t n = get_u32(f);
  if (!f || out.J < 1 || out.M < 1 || out.K < 1 || n < 1)
    throw data_error("corrupt draw file header: " + path);
  out.draws.resize(n);
  for (auto& d : out.draws) {
    d.learners.resize(out.J);
    for (auto& l : d.learners) {
      l.nu = get_f64(f);
      l.mu = get_f64(f);
      const std::uint32_t delta = get_u32(f);
      if (delta >= static_cast<std::uint32_t>(out.K))
        throw data_error("corrupt draw file: delta out of range");
      l.delta = static_cast<int>(delta);
      l.beta0.resize(out.M);
      l.beta1.resize(out.M);
      for (int m = 0; m < out.M; ++m) l.beta0[m] = get_f64(f);
      for (int m = 0; m < out.M; ++m) l.beta1[m] = get_f64(f);
    }
    d.sigma.resize(out.M, out.M);
    for (int i = 0; i < out.M; ++i)
      for (int k = 0; k <= i; ++k) {
        d.sigma(i, k) = get_f64(f);
        d.sigma(k, i) = d.sigma(i, k);
      }
    d.loglik = get_f64(f);
    if (!f) throw data_error("truncated draw file: " + path);
  }
  return out;
}

}  // namespace vast
