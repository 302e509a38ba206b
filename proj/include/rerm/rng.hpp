#pragma once

#include <cstdint>
#include <random>

namespace rerm::rng {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from a master seed and up to two indices
// (cell/trial, sub-stream). Pure mixing, no shared state.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc909ULL);
  h = splitmix64(h ^ splitmix64(a));
  h = splitmix64(h ^ splitmix64(b ^ 0xbb67ae8584caa73bULL));
  return h;
}

// Seeded sampler built on mt19937_64 with hand-rolled transforms so a seed
// reproduces the same stream on any toolchain (std::normal_distribution is
// not portable across standard libraries).
class Stream {
 public:
  explicit Stream(std::uint64_t seed) : gen_(seed) {}

  // uniform on (0,1]
  double uniform01() {
    return (static_cast<double>(gen_() >> 11) + 1.0) * 0x1.0p-53;
  }

  double normal();
  // Gamma(alpha, 1), alpha > 0 (Marsaglia-Tsang squeeze).
  double gamma(double alpha);
  // Student-t with `dof` degrees of freedom (not variance-normalized).
  double student_t(double dof);

  double rademacher() { return (gen_() >> 63) ? 1.0 : -1.0; }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace rerm::rng
