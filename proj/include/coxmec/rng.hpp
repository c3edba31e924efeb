#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace coxmec {

// splitmix64 finalizer; used to hash (seed, stream ids) into engine seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Derives a substream seed from a master seed and up to three stream ids.
// Replicate-level substreams make results independent of scheduling:
// every replicate draws from its own deterministic stream.
inline std::uint64_t substream_seed(std::uint64_t master, std::uint64_t a,
                                    std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(master ^ 0x6a09e667f3bcc909ull);
  h = splitmix64(h ^ splitmix64(a));
  h = splitmix64(h ^ splitmix64(b ^ 0x3c6ef372fe94f82bull));
  h = splitmix64(h ^ splitmix64(c ^ 0xa54ff53a5f1d36f1ull));
  return h;
}

/*
 * Deterministic random source.
 *
 * Wraps std::mt19937_64 with hand-rolled transforms (canonical uniforms
 * from the top 53 bits, Box-Muller normals) so that draw sequences are
 * fully determined by the seed and the call sequence, independent of
 * standard-library distribution internals.
 */
class Rng {
public:
  explicit Rng(std::uint64_t seed) : eng_(seed), have_spare_(false), spare_(0.0) {}

  // Uniform on [0, 1).
  double uniform() {
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  // Uniform on (0, 1]; safe to pass to log().
  double uniform_pos() { return 1.0 - uniform(); }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; caches the paired deviate.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = uniform_pos();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // Exponential with rate 1.
  double exponential() { return -std::log(uniform_pos()); }

  // Index draw from a probability vector (assumed normalized).
  std::size_t categorical(const std::vector<double>& probs) {
    double u = uniform();
    double acc = 0.0;
    for (std::size_t j = 0; j + 1 < probs.size(); ++j) {
      acc += probs[j];
      if (u < acc) return j;
    }
    return probs.empty() ? 0 : probs.size() - 1;
  }

  std::uint64_t raw() { return eng_(); }

private:
  std::mt19937_64 eng_;
  bool have_spare_;
  double spare_;
};

} // namespace coxmec
