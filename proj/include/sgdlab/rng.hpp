#ifndef SGDLAB_RNG_HPP_
#define SGDLAB_RNG_HPP_

#include <cstdint>
#include <random>

#include "sgdlab/linalg.hpp"

namespace sgdlab {

// splitmix64 finalizer; used to derive independent stream seeds from a master
// seed without correlation between (stream, run) pairs.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Stream ids for the seed derivation. A master seed splits into one seed per
// (stream, run_index); shared-randomness comparisons reuse the same derived
// seeds across policies.
enum class Stream : std::uint64_t { Init = 1, Samples = 2, Perturbation = 3, Scratch = 4 };

inline std::uint64_t derive_seed(std::uint64_t master, Stream stream, std::uint64_t run_index = 0) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ (static_cast<std::uint64_t>(stream) * 0x9e3779b97f4a7c15ULL));
  s = splitmix64(s ^ (run_index * 0xd1342543de82ef95ULL));
  return s;
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t bits() { return gen_(); }

  // uniform in [0, 1); 53 mantissa bits, identical across platforms
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller; avoids the implementation-defined std::normal_distribution
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(theta);
    have_spare_ = true;
    return r * std::cos(theta);
  }

  Vec gaussian_vec(std::size_t d, double mean = 0.0, double scale = 1.0) {
    Vec v(d);
    for (auto& x : v) x = mean + scale * gaussian();
    return v;
  }

  Vec uniform_box(const Vec& lo, const Vec& hi) {
    Vec v(lo.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = uniform(lo[i], hi[i]);
    return v;
  }

  // index with probability weights[i]; weights sum to 1
  int categorical(const std::vector<double>& weights) {
    const double u = uniform();
    double acc = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      acc += weights[i];
      if (u < acc) return static_cast<int>(i);
    }
    return static_cast<int>(weights.size()) - 1;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace sgdlab

#endif  // SGDLAB_RNG_HPP_
