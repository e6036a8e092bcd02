#pragma once

#include <cmath>
#include <cstdint>

#include "bregkit/types.hpp"

namespace bregkit {

// splitmix64 step (Steele/Lea/Flood). Used both as a generator and as a
// seed mixer for independent substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic, platform-independent random stream.
//
// Substream rule: stream k of master seed s starts from the splitmix64
// state s ^ mix(k+1), so (seed, sample_index) fully determines the draw
// sequence. Gaussians via Box-Muller on 53-bit uniforms.
class SplitStream {
 public:
  SplitStream(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t m = stream + 1;
    std::uint64_t streamkey = splitmix64(m);
    state_ = seed ^ streamkey;
    // decorrelate nearby (seed, stream) pairs
    splitmix64(state_);
    splitmix64(state_);
  }

  explicit SplitStream(std::uint64_t seed) : SplitStream(seed, 0) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform in [0,1) with 53 random bits
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  Vec gaussian_vec(Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = gaussian();
    return v;
  }

  Vec uniform_vec(Index n) {
    Vec v(n);
    for (Index i = 0; i < n; ++i) v[i] = uniform();
    return v;
  }

  // uniform integer in [0, bound) by rejection
  std::uint64_t below(std::uint64_t bound) {
    std::uint64_t threshold = (0ULL - bound) % bound;
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

 private:
  std::uint64_t state_ = 0;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

// Order-independent sum: pairwise reduction over the stored values, so a
// parallel map followed by this aggregation is bit-reproducible.
double pairwise_sum(const double* data, Index n);
inline double pairwise_sum(const Vec& v) { return pairwise_sum(v.data(), v.size()); }

}  // namespace bregkit
