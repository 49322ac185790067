#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "relearn/common.hpp"

namespace relearn {

// Counter-based splitmix64 stream. Same seed gives the same stream on every
// platform; no global state, trivially copyable.
class RngState {
 public:
  explicit RngState(std::uint64_t seed = 0) : state_(seed) {}

  // Derives an independent stream, e.g. one per subsystem or per draw index.
  RngState derive(std::uint64_t tag) const {
    RngState r(state_ ^ (0x9e3779b97f4a7c15ULL * (tag + 1)));
    r.next_u64();
    return r;
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 53 random bits.
  double uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Box-Muller on fresh uniforms every call; no cached spare, so the stream
  // position is a pure function of the number of calls.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  count_t index(count_t n) { return static_cast<count_t>(next_u64() % n); }

  // Fisher-Yates; consumes exactly n-1 draws.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (count_t i = v.size(); i > 1; --i) {
      const count_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
};

}  // namespace relearn
