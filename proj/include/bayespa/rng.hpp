#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>

namespace bayespa {

// Seeded random stream. Identical seed + call sequence gives identical
// variates. Worker streams are forked from a master seed via fork(), which
// derives an independent seed with splitmix64 so streams never share state.
//
// Uniform and normal variates are generated directly from engine bits
// (no std::*_distribution) so the full stream state is the engine state;
// snapshots capture it exactly and resume bit-identically.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // [0,1) with 53 random bits.
  double uniform() { return (engine_() >> 11) * 0x1.0p-53; }

  // (0,1], never exactly zero (safe under log()).
  double uniform_pos() { return ((engine_() >> 11) + 1) * 0x1.0p-53; }

  // Box-Muller without the usual cached spare: one normal per call.
  double normal() {
    double u1 = uniform_pos();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925287 * u2);
  }

  std::uint64_t next_u64() { return engine_(); }

  // Derives a child stream; stream_id distinguishes siblings.
  RngStream fork(std::uint64_t stream_id) const {
    return RngStream(splitmix64(seed_ ^ (0x9e3779b97f4a7c15ULL * (stream_id + 1))));
  }

  // Engine state as text, for snapshots.
  std::string state() const {
    std::ostringstream os;
    os << engine_;
    return os.str();
  }

  void set_state(const std::string& s) {
    std::istringstream is(s);
    is >> engine_;
  }

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace bayespa
