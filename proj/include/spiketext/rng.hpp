#pragma once

#include <cstdint>

namespace spiketext {

// splitmix64 step. Counter-based, so any (seed, stream, substream) key can be
// expanded into an independent deterministic sequence without shared state;
// all stochastic draws in the project flow through this.
inline uint64_t splitmix64_next(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Order-sensitive combine of two 64-bit values with full avalanche.
inline uint64_t mix64(uint64_t a, uint64_t b) {
  uint64_t s = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  return splitmix64_next(s);
}

// 53-bit uniform double in [0, 1).
inline double canonical_double(uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() { return splitmix64_next(state_); }
  double next_double() { return canonical_double(next()); }

  // Uniform in [0, n), rejection-sampled to avoid modulo bias.
  uint64_t next_below(uint64_t n) {
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
      const uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform in [lo, hi).
  double next_uniform(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

 private:
  uint64_t state_;
};

// Stream-id derivation for spike generation. Training and evaluation use
// disjoint kinds so regenerated spike trains never collide across phases.
enum class StreamKind : uint64_t {
  kTrain = 1,
  kEval = 2,
};

inline uint64_t spike_stream(StreamKind kind, uint64_t encoder, uint64_t epoch_or_pass,
                             uint64_t document) {
  return mix64(mix64(mix64(static_cast<uint64_t>(kind), encoder), epoch_or_pass), document);
}

}  // namespace spiketext
