// Copyright 2026 the tdfpp authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef TDFPP_RNG_HPP
#define TDFPP_RNG_HPP

#include <cmath>
#include <cstdint>

namespace tdfpp {

// Counter-based randomness. Every random quantity in a simulation is a pure
// function of (master seed, stream tag, counter words), so the infinite
// lattice and unbounded time are addressable without storage, and replaying
// any query in any order from any worker gives bit-identical values.
//
// The mixing chain and the stream tags below are part of the reproducibility
// contract: outputs for a given seed must never change across versions.

inline constexpr std::uint64_t kGoldenGamma = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t chain_absorb(std::uint64_t h, std::uint64_t w) noexcept {
  return mix64((h + kGoldenGamma) ^ w);
}

constexpr std::uint64_t chain_digest(std::uint64_t h) noexcept {
  return mix64(h ^ 0xd6e8feb86659fd93ULL);
}

/// Named substreams of one master seed.
enum class Stream : std::uint64_t {
  kBlockOffset = 1,  // uniform phase of the block regime clock
  kRenewalGaps = 2,  // exponential gaps of the renewal regime clock
  kEdgeField = 3,    // per-(edge, regime) speed draws
  kReplicate = 4,    // per-replicate seed derivation
  kInstance = 5,     // per-sample seed derivation in randomized checks
};

class SeedChain {
 public:
  SeedChain(std::uint64_t seed, Stream stream)
      : h_(chain_absorb(mix64(seed + kGoldenGamma),
                        static_cast<std::uint64_t>(stream))) {}

  SeedChain& absorb(std::uint64_t word) {
    h_ = chain_absorb(h_, word);
    return *this;
  }

  std::uint64_t state() const { return h_; }
  std::uint64_t value() const { return chain_digest(h_); }

  /// Uniform double strictly inside (0, 1).
  double unit() const { return to_unit(value()); }

  static double to_unit(std::uint64_t bits) {
    // The midpoint formula rounds up to exactly 1.0 for the largest 53-bit
    // value, so clamp that single case back inside the open interval.
    const double u = (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
    return u < 1.0 ? u : 0x1.fffffffffffffp-1;
  }

 private:
  std::uint64_t h_;
};

/// Replicate r of a run seeded with `base` uses this derived seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  return SeedChain(base, Stream::kReplicate).absorb(index).value();
}

inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t tag,
                                 std::uint64_t index) {
  return SeedChain(base, Stream::kInstance).absorb(tag).absorb(index).value();
}

inline double exponential_gap(double unit, double rate) {
  return -std::log(unit) / rate;
}

}  // namespace tdfpp

#endif  // TDFPP_RNG_HPP
