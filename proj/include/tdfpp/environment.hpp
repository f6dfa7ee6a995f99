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

#ifndef TDFPP_ENVIRONMENT_HPP
#define TDFPP_ENVIRONMENT_HPP

#include <algorithm>
#include <cassert>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include "tdfpp/common.hpp"
#include "tdfpp/lattice.hpp"
#include "tdfpp/rng.hpp"

namespace tdfpp {

// Random environments assign every lattice edge an instantaneous speed that
// is piecewise constant in time. All edges share one global regime clock;
// within regime k, the speed of edge e is an i.i.d. draw eta(e, k) from the
// speed field, realized lazily as a counter-based function of
// (seed, canonical edge id, k).
//
// Two regime clocks are supported:
//   Block:   regimes change every C time units, phase-shifted by a uniform
//            offset a in [0, C); the regime at time t is floor((t + a) / C).
//   Poisson: regimes change at the jump times of a rate-lambda renewal
//            process; the regime at time t is the number of jumps in (0, t].

enum class FieldDist { kUniform, kTwoPoint };

/// Marginal law of a single speed draw. Values always lie in [1/L, L].
struct FieldSpec {
  FieldDist dist = FieldDist::kUniform;
  double speed_bound = 1.0;  // L >= 1
  double two_point_low_prob = 0.5;  // P[draw = 1/L] for the two-point law

  void validate() const {
    if (!(speed_bound >= 1.0)) throw ConfigError("field: L must be >= 1");
    if (dist == FieldDist::kTwoPoint &&
        !(two_point_low_prob >= 0.0 && two_point_low_prob <= 1.0)) {
      throw ConfigError("field: two-point probability must be in [0, 1]");
    }
  }

  double min_speed() const { return 1.0 / speed_bound; }
  double max_speed() const { return speed_bound; }

  double draw(double unit) const {
    const double lo = min_speed();
    const double hi = max_speed();
    if (dist == FieldDist::kUniform) return lo + unit * (hi - lo);
    return unit < two_point_low_prob ? lo : hi;
  }

  double mean() const {
    const double lo = min_speed();
    const double hi = max_speed();
    if (dist == FieldDist::kUniform) return 0.5 * (lo + hi);
    return two_point_low_prob * lo + (1.0 - two_point_low_prob) * hi;
  }

  double variance() const {
    const double w = max_speed() - min_speed();
    if (dist == FieldDist::kUniform) return w * w / 12.0;
    return two_point_low_prob * (1.0 - two_point_low_prob) * w * w;
  }
};

enum class EnvKind { kBlock, kPoisson };

struct EnvironmentSpec {
  EnvKind kind = EnvKind::kBlock;
  int dimension = 2;
  FieldSpec field;
  double block_period = 1.0;  // C > 0, block only
  double renewal_rate = 1.0;  // lambda > 0, poisson only
  std::uint64_t seed = 0;

  void validate() const {
    if (dimension < 1 || dimension > kMaxDim) {
      throw ConfigError("environment: dimension must be in [1, " +
                        std::to_string(kMaxDim) + "]");
    }
    field.validate();
    if (kind == EnvKind::kBlock && !(block_period > 0.0)) {
      throw ConfigError("environment: block period C must be > 0");
    }
    if (kind == EnvKind::kPoisson && !(renewal_rate > 0.0)) {
      throw ConfigError("environment: renewal rate lambda must be > 0");
    }
  }

  EnvironmentSpec with_seed(std::uint64_t s) const {
    EnvironmentSpec copy = *this;
    copy.seed = s;
    return copy;
  }
};

/// The regime a time instant belongs to: its index on the global clock and
/// the first instant strictly after it where the regime changes.
struct RegimePiece {
  std::int64_t index;
  double end;
};

/// Exact piecewise-constant restriction of one edge's speed to [t0, t1):
/// value[j] holds on [breakpoints[j], breakpoints[j+1]).
struct PiecewiseSpeed {
  std::vector<double> breakpoints;  // size values.size() + 1; first = t0, last = t1
  std::vector<double> values;

  double value_at(double t) const {
    assert(!breakpoints.empty() && t >= breakpoints.front() && t < breakpoints.back());
    const auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), t);
    return values[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
  }
};

/// Anything that can serve as a speed environment for the travel laws and
/// the earliest-arrival solver.
template <typename E>
concept Environment = requires(const E& env, double t,
                               std::span<const std::int64_t> base, int axis,
                               std::int64_t regime) {
  { env.dimension() } -> std::convertible_to<int>;
  { env.speed_bound() } -> std::convertible_to<double>;
  { env.regime_at(t) } -> std::same_as<RegimePiece>;
  { env.edge_speed(base, axis, regime) } -> std::convertible_to<double>;
};

/// One sampled environment. Logically immutable: speed(e, t) is a pure
/// function of (seed, canonical edge id, regime index). The renewal clock
/// materializes jump times lazily behind a mutex; extending the horizon
/// never changes already-materialized times, so one realization may be
/// shared by any number of concurrent solver calls.
class EnvironmentRealization {
 public:
  explicit EnvironmentRealization(EnvironmentSpec spec) : spec_(std::move(spec)) {
    spec_.validate();
    edge_chain_ = SeedChain(spec_.seed, Stream::kEdgeField).state();
    if (spec_.kind == EnvKind::kBlock) {
      offset_ = SeedChain(spec_.seed, Stream::kBlockOffset).unit() * spec_.block_period;
    } else {
      renewal_chain_ = SeedChain(spec_.seed, Stream::kRenewalGaps).state();
    }
  }

  EnvironmentRealization(const EnvironmentRealization&) = delete;
  EnvironmentRealization& operator=(const EnvironmentRealization&) = delete;

  const EnvironmentSpec& spec() const { return spec_; }
  int dimension() const { return spec_.dimension; }
  double speed_bound() const { return spec_.field.speed_bound; }
  double min_speed() const { return spec_.field.min_speed(); }

  /// Block phase a in [0, C). Only meaningful for block environments.
  double block_offset() const {
    assert(spec_.kind == EnvKind::kBlock);
    return offset_;
  }

  RegimePiece regime_at(double t) const {
    assert(t >= 0.0);
    if (spec_.kind == EnvKind::kBlock) {
      const double c = spec_.block_period;
      auto k = static_cast<std::int64_t>(std::floor((t + offset_) / c));
      double end = static_cast<double>(k + 1) * c - offset_;
      // Rounding can land `end` at or before t when t sits within an ulp of
      // a regime boundary; the boundary then belongs to the next regime.
      if (end <= t) {
        ++k;
        end = static_cast<double>(k + 1) * c - offset_;
      }
      return {k, end};
    }
    return poisson_regime_at(t);
  }

  /// eta(e, k): the speed of the edge with canonical id (base, axis) during
  /// regime k. Replay-stable across query orders and workers.
  double edge_speed(std::span<const std::int64_t> base, int axis,
                    std::int64_t regime) const {
    std::uint64_t h = edge_chain_;
    for (const std::int64_t c : base) {
      h = chain_absorb(h, static_cast<std::uint64_t>(c));
    }
    h = chain_absorb(h, static_cast<std::uint64_t>(axis));
    h = chain_absorb(h, static_cast<std::uint64_t>(regime));
    const double value = spec_.field.draw(SeedChain::to_unit(chain_digest(h)));
    assert(value >= spec_.field.min_speed() && value <= spec_.field.max_speed());
    return value;
  }

  double speed(const Edge& e, double t) const {
    return edge_speed(e.base().coords(), e.axis(), regime_at(t).index);
  }

  /// Renewal times materialized so far (poisson only), for tests.
  std::vector<double> materialized_renewals() const {
    std::lock_guard<std::mutex> lock(mu_);
    return renewals_;
  }

 private:
  RegimePiece poisson_regime_at(double t) const {
    std::lock_guard<std::mutex> lock(mu_);
    while (renewals_.empty() || renewals_.back() <= t) {
      const double prev = renewals_.empty() ? 0.0 : renewals_.back();
      const double u = SeedChain::to_unit(chain_digest(
          chain_absorb(renewal_chain_, renewals_.size())));
      renewals_.push_back(prev + exponential_gap(u, spec_.renewal_rate));
    }
    const auto first_after =
        std::upper_bound(renewals_.begin(), renewals_.end(), t);
    return {first_after - renewals_.begin(), *first_after};
  }

  EnvironmentSpec spec_;
  std::uint64_t edge_chain_ = 0;
  double offset_ = 0.0;                   // block
  std::uint64_t renewal_chain_ = 0;       // poisson
  mutable std::mutex mu_;                 // guards renewals_
  mutable std::vector<double> renewals_;  // strictly increasing jump times > 0
};

static_assert(Environment<EnvironmentRealization>);

inline EnvironmentRealization sample_environment(const EnvironmentSpec& spec) {
  return EnvironmentRealization(spec);
}

/// Exact decomposition of s -> speed(e, s) on [t0, t1).
template <Environment Env>
PiecewiseSpeed epochs(const Env& env, const Edge& e, double t0, double t1) {
  if (!(t0 >= 0.0) || !(t0 < t1)) {
    throw ConfigError("epochs: require 0 <= t0 < t1");
  }
  PiecewiseSpeed out;
  out.breakpoints.push_back(t0);
  double t = t0;
  while (t < t1) {
    const RegimePiece piece = env.regime_at(t);
    const double v = env.edge_speed(e.base().coords(), e.axis(), piece.index);
    const double end = std::min(piece.end, t1);
    if (!out.values.empty() && out.values.back() == v) {
      out.breakpoints.back() = end;  // regime changed but the draw repeated
    } else {
      out.values.push_back(v);
      out.breakpoints.push_back(end);
    }
    t = piece.end;
  }
  return out;
}

/// Closed-form Cov[speed(e, 0), speed(e, s)] over independent realizations.
///
/// Both draws come from the same field value exactly when 0 and s share a
/// regime, and are independent otherwise, so the covariance is
/// Var[eta] * P[same regime]:
///   Block:   P = max(0, 1 - s/C)   (uniform phase)
///   Poisson: P = exp(-lambda * s)  (no jump in (0, s])
inline double regime_covariance_theoretical(const EnvironmentSpec& spec,
                                            double lag) {
  if (lag < 0.0) throw ConfigError("covariance lag must be >= 0");
  const double var = spec.field.variance();
  if (spec.kind == EnvKind::kBlock) {
    return var * std::max(0.0, 1.0 - lag / spec.block_period);
  }
  return var * std::exp(-spec.renewal_rate * lag);
}

}  // namespace tdfpp

#endif  // TDFPP_ENVIRONMENT_HPP
