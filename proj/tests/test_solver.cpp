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

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "support/helpers.hpp"
#include "tdfpp/environment.hpp"
#include "tdfpp/lattice.hpp"
#include "tdfpp/rng.hpp"
#include "tdfpp/solver.hpp"
#include "tdfpp/travel.hpp"

using namespace tdfpp;
using tdfpp_test::ScriptedEnvironment;

namespace {

EnvironmentSpec sampled_spec(bool block, double bound, std::uint64_t seed) {
  EnvironmentSpec spec;
  spec.kind = block ? EnvKind::kBlock : EnvKind::kPoisson;
  spec.dimension = 2;
  spec.field.speed_bound = bound;
  spec.block_period = 1.0;
  spec.renewal_rate = 1.0;
  spec.seed = seed;
  return spec;
}

struct InstanceVars {
  SeedChain chain;
  explicit InstanceVars(std::uint64_t seed) : chain(seed, Stream::kInstance) {}
  double unit() {
    chain.absorb(0);
    return chain.unit();
  }
  std::int64_t pick(std::int64_t lo, std::int64_t hi) {
    return lo + std::min<std::int64_t>(
                    static_cast<std::int64_t>(unit() * static_cast<double>(hi - lo + 1)),
                    hi - lo);
  }
};

}  // namespace

TEST_CASE("region radius covers the optimal path length bound") {
  CHECK(region_radius(1.0, Vertex{0, 0}, Vertex{3, 2}) == 5);
  CHECK(region_radius(2.0, Vertex{0, 0}, Vertex{2, 1}) == 12);
  CHECK(region_radius(2.0, Vertex{4, 4}, Vertex{4, 4}) == 1);
  CHECK_THROWS_AS(region_radius(0.9, Vertex{0, 0}, Vertex{1, 0}), ConfigError);
}

TEST_CASE("unit speeds give labels equal to the l1 distance") {
  const ScriptedEnvironment env(2, 1.0, {}, {1.0});
  const Vertex source{1, -2};
  const ArrivalLabels labels =
      earliest_arrival(env, TravelModel::kIntegral, source, 2.0, 4);

  CHECK(labels.finalized_count() == 41);  // |B_4| in d=2
  std::uint64_t visited = 0;
  labels.for_each_finalized([&](const Vertex& v, double t) {
    REQUIRE(t == 2.0 + static_cast<double>(l1_distance(source, v)));
    ++visited;
  });
  CHECK(visited == 41);
  CHECK(labels.at(source) == 2.0);
  CHECK(!labels.label(Vertex{6, -2}).has_value());  // outside the ball
}

TEST_CASE("labels respect the speed envelope vertex by vertex") {
  const EnvironmentRealization env(sampled_spec(true, 2.0, 11));
  const Vertex source{0, 0};
  for (const auto model : {TravelModel::kIntegral, TravelModel::kDeparture}) {
    const ArrivalLabels labels =
        earliest_arrival(env, model, source, 1.0, 6);
    labels.for_each_finalized([&](const Vertex& v, double t) {
      const double dist = static_cast<double>(l1_distance(source, v));
      REQUIRE(t - 1.0 >= dist / 2.0 - 1e-9);
      REQUIRE(t - 1.0 <= dist * 2.0 + 1e-9);
    });
  }
}

TEST_CASE("sweep labels match the brute-force oracle on a seeded window") {
  for (const bool block : {true, false}) {
    const EnvironmentRealization env(sampled_spec(block, 2.0, 777));
    for (const auto model : {TravelModel::kIntegral, TravelModel::kDeparture}) {
      const Vertex source{0, 0};
      // Radius 16 = L^2 * 4 covers the optimal-path bound for the farthest
      // window corner, so the ball sweep is exact for every target below.
      const ArrivalLabels labels =
          earliest_arrival(env, model, source, 0.5, 16);
      // Every vertex of the 5x5 window around the source, kept small enough
      // for exhaustive enumeration.
      for (std::int64_t x = -2; x <= 2; ++x) {
        for (std::int64_t y = -2; y <= 2; ++y) {
          const Vertex target{x, y};
          const auto dist = static_cast<int>(l1_distance(source, target));
          if (dist == 0) continue;
          const double direct = brute_force_first_passage(
              env, model, {source, target, 0.5}, 4 * dist);
          REQUIRE(labels.at(target) - 0.5 ==
                  Catch::Approx(direct).margin(1e-9));
        }
      }
    }
  }
}

TEST_CASE("doubling the region never changes a passage time") {
  for (int i = 0; i < 100; ++i) {
    InstanceVars vars(40000 + static_cast<std::uint64_t>(i));
    const EnvironmentRealization env(
        sampled_spec(i % 2 == 0, 2.0, 40000 + static_cast<std::uint64_t>(i)));
    const auto model = i % 4 < 2 ? TravelModel::kIntegral : TravelModel::kDeparture;
    const Vertex a{vars.pick(-3, 3), vars.pick(-3, 3)};
    Vertex b = a;
    const std::int64_t steps = vars.pick(1, 3);
    for (std::int64_t s = 0; s < steps; ++s) {
      b = b.shifted(static_cast<int>(vars.pick(0, 1)), vars.unit() < 0.5 ? -1 : 1);
    }
    if (a == b) b = a.shifted(0, 1);
    const double t0 = 5.0 * vars.unit();

    const std::int64_t radius = region_radius(2.0, a, b);
    const ArrivalLabels tight = earliest_arrival(env, model, a, t0, radius);
    const ArrivalLabels wide = earliest_arrival(env, model, a, t0, 2 * radius);
    REQUIRE(tight.at(b) == wide.at(b));
  }
}

TEST_CASE("tie order never affects label values") {
  for (int i = 0; i < 20; ++i) {
    const EnvironmentRealization env(
        sampled_spec(i % 2 == 0, 2.0, 52000 + static_cast<std::uint64_t>(i)));
    SweepOptions reversed;
    reversed.tie_order = TieOrder::kReverseLexicographic;
    const ArrivalLabels lex =
        earliest_arrival(env, TravelModel::kIntegral, Vertex{0, 0}, 0.0, 5);
    const ArrivalLabels rev = earliest_arrival(
        env, TravelModel::kIntegral, Vertex{0, 0}, 0.0, 5, reversed);
    REQUIRE(lex.finalized_count() == rev.finalized_count());
    lex.for_each_finalized([&](const Vertex& v, double t) {
      REQUIRE(rev.at(v) == t);  // bitwise: same candidate set, same minimum
    });
  }
}

TEST_CASE("early stop at targets reproduces the full sweep") {
  for (int i = 0; i < 100; ++i) {
    InstanceVars vars(61000 + static_cast<std::uint64_t>(i));
    const EnvironmentRealization env(
        sampled_spec(i % 2 == 0, 2.0, 61000 + static_cast<std::uint64_t>(i)));
    const Vertex target{vars.pick(-3, 3), vars.pick(-3, 3)};
    const std::int64_t radius = 12;
    SweepOptions stop;
    stop.stop_targets = {target};
    const ArrivalLabels eager = earliest_arrival(
        env, TravelModel::kDeparture, Vertex{0, 0}, 0.0, radius, stop);
    const ArrivalLabels full = earliest_arrival(
        env, TravelModel::kDeparture, Vertex{0, 0}, 0.0, radius);
    REQUIRE(eager.at(target) == full.at(target));
    REQUIRE(eager.finalized_count() <= full.finalized_count());
  }
}

TEST_CASE("stop_after finalizes exactly the horizon set") {
  const EnvironmentRealization env(sampled_spec(true, 2.0, 71));
  SweepOptions horizon;
  horizon.stop_after = 3.0;
  const ArrivalLabels cut = earliest_arrival(
      env, TravelModel::kIntegral, Vertex{0, 0}, 0.0, 8, horizon);
  const ArrivalLabels full =
      earliest_arrival(env, TravelModel::kIntegral, Vertex{0, 0}, 0.0, 8);

  std::set<Vertex> cut_set;
  cut.for_each_finalized([&](const Vertex& v, double t) {
    REQUIRE(t == full.at(v));
    REQUIRE(t <= 3.0);
    cut_set.insert(v);
  });
  std::uint64_t expected = 0;
  full.for_each_finalized([&](const Vertex& v, double t) {
    if (t <= 3.0) {
      ++expected;
      REQUIRE(cut_set.contains(v));
    }
  });
  CHECK(cut_set.size() == expected);
}

TEST_CASE("first passage basics and guard rails") {
  const EnvironmentRealization env(sampled_spec(true, 2.0, 99));
  CHECK(first_passage(env, TravelModel::kIntegral, {Vertex{2, 2}, Vertex{2, 2}, 5.0}) == 0.0);
  CHECK_THROWS_AS(
      first_passage(env, TravelModel::kIntegral, {Vertex{0, 0}, Vertex{0, 0, 0}, 0.0}),
      ConfigError);
  CHECK_THROWS_AS(
      first_passage(env, TravelModel::kIntegral, {Vertex{0, 0}, Vertex{1, 0}, -1.0}),
      ConfigError);

  const ScriptedEnvironment unit(2, 1.0, {}, {1.0});
  CHECK(first_passage(unit, TravelModel::kDeparture, {Vertex{-1, 4}, Vertex{2, 2}, 0.0}) == 5.0);
}

TEST_CASE("directional passage walks multiples of the direction") {
  const ScriptedEnvironment unit(2, 1.0, {}, {1.0});
  CHECK(directional_passage(unit, TravelModel::kIntegral, Vertex{1, 0}, 0, 7, 0.0) == 7.0);
  CHECK(directional_passage(unit, TravelModel::kIntegral, Vertex{1, -1}, 1, 3, 2.0) == 4.0);
  CHECK_THROWS_AS(
      directional_passage(unit, TravelModel::kIntegral, Vertex{0, 0}, 0, 3, 0.0),
      ConfigError);
  CHECK_THROWS_AS(
      directional_passage(unit, TravelModel::kIntegral, Vertex{1, 0}, 3, 3, 0.0),
      ConfigError);
}

TEST_CASE("subadditivity and delayed starts on sampled instances") {
  for (int i = 0; i < 200; ++i) {
    InstanceVars vars(83000 + static_cast<std::uint64_t>(i));
    const EnvironmentRealization env(
        sampled_spec(i % 2 == 0, 2.0, 83000 + static_cast<std::uint64_t>(i)));
    const auto model = i % 4 < 2 ? TravelModel::kIntegral : TravelModel::kDeparture;
    const Vertex e{vars.pick(-1, 1), vars.pick(-1, 1)};
    if (e.is_zero()) continue;
    const double t = 10.0 * vars.unit();

    const double whole = directional_passage(env, model, e, 0, 5, t);
    const double head = directional_passage(env, model, e, 0, 2, t);
    const double tail = directional_passage(env, model, e, 2, 5, t + head);
    REQUIRE(whole <= head + tail + 1e-9);

    const double s = 5.0 * vars.unit();
    const double later = directional_passage(env, model, e, 0, 3, t + s);
    const double now = directional_passage(env, model, e, 0, 3, t);
    REQUIRE(now <= later + s + 1e-9);
  }
}

TEST_CASE("brute force is monotone in the edge budget") {
  const EnvironmentRealization env(sampled_spec(true, 2.0, 3131));
  const PassageQuery q{Vertex{0, 0}, Vertex{1, 1}, 0.25};
  for (const auto model : {TravelModel::kIntegral, TravelModel::kDeparture}) {
    const double tight = brute_force_first_passage(env, model, q, 2);
    const double loose = brute_force_first_passage(env, model, q, 4);
    const double looser = brute_force_first_passage(env, model, q, 6);
    CHECK(loose <= tight + 1e-12);
    CHECK(looser <= loose + 1e-12);
  }
}

TEST_CASE("brute force guard rails") {
  const EnvironmentRealization env(sampled_spec(true, 2.0, 14));
  const PassageQuery q{Vertex{0, 0}, Vertex{2, 1}, 0.0};
  CHECK_THROWS_AS(brute_force_first_passage(env, TravelModel::kIntegral, q, 2),
                  ConfigError);  // budget below the l1 distance
  CHECK_THROWS_AS(brute_force_first_passage(env, TravelModel::kIntegral, q, -1),
                  ConfigError);
  // A node budget of one expansion cannot finish any real query.
  CHECK_THROWS_AS(
      brute_force_first_passage(env, TravelModel::kIntegral, q, 12, 1),
      OracleInfeasibleError);
}

TEST_CASE("reachable set under unit speeds is the floor-radius ball") {
  const ScriptedEnvironment unit(2, 1.0, {}, {1.0});
  for (const auto mode : {StartTimeMode::kFixedZero, StartTimeMode::kDiagonal}) {
    for (const double t : {1.0, 2.5, 5.0}) {
      const auto got = reachable_set(unit, TravelModel::kIntegral, t, mode);
      const auto want =
          l1_ball(Vertex{0, 0}, static_cast<std::int64_t>(std::floor(t)));
      REQUIRE(got == want);  // both lexicographically sorted
    }
  }
}

TEST_CASE("reachable sets are sandwiched and nested") {
  const EnvironmentRealization env(sampled_spec(true, 2.0, 616));
  const auto s2 = reachable_set(env, TravelModel::kIntegral, 2.0);
  const auto s4 = reachable_set(env, TravelModel::kIntegral, 4.0);

  for (const auto& [t, set] : {std::pair{2.0, &s2}, std::pair{4.0, &s4}}) {
    for (const Vertex& v : *set) {
      REQUIRE(static_cast<double>(l1_norm(v)) <= 2.0 * t);
    }
    // Everything within distance t/L is reachable: speeds never drop
    // below 1/L.
    for (const Vertex& v :
         l1_ball(Vertex{0, 0}, static_cast<std::int64_t>(std::floor(t / 2.0)))) {
      REQUIRE(std::binary_search(set->begin(), set->end(), v));
    }
  }
  REQUIRE(std::includes(s4.begin(), s4.end(), s2.begin(), s2.end()));
}

TEST_CASE("start time mode picks the departure clock") {
  // With a scripted slowdown after time 1, departing at t (diagonal) sees a
  // different environment than departing at 0 (fixed_zero).
  const ScriptedEnvironment env(2, 2.0, {1.0}, {2.0, 0.5});
  const auto zero = reachable_set(env, TravelModel::kIntegral, 3.0,
                                  StartTimeMode::kFixedZero);
  const auto diag = reachable_set(env, TravelModel::kIntegral, 3.0,
                                  StartTimeMode::kDiagonal);
  // Fixed-zero enjoys one fast unit before the slowdown; diagonal starts at
  // t=3 inside the slow regime and never escapes it.
  REQUIRE(zero.size() > diag.size());
  const auto slow_ball = l1_ball(Vertex{0, 0}, 1);  // 3 time units at 0.5
  CHECK(diag == slow_ball);
}

TEST_CASE("sweep rejects malformed requests") {
  const EnvironmentRealization env(sampled_spec(true, 2.0, 5));
  CHECK_THROWS_AS(
      earliest_arrival(env, TravelModel::kIntegral, Vertex{0, 0, 0}, 0.0, 3),
      ConfigError);
  CHECK_THROWS_AS(
      earliest_arrival(env, TravelModel::kIntegral, Vertex{0, 0}, -0.5, 3),
      ConfigError);
  SweepOptions bad;
  bad.stop_targets = {Vertex{9, 9}};
  CHECK_THROWS_AS(
      earliest_arrival(env, TravelModel::kIntegral, Vertex{0, 0}, 0.0, 3, bad),
      ConfigError);
  // Region cell cap: radius big enough to overflow the dense box budget.
  CHECK_THROWS_AS(ArrivalLabels(Vertex{0, 0}, 0.0, 200000), ConfigError);
}
