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

#ifndef TDFPP_SOLVER_HPP
#define TDFPP_SOLVER_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <functional>
#include <limits>
#include <optional>
#include <queue>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tdfpp/common.hpp"
#include "tdfpp/environment.hpp"
#include "tdfpp/lattice.hpp"
#include "tdfpp/travel.hpp"

namespace tdfpp {

// First passage times X^t(A,B) = inf over lattice paths of the folded
// travel time, departing A at clock time t.
//
// Why a bounded region is enough: the straight L1 path costs at most
// L*|A-B|_1 (every crossing takes <= L), and every crossing takes >= 1/L,
// so an optimal path uses at most L^2*|A-B|_1 edges and never leaves the
// L1 ball of that radius around A. The infimum is therefore a minimum over
// the finitely many paths inside that ball, and a label-setting search over
// the ball computes it exactly: arrivals are non-decreasing in departure
// time (leaving later never means arriving earlier), so the first time a
// vertex is extracted its label can never be improved.

/// L1 search radius that provably contains an optimal A->B path.
inline std::int64_t region_radius(double speed_bound, const Vertex& a,
                                  const Vertex& b) {
  if (!(speed_bound >= 1.0)) throw ConfigError("region_radius: L must be >= 1");
  const double dist = static_cast<double>(l1_distance(a, b));
  const double r = std::ceil(speed_bound * speed_bound * dist);
  if (!(r < 9.0e18)) throw ConfigError("region_radius: query too distant");
  return std::max<std::int64_t>(1, static_cast<std::int64_t>(r));
}

struct PassageQuery {
  Vertex a;
  Vertex b;
  double t0 = 0.0;

  void validate() const {
    if (a.dim() != b.dim()) {
      throw ConfigError("passage query endpoints have different dimensions");
    }
    if (!(t0 >= 0.0)) throw ConfigError("passage query start time must be >= 0");
  }
};

enum class TieOrder { kLexicographic, kReverseLexicographic };

struct SweepOptions {
  /// Stop once every listed vertex is finalized (empty = sweep whole region).
  std::vector<Vertex> stop_targets;
  /// Stop once the next extraction exceeds this arrival time; every vertex
  /// whose true label is <= the threshold is finalized before the stop.
  std::optional<double> stop_after;
  /// Priority-queue tie handling; label values are unaffected either way.
  TieOrder tie_order = TieOrder::kLexicographic;
};

namespace detail {
struct SweepAccess;
}

// Guard against accidentally materializing a multi-gigabyte dense box
// (e.g. a distant query in high dimension).
inline constexpr std::uint64_t kMaxRegionCells = 100'000'000;

/// Earliest arrival times from one source over the L1 ball of a given
/// radius, stored densely over the enclosing coordinate box. Vertices
/// outside the ball, or beyond an early stop, simply carry no label.
class ArrivalLabels {
 public:
  ArrivalLabels(Vertex source, double t0, std::int64_t radius)
      : source_(std::move(source)), t0_(t0), radius_(radius) {
    if (radius_ < 0) throw ConfigError("arrival label radius must be >= 0");
    const int d = source_.dim();
    side_ = 2 * static_cast<std::uint64_t>(radius_) + 1;
    std::uint64_t cells = 1;
    for (int i = 0; i < d; ++i) {
      if (cells > kMaxRegionCells / side_) {
        throw ConfigError(
            "search region needs more than " +
            std::to_string(kMaxRegionCells) +
            " cells; query is too distant for the dense solver");
      }
      cells *= side_;
    }
    for (int i = 0; i < d; ++i) {
      std::int64_t lo = 0;
      std::int64_t hi = 0;
      if (__builtin_sub_overflow(source_[i], radius_, &lo) ||
          __builtin_add_overflow(source_[i], radius_, &hi)) {
        throw ConfigError("search region overflows coordinate range");
      }
    }
    strides_.fill(1);
    for (int i = d - 2; i >= 0; --i) {
      strides_[static_cast<std::size_t>(i)] =
          strides_[static_cast<std::size_t>(i) + 1] * side_;
    }
    label_.assign(cells, std::numeric_limits<double>::infinity());
    done_.assign(cells, 0);
  }

  const Vertex& source() const { return source_; }
  double start_time() const { return t0_; }
  std::int64_t radius() const { return radius_; }
  int dim() const { return source_.dim(); }
  std::uint64_t cell_count() const { return label_.size(); }

  bool contains(const Vertex& v) const {
    return v.dim() == source_.dim() &&
           l1_distance(source_, v) <= static_cast<std::uint64_t>(radius_);
  }

  /// Finalized earliest arrival at v, if the sweep reached it.
  std::optional<double> label(const Vertex& v) const {
    if (!contains(v)) return std::nullopt;
    const std::uint64_t idx = encode(v);
    if (!done_[idx]) return std::nullopt;
    return label_[idx];
  }

  /// As label(), but demands presence.
  double at(const Vertex& v) const {
    const auto value = label(v);
    if (!value) {
      throw std::logic_error("no finalized arrival label for requested vertex");
    }
    return *value;
  }

  std::uint64_t finalized_count() const { return finalized_; }

  /// Visits finalized vertices in lexicographic coordinate order.
  template <typename Fn>
  void for_each_finalized(Fn&& fn) const {
    const int d = source_.dim();
    std::array<std::int64_t, kMaxDim> coords{};
    for (std::uint64_t idx = 0; idx < label_.size(); ++idx) {
      if (!done_[idx]) continue;
      std::uint64_t rest = idx;
      for (int i = d - 1; i >= 0; --i) {
        coords[static_cast<std::size_t>(i)] =
            static_cast<std::int64_t>(rest % side_) - radius_ + source_[i];
        rest /= side_;
      }
      fn(Vertex(std::span<const std::int64_t>(coords.data(),
                                              static_cast<std::size_t>(d))),
         label_[idx]);
    }
  }

 private:
  friend struct detail::SweepAccess;

  std::uint64_t encode(const Vertex& v) const {
    std::uint64_t idx = 0;
    for (int i = 0; i < source_.dim(); ++i) {
      idx = idx * side_ + static_cast<std::uint64_t>(v[i] - source_[i] + radius_);
    }
    return idx;
  }

  Vertex source_;
  double t0_ = 0.0;
  std::int64_t radius_ = 0;
  std::uint64_t side_ = 1;
  std::array<std::uint64_t, kMaxDim> strides_{};  // axis 0 most significant
  std::vector<double> label_;
  std::vector<std::uint8_t> done_;
  std::uint64_t finalized_ = 0;
};

namespace detail {

struct SweepAccess {
  static std::vector<double>& labels(ArrivalLabels& al) { return al.label_; }
  static std::vector<std::uint8_t>& done(ArrivalLabels& al) { return al.done_; }
  static const std::array<std::uint64_t, kMaxDim>& strides(
      const ArrivalLabels& al) {
    return al.strides_;
  }
  static std::uint64_t side(const ArrivalLabels& al) { return al.side_; }
  static std::uint64_t encode(const ArrivalLabels& al, const Vertex& v) {
    return al.encode(v);
  }
  static void count_finalized(ArrivalLabels& al) { ++al.finalized_; }
};

}  // namespace detail

/// Label-setting earliest-arrival sweep from `source` departing at `t0`,
/// over the L1 ball of `radius` around the source. Exact for the vertices
/// it finalizes (all of the ball unless an early stop is requested).
template <Environment Env>
ArrivalLabels earliest_arrival(const Env& env, TravelModel model,
                               const Vertex& source, double t0,
                               std::int64_t radius,
                               const SweepOptions& options = {}) {
  if (source.dim() != env.dimension()) {
    throw ConfigError("sweep source dimension does not match environment");
  }
  if (!(t0 >= 0.0)) throw ConfigError("sweep start time must be >= 0");

  ArrivalLabels out(source, t0, radius);
  auto& labels = detail::SweepAccess::labels(out);
  auto& done = detail::SweepAccess::done(out);
  const auto& strides = detail::SweepAccess::strides(out);
  const std::uint64_t side = detail::SweepAccess::side(out);
  const std::uint64_t cells = labels.size();
  const int d = source.dim();
  const bool reversed = options.tie_order == TieOrder::kReverseLexicographic;

  std::vector<std::uint64_t> targets;
  targets.reserve(options.stop_targets.size());
  for (const Vertex& v : options.stop_targets) {
    if (!out.contains(v)) {
      throw ConfigError("stop target lies outside the search region");
    }
    targets.push_back(detail::SweepAccess::encode(out, v));
  }
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  std::size_t targets_left = targets.size();

  // Min-heap on (arrival, tie key); the tie key makes equal-label pops come
  // out in lexicographic vertex order (flat index order IS lexicographic
  // order because axis 0 carries the largest stride).
  using HeapEntry = std::pair<double, std::uint64_t>;
  std::priority_queue<HeapEntry, std::vector<HeapEntry>, std::greater<>> heap;
  const auto tie_key = [&](std::uint64_t idx) {
    return reversed ? cells - 1 - idx : idx;
  };

  const std::uint64_t source_idx = detail::SweepAccess::encode(out, source);
  labels[source_idx] = t0;
  heap.emplace(t0, tie_key(source_idx));

  std::array<std::int64_t, kMaxDim> coords{};   // absolute coords of u
  std::array<std::int64_t, kMaxDim> offsets{};  // coords - source
  double last_finalized = t0;

  while (!heap.empty()) {
    const auto [ulabel, key] = heap.top();
    heap.pop();
    const std::uint64_t uidx = reversed ? cells - 1 - key : key;
    if (done[uidx]) continue;
    if (options.stop_after && ulabel > *options.stop_after) break;
    if (ulabel < last_finalized) {
      throw std::logic_error("earliest-arrival extraction order regressed");
    }
    last_finalized = ulabel;
    done[uidx] = 1;
    detail::SweepAccess::count_finalized(out);

    if (targets_left > 0 &&
        std::binary_search(targets.begin(), targets.end(), uidx)) {
      if (--targets_left == 0) break;
    }

    std::uint64_t rest = uidx;
    std::uint64_t ul1 = 0;
    for (int i = d - 1; i >= 0; --i) {
      const std::int64_t off = static_cast<std::int64_t>(rest % side) - radius;
      rest /= side;
      offsets[static_cast<std::size_t>(i)] = off;
      coords[static_cast<std::size_t>(i)] = source[i] + off;
      ul1 += static_cast<std::uint64_t>(abs64(off));
    }
    const std::span<const std::int64_t> ucoords(coords.data(),
                                                static_cast<std::size_t>(d));

    for (int axis = 0; axis < d; ++axis) {
      const auto ai = static_cast<std::size_t>(axis);
      for (const int step : {+1, -1}) {
        const std::int64_t noff = offsets[ai] + step;
        const std::uint64_t nl1 = ul1 -
                                  static_cast<std::uint64_t>(abs64(offsets[ai])) +
                                  static_cast<std::uint64_t>(abs64(noff));
        if (nl1 > static_cast<std::uint64_t>(radius)) continue;
        // Canonical edge id uses the lower endpoint, so a step in the
        // negative direction is an edge based at the neighbor.
        double tau;
        if (step > 0) {
          tau = traversal_time(env, model, ucoords, axis, ulabel);
        } else {
          coords[ai] -= 1;
          tau = traversal_time(env, model, ucoords, axis, ulabel);
          coords[ai] += 1;
        }
        const std::uint64_t nidx =
            step > 0 ? uidx + strides[ai] : uidx - strides[ai];
        const double candidate = ulabel + tau;
        if (candidate < labels[nidx]) {
          labels[nidx] = candidate;
          heap.emplace(candidate, tie_key(nidx));
        }
      }
    }
  }
  return out;
}

/// X^{t0}(A,B): earliest arrival at B when departing A at t0, minus t0.
template <Environment Env>
double first_passage(const Env& env, TravelModel model,
                     const PassageQuery& query) {
  query.validate();
  if (query.a.dim() != env.dimension()) {
    throw ConfigError("passage query dimension does not match environment");
  }
  if (query.a == query.b) return 0.0;

  const std::int64_t radius = region_radius(env.speed_bound(), query.a, query.b);
  SweepOptions options;
  options.stop_targets = {query.b};
  const ArrivalLabels labels =
      earliest_arrival(env, model, query.a, query.t0, radius, options);
  const double passage = labels.at(query.b) - query.t0;

  const double dist = static_cast<double>(l1_distance(query.a, query.b));
  const double bound = env.speed_bound();
  if (passage < dist / bound - 1e-9 || passage > bound * dist + 1e-9) {
    throw std::logic_error("passage time violates the speed-bound envelope");
  }
  return passage;
}

/// X_{m,n}^{t,e} = X^t(m*e, n*e) along lattice direction e.
template <Environment Env>
double directional_passage(const Env& env, TravelModel model, const Vertex& e,
                           std::int64_t m, std::int64_t n, double t) {
  if (e.is_zero()) throw ConfigError("direction vector must be nonzero");
  if (!(0 <= m && m < n)) {
    throw ConfigError("directional passage requires 0 <= m < n");
  }
  return first_passage(
      env, model, PassageQuery{Vertex::scaled(e, m), Vertex::scaled(e, n), t});
}

// ---------------------------------------------------------------------------
// Brute-force oracle
// ---------------------------------------------------------------------------

/// Hard cap on DFS node expansions before the oracle gives up.
inline constexpr std::uint64_t kOracleNodeCap = 50'000'000;

namespace detail {

template <Environment Env>
struct OracleSearch {
  const Env& env;
  TravelModel model;
  const Vertex& target;
  int max_edges;
  double min_edge_time;  // 1/L: no crossing is faster than this
  std::uint64_t budget;
  double best = std::numeric_limits<double>::infinity();

  void run(const Vertex& at, int steps_used, double clock) {
    if (budget == 0) {
      throw OracleInfeasibleError(
          "brute-force oracle exceeded its node budget; shrink the query");
    }
    --budget;

    const std::uint64_t dist = l1_distance(at, target);
    if (dist == 0) {
      best = std::min(best, clock);
      return;
    }
    if (steps_used + static_cast<std::int64_t>(dist) > max_edges) return;
    // Admissible lower bound: every edge takes at least 1/L, so no
    // completion through `at` can beat an already-found value.
    if (clock + static_cast<double>(dist) * min_edge_time >= best) return;

    auto moves = neighbors(at);
    std::stable_sort(moves.begin(), moves.end(),
                     [&](const auto& lhs, const auto& rhs) {
                       return l1_distance(lhs.second, target) <
                              l1_distance(rhs.second, target);
                     });
    for (const auto& [edge, next] : moves) {
      const double tau = traversal_time(env, model, edge, clock);
      run(next, steps_used + 1, clock + tau);
    }
  }
};

}  // namespace detail

/// Exhaustive minimum of the folded travel time over every A->B walk of at
/// most `max_edges` edges. Exact whenever max_edges >= L^2 * |A-B|_1 (the
/// optimal-path length bound); intended for tiny queries as an independent
/// check on the sweep solver.
template <Environment Env>
double brute_force_first_passage(const Env& env, TravelModel model,
                                 const PassageQuery& query, int max_edges,
                                 std::uint64_t node_budget = kOracleNodeCap) {
  query.validate();
  if (query.a.dim() != env.dimension()) {
    throw ConfigError("passage query dimension does not match environment");
  }
  if (query.a == query.b) return 0.0;
  if (max_edges < 0 ||
      static_cast<std::uint64_t>(max_edges) < l1_distance(query.a, query.b)) {
    throw ConfigError("brute force: max_edges below the L1 distance");
  }

  detail::OracleSearch<Env> search{env,
                                   model,
                                   query.b,
                                   max_edges,
                                   1.0 / env.speed_bound(),
                                   node_budget};
  // Seed the bound with one concrete path (axis-by-axis toward B) so the
  // lower-bound pruning bites immediately.
  Path straight(query.a);
  Vertex cursor = query.a;
  for (int axis = 0; axis < query.a.dim(); ++axis) {
    while (cursor[axis] != query.b[axis]) {
      const int sgn = query.b[axis] > cursor[axis] ? 1 : -1;
      const Edge e = sgn > 0 ? Edge(cursor, axis)
                             : Edge(cursor.shifted(axis, -1), axis);
      straight.append(e);
      cursor = cursor.shifted(axis, sgn);
    }
  }
  search.best =
      query.t0 + path_travel_time(env, model, straight, query.t0);

  search.run(query.a, 0, query.t0);
  return search.best - query.t0;
}

// ---------------------------------------------------------------------------
// Reachable sets
// ---------------------------------------------------------------------------

enum class StartTimeMode { kFixedZero, kDiagonal };

inline StartTimeMode start_time_mode_from_name(const std::string& name) {
  if (name == "fixed_zero") return StartTimeMode::kFixedZero;
  if (name == "diagonal") return StartTimeMode::kDiagonal;
  throw ConfigError("unknown start time mode '" + name +
                    "' (expected 'fixed_zero' or 'diagonal')");
}

inline const char* start_time_mode_name(StartTimeMode mode) {
  return mode == StartTimeMode::kFixedZero ? "fixed_zero" : "diagonal";
}

/// S_t = {A : X^{t0}(0,A) <= t}, with t0 = 0 (fixed_zero) or t0 = t
/// (diagonal). Any such A is reached by a path of at most ceil(L*t) edges
/// (cost <= t, each edge >= 1/L), so the ball of radius ceil(L*t)+1 around
/// the origin contains every member; vertices are returned in lexicographic
/// order.
template <Environment Env>
std::vector<Vertex> reachable_set(const Env& env, TravelModel model, double t,
                                  StartTimeMode mode = StartTimeMode::kFixedZero) {
  if (!(t >= 0.0)) throw ConfigError("reachable set horizon must be >= 0");
  const double t0 = mode == StartTimeMode::kDiagonal ? t : 0.0;
  const double r = std::ceil(env.speed_bound() * t) + 1.0;
  if (!(r < 9.0e18)) throw ConfigError("reachable set horizon too large");
  const auto radius = static_cast<std::int64_t>(r);

  SweepOptions options;
  options.stop_after = t0 + t;
  const ArrivalLabels labels = earliest_arrival(
      env, model, Vertex::origin(env.dimension()), t0, radius, options);

  std::vector<Vertex> members;
  labels.for_each_finalized([&](const Vertex& v, double arrival_time) {
    if (arrival_time - t0 <= t) members.push_back(v);
  });
  return members;
}

}  // namespace tdfpp

#endif  // TDFPP_SOLVER_HPP
