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

#ifndef TDFPP_ANALYSIS_HPP
#define TDFPP_ANALYSIS_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "tdfpp/common.hpp"
#include "tdfpp/environment.hpp"
#include "tdfpp/lattice.hpp"
#include "tdfpp/parallel.hpp"
#include "tdfpp/rng.hpp"
#include "tdfpp/solver.hpp"
#include "tdfpp/travel.hpp"

namespace tdfpp {

// Monte Carlo estimators over independent environment realizations, plus
// the randomized property checks used by the verification front end.
//
// Determinism contract: replicate r always runs under seed
// derive_seed(base_seed, r); every parallel loop writes into per-index
// slots and all reductions happen sequentially afterwards, so results are
// identical for any worker count.

inline constexpr double kCheckTolerance = 1e-9;

/// Welford single-pass accumulator.
class RunningStats {
 public:
  void push(double x) {
    ++n_;
    const double delta = x - mean_;
    mean_ += delta / static_cast<double>(n_);
    m2_ += delta * (x - mean_);
  }

  std::uint64_t count() const { return n_; }
  double mean() const { return mean_; }

  double variance() const {
    return n_ < 2 ? 0.0 : m2_ / static_cast<double>(n_ - 1);
  }
  double stddev() const { return std::sqrt(variance()); }
  double std_error() const {
    return n_ == 0 ? 0.0 : stddev() / std::sqrt(static_cast<double>(n_));
  }

 private:
  std::uint64_t n_ = 0;
  double mean_ = 0.0;
  double m2_ = 0.0;
};

// ---------------------------------------------------------------------------
// Directional speed
// ---------------------------------------------------------------------------

struct SpeedEstimate {
  struct Row {
    std::int64_t n;
    double mean;       // mean of X_{0,n}/n over replicates
    double stddev;     // sample std of X_{0,n}/n
    double std_error;  // stddev / sqrt(replicates)
    double envelope;   // running min over k <= n of (E[X_{0,k}] + c_env)/k
    std::uint64_t replicates;
  };

  Vertex direction;
  double c_env = 0.0;
  std::vector<Row> rows;    // one per grid point, ascending n
  double limit_estimate = 0.0;   // mean at the largest n
  double ci_half_width = 0.0;    // 1.96 * std_error at the largest n
};

/// Dependence-range constant entering the subadditive envelope. Block
/// regimes decorrelate only after one full period, so the period enters the
/// envelope; renewal regimes need no additive correction.
inline double envelope_constant(const EnvironmentSpec& spec) {
  return spec.kind == EnvKind::kBlock ? spec.block_period : 0.0;
}

/// Monte Carlo law of X_{0,n}/n along direction e over the given n grid.
/// One earliest-arrival sweep per replicate serves every grid point.
inline SpeedEstimate estimate_speed(const EnvironmentSpec& spec,
                                    TravelModel model, const Vertex& e,
                                    const std::vector<std::int64_t>& n_grid,
                                    std::uint64_t replicates,
                                    std::uint64_t base_seed, int workers = 1) {
  spec.validate();
  if (e.dim() != spec.dimension) {
    throw ConfigError("speed direction dimension does not match environment");
  }
  if (e.is_zero()) throw ConfigError("speed direction must be nonzero");
  if (n_grid.empty()) throw ConfigError("speed n_grid must be nonempty");
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    if (n_grid[j] < 1 || (j > 0 && n_grid[j] <= n_grid[j - 1])) {
      throw ConfigError("speed n_grid must be strictly increasing and >= 1");
    }
  }
  if (replicates < 2) throw ConfigError("speed estimation needs >= 2 replicates");

  const Vertex source = Vertex::origin(e.dim());
  std::vector<Vertex> targets;
  targets.reserve(n_grid.size());
  for (const std::int64_t n : n_grid) targets.push_back(Vertex::scaled(e, n));
  const std::int64_t radius =
      region_radius(spec.field.speed_bound, source, targets.back());

  // passage[r * |grid| + j] = X_{0, n_j} under replicate r's realization.
  std::vector<double> passage(replicates * n_grid.size());
  for_each_index(replicates, workers, [&](std::uint64_t r) {
    const EnvironmentRealization env(spec.with_seed(derive_seed(base_seed, r)));
    SweepOptions options;
    options.stop_targets = targets;
    const ArrivalLabels labels =
        earliest_arrival(env, model, source, 0.0, radius, options);
    for (std::size_t j = 0; j < n_grid.size(); ++j) {
      passage[r * n_grid.size() + j] = labels.at(targets[j]);
    }
  });

  SpeedEstimate out;
  out.direction = e;
  out.c_env = envelope_constant(spec);
  double envelope = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < n_grid.size(); ++j) {
    RunningStats per_n;
    RunningStats raw;
    for (std::uint64_t r = 0; r < replicates; ++r) {
      const double x = passage[r * n_grid.size() + j];
      raw.push(x);
      per_n.push(x / static_cast<double>(n_grid[j]));
    }
    envelope = std::min(
        envelope, (raw.mean() + out.c_env) / static_cast<double>(n_grid[j]));
    out.rows.push_back({n_grid[j], per_n.mean(), per_n.stddev(),
                        per_n.std_error(), envelope, replicates});
  }
  out.limit_estimate = out.rows.back().mean;
  out.ci_half_width = 1.96 * out.rows.back().std_error;
  return out;
}

// ---------------------------------------------------------------------------
// Reachable-set geometry helpers
// ---------------------------------------------------------------------------

namespace detail {

/// cumulative[k] = #{x in Z^d : |x|_1 <= k}, k = 0..k_max.
inline std::vector<std::uint64_t> lattice_ball_sizes(int dim,
                                                     std::int64_t k_max) {
  const auto n = static_cast<std::size_t>(k_max) + 1;
  // shell[k] = points at L1 norm exactly k, built one dimension at a time.
  std::vector<std::uint64_t> shell(n, 0);
  shell[0] = 1;
  for (int axis = 1; axis <= dim; ++axis) {
    std::vector<std::uint64_t> next(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
      if (shell[k] == 0) continue;
      next[k] += shell[k];
      for (std::size_t m = 1; m + k < n; ++m) next[k + m] += 2 * shell[k];
    }
    shell.swap(next);
  }
  std::vector<std::uint64_t> cumulative(n, 0);
  std::uint64_t total = 0;
  for (std::size_t k = 0; k < n; ++k) {
    total += shell[k];
    cumulative[k] = total;
  }
  return cumulative;
}

/// Largest integer r such that every lattice point with |x|_1 <= r belongs
/// to `members`; -1 when even the origin is missing.
inline std::int64_t full_ball_radius(const std::vector<Vertex>& members) {
  if (members.empty()) return -1;
  const int dim = members.front().dim();
  std::int64_t max_norm = 0;
  for (const Vertex& v : members) {
    max_norm = std::max(max_norm, static_cast<std::int64_t>(l1_norm(v)));
  }
  std::vector<std::uint64_t> per_shell(static_cast<std::size_t>(max_norm) + 1,
                                       0);
  for (const Vertex& v : members) ++per_shell[l1_norm(v)];

  const std::vector<std::uint64_t> full = lattice_ball_sizes(dim, max_norm);
  std::uint64_t seen = 0;
  std::int64_t radius = -1;
  for (std::int64_t k = 0; k <= max_norm; ++k) {
    seen += per_shell[static_cast<std::size_t>(k)];
    if (seen != full[static_cast<std::size_t>(k)]) break;
    radius = k;
  }
  return radius;
}

inline std::int64_t max_l1_norm(const std::vector<Vertex>& members) {
  std::int64_t max_norm = 0;
  for (const Vertex& v : members) {
    max_norm = std::max(max_norm, static_cast<std::int64_t>(l1_norm(v)));
  }
  return max_norm;
}

/// Nearest-neighbor queries over a fixed scaled point cloud, bucketed on a
/// uniform grid. Bucket keys are hashed; a hash collision merely merges two
/// candidate lists, so results stay exact.
class NeighborGrid {
 public:
  NeighborGrid(const std::vector<Vertex>& points, double scale, double cell)
      : dim_(points.empty() ? 1 : points.front().dim()), cell_(cell) {
    pts_.reserve(points.size());
    lo_.fill(std::numeric_limits<std::int64_t>::max());
    hi_.fill(std::numeric_limits<std::int64_t>::min());
    for (const Vertex& v : points) {
      std::array<double, kMaxDim> p{};
      for (int i = 0; i < dim_; ++i) p[static_cast<std::size_t>(i)] = scale * static_cast<double>(v[i]);
      pts_.push_back(p);
    }
    for (std::uint32_t idx = 0; idx < pts_.size(); ++idx) {
      std::array<std::int64_t, kMaxDim> q{};
      quantize(pts_[idx], q);
      for (int i = 0; i < dim_; ++i) {
        lo_[static_cast<std::size_t>(i)] = std::min(lo_[static_cast<std::size_t>(i)], q[static_cast<std::size_t>(i)]);
        hi_[static_cast<std::size_t>(i)] = std::max(hi_[static_cast<std::size_t>(i)], q[static_cast<std::size_t>(i)]);
      }
      buckets_[key(q)].push_back(idx);
    }
  }

  bool empty() const { return pts_.empty(); }

  /// Exact min over stored points of the L1 distance to `p`.
  double min_l1(const std::array<double, kMaxDim>& p) const {
    if (pts_.empty()) return std::numeric_limits<double>::infinity();
    std::array<std::int64_t, kMaxDim> center{};
    quantize(p, center);
    std::int64_t ring_max = 0;
    for (int i = 0; i < dim_; ++i) {
      const auto s = static_cast<std::size_t>(i);
      ring_max = std::max(ring_max, std::max(abs64(center[s] - lo_[s]),
                                             abs64(hi_[s] - center[s])));
    }
    double best = std::numeric_limits<double>::infinity();
    for (std::int64_t ring = 0; ring <= ring_max; ++ring) {
      // Any point in an unexplored bucket differs by >= ring cells in some
      // axis, hence by >= (ring - 1) * cell in that coordinate.
      if (best <= static_cast<double>(ring - 1) * cell_) break;
      scan_ring(p, center, ring, best);
    }
    return best;
  }

 private:
  void quantize(const std::array<double, kMaxDim>& p,
                std::array<std::int64_t, kMaxDim>& q) const {
    for (int i = 0; i < dim_; ++i) {
      const auto s = static_cast<std::size_t>(i);
      q[s] = static_cast<std::int64_t>(std::floor(p[s] / cell_));
    }
  }

  std::uint64_t key(const std::array<std::int64_t, kMaxDim>& q) const {
    std::uint64_t h = 0x8cb92ba72f3d8dd7ULL;
    for (int i = 0; i < dim_; ++i) {
      h = chain_absorb(h, static_cast<std::uint64_t>(q[static_cast<std::size_t>(i)]));
    }
    return h;
  }

  void scan_ring(const std::array<double, kMaxDim>& p,
                 const std::array<std::int64_t, kMaxDim>& center,
                 std::int64_t ring, double& best) const {
    std::array<std::int64_t, kMaxDim> cursor{};
    scan_ring_rec(p, center, ring, 0, false, cursor, best);
  }

  void scan_ring_rec(const std::array<double, kMaxDim>& p,
                     const std::array<std::int64_t, kMaxDim>& center,
                     std::int64_t ring, int axis, bool on_ring,
                     std::array<std::int64_t, kMaxDim>& cursor,
                     double& best) const {
    if (axis == dim_) {
      if (!on_ring && ring != 0) return;  // interior cells were already seen
      const auto it = buckets_.find(key(cursor));
      if (it == buckets_.end()) return;
      for (const std::uint32_t idx : it->second) {
        double dist = 0.0;
        for (int i = 0; i < dim_; ++i) {
          const auto s = static_cast<std::size_t>(i);
          dist += std::abs(p[s] - pts_[idx][s]);
        }
        best = std::min(best, dist);
      }
      return;
    }
    const auto s = static_cast<std::size_t>(axis);
    for (std::int64_t off = -ring; off <= ring; ++off) {
      cursor[s] = center[s] + off;
      scan_ring_rec(p, center, ring, axis + 1,
                    on_ring || abs64(off) == ring, cursor, best);
    }
  }

  int dim_;
  double cell_;
  std::vector<std::array<double, kMaxDim>> pts_;
  std::array<std::int64_t, kMaxDim> lo_{};
  std::array<std::int64_t, kMaxDim> hi_{};
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> buckets_;
};

/// Symmetric Hausdorff-style L1 discrepancy between a/scale_a and
/// b/scale_b: the larger of the two directed max-min distances.
inline double scaled_set_discrepancy(const std::vector<Vertex>& a,
                                     double inv_a,
                                     const std::vector<Vertex>& b,
                                     double inv_b) {
  if (a.empty() || b.empty()) {
    return a.empty() && b.empty()
               ? 0.0
               : std::numeric_limits<double>::infinity();
  }
  const int dim = a.front().dim();
  const double cell = std::max(inv_a, inv_b);
  const NeighborGrid grid_a(a, inv_a, cell);
  const NeighborGrid grid_b(b, inv_b, cell);

  double worst = 0.0;
  std::array<double, kMaxDim> p{};
  for (const Vertex& v : a) {
    for (int i = 0; i < dim; ++i) p[static_cast<std::size_t>(i)] = inv_a * static_cast<double>(v[i]);
    worst = std::max(worst, grid_b.min_l1(p));
  }
  for (const Vertex& v : b) {
    for (int i = 0; i < dim; ++i) p[static_cast<std::size_t>(i)] = inv_b * static_cast<double>(v[i]);
    worst = std::max(worst, grid_a.min_l1(p));
  }
  return worst;
}

/// Convex hull of 2-d points (Andrew monotone chain), counter-clockwise,
/// collinear points dropped.
inline std::vector<std::array<double, 2>> convex_hull_2d(
    std::vector<std::array<double, 2>> pts) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() < 3) return pts;

  const auto cross = [](const std::array<double, 2>& o,
                        const std::array<double, 2>& a,
                        const std::array<double, 2>& b) {
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
  };

  std::vector<std::array<double, 2>> hull(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && cross(hull[k - 2], hull[k - 1], p) <= 0.0) --k;
    hull[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (auto it = pts.rbegin() + 1; it != pts.rend(); ++it) {
    while (k >= lower && cross(hull[k - 2], hull[k - 1], *it) <= 0.0) --k;
    hull[k++] = *it;
  }
  hull.resize(k - 1);
  return hull;
}

inline double polygon_area(const std::vector<std::array<double, 2>>& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    twice += p[0] * q[1] - q[0] * p[1];
  }
  return std::abs(twice) / 2.0;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Limit shape
// ---------------------------------------------------------------------------

struct ShapeRow {
  double t = 0.0;
  StartTimeMode mode = StartTimeMode::kFixedZero;
  double mean_inner_radius = 0.0;  // mean over replicates, scaled by 1/t
  double mean_outer_radius = 0.0;
  double mean_point_count = 0.0;
  double min_inner_radius = 0.0;  // extremes across replicates
  double max_outer_radius = 0.0;
  bool sandwich_ok = false;  // every replicate inside the speed-bound annulus
  std::vector<Vertex> majority_points;  // present in > half the replicates
  double majority_inner_radius = 0.0;
  double majority_outer_radius = 0.0;
  std::optional<double> convexity_ratio;  // d=2: hull area / (count / t^2)
  std::vector<std::array<double, 2>> hull;  // d=2: scaled majority hull
};

struct ShapeEstimate {
  std::vector<double> t_list;
  std::uint64_t replicates = 0;
  std::vector<ShapeRow> rows;  // t-major, fixed_zero before diagonal

  // Per-replicate diagnostics, fixed_zero mode. Outer index = position in
  // t_list (or consecutive t pair), inner index = replicate.
  std::vector<std::vector<double>> replicate_inner;
  std::vector<std::vector<double>> replicate_outer;
  std::vector<std::vector<std::uint64_t>> replicate_points;
  std::vector<std::uint8_t> replicate_nested;  // whole S_{t_1} ⊆ ... chain held
  std::vector<std::vector<double>> pair_discrepancy;
  double majority_discrepancy_last_pair = 0.0;

  const ShapeRow& row(double t, StartTimeMode mode) const {
    for (const ShapeRow& r : rows) {
      if (r.t == t && r.mode == mode) return r;
    }
    throw std::logic_error("no shape row for requested (t, mode)");
  }
};

/// Reachable-set statistics at each horizon in t_list, under both start-time
/// conventions. Nesting and shape-discrepancy diagnostics use the fixed
/// departure-time convention, where S_t grows with t within one realization.
inline ShapeEstimate estimate_shape(const EnvironmentSpec& spec,
                                    TravelModel model,
                                    const std::vector<double>& t_list,
                                    std::uint64_t replicates,
                                    std::uint64_t base_seed, int workers = 1) {
  spec.validate();
  if (t_list.empty()) throw ConfigError("shape t_list must be nonempty");
  for (std::size_t j = 0; j < t_list.size(); ++j) {
    if (!(t_list[j] > 0.0) || (j > 0 && !(t_list[j] > t_list[j - 1]))) {
      throw ConfigError("shape t_list must be positive and strictly increasing");
    }
  }
  if (replicates < 1) throw ConfigError("shape estimation needs >= 1 replicate");

  const std::size_t nt = t_list.size();
  const double bound = spec.field.speed_bound;

  // members[(r * nt + j) * 2 + mode] = reachable set, lexicographic order.
  std::vector<std::vector<Vertex>> members(replicates * nt * 2);
  for_each_index(replicates, workers, [&](std::uint64_t r) {
    const EnvironmentRealization env(spec.with_seed(derive_seed(base_seed, r)));
    for (std::size_t j = 0; j < nt; ++j) {
      members[(r * nt + j) * 2 + 0] =
          reachable_set(env, model, t_list[j], StartTimeMode::kFixedZero);
      members[(r * nt + j) * 2 + 1] =
          reachable_set(env, model, t_list[j], StartTimeMode::kDiagonal);
    }
  });

  ShapeEstimate out;
  out.t_list = t_list;
  out.replicates = replicates;
  out.replicate_inner.assign(nt, {});
  out.replicate_outer.assign(nt, {});
  out.replicate_points.assign(nt, {});
  out.replicate_nested.assign(replicates, 1);
  out.pair_discrepancy.assign(nt > 1 ? nt - 1 : 0, {});

  // Per-replicate diagnostics (fixed_zero).
  for (std::uint64_t r = 0; r < replicates; ++r) {
    for (std::size_t j = 0; j < nt; ++j) {
      const auto& set_j = members[(r * nt + j) * 2];
      out.replicate_inner[j].push_back(
          static_cast<double>(detail::full_ball_radius(set_j)) / t_list[j]);
      out.replicate_outer[j].push_back(
          static_cast<double>(detail::max_l1_norm(set_j)) / t_list[j]);
      out.replicate_points[j].push_back(set_j.size());
      if (j + 1 < nt) {
        const auto& set_next = members[(r * nt + j + 1) * 2];
        // Both sets come out sorted, so inclusion is a single merge pass.
        if (!std::includes(set_next.begin(), set_next.end(), set_j.begin(),
                           set_j.end())) {
          out.replicate_nested[r] = 0;
        }
        out.pair_discrepancy[j].push_back(detail::scaled_set_discrepancy(
            set_j, 1.0 / t_list[j], set_next, 1.0 / t_list[j + 1]));
      }
    }
  }

  // Aggregate rows, both modes.
  for (std::size_t j = 0; j < nt; ++j) {
    for (int mode_idx = 0; mode_idx < 2; ++mode_idx) {
      ShapeRow row;
      row.t = t_list[j];
      row.mode = mode_idx == 0 ? StartTimeMode::kFixedZero
                               : StartTimeMode::kDiagonal;

      RunningStats inner, outer, count;
      std::unordered_map<Vertex, std::uint64_t, VertexHash> freq;
      double min_inner = std::numeric_limits<double>::infinity();
      double max_outer = 0.0;
      for (std::uint64_t r = 0; r < replicates; ++r) {
        const auto& set = members[(r * nt + j) * 2 + static_cast<std::size_t>(mode_idx)];
        const double in_r =
            static_cast<double>(detail::full_ball_radius(set)) / t_list[j];
        const double out_r =
            static_cast<double>(detail::max_l1_norm(set)) / t_list[j];
        inner.push(in_r);
        outer.push(out_r);
        count.push(static_cast<double>(set.size()));
        min_inner = std::min(min_inner, in_r);
        max_outer = std::max(max_outer, out_r);
        for (const Vertex& v : set) ++freq[v];
      }
      row.mean_inner_radius = inner.mean();
      row.mean_outer_radius = outer.mean();
      row.mean_point_count = count.mean();
      row.min_inner_radius = min_inner;
      row.max_outer_radius = max_outer;
      const double slack = 2.0 / row.t;
      row.sandwich_ok = min_inner >= 1.0 / bound - slack &&
                        max_outer <= bound + slack;

      for (const auto& [v, c] : freq) {
        if (2 * c > replicates) row.majority_points.push_back(v);
      }
      std::sort(row.majority_points.begin(), row.majority_points.end());
      row.majority_inner_radius =
          static_cast<double>(detail::full_ball_radius(row.majority_points)) /
          row.t;
      row.majority_outer_radius =
          static_cast<double>(detail::max_l1_norm(row.majority_points)) / row.t;

      if (spec.dimension == 2 && !row.majority_points.empty()) {
        // Hull the raw lattice points first: integer-valued doubles keep the
        // orientation test exact, so collinear boundary points are dropped
        // reliably.  Scaling the corners afterwards preserves the hull.
        std::vector<std::array<double, 2>> lattice;
        lattice.reserve(row.majority_points.size());
        for (const Vertex& v : row.majority_points) {
          lattice.push_back(
              {static_cast<double>(v[0]), static_cast<double>(v[1])});
        }
        row.hull = detail::convex_hull_2d(std::move(lattice));
        for (auto& corner : row.hull) {
          corner[0] /= row.t;
          corner[1] /= row.t;
        }
        const double cells = static_cast<double>(row.majority_points.size()) /
                             (row.t * row.t);
        row.convexity_ratio = detail::polygon_area(row.hull) / cells;
      }
      out.rows.push_back(std::move(row));
    }
  }

  if (nt >= 2) {
    const ShapeRow& a = out.row(t_list[nt - 2], StartTimeMode::kFixedZero);
    const ShapeRow& b = out.row(t_list[nt - 1], StartTimeMode::kFixedZero);
    out.majority_discrepancy_last_pair = detail::scaled_set_discrepancy(
        a.majority_points, 1.0 / a.t, b.majority_points, 1.0 / b.t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Hypothesis verification
// ---------------------------------------------------------------------------

struct HypothesisCheck {
  std::string name;
  std::uint64_t samples = 0;
  std::uint64_t violations = 0;
  double max_violation = 0.0;      // largest excess beyond the tolerance
  std::uint64_t worst_seed = 0;    // environment seed reproducing it
  bool has_worst_seed = false;
};

struct HypothesisReport {
  std::vector<HypothesisCheck> checks;
  double tolerance = kCheckTolerance;

  bool all_passed() const {
    for (const auto& c : checks) {
      if (c.violations != 0) return false;
    }
    return true;
  }
};

namespace detail {

/// Deterministic stream of variates for one sampled instance.
struct UnitStream {
  SeedChain chain;

  explicit UnitStream(std::uint64_t seed)
      : chain(seed, Stream::kInstance) {}

  double next() {
    chain.absorb(0);
    return chain.unit();
  }

  /// Uniform integer in [lo, hi].
  std::int64_t next_int(std::int64_t lo, std::int64_t hi) {
    const double u = next();
    const auto span = static_cast<double>(hi - lo + 1);
    const auto k = static_cast<std::int64_t>(u * span);
    return lo + std::min(k, hi - lo);
  }
};

inline Vertex random_direction(UnitStream& s, int dim) {
  Vertex v;
  do {
    std::array<std::int64_t, kMaxDim> c{};
    for (int i = 0; i < dim; ++i) {
      c[static_cast<std::size_t>(i)] = s.next_int(-1, 1);
    }
    v = Vertex(std::span<const std::int64_t>(c.data(), static_cast<std::size_t>(dim)));
  } while (v.is_zero());
  return v;
}

inline Vertex random_vertex(UnitStream& s, int dim, std::int64_t box) {
  std::array<std::int64_t, kMaxDim> c{};
  for (int i = 0; i < dim; ++i) {
    c[static_cast<std::size_t>(i)] = s.next_int(-box, box);
  }
  return Vertex(std::span<const std::int64_t>(c.data(), static_cast<std::size_t>(dim)));
}

}  // namespace detail

/// Randomized checks of the structural properties the passage times must
/// satisfy: path-composition subadditivity, delayed-start domination,
/// first-in-first-out edge arrivals, the adjacent-step bound, and the
/// two-sided speed envelope. `fault_shift` > 0 corrupts the arrival
/// function used by the FIFO check (arrival - shift * t); it exists so the
/// checker itself can be shown to catch violations.
inline HypothesisReport verify_hypotheses(const EnvironmentSpec& spec,
                                          TravelModel model,
                                          std::uint64_t samples,
                                          std::uint64_t base_seed,
                                          int workers = 1,
                                          double fault_shift = 0.0) {
  spec.validate();
  if (samples < 1) throw ConfigError("verification needs >= 1 sample");
  const int dim = spec.dimension;
  const double bound = spec.field.speed_bound;

  enum CheckId : std::uint64_t {
    kSubadditivity = 0,
    kTimeShift,
    kFifo,
    kAdjacentBound,
    kPassageBounds,
    kCheckCount
  };
  static const char* const kNames[kCheckCount] = {
      "subadditivity", "time_shift_domination", "fifo_arrivals",
      "adjacent_step_bound", "passage_speed_envelope"};

  // excess[check * samples + i]: raw violation margin; > tolerance counts.
  std::vector<double> excess(kCheckCount * samples,
                             -std::numeric_limits<double>::infinity());

  for_each_index(kCheckCount * samples, workers, [&](std::uint64_t unit) {
    const auto check = static_cast<CheckId>(unit / samples);
    const std::uint64_t i = unit % samples;
    const std::uint64_t env_seed = derive_seed(base_seed, check, i);
    detail::UnitStream vars(env_seed);
    const EnvironmentRealization env(spec.with_seed(env_seed));

    switch (check) {
      case kSubadditivity: {
        const Vertex e = detail::random_direction(vars, dim);
        const std::int64_t m = vars.next_int(0, 2);
        const std::int64_t k = m + vars.next_int(1, 2);
        const std::int64_t n = k + vars.next_int(1, 2);
        const double t = 10.0 * vars.next();
        const double whole = directional_passage(env, model, e, m, n, t);
        const double first = directional_passage(env, model, e, m, k, t);
        const double second =
            directional_passage(env, model, e, k, n, t + first);
        excess[unit] = whole - (first + second);
        break;
      }
      case kTimeShift: {
        const Vertex e = detail::random_direction(vars, dim);
        const std::int64_t m = vars.next_int(0, 2);
        const std::int64_t n = m + vars.next_int(1, 3);
        const double t = 10.0 * vars.next();
        const double s = 5.0 * vars.next();
        const double now = directional_passage(env, model, e, m, n, t);
        const double later = directional_passage(env, model, e, m, n, t + s);
        excess[unit] = now - (later + s);
        break;
      }
      case kFifo: {
        const Vertex base = detail::random_vertex(vars, dim, 5);
        const Edge edge(base, static_cast<int>(vars.next_int(0, dim - 1)));
        const double t = 10.0 * vars.next();
        const double s = 5.0 * vars.next();
        const double early = arrival(env, model, edge, t) - fault_shift * t;
        const double late =
            arrival(env, model, edge, t + s) - fault_shift * (t + s);
        excess[unit] = early - late;
        break;
      }
      case kAdjacentBound: {
        const Vertex a = detail::random_vertex(vars, dim, 5);
        const int axis = static_cast<int>(vars.next_int(0, dim - 1));
        const double t = 10.0 * vars.next();
        const double x =
            first_passage(env, model, {a, a.shifted(axis, 1), t});
        excess[unit] = x - bound;
        break;
      }
      case kPassageBounds: {
        const Vertex a = detail::random_vertex(vars, dim, 5);
        Vertex b = a;
        const std::int64_t steps = vars.next_int(1, 5);
        for (std::int64_t step = 0; step < steps; ++step) {
          b = b.shifted(static_cast<int>(vars.next_int(0, dim - 1)),
                        vars.next() < 0.5 ? -1 : 1);
        }
        if (a == b) b = a.shifted(0, 1);
        const double t = 10.0 * vars.next();
        const double x = first_passage(env, model, {a, b, t});
        const double dist = static_cast<double>(l1_distance(a, b));
        excess[unit] = std::max(dist / bound - x, x - bound * dist);
        break;
      }
      default:
        break;
    }
  });

  HypothesisReport report;
  for (std::uint64_t check = 0; check < kCheckCount; ++check) {
    HypothesisCheck result;
    result.name = kNames[check];
    result.samples = samples;
    for (std::uint64_t i = 0; i < samples; ++i) {
      const double margin = excess[check * samples + i];
      if (margin > kCheckTolerance) {
        ++result.violations;
        if (!result.has_worst_seed || margin > result.max_violation) {
          result.max_violation = margin;
          result.worst_seed = derive_seed(base_seed, check, i);
          result.has_worst_seed = true;
        }
      }
    }
    report.checks.push_back(std::move(result));
  }
  return report;
}

// ---------------------------------------------------------------------------
// Solver-versus-oracle comparison
// ---------------------------------------------------------------------------

struct OracleComparison {
  struct Row {
    std::uint64_t seed;  // environment seed for this instance
    Vertex a;
    Vertex b;
    double t0;
    double sweep;
    double brute;
    double delta;  // |sweep - brute|
  };

  std::vector<Row> rows;
  double max_abs_delta = 0.0;
  std::uint64_t mismatches = 0;  // instances with delta > tolerance
  double tolerance = kCheckTolerance;
};

/// Sample tag separating oracle instances from the hypothesis checks.
inline constexpr std::uint64_t kOracleSampleTag = 1000;

/// Pits the sweep solver against the exhaustive path enumeration on small
/// random queries (|A-B|_1 <= max_l1, start times in [0, t_max)). Any
/// disagreement beyond the tolerance is a solver bug by construction.
inline OracleComparison oracle_comparison(const EnvironmentSpec& spec,
                                          TravelModel model,
                                          std::uint64_t instances,
                                          std::int64_t max_l1, double t_max,
                                          std::uint64_t base_seed,
                                          int workers = 1) {
  spec.validate();
  if (instances < 1) throw ConfigError("oracle comparison needs >= 1 instance");
  if (max_l1 < 1) throw ConfigError("oracle comparison needs max_l1 >= 1");
  if (!(t_max > 0.0)) throw ConfigError("oracle comparison needs t_max > 0");
  const int dim = spec.dimension;
  const double bound = spec.field.speed_bound;

  OracleComparison out;
  out.rows.resize(instances);
  for_each_index(instances, workers, [&](std::uint64_t i) {
    const std::uint64_t env_seed = derive_seed(base_seed, kOracleSampleTag, i);
    detail::UnitStream vars(env_seed);
    const EnvironmentRealization env(spec.with_seed(env_seed));

    const Vertex a = detail::random_vertex(vars, dim, 3);
    Vertex b = a;
    const std::int64_t steps = vars.next_int(1, max_l1);
    for (std::int64_t step = 0; step < steps; ++step) {
      b = b.shifted(static_cast<int>(vars.next_int(0, dim - 1)),
                    vars.next() < 0.5 ? -1 : 1);
    }
    if (a == b) b = a.shifted(0, 1);
    const double t0 = t_max * vars.next();

    const PassageQuery query{a, b, t0};
    const auto max_edges = static_cast<int>(
        std::ceil(bound * bound * static_cast<double>(l1_distance(a, b))));
    const double sweep = first_passage(env, model, query);
    const double brute = brute_force_first_passage(env, model, query, max_edges);
    out.rows[i] = {env_seed, a, b, t0, sweep, brute, std::abs(sweep - brute)};
  });

  for (const auto& row : out.rows) {
    out.max_abs_delta = std::max(out.max_abs_delta, row.delta);
    if (row.delta > out.tolerance) ++out.mismatches;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Mixing diagnostics
// ---------------------------------------------------------------------------

struct MixingSeries {
  std::vector<double> lags;
  std::vector<double> empirical;    // sample Cov[speed(e,0), speed(e,lag)]
  std::vector<double> std_error;    // moment-based SE of the covariance
  std::vector<double> theoretical;  // closed-form regime covariance
  std::uint64_t replicates = 0;
};

/// Covariance decay of one edge's speed across independent realizations,
/// sampled at time 0 and at each lag, paired with the closed-form curve.
inline MixingSeries mixing_diagnostic(const EnvironmentSpec& spec,
                                      const std::vector<double>& lags,
                                      std::uint64_t replicates,
                                      std::uint64_t base_seed,
                                      int workers = 1) {
  spec.validate();
  if (lags.empty()) throw ConfigError("mixing lags must be nonempty");
  for (std::size_t j = 0; j < lags.size(); ++j) {
    if (lags[j] < 0.0 || (j > 0 && !(lags[j] > lags[j - 1]))) {
      throw ConfigError("mixing lags must be >= 0 and strictly increasing");
    }
  }
  if (replicates < 2) throw ConfigError("mixing needs >= 2 replicates");

  const Edge probe(Vertex::origin(spec.dimension), 0);
  const std::size_t nl = lags.size();
  std::vector<double> at_zero(replicates);
  std::vector<double> at_lag(replicates * nl);
  for_each_index(replicates, workers, [&](std::uint64_t r) {
    const EnvironmentRealization env(spec.with_seed(derive_seed(base_seed, r)));
    at_zero[r] = env.speed(probe, 0.0);
    for (std::size_t j = 0; j < nl; ++j) {
      at_lag[r * nl + j] = env.speed(probe, lags[j]);
    }
  });

  MixingSeries out;
  out.lags = lags;
  out.replicates = replicates;
  RunningStats zero_stats;
  for (const double x : at_zero) zero_stats.push(x);
  const double x_mean = zero_stats.mean();

  for (std::size_t j = 0; j < nl; ++j) {
    RunningStats lag_stats;
    for (std::uint64_t r = 0; r < replicates; ++r) {
      lag_stats.push(at_lag[r * nl + j]);
    }
    const double y_mean = lag_stats.mean();

    RunningStats prod;
    for (std::uint64_t r = 0; r < replicates; ++r) {
      prod.push((at_zero[r] - x_mean) * (at_lag[r * nl + j] - y_mean));
    }
    const double n = static_cast<double>(replicates);
    out.empirical.push_back(prod.mean() * n / (n - 1.0));
    out.std_error.push_back(prod.std_error());
    out.theoretical.push_back(regime_covariance_theoretical(spec, lags[j]));
  }
  return out;
}

}  // namespace tdfpp

#endif  // TDFPP_ANALYSIS_HPP
