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

#ifndef TDFPP_LATTICE_HPP
#define TDFPP_LATTICE_HPP

#include <array>
#include <cassert>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <span>
#include <utility>
#include <vector>

#include "tdfpp/common.hpp"
#include "tdfpp/rng.hpp"

namespace tdfpp {

inline constexpr int kMaxDim = 8;

/// |v| without the long/long-long overload zoo of std::abs.
inline constexpr std::int64_t abs64(std::int64_t v) { return v < 0 ? -v : v; }

/// Point of the integer lattice Z^d, 1 <= d <= kMaxDim. Immutable value type;
/// coordinates are 64-bit signed and overflow is a ConfigError, never silent
/// wraparound.
class Vertex {
 public:
  Vertex() = default;

  explicit Vertex(std::span<const std::int64_t> coords) {
    if (coords.empty() || coords.size() > kMaxDim) {
      throw ConfigError("vertex dimension must be in [1, " +
                        std::to_string(kMaxDim) + "]");
    }
    dim_ = static_cast<std::uint8_t>(coords.size());
    for (std::size_t i = 0; i < coords.size(); ++i) c_[i] = coords[i];
  }

  Vertex(std::initializer_list<std::int64_t> coords)
      : Vertex(std::span<const std::int64_t>(coords.begin(), coords.size())) {}

  static Vertex origin(int dim) {
    if (dim < 1 || dim > kMaxDim) throw ConfigError("bad lattice dimension");
    Vertex v;
    v.dim_ = static_cast<std::uint8_t>(dim);
    return v;
  }

  /// k * direction, componentwise, overflow-checked.
  static Vertex scaled(const Vertex& direction, std::int64_t k) {
    Vertex v;
    v.dim_ = direction.dim_;
    for (int i = 0; i < direction.dim(); ++i) {
      if (__builtin_mul_overflow(direction[i], k, &v.c_[i])) {
        throw ConfigError("coordinate overflow while scaling a direction");
      }
    }
    return v;
  }

  int dim() const { return dim_; }
  std::int64_t operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  std::span<const std::int64_t> coords() const { return {c_.data(), dim_}; }

  Vertex shifted(int axis, std::int64_t delta) const {
    assert(axis >= 0 && axis < dim());
    Vertex v = *this;
    if (__builtin_add_overflow(c_[static_cast<std::size_t>(axis)], delta,
                               &v.c_[static_cast<std::size_t>(axis)])) {
      throw ConfigError("coordinate overflow while shifting a vertex");
    }
    return v;
  }

  bool is_zero() const {
    for (int i = 0; i < dim(); ++i) {
      if (c_[static_cast<std::size_t>(i)] != 0) return false;
    }
    return true;
  }

  friend bool operator==(const Vertex& a, const Vertex& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim(); ++i) {
      if (a[i] != b[i]) return false;
    }
    return true;
  }

  // Lexicographic order on coordinates; only meaningful within one dimension.
  friend std::strong_ordering operator<=>(const Vertex& a, const Vertex& b) {
    if (auto c = a.dim_ <=> b.dim_; c != 0) return c;
    for (int i = 0; i < a.dim(); ++i) {
      if (auto c = a[i] <=> b[i]; c != 0) return c;
    }
    return std::strong_ordering::equal;
  }

  std::uint64_t hash() const {
    std::uint64_t h = mix64(0x5bf03635u + dim_);
    for (int i = 0; i < dim(); ++i) {
      h = chain_absorb(h, static_cast<std::uint64_t>(c_[static_cast<std::size_t>(i)]));
    }
    return h;
  }

 private:
  std::uint8_t dim_ = 0;
  std::array<std::int64_t, kMaxDim> c_{};
};

/// |a - b|_1, overflow-checked.
inline std::uint64_t l1_distance(const Vertex& a, const Vertex& b) {
  if (a.dim() != b.dim()) {
    throw ConfigError("l1_distance: mixed lattice dimensions");
  }
  std::uint64_t sum = 0;
  for (int i = 0; i < a.dim(); ++i) {
    const std::uint64_t mag =
        a[i] >= b[i]
            ? static_cast<std::uint64_t>(a[i]) - static_cast<std::uint64_t>(b[i])
            : static_cast<std::uint64_t>(b[i]) - static_cast<std::uint64_t>(a[i]);
    if (__builtin_add_overflow(sum, mag, &sum)) {
      throw ConfigError("l1_distance: coordinate overflow");
    }
  }
  return sum;
}

inline std::uint64_t l1_norm(const Vertex& v) {
  return l1_distance(v, Vertex::origin(v.dim()));
}

/// Undirected lattice edge. Canonical identity is (min endpoint, axis): the
/// stored base vertex is always the endpoint with the smaller coordinate on
/// `axis`, so the same physical edge hashes identically regardless of the
/// traversal direction.
class Edge {
 public:
  Edge() = default;

  Edge(Vertex base, int axis) : base_(std::move(base)), axis_(axis) {
    if (axis_ < 0 || axis_ >= base_.dim()) {
      throw ConfigError("edge axis out of range");
    }
  }

  const Vertex& base() const { return base_; }
  int axis() const { return axis_; }

  std::pair<Vertex, Vertex> endpoints() const {
    return {base_, base_.shifted(axis_, 1)};
  }

  friend bool operator==(const Edge& a, const Edge& b) {
    return a.axis_ == b.axis_ && a.base_ == b.base_;
  }

  friend std::strong_ordering operator<=>(const Edge& a, const Edge& b) {
    if (auto c = a.base_ <=> b.base_; c != 0) return c;
    return a.axis_ <=> b.axis_;
  }

  std::uint64_t hash() const {
    return chain_absorb(base_.hash(), static_cast<std::uint64_t>(axis_));
  }

 private:
  Vertex base_;
  int axis_ = 0;
};

/// Incident edges of v with their opposite endpoints, in deterministic order:
/// axis ascending, negative direction before positive. Always 2d pairs.
inline std::vector<std::pair<Edge, Vertex>> neighbors(const Vertex& v) {
  std::vector<std::pair<Edge, Vertex>> out;
  out.reserve(static_cast<std::size_t>(2 * v.dim()));
  for (int axis = 0; axis < v.dim(); ++axis) {
    Vertex down = v.shifted(axis, -1);
    out.emplace_back(Edge(down, axis), std::move(down));
    out.emplace_back(Edge(v, axis), v.shifted(axis, 1));
  }
  return out;
}

/// Lattice walk: a start vertex plus incident steps. Each step records the
/// edge taken and the vertex it arrives at; incidence is validated on append.
class Path {
 public:
  struct Step {
    Edge edge;
    Vertex to;
  };

  explicit Path(Vertex start) : start_(std::move(start)), end_(start_) {}

  Path& append(const Edge& edge) {
    auto [lo, hi] = edge.endpoints();
    Vertex next;
    if (end_ == lo) {
      next = hi;
    } else if (end_ == hi) {
      next = lo;
    } else {
      throw ConfigError("path step is not incident to the current endpoint");
    }
    steps_.push_back(Step{edge, next});
    end_ = next;
    return *this;
  }

  /// Convenience: walk from `start` taking one step per (axis, sign) pair.
  static Path walk(Vertex start,
                   std::initializer_list<std::pair<int, int>> moves) {
    Path p(std::move(start));
    for (auto [axis, sign] : moves) {
      const Vertex& from = p.end();
      Edge e = sign > 0 ? Edge(from, axis) : Edge(from.shifted(axis, -1), axis);
      p.append(e);
    }
    return p;
  }

  const Vertex& start() const { return start_; }
  const Vertex& end() const { return end_; }
  const std::vector<Step>& steps() const { return steps_; }
  std::size_t edge_count() const { return steps_.size(); }

 private:
  Vertex start_;
  Vertex end_;
  std::vector<Step> steps_;
};

namespace detail {
inline void l1_ball_rec(const Vertex& center, int axis, std::int64_t budget,
                        std::array<std::int64_t, kMaxDim>& scratch,
                        std::vector<Vertex>& out) {
  if (axis == center.dim()) {
    out.push_back(Vertex(std::span<const std::int64_t>(
        scratch.data(), static_cast<std::size_t>(center.dim()))));
    return;
  }
  for (std::int64_t off = -budget; off <= budget; ++off) {
    scratch[static_cast<std::size_t>(axis)] = center[axis] + off;
    l1_ball_rec(center, axis + 1, budget - (off < 0 ? -off : off), scratch, out);
  }
}
}  // namespace detail

/// All vertices u with |u - center|_1 <= radius, in lexicographic order.
inline std::vector<Vertex> l1_ball(const Vertex& center, std::int64_t radius) {
  if (radius < 0) throw ConfigError("l1_ball: negative radius");
  std::vector<Vertex> out;
  std::array<std::int64_t, kMaxDim> scratch{};
  detail::l1_ball_rec(center, 0, radius, scratch, out);
  return out;
}

struct VertexHash {
  std::size_t operator()(const Vertex& v) const {
    return static_cast<std::size_t>(v.hash());
  }
};

struct EdgeHash {
  std::size_t operator()(const Edge& e) const {
    return static_cast<std::size_t>(e.hash());
  }
};

}  // namespace tdfpp

#endif  // TDFPP_LATTICE_HPP
