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

#ifndef TDFPP_TRAVEL_HPP
#define TDFPP_TRAVEL_HPP

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>

#include "tdfpp/common.hpp"
#include "tdfpp/environment.hpp"
#include "tdfpp/lattice.hpp"

namespace tdfpp {

// How long it takes to cross one edge when departing at time t. Both laws
// see the same speed process xi(s) = speed of the edge at time s:
//
//   Integral:  the unique tau with  integral_t^{t+tau} xi(s) ds = 1
//              (continuous motion at the instantaneous speed).
//   Departure: inf over waits s >= 0 of  s + 1/xi(t+s)
//              (wait for a departure, then cross at the speed quoted at the
//              moment of departure).
//
// Speeds live in [1/L, L], which pins tau into [1/L, L] for either law and
// bounds the number of regime pieces either computation can touch.

enum class TravelModel { kIntegral, kDeparture };

inline TravelModel travel_model_from_name(const std::string& name) {
  if (name == "integral") return TravelModel::kIntegral;
  if (name == "departure") return TravelModel::kDeparture;
  throw ConfigError("unknown travel model '" + name +
                    "' (expected 'integral' or 'departure')");
}

inline const char* travel_model_name(TravelModel model) {
  return model == TravelModel::kIntegral ? "integral" : "departure";
}

// Hard cap on regime pieces scanned per edge crossing. Boundedness of the
// speed field keeps real scans tiny (~L/C pieces, or ~lambda*L jumps); the
// cap only exists to turn an inconsistent Environment into a loud failure
// instead of a hang.
inline constexpr int kMaxPieceScans = 1'000'000;

[[noreturn]] inline void throw_piece_scan_overflow() {
  throw std::runtime_error(
      "traversal_time: exceeded regime scan cap; environment reports "
      "non-advancing or pathologically short regimes");
}

/// Core traversal computation on a raw edge id (base coords + axis).
template <Environment Env>
double traversal_time(const Env& env, TravelModel model,
                      std::span<const std::int64_t> base, int axis, double t) {
  if (model == TravelModel::kIntegral) {
    // Accumulate speed * duration piece by piece; solve the final partial
    // piece in closed form.
    double now = t;
    double mass = 0.0;
    for (int scans = 0; scans < kMaxPieceScans; ++scans) {
      const RegimePiece piece = env.regime_at(now);
      const double xi = env.edge_speed(base, axis, piece.index);
      const double finish = now + (1.0 - mass) / xi;
      if (finish <= piece.end) return finish - t;
      mass += xi * (piece.end - now);
      now = piece.end;
    }
    throw_piece_scan_overflow();
  }

  // Departure law. u + 1/xi(u) is increasing within a regime piece, so only
  // u = t and piece left-endpoints can attain the inf, and any candidate
  // with u - t >= current best is dominated (1/xi > 0). The first candidate
  // is <= L, so the scan stops within wait L.
  RegimePiece piece = env.regime_at(t);
  double best = t + 1.0 / env.edge_speed(base, axis, piece.index);
  for (int scans = 0; scans < kMaxPieceScans; ++scans) {
    const double next_start = piece.end;
    if (next_start >= best) return best - t;
    piece = env.regime_at(next_start);
    const double candidate =
        next_start + 1.0 / env.edge_speed(base, axis, piece.index);
    if (candidate < best) best = candidate;
  }
  throw_piece_scan_overflow();
}

template <Environment Env>
double traversal_time(const Env& env, TravelModel model, const Edge& e,
                      double t) {
  return traversal_time(env, model, e.base().coords(), e.axis(), t);
}

/// Clock time at the far endpoint when departing along e at time t.
/// Non-decreasing in t: leaving later never means arriving earlier.
template <Environment Env>
double arrival(const Env& env, TravelModel model, const Edge& e, double t) {
  return t + traversal_time(env, model, e, t);
}

/// Travel time along a path: fold arrival() over the steps in order,
/// each edge departing the moment the previous one is crossed.
template <Environment Env>
double path_travel_time(const Env& env, TravelModel model, const Path& path,
                        double t0) {
  double now = t0;
  for (const auto& step : path.steps()) {
    now = arrival(env, model, step.edge, now);
  }
  return now - t0;
}

}  // namespace tdfpp

#endif  // TDFPP_TRAVEL_HPP
