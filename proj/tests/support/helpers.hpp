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

#ifndef TDFPP_TESTS_SUPPORT_HELPERS_HPP
#define TDFPP_TESTS_SUPPORT_HELPERS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "tdfpp/environment.hpp"

namespace tdfpp_test {

/// Hand-authored environment: one global regime clock with explicit
/// boundaries and one scripted speed per regime (all edges alike). Lets a
/// test pin traversal arithmetic against worked-by-hand numbers instead of
/// sampled randomness.
class ScriptedEnvironment {
 public:
  ScriptedEnvironment(int dim, double bound, std::vector<double> boundaries,
                      std::vector<double> speeds)
      : dim_(dim),
        bound_(bound),
        boundaries_(std::move(boundaries)),
        speeds_(std::move(speeds)) {}

  int dimension() const { return dim_; }
  double speed_bound() const { return bound_; }

  tdfpp::RegimePiece regime_at(double t) const {
    const auto it =
        std::upper_bound(boundaries_.begin(), boundaries_.end(), t);
    const auto k = static_cast<std::int64_t>(it - boundaries_.begin());
    const double end = it == boundaries_.end()
                           ? std::numeric_limits<double>::infinity()
                           : *it;
    return {k, end};
  }

  double edge_speed(std::span<const std::int64_t> /*base*/, int /*axis*/,
                    std::int64_t regime) const {
    const auto k = std::min<std::size_t>(static_cast<std::size_t>(regime),
                                         speeds_.size() - 1);
    return speeds_[k];
  }

 private:
  int dim_;
  double bound_;
  std::vector<double> boundaries_;  // regime k ends at boundaries_[k]
  std::vector<double> speeds_;      // one per regime; last extends forever
};

static_assert(tdfpp::Environment<ScriptedEnvironment>);

/// sup_x |F_n(x) - cdf(x)| for sorted samples against a reference CDF.
template <typename Cdf>
double ks_statistic(std::vector<double> samples, Cdf&& cdf) {
  std::sort(samples.begin(), samples.end());
  const double n = static_cast<double>(samples.size());
  double d = 0.0;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    const double f = cdf(samples[i]);
    d = std::max(d, std::abs(f - static_cast<double>(i) / n));
    d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
  }
  return d;
}

/// Two-sample Kolmogorov-Smirnov statistic.
inline double ks_statistic_two_sample(std::vector<double> a,
                                      std::vector<double> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  double d = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    // Step past every copy of the smaller value in both samples before
    // measuring, so tied observations jump both EDFs at once.
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] <= v) ++i;
    while (j < b.size() && b[j] <= v) ++j;
    d = std::max(d, std::abs(static_cast<double>(i) / a.size() -
                             static_cast<double>(j) / b.size()));
  }
  return d;
}

/// Rejection threshold for the KS statistic at significance alpha:
/// one-sample with n points, or two-sample with effective size nm/(n+m).
inline double ks_threshold(double alpha, double effective_n) {
  return std::sqrt(-std::log(alpha / 2.0) / 2.0) / std::sqrt(effective_n);
}

}  // namespace tdfpp_test

#endif  // TDFPP_TESTS_SUPPORT_HELPERS_HPP
