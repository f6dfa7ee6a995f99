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

// Minimal library walkthrough: sample one random environment, cross a few
// edges, solve a passage-time query both ways, and grow a reachable set.

#include <cstdio>

#include "tdfpp/tdfpp.hpp"

int main() {
  using namespace tdfpp;

  EnvironmentSpec spec;
  spec.kind = EnvKind::kBlock;
  spec.dimension = 2;
  spec.field.speed_bound = 2.0;  // speeds uniform on [1/2, 2]
  spec.block_period = 1.0;
  spec.seed = 42;
  const EnvironmentRealization env(spec);

  const Edge first_step(Vertex::origin(2), 0);
  std::printf("speed of edge (0,0)-(1,0) at t=0.0: %.6f\n",
              env.speed(first_step, 0.0));
  std::printf("crossing it from t=0, integral law:  %.6f\n",
              traversal_time(env, TravelModel::kIntegral, first_step, 0.0));
  std::printf("crossing it from t=0, departure law: %.6f\n",
              traversal_time(env, TravelModel::kDeparture, first_step, 0.0));

  const PassageQuery query{Vertex{0, 0}, Vertex{5, 3}, 0.0};
  for (const TravelModel model :
       {TravelModel::kIntegral, TravelModel::kDeparture}) {
    std::printf("X^0((0,0) -> (5,3)), %s law: %.6f\n",
                travel_model_name(model), first_passage(env, model, query));
  }

  const auto reachable =
      reachable_set(env, TravelModel::kIntegral, 4.0);
  std::printf("|S_4| = %zu vertices reachable within time 4\n",
              reachable.size());
  return 0;
}
