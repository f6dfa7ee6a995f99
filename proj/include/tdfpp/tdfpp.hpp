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

#ifndef TDFPP_TDFPP_HPP
#define TDFPP_TDFPP_HPP

// Umbrella header: the whole simulator in one include.

#include "tdfpp/analysis.hpp"
#include "tdfpp/common.hpp"
#include "tdfpp/environment.hpp"
#include "tdfpp/io.hpp"
#include "tdfpp/lattice.hpp"
#include "tdfpp/parallel.hpp"
#include "tdfpp/rng.hpp"
#include "tdfpp/solver.hpp"
#include "tdfpp/travel.hpp"

#endif  // TDFPP_TDFPP_HPP
