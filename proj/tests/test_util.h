// Copyright 2026 The NN-CCE Authors.
//
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

#ifndef NNCCE_TESTS_TEST_UTIL_H_
#define NNCCE_TESTS_TEST_UTIL_H_

#include <cmath>
#include <vector>

#include "nncce/cce.h"
#include "nncce/games.h"

namespace nncce::testing {

// Stage game with min-max normalized losses of a matrix game.
inline StageGame StageFromMatrix(const MatrixGame& game) {
  const auto losses = NormalizeLosses(game.payoffs());
  std::vector<double> flat;
  for (const auto& row : losses) flat.insert(flat.end(), row.begin(), row.end());
  return StageGame::Dense(game.spec().action_counts, flat);
}

inline double L1FromUniform(const std::vector<double>& p) {
  double total = 0.0;
  for (double v : p) total += std::abs(v - 1.0 / p.size());
  return total;
}

}  // namespace nncce::testing

#endif  // NNCCE_TESTS_TEST_UTIL_H_
