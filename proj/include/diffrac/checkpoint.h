// Copyright 2026 The diffrac-bcfw Authors.
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

#ifndef DIFFRAC_CHECKPOINT_H_
#define DIFFRAC_CHECKPOINT_H_

#include <iosfwd>
#include <string>

#include "diffrac/bcfw.h"

namespace diffrac {

// Binary solver snapshot, all integers u64 and all reals f64, little-endian:
//
//   "BCFW0001"
//   n_blocks, K, d, iteration
//   n_blocks x (rows_i, n_slack_i)
//   n_blocks x (Y_i row-major, slack_i, gap_i)     gap +inf if unvisited
//   W row-major (d x K)
//
// The sampling RNG is not stored; a reloaded state is reseeded by the caller.
void WriteCheckpoint(std::ostream& out, const SolverState& state);
SolverState ReadCheckpoint(std::istream& in);

void WriteCheckpointFile(const std::string& path, const SolverState& state);
SolverState ReadCheckpointFile(const std::string& path);

}  // namespace diffrac

#endif  // DIFFRAC_CHECKPOINT_H_
