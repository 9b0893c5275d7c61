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

#ifndef DIFFRAC_SIMPLEX_H_
#define DIFFRAC_SIMPLEX_H_

#include <vector>

#include "diffrac/linalg.h"

namespace diffrac {

// minimize  objective . x
// s.t.      a_ub x <= b_ub,  a_eq x = b_eq,  lower <= x <= upper.
//
// Every variable needs at least one finite bound; `upper` may be +inf.
// Empty constraint blocks are given as 0 x n matrices.
struct LinearProgram {
  Vector objective;
  Matrix a_ub;
  Vector b_ub;
  Matrix a_eq;
  Vector b_eq;
  Vector lower;
  Vector upper;
  // Optional starting bound per variable (true = upper). Only a warm hint; the
  // result does not depend on it beyond tie-breaking among optimal vertices.
  std::vector<bool> start_at_upper;

  Index n_vars() const { return objective.size(); }

  // Zero-constraint LP over n variables with the given box.
  static LinearProgram Boxed(Vector objective, Vector lower, Vector upper);
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

const char* LpStatusName(LpStatus status);

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  // Basic feasible solution when kOptimal.
  Vector x;
  double objective = 0.0;
  // kInfeasible: constraint rows still violated at the end of phase 1.
  // Rows are numbered with the inequalities first, then the equalities.
  std::vector<Index> infeasible_rows;
  long pivots = 0;
};

// Throws std::invalid_argument when the shapes or bounds are inconsistent.
void ValidateLinearProgram(const LinearProgram& lp);

// Two-phase bounded-variable primal simplex on a dense tableau. Pricing is
// Dantzig's rule; after a run of degenerate pivots it falls back to Bland's
// lowest-index rule until the next strictly improving pivot, which rules out
// cycling. Ties are broken by the lowest variable index. Deterministic.
//
// Pivot tolerance 1e-9; the returned point satisfies every constraint to
// 1e-9 (relative to the magnitude of the data).
LpResult MinimizeLp(const LinearProgram& lp);

// Largest constraint or bound violation of x.
double LpViolation(const LinearProgram& lp, const Vector& x);

}  // namespace diffrac

#endif  // DIFFRAC_SIMPLEX_H_
