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

#ifndef DIFFRAC_ORACLE_H_
#define DIFFRAC_ORACLE_H_

#include <vector>

#include "diffrac/constraints.h"
#include "diffrac/linalg.h"
#include "diffrac/simplex.h"

namespace diffrac {

struct OracleResult {
  LpStatus status = LpStatus::kInfeasible;
  Matrix vertex;  // n_rows x n_labels
  Vector slack;   // n_slack
  double objective = 0.0;
  // kInfeasible: indices into BlockPolytope::constraints().
  std::vector<int> infeasible_constraints;
};

enum class OraclePath {
  // Row-wise argmin when the block has no inequalities, otherwise the
  // simplex on a reduced LP (see below).
  kAuto,
  // The simplex on the full LP of BlockPolytope::ToLinearProgram.
  kGeneralLp,
};

// Vertex of the block polytope minimizing <gradient, y> + <slack_gradient, slack>.
//
// The reduced LP keeps, for each row, only the labels that appear in some
// inequality touching the row, plus the cheapest remaining label which
// absorbs the row-sum equality. Rows touched by no inequality are solved by
// argmin directly. The reduced feasible set is a face of the block polytope
// that contains a minimizer, so its vertices are vertices of the block.
//
// Ties go to the lowest label index; an all-zero gradient yields label 0.
OracleResult LinearOracle(const BlockPolytope& polytope, MatrixCRef gradient,
                          const Vector& slack_gradient,
                          OraclePath path = OraclePath::kAuto);

}  // namespace diffrac

#endif  // DIFFRAC_ORACLE_H_
