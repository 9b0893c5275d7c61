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

#ifndef DIFFRAC_CONSTRAINTS_H_
#define DIFFRAC_CONSTRAINTS_H_

#include <optional>
#include <string>
#include <vector>

#include "diffrac/linalg.h"
#include "diffrac/simplex.h"

namespace diffrac {

// Label 0 is the background class in every block.
inline constexpr int kBackgroundLabel = 0;

enum class BagKind {
  kAtLeastOne,    // sum_{n in rows} y[n, label] >= lower_bound
  kPersonAction,  // needs a fixed name assignment; see InstantiatePersonAction
  kWeighted,      // sum_{n in rows} weights[n] y[n, label] >= lower_bound
};

const char* BagKindName(BagKind kind);

struct Bag {
  BagKind kind = BagKind::kAtLeastOne;
  // Strictly increasing within-block row indices.
  std::vector<Index> member_rows;
  // Name or action label; the action for person-action bags.
  int label = 0;
  // Person label of a person-action bag (kept on the instantiated bag).
  int person = -1;
  double lower_bound = 1.0;
  // kWeighted only, parallel to member_rows.
  std::vector<double> weights;
};

struct BackgroundSet {
  std::vector<Index> member_rows;
  double fraction = 0.0;
};

struct SlackConfig {
  bool enabled = false;
  double penalty = 10.0;
  double bound = 1.0;
};

struct Block {
  int block_id = 0;
  Index n_rows = 0;
  int n_labels = 0;
  std::vector<Bag> bags;
  std::optional<BackgroundSet> background;
  SlackConfig slack;
};

// Throws std::invalid_argument describing the first broken invariant.
void ValidateBlock(const Block& block);

enum class ConstraintOrigin { kAtLeastOne, kPersonAction, kWeighted, kBackground };

const char* ConstraintOriginName(ConstraintOrigin origin);

// sum_k coefs[k] y[rows[k], label] (+ slack[slack_index]) >= rhs.
struct CoverageConstraint {
  ConstraintOrigin origin = ConstraintOrigin::kAtLeastOne;
  int bag_index = -1;  // -1 for the background constraint
  int label = 0;
  int person = -1;
  std::vector<Index> rows;
  std::vector<double> coefs;
  double rhs = 0.0;
  int slack_index = -1;
};

struct FeasiblePoint {
  Matrix y;      // n_rows x n_labels
  Vector slack;  // n_slack
};

// Compiled feasible set of one block over (y, slack). Variables are ordered
// row-major over y (index n * n_labels + k) followed by the slack entries.
// Besides the coverage inequalities, every row sums to one and variables are
// boxed: y in [0, 1], slack in [0, slack.bound].
class BlockPolytope {
 public:
  BlockPolytope(int block_id, Index n_rows, int n_labels, SlackConfig slack,
                std::vector<CoverageConstraint> constraints);

  int block_id() const { return block_id_; }
  Index n_rows() const { return n_rows_; }
  int n_labels() const { return n_labels_; }
  int n_slack() const { return n_slack_; }
  Index n_vars() const { return n_rows_ * n_labels_ + n_slack_; }
  const SlackConfig& slack() const { return slack_; }
  const std::vector<CoverageConstraint>& constraints() const {
    return constraints_;
  }
  bool has_inequalities() const { return !constraints_.empty(); }
  // Row-sum equalities plus coverage inequalities.
  Index n_constraint_rows() const {
    return n_rows_ + static_cast<Index>(constraints_.size());
  }

  // Left-hand side of constraint c at (y, slack).
  double Coverage(std::size_t c, MatrixCRef y, const Vector& slack) const;

  // Largest violation over row sums, boxes and inequalities.
  double MaxViolation(MatrixCRef y, const Vector& slack) const;

  // Explicit LP: minimize <g, y> + <slack_cost, slack>. Inequalities are
  // emitted in constraint order as "-coverage <= -rhs", equalities by row.
  LinearProgram ToLinearProgram(MatrixCRef g, const Vector& slack_cost) const;

 private:
  int block_id_;
  Index n_rows_;
  int n_labels_;
  int n_slack_ = 0;
  SlackConfig slack_;
  std::vector<CoverageConstraint> constraints_;
};

// Emits the bag inequalities in bag order, then the background inequality.
// Bag right-hand sides are clamped to the bag size. Throws
// std::invalid_argument for uninstantiated person-action bags and
// InfeasibleError when the polytope turns out to be empty.
BlockPolytope CompileBlock(const Block& block);

// Fixes the name assignment of a person-action bag. `z_rows` has one row per
// block row (all-zero for rows without an identity); the coefficient of row n
// is z_rows(n, bag.person), after row-wise argmax rounding when `rounded`.
// Rows with zero coefficient are dropped from the bag; a bag with no
// coefficient mass left is dropped (nullopt) with a warning.
std::optional<Bag> InstantiatePersonAction(const Bag& bag, MatrixCRef z_rows,
                                           bool rounded);

// Uniform rows and zero slack when that is feasible. Otherwise a feasible
// vertex is found by a phase-1 LP and the result is the point closest to the
// uniform start on the segment between the two. Throws InfeasibleError.
FeasiblePoint InitialFeasiblePoint(const BlockPolytope& polytope);

// Number of coverage constraints violated by a (typically rounded)
// assignment with zero slack: the diagnostic reported after rounding.
int CountViolatedConstraints(const BlockPolytope& polytope, MatrixCRef y,
                             double tolerance = 1e-9);

}  // namespace diffrac

#endif  // DIFFRAC_CONSTRAINTS_H_
