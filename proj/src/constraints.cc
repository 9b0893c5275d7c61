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

#include "diffrac/constraints.h"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>

#include "diffrac/constraints_json.h"
#include "diffrac/errors.h"
#include "diffrac/log.h"
#include "diffrac/oracle.h"

namespace diffrac {
namespace {

void Require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

void ValidateRows(const std::vector<Index>& rows, Index n_rows,
                  const std::string& what) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    Require(rows[i] >= 0 && rows[i] < n_rows, what + ": row index out of range");
    Require(i == 0 || rows[i - 1] < rows[i], what + ": rows must be strictly increasing");
  }
}

ConstraintOrigin OriginOf(const Bag& bag) {
  switch (bag.kind) {
    case BagKind::kAtLeastOne:
      return ConstraintOrigin::kAtLeastOne;
    case BagKind::kWeighted:
      return bag.person >= 0 ? ConstraintOrigin::kPersonAction
                             : ConstraintOrigin::kWeighted;
    case BagKind::kPersonAction:
      break;
  }
  throw std::invalid_argument("person-action bag must be instantiated before compiling");
}

}  // namespace

const char* BagKindName(BagKind kind) {
  switch (kind) {
    case BagKind::kAtLeastOne:
      return "at_least_one";
    case BagKind::kPersonAction:
      return "person_action";
    case BagKind::kWeighted:
      return "weighted";
  }
  return "unknown";
}

const char* ConstraintOriginName(ConstraintOrigin origin) {
  switch (origin) {
    case ConstraintOrigin::kAtLeastOne:
      return "at_least_one";
    case ConstraintOrigin::kPersonAction:
      return "person_action";
    case ConstraintOrigin::kWeighted:
      return "weighted";
    case ConstraintOrigin::kBackground:
      return "background";
  }
  return "unknown";
}

void ValidateBlock(const Block& block) {
  const std::string where = "block " + std::to_string(block.block_id);
  Require(block.n_rows >= 1, where + ": needs at least one row");
  Require(block.n_labels >= 1, where + ": needs at least one label");
  for (std::size_t b = 0; b < block.bags.size(); ++b) {
    const Bag& bag = block.bags[b];
    const std::string bag_where = where + " bag " + std::to_string(b);
    Require(!bag.member_rows.empty(), bag_where + ": empty bag");
    ValidateRows(bag.member_rows, block.n_rows, bag_where);
    Require(bag.label >= 0 && bag.label < block.n_labels,
            bag_where + ": label out of range");
    Require(bag.lower_bound > 0.0 && std::isfinite(bag.lower_bound),
            bag_where + ": lower bound must be positive");
    if (bag.kind == BagKind::kWeighted) {
      Require(bag.weights.size() == bag.member_rows.size(),
              bag_where + ": weights do not match rows");
      for (double w : bag.weights) {
        Require(std::isfinite(w) && w >= 0.0, bag_where + ": weights must be non-negative");
      }
    }
    if (bag.kind == BagKind::kPersonAction) {
      Require(bag.person >= 0, bag_where + ": missing person label");
    }
  }
  if (block.background) {
    const double f = block.background->fraction;
    Require(f >= 0.0 && f <= 1.0, where + ": background fraction outside [0,1]");
    ValidateRows(block.background->member_rows, block.n_rows, where + " background");
  }
  Require(block.slack.penalty >= 0.0 && std::isfinite(block.slack.penalty),
          where + ": slack penalty must be non-negative");
  Require(block.slack.bound > 0.0 && std::isfinite(block.slack.bound),
          where + ": slack bound must be positive");
}

BlockPolytope::BlockPolytope(int block_id, Index n_rows, int n_labels,
                             SlackConfig slack,
                             std::vector<CoverageConstraint> constraints)
    : block_id_(block_id),
      n_rows_(n_rows),
      n_labels_(n_labels),
      slack_(slack),
      constraints_(std::move(constraints)) {
  for (const CoverageConstraint& c : constraints_) {
    if (c.rows.size() != c.coefs.size()) {
      throw std::invalid_argument("CoverageConstraint: rows/coefs size mismatch");
    }
    if (c.slack_index >= 0) n_slack_ = std::max(n_slack_, c.slack_index + 1);
  }
}

double BlockPolytope::Coverage(std::size_t c, MatrixCRef y, const Vector& slack) const {
  const CoverageConstraint& con = constraints_[c];
  double lhs = 0.0;
  for (std::size_t k = 0; k < con.rows.size(); ++k) {
    lhs += con.coefs[k] * y(con.rows[k], con.label);
  }
  if (con.slack_index >= 0 && con.slack_index < slack.size()) {
    lhs += slack[con.slack_index];
  }
  return lhs;
}

double BlockPolytope::MaxViolation(MatrixCRef y, const Vector& slack) const {
  if (y.rows() != n_rows_ || y.cols() != n_labels_) {
    throw std::invalid_argument("MaxViolation: shape mismatch");
  }
  double worst = 0.0;
  for (Index n = 0; n < n_rows_; ++n) {
    worst = std::max(worst, std::abs(y.row(n).sum() - 1.0));
  }
  worst = std::max(worst, -y.minCoeff());
  worst = std::max(worst, y.maxCoeff() - 1.0);
  if (n_slack_ > 0) {
    if (slack.size() != n_slack_) {
      throw std::invalid_argument("MaxViolation: slack size mismatch");
    }
    worst = std::max(worst, -slack.minCoeff());
    worst = std::max(worst, slack.maxCoeff() - slack_.bound);
  }
  for (std::size_t c = 0; c < constraints_.size(); ++c) {
    worst = std::max(worst, constraints_[c].rhs - Coverage(c, y, slack));
  }
  return worst;
}

LinearProgram BlockPolytope::ToLinearProgram(MatrixCRef g, const Vector& slack_cost) const {
  const Index n_y = n_rows_ * n_labels_;
  LinearProgram lp;
  lp.objective = Vector::Zero(n_vars());
  for (Index n = 0; n < n_rows_; ++n) {
    for (int k = 0; k < n_labels_; ++k) lp.objective[n * n_labels_ + k] = g(n, k);
  }
  for (int s = 0; s < n_slack_ && s < slack_cost.size(); ++s) {
    lp.objective[n_y + s] = slack_cost[s];
  }
  lp.lower = Vector::Zero(n_vars());
  lp.upper = Vector::Ones(n_vars());
  if (n_slack_ > 0) lp.upper.tail(n_slack_).setConstant(slack_.bound);

  const Index m_ub = static_cast<Index>(constraints_.size());
  lp.a_ub = Matrix::Zero(m_ub, n_vars());
  lp.b_ub = Vector::Zero(m_ub);
  for (Index c = 0; c < m_ub; ++c) {
    const CoverageConstraint& con = constraints_[c];
    for (std::size_t k = 0; k < con.rows.size(); ++k) {
      lp.a_ub(c, con.rows[k] * n_labels_ + con.label) -= con.coefs[k];
    }
    if (con.slack_index >= 0) lp.a_ub(c, n_y + con.slack_index) = -1.0;
    lp.b_ub[c] = -con.rhs;
  }
  lp.a_eq = Matrix::Zero(n_rows_, n_vars());
  lp.b_eq = Vector::Ones(n_rows_);
  for (Index n = 0; n < n_rows_; ++n) {
    lp.a_eq.row(n).segment(n * n_labels_, n_labels_).setOnes();
  }
  return lp;
}

BlockPolytope CompileBlock(const Block& block) {
  ValidateBlock(block);
  std::vector<CoverageConstraint> constraints;
  constraints.reserve(block.bags.size() + 1);
  int n_slack = 0;
  for (std::size_t b = 0; b < block.bags.size(); ++b) {
    const Bag& bag = block.bags[b];
    CoverageConstraint c;
    c.origin = OriginOf(bag);
    c.bag_index = static_cast<int>(b);
    c.label = bag.label;
    c.person = bag.person;
    c.rows = bag.member_rows;
    c.coefs = bag.kind == BagKind::kWeighted
                  ? bag.weights
                  : std::vector<double>(bag.member_rows.size(), 1.0);
    c.rhs = std::min(bag.lower_bound, static_cast<double>(bag.member_rows.size()));
    if (block.slack.enabled) c.slack_index = n_slack++;
    constraints.push_back(std::move(c));
  }
  if (block.background) {
    CoverageConstraint c;
    c.origin = ConstraintOrigin::kBackground;
    c.label = kBackgroundLabel;
    c.rows = block.background->member_rows;
    c.coefs.assign(c.rows.size(), 1.0);
    c.rhs = block.background->fraction * static_cast<double>(c.rows.size());
    if (block.slack.enabled) c.slack_index = n_slack++;
    constraints.push_back(std::move(c));
  }
  BlockPolytope polytope(block.block_id, block.n_rows, block.n_labels, block.slack,
                         std::move(constraints));
  InitialFeasiblePoint(polytope);
  return polytope;
}

std::optional<Bag> InstantiatePersonAction(const Bag& bag, MatrixCRef z_rows,
                                           bool rounded) {
  if (bag.kind != BagKind::kPersonAction) {
    throw std::invalid_argument("InstantiatePersonAction: not a person-action bag");
  }
  if (bag.person < 0 || bag.person >= z_rows.cols()) {
    throw std::invalid_argument("InstantiatePersonAction: person label out of range");
  }
  Bag out;
  out.kind = BagKind::kWeighted;
  out.label = bag.label;
  out.person = bag.person;
  out.lower_bound = bag.lower_bound;
  double mass = 0.0;
  for (Index row : bag.member_rows) {
    if (row < 0 || row >= z_rows.rows()) {
      throw std::invalid_argument("InstantiatePersonAction: row index out of range");
    }
    double c;
    if (rounded) {
      const auto z = z_rows.row(row);
      Index arg = 0;
      for (Index k = 1; k < z.size(); ++k) {
        if (z[k] > z[arg]) arg = k;
      }
      c = (z.sum() > 0.0 && arg == bag.person) ? 1.0 : 0.0;
    } else {
      c = z_rows(row, bag.person);
    }
    if (c > 0.0) {
      out.member_rows.push_back(row);
      out.weights.push_back(c);
      mass += c;
    }
  }
  if (mass <= 0.0) {
    std::ostringstream msg;
    msg << "person-action bag (person " << bag.person << ", action " << bag.label
        << ") has no coefficient mass; dropped";
    LogWarning(msg.str());
    return std::nullopt;
  }
  return out;
}

FeasiblePoint InitialFeasiblePoint(const BlockPolytope& polytope) {
  const int k = polytope.n_labels();
  FeasiblePoint start;
  start.y = Matrix::Constant(polytope.n_rows(), k, 1.0 / k);
  start.slack = Vector::Zero(polytope.n_slack());
  if (polytope.MaxViolation(start.y, start.slack) <= 1e-9) return start;

  const OracleResult vertex =
      LinearOracle(polytope, Matrix::Zero(polytope.n_rows(), k),
                   Vector::Zero(polytope.n_slack()));
  if (vertex.status != LpStatus::kOptimal) {
    std::ostringstream msg;
    msg << "block " << polytope.block_id() << ": constraint system is infeasible";
    if (!vertex.infeasible_constraints.empty()) {
      msg << " (violated inequalities:";
      for (int c : vertex.infeasible_constraints) msg << ' ' << c;
      msg << ')';
    }
    throw InfeasibleError(msg.str(), vertex.infeasible_constraints);
  }

  // Smallest theta with start + theta (vertex - start) feasible. Each
  // inequality is affine in theta and holds at theta = 1.
  double theta = 0.0;
  for (std::size_t c = 0; c < polytope.constraints().size(); ++c) {
    const double rhs = polytope.constraints()[c].rhs;
    const double at_start = polytope.Coverage(c, start.y, start.slack);
    if (at_start >= rhs) continue;
    const double at_vertex = polytope.Coverage(c, vertex.vertex, vertex.slack);
    const double denom = at_vertex - at_start;
    theta = std::max(theta, denom > 0.0 ? (rhs - at_start) / denom : 1.0);
  }
  theta = std::min(theta, 1.0);
  FeasiblePoint point;
  if (theta >= 1.0) {
    point.y = vertex.vertex;
    point.slack = vertex.slack;
  } else {
    point.y = start.y + theta * (vertex.vertex - start.y);
    point.slack = start.slack + theta * (vertex.slack - start.slack);
  }
  if (polytope.MaxViolation(point.y, point.slack) > 1e-9) {
    point.y = vertex.vertex;
    point.slack = vertex.slack;
  }
  return point;
}

int CountViolatedConstraints(const BlockPolytope& polytope, MatrixCRef y,
                             double tolerance) {
  const Vector no_slack = Vector::Zero(polytope.n_slack());
  int count = 0;
  for (std::size_t c = 0; c < polytope.constraints().size(); ++c) {
    if (polytope.Coverage(c, y, no_slack) < polytope.constraints()[c].rhs - tolerance) {
      ++count;
    }
  }
  return count;
}

nlohmann::json PolytopeToJson(const BlockPolytope& polytope) {
  nlohmann::json ineqs = nlohmann::json::array();
  for (const CoverageConstraint& c : polytope.constraints()) {
    nlohmann::json j;
    j["origin"] = ConstraintOriginName(c.origin);
    j["bag_index"] = c.bag_index;
    j["label"] = c.label;
    if (c.person >= 0) j["person"] = c.person;
    j["rows"] = c.rows;
    j["coefs"] = c.coefs;
    j["rhs"] = c.rhs;
    j["slack_index"] = c.slack_index;
    ineqs.push_back(std::move(j));
  }
  nlohmann::json out;
  out["block_id"] = polytope.block_id();
  out["n_rows"] = polytope.n_rows();
  out["n_labels"] = polytope.n_labels();
  out["n_slack"] = polytope.n_slack();
  out["slack"] = {{"enabled", polytope.slack().enabled},
                  {"penalty", polytope.slack().penalty},
                  {"bound", polytope.slack().bound}};
  out["equalities"] = polytope.n_rows();
  out["inequalities"] = std::move(ineqs);
  return out;
}

}  // namespace diffrac
