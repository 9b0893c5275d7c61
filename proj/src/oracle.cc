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

#include "diffrac/oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

#include "diffrac/errors.h"

namespace diffrac {
namespace {

constexpr double kSnap = 1e-12;

double Snap(double v) {
  if (std::abs(v) <= kSnap) return 0.0;
  if (std::abs(v - 1.0) <= kSnap) return 1.0;
  return v;
}

int RowArgmin(MatrixCRef g, Index row) {
  int best = 0;
  for (int k = 1; k < g.cols(); ++k) {
    if (g(row, k) < g(row, best)) best = k;
  }
  return best;
}

double LinearValue(MatrixCRef g, const Matrix& vertex, const Vector& slack_gradient,
                   const Vector& slack) {
  double v = (g.array() * vertex.array()).sum();
  if (slack.size() > 0) v += slack_gradient.dot(slack);
  return v;
}

OracleResult FastPath(const BlockPolytope& polytope, MatrixCRef g) {
  OracleResult r;
  r.status = LpStatus::kOptimal;
  r.vertex = Matrix::Zero(polytope.n_rows(), polytope.n_labels());
  r.slack = Vector::Zero(polytope.n_slack());
  for (Index n = 0; n < polytope.n_rows(); ++n) r.vertex(n, RowArgmin(g, n)) = 1.0;
  r.objective = (g.array() * r.vertex.array()).sum();
  return r;
}

OracleResult GeneralPath(const BlockPolytope& polytope, MatrixCRef g,
                         const Vector& slack_gradient) {
  const LinearProgram lp = polytope.ToLinearProgram(g, slack_gradient);
  const LpResult lp_result = MinimizeLp(lp);
  OracleResult r;
  r.status = lp_result.status;
  if (lp_result.status == LpStatus::kInfeasible) {
    const Index n_cov = static_cast<Index>(polytope.constraints().size());
    for (Index row : lp_result.infeasible_rows) {
      if (row < n_cov) r.infeasible_constraints.push_back(static_cast<int>(row));
    }
    return r;
  }
  if (lp_result.status != LpStatus::kOptimal) return r;
  const int k = polytope.n_labels();
  r.vertex.resize(polytope.n_rows(), k);
  for (Index n = 0; n < polytope.n_rows(); ++n) {
    for (int c = 0; c < k; ++c) r.vertex(n, c) = Snap(lp_result.x[n * k + c]);
  }
  r.slack = lp_result.x.tail(polytope.n_slack());
  for (Index s = 0; s < r.slack.size(); ++s) r.slack[s] = Snap(r.slack[s]);
  r.objective = LinearValue(g, r.vertex, slack_gradient, r.slack);
  return r;
}

OracleResult ReducedPath(const BlockPolytope& polytope, MatrixCRef g,
                         const Vector& slack_gradient) {
  const Index n_rows = polytope.n_rows();
  const int n_labels = polytope.n_labels();
  const auto& constraints = polytope.constraints();

  std::vector<std::vector<int>> row_labels(n_rows);
  for (const CoverageConstraint& c : constraints) {
    for (Index row : c.rows) row_labels[row].push_back(c.label);
  }
  // Reduced variable index of (row, j-th constrained label).
  std::vector<Index> first_var(n_rows + 1, 0);
  std::vector<int> free_label(n_rows, -1);
  for (Index n = 0; n < n_rows; ++n) {
    auto& labels = row_labels[n];
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    std::size_t pos = 0;
    for (int k = 0; k < n_labels; ++k) {
      if (pos < labels.size() && labels[pos] == k) {
        ++pos;
        continue;
      }
      if (free_label[n] < 0 || g(n, k) < g(n, free_label[n])) free_label[n] = k;
    }
    first_var[n + 1] = first_var[n] + static_cast<Index>(labels.size());
  }
  auto var_of = [&](Index row, int label) {
    const auto& labels = row_labels[row];
    const auto it = std::lower_bound(labels.begin(), labels.end(), label);
    return first_var[row] + (it - labels.begin());
  };

  const Index n_y = first_var[n_rows];
  const Index n_slack = polytope.n_slack();
  const Index n_vars = n_y + n_slack;

  Index n_row_ub = 0;
  Index n_row_eq = 0;
  for (Index n = 0; n < n_rows; ++n) {
    const std::size_t c = row_labels[n].size();
    if (c == 0) continue;
    if (free_label[n] < 0) {
      ++n_row_eq;
    } else if (c >= 2) {
      ++n_row_ub;
    }
  }
  const Index n_cov = static_cast<Index>(constraints.size());

  LinearProgram lp;
  lp.objective = Vector::Zero(n_vars);
  lp.lower = Vector::Zero(n_vars);
  lp.upper = Vector::Ones(n_vars);
  lp.start_at_upper.assign(n_vars, false);
  lp.a_ub = Matrix::Zero(n_cov + n_row_ub, n_vars);
  lp.b_ub = Vector::Zero(n_cov + n_row_ub);
  lp.a_eq = Matrix::Zero(n_row_eq, n_vars);
  lp.b_eq = Vector::Ones(n_row_eq);

  Index ub_row = n_cov;
  Index eq_row = 0;
  for (Index n = 0; n < n_rows; ++n) {
    const auto& labels = row_labels[n];
    if (labels.empty()) continue;
    const double base = free_label[n] >= 0 ? g(n, free_label[n]) : 0.0;
    Index best_var = -1;
    double best_cost = free_label[n] >= 0 ? 0.0 : std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const Index v = first_var[n] + static_cast<Index>(j);
      lp.objective[v] = g(n, labels[j]) - base;
      if (lp.objective[v] < best_cost) {
        best_cost = lp.objective[v];
        best_var = v;
      }
    }
    if (best_var >= 0) lp.start_at_upper[best_var] = true;
    if (free_label[n] < 0) {
      for (std::size_t j = 0; j < labels.size(); ++j) {
        lp.a_eq(eq_row, first_var[n] + static_cast<Index>(j)) = 1.0;
      }
      ++eq_row;
    } else if (labels.size() >= 2) {
      for (std::size_t j = 0; j < labels.size(); ++j) {
        lp.a_ub(ub_row, first_var[n] + static_cast<Index>(j)) = 1.0;
      }
      lp.b_ub[ub_row] = 1.0;
      ++ub_row;
    }
  }
  for (Index c = 0; c < n_cov; ++c) {
    const CoverageConstraint& con = constraints[c];
    for (std::size_t k = 0; k < con.rows.size(); ++k) {
      lp.a_ub(c, var_of(con.rows[k], con.label)) -= con.coefs[k];
    }
    if (con.slack_index >= 0) lp.a_ub(c, n_y + con.slack_index) = -1.0;
    lp.b_ub[c] = -con.rhs;
  }
  for (Index s = 0; s < n_slack; ++s) {
    lp.objective[n_y + s] = s < slack_gradient.size() ? slack_gradient[s] : 0.0;
    lp.upper[n_y + s] = polytope.slack().bound;
  }

  const LpResult lp_result = MinimizeLp(lp);
  OracleResult r;
  r.status = lp_result.status;
  if (lp_result.status == LpStatus::kInfeasible) {
    for (Index row : lp_result.infeasible_rows) {
      if (row < n_cov) r.infeasible_constraints.push_back(static_cast<int>(row));
    }
    return r;
  }
  if (lp_result.status != LpStatus::kOptimal) return r;

  r.vertex = Matrix::Zero(n_rows, n_labels);
  for (Index n = 0; n < n_rows; ++n) {
    const auto& labels = row_labels[n];
    double used = 0.0;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      const double v = Snap(lp_result.x[first_var[n] + static_cast<Index>(j)]);
      r.vertex(n, labels[j]) = v;
      used += v;
    }
    if (free_label[n] >= 0) r.vertex(n, free_label[n]) = Snap(1.0 - used);
  }
  r.slack = lp_result.x.tail(n_slack);
  for (Index s = 0; s < n_slack; ++s) r.slack[s] = Snap(r.slack[s]);
  r.objective = LinearValue(g, r.vertex, slack_gradient, r.slack);
  return r;
}

}  // namespace

OracleResult LinearOracle(const BlockPolytope& polytope, MatrixCRef gradient,
                          const Vector& slack_gradient, OraclePath path) {
  if (gradient.rows() != polytope.n_rows() || gradient.cols() != polytope.n_labels()) {
    throw std::invalid_argument("LinearOracle: gradient shape mismatch");
  }
  if (!gradient.allFinite() || !slack_gradient.allFinite()) {
    throw std::invalid_argument("LinearOracle: non-finite gradient");
  }
  if (slack_gradient.size() != 0 && slack_gradient.size() != polytope.n_slack()) {
    throw std::invalid_argument("LinearOracle: slack gradient size mismatch");
  }
  const Vector slack_cost = slack_gradient.size() == polytope.n_slack()
                                ? slack_gradient
                                : Vector::Zero(polytope.n_slack());
  OracleResult r;
  if (path == OraclePath::kGeneralLp) {
    r = GeneralPath(polytope, gradient, slack_cost);
  } else if (!polytope.has_inequalities()) {
    r = FastPath(polytope, gradient);
  } else {
    r = ReducedPath(polytope, gradient, slack_cost);
  }
  if (r.status == LpStatus::kUnbounded) {
    throw NumericError("LinearOracle: unbounded LP over a boxed polytope");
  }
  return r;
}

}  // namespace diffrac
