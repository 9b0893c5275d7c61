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

#include "diffrac/simplex.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "diffrac/errors.h"

namespace diffrac {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kPivotTol = 1e-9;
// Reduced costs are compared after scaling the objective to unit max-norm.
constexpr double kCostTol = 1e-11;
constexpr double kRatioTieTol = 1e-12;
constexpr double kDegenerateStep = 1e-12;
constexpr int kBlandAfterDegenerate = 25;
constexpr double kFeasTol = 1e-9;

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVector = Eigen::RowVectorXd;

enum class VarState : unsigned char { kBasic, kLower, kUpper };

// Column layout: [structural | one slack per inequality row | artificials].
// Row layout: inequality rows first, then equality rows.
class DenseSimplex {
 public:
  explicit DenseSimplex(const LinearProgram& lp) : lp_(lp) {}

  LpResult Solve();

 private:
  void Setup();
  LpStatus Run();
  void Pivot(Index row, Index col);
  void SetCosts(const RowVector& costs);
  double NonbasicValue(Index j) const {
    return state_[j] == VarState::kUpper ? hi_[j] : lo_[j];
  }
  bool IsArtificial(Index j) const { return j >= n_ + m_ub_; }
  void DriveOutArtificials();
  void RefineBasicValues();
  Vector StructuralValues() const;

  const LinearProgram& lp_;
  Index n_ = 0;
  Index m_ub_ = 0;
  Index m_ = 0;
  Index n_total_ = 0;
  RowMatrix tableau_;
  RowVector reduced_;
  RowVector cost_;
  Vector beta_;
  std::vector<Index> basis_;
  std::vector<VarState> state_;
  std::vector<double> lo_;
  std::vector<double> hi_;
  std::vector<Index> artificial_row_;  // artificial column -> row
  std::vector<double> row_sign_;       // sign of the row's initial basic column
  long pivots_ = 0;
};

void DenseSimplex::Setup() {
  n_ = lp_.n_vars();
  m_ub_ = lp_.a_ub.rows();
  m_ = m_ub_ + lp_.a_eq.rows();

  std::vector<double> start(n_);
  for (Index j = 0; j < n_; ++j) {
    const bool want_upper = j < static_cast<Index>(lp_.start_at_upper.size()) &&
                            lp_.start_at_upper[j];
    if (std::isfinite(lp_.lower[j]) && !(want_upper && std::isfinite(lp_.upper[j]))) {
      start[j] = lp_.lower[j];
    } else {
      start[j] = lp_.upper[j];
    }
  }
  Eigen::Map<const Vector> x0(start.data(), n_);

  Vector residual(m_);
  if (m_ub_ > 0) residual.head(m_ub_) = lp_.b_ub - lp_.a_ub * x0;
  if (m_ > m_ub_) residual.tail(m_ - m_ub_) = lp_.b_eq - lp_.a_eq * x0;

  row_sign_.assign(m_, 1.0);
  artificial_row_.clear();
  std::vector<bool> needs_artificial(m_, false);
  for (Index i = 0; i < m_; ++i) {
    if (i >= m_ub_ || residual[i] < 0.0) {
      needs_artificial[i] = true;
      artificial_row_.push_back(i);
      row_sign_[i] = i < m_ub_ ? -1.0 : (residual[i] >= 0.0 ? 1.0 : -1.0);
    }
  }
  n_total_ = n_ + m_ub_ + static_cast<Index>(artificial_row_.size());

  lo_.assign(n_total_, 0.0);
  hi_.assign(n_total_, kInf);
  state_.assign(n_total_, VarState::kLower);
  for (Index j = 0; j < n_; ++j) {
    lo_[j] = lp_.lower[j];
    hi_[j] = lp_.upper[j];
    state_[j] = start[j] == lp_.lower[j] ? VarState::kLower : VarState::kUpper;
  }

  tableau_ = RowMatrix::Zero(m_, n_total_);
  if (m_ub_ > 0) tableau_.topLeftCorner(m_ub_, n_) = lp_.a_ub;
  if (m_ > m_ub_) tableau_.bottomLeftCorner(m_ - m_ub_, n_) = lp_.a_eq;
  for (Index i = 0; i < m_ub_; ++i) tableau_(i, n_ + i) = 1.0;

  basis_.assign(m_, -1);
  beta_.resize(m_);
  for (std::size_t k = 0; k < artificial_row_.size(); ++k) {
    const Index i = artificial_row_[k];
    const Index col = n_ + m_ub_ + static_cast<Index>(k);
    tableau_(i, col) = row_sign_[i];
    basis_[i] = col;
    state_[col] = VarState::kBasic;
  }
  for (Index i = 0; i < m_ub_; ++i) {
    if (!needs_artificial[i]) {
      basis_[i] = n_ + i;
      state_[n_ + i] = VarState::kBasic;
    }
  }
  // B is diagonal with entries +-1, so B^{-1} A is a row scaling.
  for (Index i = 0; i < m_; ++i) {
    if (row_sign_[i] < 0.0) tableau_.row(i) *= -1.0;
    beta_[i] = row_sign_[i] * residual[i];
  }
}

void DenseSimplex::SetCosts(const RowVector& costs) {
  cost_ = costs;
  reduced_ = cost_;
  for (Index i = 0; i < m_; ++i) {
    const double cb = cost_[basis_[i]];
    if (cb != 0.0) reduced_.noalias() -= cb * tableau_.row(i);
  }
  for (Index i = 0; i < m_; ++i) reduced_[basis_[i]] = 0.0;
}

void DenseSimplex::Pivot(Index row, Index col) {
  const double piv = tableau_(row, col);
  tableau_.row(row) /= piv;
  for (Index i = 0; i < m_; ++i) {
    if (i == row) continue;
    const double f = tableau_(i, col);
    if (f != 0.0) tableau_.row(i).noalias() -= f * tableau_.row(row);
    tableau_(i, col) = 0.0;
  }
  tableau_(row, col) = 1.0;
  const double dj = reduced_[col];
  if (dj != 0.0) reduced_.noalias() -= dj * tableau_.row(row);
  reduced_[col] = 0.0;
  ++pivots_;
}

LpStatus DenseSimplex::Run() {
  const long limit = 200 * (m_ + n_total_) + 1000;
  int degenerate_run = 0;
  bool bland = false;
  for (long iter = 0;; ++iter) {
    if (iter > limit) {
      throw NumericError("MinimizeLp: iteration limit exceeded");
    }
    Index enter = -1;
    int dir = 0;
    double best = 0.0;
    for (Index j = 0; j < n_total_; ++j) {
      const VarState st = state_[j];
      if (st == VarState::kBasic || lo_[j] == hi_[j]) continue;
      const double dj = reduced_[j];
      int cand = 0;
      if (st == VarState::kLower && dj < -kCostTol) {
        cand = 1;
      } else if (st == VarState::kUpper && dj > kCostTol) {
        cand = -1;
      }
      if (cand == 0) continue;
      if (bland) {
        enter = j;
        dir = cand;
        break;
      }
      if (std::abs(dj) > best) {
        best = std::abs(dj);
        enter = j;
        dir = cand;
      }
    }
    if (enter < 0) return LpStatus::kOptimal;

    double step = hi_[enter] - lo_[enter];
    Index leave = -1;
    double leave_alpha = 0.0;
    for (Index i = 0; i < m_; ++i) {
      const double alpha = dir * tableau_(i, enter);
      if (std::abs(alpha) <= kPivotTol) continue;
      const Index b = basis_[i];
      double limit_i;
      if (alpha > 0.0) {
        if (!std::isfinite(lo_[b])) continue;
        limit_i = (beta_[i] - lo_[b]) / alpha;
      } else {
        if (!std::isfinite(hi_[b])) continue;
        limit_i = (hi_[b] - beta_[i]) / -alpha;
      }
      limit_i = std::max(limit_i, 0.0);
      bool take = false;
      if (limit_i < step - kRatioTieTol) {
        take = true;
      } else if (leave >= 0 && limit_i <= step + kRatioTieTol) {
        if (bland) {
          take = b < basis_[leave];
        } else {
          const double a = std::abs(alpha);
          const double la = std::abs(leave_alpha);
          take = a > la || (a == la && b < basis_[leave]);
        }
      }
      if (take) {
        step = std::min(step, limit_i);
        leave = i;
        leave_alpha = alpha;
      }
    }
    if (!std::isfinite(step)) return LpStatus::kUnbounded;

    if (step != 0.0) {
      for (Index i = 0; i < m_; ++i) {
        const double t = tableau_(i, enter);
        if (t != 0.0) beta_[i] -= dir * t * step;
      }
    }
    if (leave < 0) {
      state_[enter] = dir > 0 ? VarState::kUpper : VarState::kLower;
    } else {
      const Index b = basis_[leave];
      const double entering_value =
          (dir > 0 ? lo_[enter] : hi_[enter]) + dir * step;
      state_[b] = leave_alpha > 0.0 ? VarState::kLower : VarState::kUpper;
      Pivot(leave, enter);
      basis_[leave] = enter;
      state_[enter] = VarState::kBasic;
      beta_[leave] = entering_value;
    }

    if (step <= kDegenerateStep) {
      if (++degenerate_run >= kBlandAfterDegenerate) bland = true;
    } else {
      degenerate_run = 0;
      bland = false;
    }
  }
}

void DenseSimplex::DriveOutArtificials() {
  for (Index i = 0; i < m_; ++i) {
    if (!IsArtificial(basis_[i])) continue;
    Index col = -1;
    double best = 1e-7;
    for (Index j = 0; j < n_ + m_ub_; ++j) {
      if (state_[j] == VarState::kBasic) continue;
      const double a = std::abs(tableau_(i, j));
      if (a > best) {
        best = a;
        col = j;
      }
    }
    if (col < 0) continue;  // redundant row
    const Index art = basis_[i];
    const double value = NonbasicValue(col);
    Pivot(i, col);
    state_[art] = VarState::kLower;
    basis_[i] = col;
    state_[col] = VarState::kBasic;
    beta_[i] = value;
  }
}

// Re-solve B x_B = b - N x_N from the original data to remove the round-off
// accumulated in the tableau.
void DenseSimplex::RefineBasicValues() {
  if (m_ == 0) return;
  Matrix basis_matrix = Matrix::Zero(m_, m_);
  Vector rhs(m_);
  if (m_ub_ > 0) rhs.head(m_ub_) = lp_.b_ub;
  if (m_ > m_ub_) rhs.tail(m_ - m_ub_) = lp_.b_eq;
  for (Index j = 0; j < n_; ++j) {
    if (state_[j] == VarState::kBasic) continue;
    const double v = NonbasicValue(j);
    if (v == 0.0) continue;
    if (m_ub_ > 0) rhs.head(m_ub_) -= lp_.a_ub.col(j) * v;
    if (m_ > m_ub_) rhs.tail(m_ - m_ub_) -= lp_.a_eq.col(j) * v;
  }
  for (Index i = 0; i < m_; ++i) {
    const Index b = basis_[i];
    if (b < n_) {
      if (m_ub_ > 0) basis_matrix.col(i).head(m_ub_) = lp_.a_ub.col(b);
      if (m_ > m_ub_) basis_matrix.col(i).tail(m_ - m_ub_) = lp_.a_eq.col(b);
    } else if (b < n_ + m_ub_) {
      basis_matrix(b - n_, i) = 1.0;
    } else {
      const Index r = artificial_row_[b - n_ - m_ub_];
      basis_matrix(r, i) = row_sign_[r];
    }
  }
  Eigen::PartialPivLU<Matrix> lu(basis_matrix);
  const Vector refined = lu.solve(rhs);
  if (!refined.allFinite()) return;
  if ((basis_matrix * refined - rhs).cwiseAbs().maxCoeff() >
      1e-12 * (1.0 + rhs.cwiseAbs().maxCoeff())) {
    return;
  }
  if ((refined - beta_).cwiseAbs().maxCoeff() > 1e-6) return;
  beta_ = refined;
}

Vector DenseSimplex::StructuralValues() const {
  Vector x(n_);
  for (Index j = 0; j < n_; ++j) {
    if (state_[j] != VarState::kBasic) x[j] = NonbasicValue(j);
  }
  for (Index i = 0; i < m_; ++i) {
    const Index b = basis_[i];
    if (b >= n_) continue;
    double v = beta_[i];
    // Snap round-off onto the box.
    if (v < lo_[b] && lo_[b] - v <= kFeasTol) v = lo_[b];
    if (v > hi_[b] && v - hi_[b] <= kFeasTol) v = hi_[b];
    x[b] = v;
  }
  return x;
}

LpResult DenseSimplex::Solve() {
  Setup();
  LpResult result;

  if (!artificial_row_.empty()) {
    RowVector phase_one = RowVector::Zero(n_total_);
    phase_one.tail(static_cast<Index>(artificial_row_.size())).setOnes();
    SetCosts(phase_one);
    Run();
    double infeasibility = 0.0;
    for (Index i = 0; i < m_; ++i) {
      if (IsArtificial(basis_[i])) infeasibility += std::max(beta_[i], 0.0);
    }
    double b_scale = 1.0;
    if (m_ub_ > 0) b_scale = std::max(b_scale, lp_.b_ub.cwiseAbs().maxCoeff());
    if (m_ > m_ub_) b_scale = std::max(b_scale, lp_.b_eq.cwiseAbs().maxCoeff());
    if (infeasibility > kFeasTol * b_scale) {
      result.status = LpStatus::kInfeasible;
      for (Index i = 0; i < m_; ++i) {
        if (IsArtificial(basis_[i]) && beta_[i] > kFeasTol * b_scale) {
          result.infeasible_rows.push_back(
              artificial_row_[basis_[i] - n_ - m_ub_]);
        }
      }
      std::sort(result.infeasible_rows.begin(), result.infeasible_rows.end());
      result.pivots = pivots_;
      return result;
    }
    for (Index j = n_ + m_ub_; j < n_total_; ++j) hi_[j] = 0.0;
    for (Index i = 0; i < m_; ++i) {
      if (IsArtificial(basis_[i])) beta_[i] = 0.0;
    }
    DriveOutArtificials();
  }

  RowVector phase_two = RowVector::Zero(n_total_);
  const double scale = lp_.objective.size() > 0
                           ? lp_.objective.cwiseAbs().maxCoeff()
                           : 0.0;
  if (scale > 0.0) phase_two.head(n_) = lp_.objective.transpose() / scale;
  SetCosts(phase_two);
  const LpStatus status = Run();
  result.pivots = pivots_;
  if (status == LpStatus::kUnbounded) {
    result.status = status;
    return result;
  }
  RefineBasicValues();
  result.status = LpStatus::kOptimal;
  result.x = StructuralValues();
  result.objective = lp_.objective.dot(result.x);
  return result;
}

}  // namespace

LinearProgram LinearProgram::Boxed(Vector objective, Vector lower, Vector upper) {
  LinearProgram lp;
  const Index n = objective.size();
  lp.objective = std::move(objective);
  lp.a_ub = Matrix(0, n);
  lp.b_ub = Vector(0);
  lp.a_eq = Matrix(0, n);
  lp.b_eq = Vector(0);
  lp.lower = std::move(lower);
  lp.upper = std::move(upper);
  return lp;
}

const char* LpStatusName(LpStatus status) {
  switch (status) {
    case LpStatus::kOptimal:
      return "optimal";
    case LpStatus::kInfeasible:
      return "infeasible";
    case LpStatus::kUnbounded:
      return "unbounded";
  }
  return "unknown";
}

void ValidateLinearProgram(const LinearProgram& lp) {
  const Index n = lp.n_vars();
  auto fail = [](const std::string& what) {
    throw std::invalid_argument("LinearProgram: " + what);
  };
  if (lp.lower.size() != n || lp.upper.size() != n) fail("bound size mismatch");
  if (lp.a_ub.rows() != lp.b_ub.size()) fail("a_ub/b_ub size mismatch");
  if (lp.a_eq.rows() != lp.b_eq.size()) fail("a_eq/b_eq size mismatch");
  if (lp.a_ub.rows() > 0 && lp.a_ub.cols() != n) fail("a_ub column mismatch");
  if (lp.a_eq.rows() > 0 && lp.a_eq.cols() != n) fail("a_eq column mismatch");
  if (!lp.objective.allFinite() || !lp.a_ub.allFinite() || !lp.b_ub.allFinite() ||
      !lp.a_eq.allFinite() || !lp.b_eq.allFinite()) {
    fail("non-finite data");
  }
  for (Index j = 0; j < n; ++j) {
    if (std::isnan(lp.lower[j]) || std::isnan(lp.upper[j])) fail("NaN bound");
    if (lp.lower[j] > lp.upper[j]) fail("lower > upper for variable " + std::to_string(j));
    if (!std::isfinite(lp.lower[j]) && !std::isfinite(lp.upper[j])) {
      fail("free variables are not supported (variable " + std::to_string(j) + ")");
    }
  }
}

LpResult MinimizeLp(const LinearProgram& lp) {
  ValidateLinearProgram(lp);
  LinearProgram normalized;
  const LinearProgram* source = &lp;
  // Column counts of empty blocks are irrelevant; make them consistent.
  if ((lp.a_ub.rows() == 0 && lp.a_ub.cols() != lp.n_vars()) ||
      (lp.a_eq.rows() == 0 && lp.a_eq.cols() != lp.n_vars())) {
    normalized = lp;
    if (lp.a_ub.rows() == 0) normalized.a_ub = Matrix(0, lp.n_vars());
    if (lp.a_eq.rows() == 0) normalized.a_eq = Matrix(0, lp.n_vars());
    source = &normalized;
  }
  DenseSimplex simplex(*source);
  return simplex.Solve();
}

double LpViolation(const LinearProgram& lp, const Vector& x) {
  double worst = 0.0;
  if (lp.a_ub.rows() > 0) {
    worst = std::max(worst, (lp.a_ub * x - lp.b_ub).maxCoeff());
  }
  if (lp.a_eq.rows() > 0) {
    worst = std::max(worst, (lp.a_eq * x - lp.b_eq).cwiseAbs().maxCoeff());
  }
  for (Index j = 0; j < x.size(); ++j) {
    worst = std::max(worst, lp.lower[j] - x[j]);
    worst = std::max(worst, x[j] - lp.upper[j]);
  }
  return worst;
}

}  // namespace diffrac
