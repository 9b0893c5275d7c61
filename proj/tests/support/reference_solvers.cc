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

#include "support/reference_solvers.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/Cholesky>
#include <Eigen/QR>

namespace diffrac::testing {

Matrix DenseCostMatrix(const Matrix& x, double lambda) {
  const Index n = x.rows();
  const double nl = static_cast<double>(n) * lambda;
  Matrix gram = x * x.transpose();
  gram.diagonal().array() += nl;
  return nl * gram.ldlt().solve(Matrix::Identity(n, n));
}

double RidgeMinimum(const Matrix& y, const Matrix& x, double lambda) {
  const Index n = x.rows();
  const Index d = x.cols();
  const double nl = static_cast<double>(n) * lambda;
  // Ridge as ordinary least squares on [X; sqrt(N lambda) I].
  Matrix aug = Matrix::Zero(n + d, d);
  aug.topRows(n) = x;
  aug.bottomRows(d) = std::sqrt(nl) * Matrix::Identity(d, d);
  Matrix rhs = Matrix::Zero(n + d, y.cols());
  rhs.topRows(n) = y;
  const Matrix w = aug.colPivHouseholderQr().solve(rhs);
  return (y - x * w).squaredNorm() / (2.0 * n) + 0.5 * lambda * w.squaredNorm();
}

Vector ProjectToSimplex(const Vector& v) {
  std::vector<double> u(v.data(), v.data() + v.size());
  std::sort(u.begin(), u.end(), std::greater<double>());
  double cum = 0.0;
  double theta = 0.0;
  for (std::size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - 1.0) / static_cast<double>(j + 1);
    if (u[j] - t > 0.0) theta = t;
  }
  return (v.array() - theta).max(0.0).matrix();
}

namespace {

struct Halfspace {
  std::vector<Index> rows;
  std::vector<double> coefs;
  int label = 0;
  double rhs = 0.0;
  double norm2 = 0.0;
};

std::vector<Halfspace> HalfspacesOf(const Block& block) {
  std::vector<Halfspace> out;
  for (const Bag& bag : block.bags) {
    Halfspace h;
    h.rows = bag.member_rows;
    h.label = bag.label;
    for (std::size_t j = 0; j < bag.member_rows.size(); ++j) {
      h.coefs.push_back(bag.kind == BagKind::kWeighted ? bag.weights[j] : 1.0);
    }
    h.rhs = std::min(bag.lower_bound, static_cast<double>(bag.member_rows.size()));
    out.push_back(std::move(h));
  }
  if (block.background) {
    Halfspace h;
    h.rows = block.background->member_rows;
    h.coefs.assign(h.rows.size(), 1.0);
    h.label = kBackgroundLabel;
    h.rhs = block.background->fraction * static_cast<double>(h.rows.size());
    out.push_back(std::move(h));
  }
  for (Halfspace& h : out) {
    for (double c : h.coefs) h.norm2 += c * c;
  }
  return out;
}

double Violation(const Matrix& y, const std::vector<Halfspace>& hs) {
  double v = 0.0;
  for (Index r = 0; r < y.rows(); ++r) {
    v = std::max(v, std::abs(y.row(r).sum() - 1.0));
    v = std::max(v, -y.row(r).minCoeff());
  }
  for (const Halfspace& h : hs) {
    double cov = 0.0;
    for (std::size_t j = 0; j < h.rows.size(); ++j) cov += h.coefs[j] * y(h.rows[j], h.label);
    v = std::max(v, h.rhs - cov);
  }
  return v;
}

// Dykstra over the row simplices and the halfspaces of one block.
Matrix ProjectBlock(const Matrix& v, const std::vector<Halfspace>& hs) {
  Matrix y = v;
  Matrix inc_simplex = Matrix::Zero(v.rows(), v.cols());
  std::vector<Vector> inc(hs.size());
  for (std::size_t j = 0; j < hs.size(); ++j) inc[j] = Vector::Zero(hs[j].rows.size());
  for (int cycle = 0; cycle < 20000; ++cycle) {
    const Matrix before = y;
    const Matrix shifted = y + inc_simplex;
    for (Index r = 0; r < y.rows(); ++r) {
      y.row(r) = ProjectToSimplex(shifted.row(r).transpose()).transpose();
    }
    inc_simplex = shifted - y;
    for (std::size_t j = 0; j < hs.size(); ++j) {
      const Halfspace& h = hs[j];
      double cov = 0.0;
      for (std::size_t t = 0; t < h.rows.size(); ++t) {
        y(h.rows[t], h.label) += inc[j](t);
        cov += h.coefs[t] * y(h.rows[t], h.label);
      }
      const double step = std::max(0.0, h.rhs - cov) / h.norm2;
      for (std::size_t t = 0; t < h.rows.size(); ++t) {
        const double before_t = y(h.rows[t], h.label);
        y(h.rows[t], h.label) += step * h.coefs[t];
        inc[j](t) = before_t - y(h.rows[t], h.label);
      }
    }
    if (hs.empty()) break;
    if ((y - before).cwiseAbs().maxCoeff() < 1e-14 && Violation(y, hs) < 1e-12) break;
  }
  return y;
}

}  // namespace

ReferenceSolution ProjectedGradientReference(const Matrix& x, double lambda,
                                             const std::vector<Block>& blocks,
                                             int iterations) {
  const Index n = x.rows();
  const int k = blocks.front().n_labels;
  std::vector<Index> offsets;
  std::vector<std::vector<Halfspace>> hs;
  Index total = 0;
  for (const Block& b : blocks) {
    if (b.slack.enabled) throw std::invalid_argument("reference: slack unsupported");
    offsets.push_back(total);
    total += b.n_rows;
    hs.push_back(HalfspacesOf(b));
  }
  if (total != n) throw std::invalid_argument("reference: row count mismatch");
  Matrix gram = x.transpose() * x;
  gram.diagonal().array() += static_cast<double>(n) * lambda;
  const Eigen::LLT<Matrix> llt(gram);
  auto grad = [&](const Matrix& y) -> Matrix {
    return (y - x * llt.solve(x.transpose() * y)) / static_cast<double>(n);
  };
  auto objective = [&](const Matrix& y) {
    return 0.5 * (y.cwiseProduct(grad(y))).sum();
  };
  auto project = [&](const Matrix& v) {
    Matrix out(n, k);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      out.middleRows(offsets[i], blocks[i].n_rows) =
          ProjectBlock(v.middleRows(offsets[i], blocks[i].n_rows), hs[i]);
    }
    return out;
  };
  // The cost matrix has spectrum in [0, 1], so 1/N bounds the curvature.
  const double step = static_cast<double>(n);
  Matrix y = project(Matrix::Constant(n, k, 1.0 / k));
  Matrix z = y;
  double t = 1.0;
  double f_prev = objective(y);
  for (int it = 0; it < iterations; ++it) {
    const Matrix next = project(z - step * grad(z));
    const double f_next = objective(next);
    if (f_next > f_prev) {
      // Adaptive restart: drop the momentum and retake a plain step.
      t = 1.0;
      z = y;
      continue;
    }
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / t_next) * (next - y);
    y = next;
    t = t_next;
    f_prev = f_next;
  }
  ReferenceSolution out;
  out.y = y;
  out.objective = objective(y);
  out.max_violation = 0.0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    out.max_violation = std::max(
        out.max_violation, Violation(y.middleRows(offsets[i], blocks[i].n_rows), hs[i]));
  }
  return out;
}

}  // namespace diffrac::testing
