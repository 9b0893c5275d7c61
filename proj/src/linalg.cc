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

#include "diffrac/linalg.h"

#include <cmath>
#include <stdexcept>
#include <string>

#include "diffrac/errors.h"

namespace diffrac {

double MaxAbs(MatrixCRef m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

FeatureMatrix::FeatureMatrix(Matrix data) : data_(std::move(data)) {
  if (data_.rows() < 1 || data_.cols() < 1) {
    throw std::invalid_argument("FeatureMatrix: need at least one row and column");
  }
  if (!data_.allFinite()) {
    throw std::invalid_argument("FeatureMatrix: non-finite entry");
  }
}

AssignmentMatrix::AssignmentMatrix(Matrix data, double tolerance)
    : data_(std::move(data)) {
  if (!data_.allFinite()) {
    throw std::invalid_argument("AssignmentMatrix: non-finite entry");
  }
  for (Index n = 0; n < data_.rows(); ++n) {
    if (data_.row(n).minCoeff() < -tolerance ||
        data_.row(n).maxCoeff() > 1.0 + tolerance) {
      throw std::invalid_argument("AssignmentMatrix: entry outside [0,1] in row " +
                                  std::to_string(n));
    }
    if (std::abs(data_.row(n).sum() - 1.0) > tolerance) {
      throw std::invalid_argument("AssignmentMatrix: row " + std::to_string(n) +
                                  " does not sum to one");
    }
  }
}

Projector::Projector(std::vector<Matrix> blocks, double ridge)
    : blocks_(std::move(blocks)), ridge_(ridge) {
  if (blocks_.empty()) throw std::invalid_argument("Projector: no blocks");
  dim_ = blocks_.front().rows();
  offsets_.reserve(blocks_.size());
  for (const Matrix& b : blocks_) {
    if (b.rows() != dim_) {
      throw std::invalid_argument("Projector: inconsistent block dimension");
    }
    offsets_.push_back(total_samples_);
    total_samples_ += b.cols();
  }
}

Matrix Projector::Apply(MatrixCRef y) const {
  if (y.rows() != total_samples_) {
    throw std::invalid_argument("Projector::Apply: row count mismatch");
  }
  Matrix w = Matrix::Zero(dim_, y.cols());
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    w.noalias() += blocks_[i] * y.middleRows(offsets_[i], blocks_[i].cols());
  }
  return w;
}

Matrix Projector::Dense() const {
  Matrix p(dim_, total_samples_);
  for (std::size_t i = 0; i < blocks_.size(); ++i) {
    p.middleCols(offsets_[i], blocks_[i].cols()) = blocks_[i];
  }
  return p;
}

Projector ComputeProjector(const FeatureMatrix& x, double lambda,
                           std::span<const Index> block_sizes) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("ComputeProjector: lambda must be positive");
  }
  Index total = 0;
  for (Index s : block_sizes) {
    if (s < 1) throw std::invalid_argument("ComputeProjector: empty block");
    total += s;
  }
  const Index n = x.n_samples();
  if (block_sizes.empty() || total != n) {
    throw std::invalid_argument("ComputeProjector: block sizes sum to " +
                                std::to_string(total) + ", expected " +
                                std::to_string(n));
  }
  const Index d = x.dim();
  Matrix gram = Matrix::Zero(d, d);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(x.data().transpose());
  gram.diagonal().array() += static_cast<double>(n) * lambda;
  Eigen::LLT<Matrix, Eigen::Lower> llt(gram);
  if (llt.info() != Eigen::Success) {
    throw NumericError("ComputeProjector: ridge system is not positive definite");
  }

  std::vector<Matrix> blocks;
  blocks.reserve(block_sizes.size());
  Index offset = 0;
  for (Index s : block_sizes) {
    blocks.push_back(llt.solve(x.Slab(offset, s).transpose()));
    offset += s;
  }
  return Projector(std::move(blocks), lambda);
}

double ProjectorResidual(const FeatureMatrix& x, const Projector& p) {
  const Index n = x.n_samples();
  const double shift = static_cast<double>(n) * p.ridge();
  const Matrix gram = x.data().transpose() * x.data();
  double worst = 0.0;
  for (std::size_t i = 0; i < p.n_blocks(); ++i) {
    auto xi = x.Slab(p.offset(i), p.block_size(i));
    Matrix r = gram * p.block(i);
    r += shift * p.block(i);
    r -= xi.transpose();
    worst = std::max(worst, MaxAbs(r));
  }
  return worst;
}

double ObjectiveValue(MatrixCRef y, const FeatureMatrix& x, const Projector& p) {
  if (y.rows() != x.n_samples() || p.total_samples() != x.n_samples() ||
      p.dim() != x.dim()) {
    throw std::invalid_argument("ObjectiveValue: shape mismatch");
  }
  const Matrix w = p.Apply(y);
  const double fit = (y.array() * (x.data() * w).array()).sum();
  return (y.squaredNorm() - fit) / (2.0 * static_cast<double>(x.n_samples()));
}

Matrix BlockGradient(MatrixCRef y_block, MatrixCRef x_block, MatrixCRef w,
                     Index total_samples) {
  if (y_block.rows() != x_block.rows() || x_block.cols() != w.rows() ||
      y_block.cols() != w.cols() || total_samples < 1) {
    throw std::invalid_argument("BlockGradient: shape mismatch");
  }
  Matrix g = y_block;
  g.noalias() -= x_block * w;
  g /= static_cast<double>(total_samples);
  return g;
}

Matrix ClassifierScores(const FeatureMatrix& x, MatrixCRef w) {
  if (x.dim() != w.rows()) {
    throw std::invalid_argument("ClassifierScores: shape mismatch");
  }
  return x.data() * w;
}

}  // namespace diffrac
