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

#ifndef DIFFRAC_LINALG_H_
#define DIFFRAC_LINALG_H_

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace diffrac {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using MatrixCRef = Eigen::Ref<const Matrix>;

// Largest absolute entry; zero for empty matrices.
double MaxAbs(MatrixCRef m);

// Per-sample descriptors, one row per sample. Non-empty with finite entries.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(Matrix data);

  Index n_samples() const { return data_.rows(); }
  Index dim() const { return data_.cols(); }
  const Matrix& data() const { return data_; }

  // Rows [offset, offset + count).
  auto Slab(Index offset, Index count) const {
    return data_.middleRows(offset, count);
  }

 private:
  Matrix data_;
};

// Relaxed label assignment: entries in [0, 1] and unit row sums.
class AssignmentMatrix {
 public:
  explicit AssignmentMatrix(Matrix data, double tolerance = 1e-9);

  Index n_samples() const { return data_.rows(); }
  Index n_labels() const { return data_.cols(); }
  const Matrix& data() const { return data_; }

 private:
  Matrix data_;
};

// P = (X^T X + N lambda I)^{-1} X^T, stored as one d x N_i slab per block so
// that block updates never touch the full d x N matrix.
class Projector {
 public:
  Projector(std::vector<Matrix> blocks, double ridge);

  std::size_t n_blocks() const { return blocks_.size(); }
  const Matrix& block(std::size_t i) const { return blocks_[i]; }
  Index offset(std::size_t i) const { return offsets_[i]; }
  Index block_size(std::size_t i) const { return blocks_[i].cols(); }
  Index total_samples() const { return total_samples_; }
  Index dim() const { return dim_; }
  double ridge() const { return ridge_; }

  // P * Y for a full N x K assignment.
  Matrix Apply(MatrixCRef y) const;
  // Concatenated d x N matrix. Test and debugging use only.
  Matrix Dense() const;

 private:
  std::vector<Matrix> blocks_;
  std::vector<Index> offsets_;
  Index total_samples_ = 0;
  Index dim_ = 0;
  double ridge_ = 0.0;
};

// Cholesky solve of the d x d ridge system, O(N d^2 + d^3).
Projector ComputeProjector(const FeatureMatrix& x, double lambda,
                           std::span<const Index> block_sizes);

// max |(X^T X + N lambda I) P - X^T|.
double ProjectorResidual(const FeatureMatrix& x, const Projector& p);

// f(Y) = (1/2N) (|Y|_F^2 - <Y, X P Y>_F), the ridge loss at its closed-form
// minimizer. O(N d K); the N x N quadratic form is never built.
double ObjectiveValue(MatrixCRef y, const FeatureMatrix& x, const Projector& p);

// (1/N) (Y^(i) - X^(i) W) where W must equal P Y for the current Y.
Matrix BlockGradient(MatrixCRef y_block, MatrixCRef x_block, MatrixCRef w,
                     Index total_samples);

// X W.
Matrix ClassifierScores(const FeatureMatrix& x, MatrixCRef w);

}  // namespace diffrac

#endif  // DIFFRAC_LINALG_H_
