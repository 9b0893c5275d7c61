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

#include <random>
#include <vector>

#include "doctest.h"
#include "support/random_problems.h"
#include "support/reference_solvers.h"

namespace diffrac {
namespace {

using testing::RandomAssignment;
using testing::RandomMatrix;

Projector SingleBlockProjector(const FeatureMatrix& x, double lambda) {
  const std::vector<Index> sizes{x.n_samples()};
  return ComputeProjector(x, lambda, sizes);
}

TEST_CASE("projector of a scalar problem") {
  const FeatureMatrix x(Matrix::Constant(1, 1, 1.0));
  const Projector p = SingleBlockProjector(x, 1.0);
  CHECK(p.Dense()(0, 0) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("zero features give a zero projector") {
  const FeatureMatrix x(Matrix::Zero(3, 2));
  const Projector p = SingleBlockProjector(x, 0.1);
  CHECK(p.Dense().rows() == 2);
  CHECK(p.Dense().cols() == 3);
  CHECK(MaxAbs(p.Dense()) == 0.0);
}

TEST_CASE("projector residual on random features") {
  std::mt19937_64 rng(7);
  const FeatureMatrix x(RandomMatrix(rng, 20, 5));
  const std::vector<Index> sizes{6, 9, 5};
  const Projector p = ComputeProjector(x, 0.01, sizes);
  CHECK(p.n_blocks() == 3);
  CHECK(p.offset(2) == 15);
  CHECK(ProjectorResidual(x, p) <= 1e-10);
}

TEST_CASE("projector rejects bad inputs") {
  const FeatureMatrix x(Matrix::Ones(4, 2));
  const std::vector<Index> wrong_total{1, 2};
  CHECK_THROWS_AS(ComputeProjector(x, 0.1, wrong_total), std::invalid_argument);
  const std::vector<Index> ok{4};
  CHECK_THROWS_AS(ComputeProjector(x, 0.0, ok), std::invalid_argument);
  Matrix bad = Matrix::Ones(2, 2);
  bad(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(FeatureMatrix{bad}, std::invalid_argument);
}

TEST_CASE("assignment matrix validation") {
  CHECK_NOTHROW(AssignmentMatrix(Matrix::Identity(3, 3)));
  Matrix rows(1, 2);
  rows << 0.6, 0.6;
  CHECK_THROWS_AS(AssignmentMatrix{rows}, std::invalid_argument);
  rows << 1.2, -0.2;
  CHECK_THROWS_AS(AssignmentMatrix{rows}, std::invalid_argument);
}

TEST_CASE("objective with zero features") {
  const FeatureMatrix x(Matrix::Zero(2, 3));
  const Projector p = SingleBlockProjector(x, 0.5);
  CHECK(ObjectiveValue(Matrix::Identity(2, 2), x, p) == doctest::Approx(0.5));
}

TEST_CASE("objective of the scalar ridge") {
  const FeatureMatrix x(Matrix::Constant(1, 1, 1.0));
  const Projector p = SingleBlockProjector(x, 1.0);
  CHECK(ObjectiveValue(Matrix::Constant(1, 1, 1.0), x, p) == doctest::Approx(0.25));
}

TEST_CASE("objective equals the ridge minimum and the explicit quadratic") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 5; ++trial) {
    const Matrix xm = RandomMatrix(rng, 30, 4);
    const Matrix y = RandomAssignment(rng, 30, 3);
    const FeatureMatrix x(xm);
    const Projector p = SingleBlockProjector(x, 0.05);
    const double f = ObjectiveValue(y, x, p);
    const double ridge = testing::RidgeMinimum(y, xm, 0.05);
    CHECK(std::abs(f - ridge) <= 1e-10 * std::abs(ridge));
    const Matrix a = testing::DenseCostMatrix(xm, 0.05);
    const double quad = (y.transpose() * a * y).trace() / (2.0 * 30);
    CHECK(std::abs(f - quad) <= 1e-10 * std::abs(quad));
    CHECK(f >= 0.0);
  }
}

TEST_CASE("block gradients stack into the monolithic gradient") {
  std::mt19937_64 rng(3);
  const FeatureMatrix x(RandomMatrix(rng, 24, 5));
  const std::vector<Index> sizes{10, 8, 6};
  const Projector p = ComputeProjector(x, 0.02, sizes);
  const Matrix y = RandomAssignment(rng, 24, 4);
  const Matrix w = p.Apply(y);
  const Matrix full = (y - x.data() * w) / 24.0;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    const Matrix g = BlockGradient(y.middleRows(p.offset(i), sizes[i]),
                                   x.Slab(p.offset(i), sizes[i]), w, 24);
    CHECK(MaxAbs(g - full.middleRows(p.offset(i), sizes[i])) <= 1e-12);
  }
}

TEST_CASE("block gradient with zero weights") {
  std::mt19937_64 rng(5);
  const Matrix y = RandomAssignment(rng, 4, 3);
  const Matrix g = BlockGradient(y, RandomMatrix(rng, 4, 2), Matrix::Zero(2, 3), 10);
  CHECK(MaxAbs(g - y / 10.0) <= 1e-15);
}

TEST_CASE("classifier scores") {
  std::mt19937_64 rng(9);
  const Matrix w = RandomMatrix(rng, 3, 2);
  CHECK(MaxAbs(ClassifierScores(FeatureMatrix(Matrix::Identity(3, 3)), w) - w) == 0.0);
  CHECK(MaxAbs(ClassifierScores(FeatureMatrix(RandomMatrix(rng, 5, 3)), Matrix::Zero(3, 2))) ==
        0.0);
}

TEST_CASE("scores equal ridge predictions") {
  std::mt19937_64 rng(13);
  const Matrix xm = RandomMatrix(rng, 25, 4);
  const Matrix y = RandomAssignment(rng, 25, 3);
  const FeatureMatrix x(xm);
  const Projector p = SingleBlockProjector(x, 0.1);
  Matrix gram = xm.transpose() * xm;
  gram.diagonal().array() += 25 * 0.1;
  const Matrix w_ref = gram.ldlt().solve(xm.transpose() * y);
  CHECK(MaxAbs(ClassifierScores(x, p.Apply(y)) - xm * w_ref) <= 1e-10);
}

}  // namespace
}  // namespace diffrac
