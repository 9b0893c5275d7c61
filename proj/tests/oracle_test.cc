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

#include <random>

#include "doctest.h"
#include "support/brute_force.h"
#include "support/random_problems.h"

namespace diffrac {
namespace {

double LinearValue(MatrixCRef g, const Vector& sg, const OracleResult& r) {
  double v = g.cwiseProduct(r.vertex).sum();
  if (sg.size() > 0) v += sg.dot(r.slack);
  return v;
}

Vector FlattenCost(MatrixCRef g, const Vector& sg) {
  Vector c(g.size() + sg.size());
  Index j = 0;
  for (Index r = 0; r < g.rows(); ++r) {
    for (Index k = 0; k < g.cols(); ++k) c(j++) = g(r, k);
  }
  c.tail(sg.size()) = sg;
  return c;
}

TEST_CASE("bag-free rows take their argmin") {
  Block b;
  b.n_rows = 2;
  b.n_labels = 3;
  const BlockPolytope p = CompileBlock(b);
  Matrix g(2, 3);
  g << 0.3, -0.1, 0.2,
       0.0, 0.0, 0.0;
  const OracleResult r = LinearOracle(p, g, Vector());
  REQUIRE(r.status == LpStatus::kOptimal);
  Matrix expected(2, 3);
  expected << 0, 1, 0,
              1, 0, 0;  // all-zero row: lowest column
  CHECK(r.vertex == expected);
}

TEST_CASE("full background forces column zero") {
  std::mt19937_64 rng(4);
  Block b;
  b.n_rows = 4;
  b.n_labels = 3;
  b.background = BackgroundSet{{0, 1, 2, 3}, 1.0};
  const BlockPolytope p = CompileBlock(b);
  const OracleResult r = LinearOracle(p, testing::RandomMatrix(rng, 4, 3), Vector());
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.vertex.col(0).isOnes());
  CHECK(r.vertex.rightCols(2).isZero());
}

TEST_CASE("one bag over three rows matches the exhaustive one-hot search") {
  std::mt19937_64 rng(8);
  Block b;
  b.n_rows = 3;
  b.n_labels = 3;
  Bag bag;
  bag.member_rows = {0, 1, 2};
  bag.label = 1;
  b.bags.push_back(bag);
  const BlockPolytope p = CompileBlock(b);
  for (int t = 0; t < 50; ++t) {
    const Matrix g = testing::RandomMatrix(rng, 3, 3);
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < 3; ++a) {
      for (int c = 0; c < 3; ++c) {
        for (int e = 0; e < 3; ++e) {
          if (a != 1 && c != 1 && e != 1) continue;
          best = std::min(best, g(0, a) + g(1, c) + g(2, e));
        }
      }
    }
    const OracleResult r = LinearOracle(p, g, Vector());
    CHECK(std::abs(LinearValue(g, Vector(), r) - best) <= 1e-12);
  }
}

TEST_CASE("reduced and general paths agree with enumeration") {
  std::mt19937_64 rng(99);
  testing::BlockShape shape;
  shape.min_rows = 1;
  shape.max_rows = 4;
  shape.n_labels = 3;
  shape.n_bags = 2;
  shape.background = true;
  shape.weighted = true;
  for (int t = 0; t < 150; ++t) {
    shape.slack = t % 4 == 0;
    shape.n_labels = shape.slack ? 2 : 3;
    const Block b = testing::RandomBlock(rng, t, shape);
    const BlockPolytope p = CompileBlock(b);
    const Matrix g = testing::RandomMatrix(rng, b.n_rows, b.n_labels);
    Vector sg = Vector::Zero(p.n_slack());
    for (Index j = 0; j < sg.size(); ++j) sg(j) = std::abs(testing::RandomMatrix(rng, 1, 1)(0));
    const OracleResult fast = LinearOracle(p, g, sg, OraclePath::kAuto);
    const OracleResult full = LinearOracle(p, g, sg, OraclePath::kGeneralLp);
    REQUIRE(fast.status == LpStatus::kOptimal);
    REQUIRE(full.status == LpStatus::kOptimal);
    const testing::DenseSystem sys = testing::DenseSystemOf(b);
    const std::optional<double> brute = testing::EnumerateVertexMinimum(sys, FlattenCost(g, sg));
    REQUIRE(brute.has_value());
    CHECK(std::abs(LinearValue(g, sg, fast) - *brute) <= 1e-9);
    CHECK(std::abs(LinearValue(g, sg, full) - *brute) <= 1e-9);
    CHECK(std::abs(fast.objective - LinearValue(g, sg, fast)) <= 1e-9);
    CHECK(p.MaxViolation(fast.vertex, fast.slack) <= 1e-9);
  }
}

TEST_CASE("oracle dominates feasible samples") {
  std::mt19937_64 rng(5);
  testing::BlockShape shape;
  shape.min_rows = 6;
  shape.max_rows = 20;
  shape.n_labels = 4;
  shape.n_bags = 5;
  shape.background = true;
  for (int t = 0; t < 30; ++t) {
    const BlockPolytope p = CompileBlock(testing::RandomBlock(rng, t, shape));
    const Matrix g = testing::RandomMatrix(rng, p.n_rows(), p.n_labels());
    const OracleResult r = LinearOracle(p, g, Vector());
    const double best = LinearValue(g, Vector(), r);
    // Feasible samples: segments between the start and other oracle vertices.
    const FeasiblePoint start = InitialFeasiblePoint(p);
    for (int s = 0; s < 5; ++s) {
      const OracleResult other =
          LinearOracle(p, testing::RandomMatrix(rng, p.n_rows(), p.n_labels()), Vector());
      const double theta = std::uniform_real_distribution<double>(0, 1)(rng);
      const Matrix y = theta * start.y + (1 - theta) * other.vertex;
      REQUIRE(p.MaxViolation(y, Vector()) <= 1e-9);
      CHECK(best <= g.cwiseProduct(y).sum() + 1e-12);
    }
  }
}

TEST_CASE("oracle is deterministic") {
  std::mt19937_64 rng(6);
  testing::BlockShape shape;
  shape.min_rows = 30;
  shape.max_rows = 30;
  shape.n_bags = 10;
  shape.background = true;
  const BlockPolytope p = CompileBlock(testing::RandomBlock(rng, 0, shape));
  const Matrix g = testing::RandomMatrix(rng, 30, 3);
  const OracleResult a = LinearOracle(p, g, Vector());
  const OracleResult b = LinearOracle(p, g, Vector());
  CHECK(a.vertex == b.vertex);
}

TEST_CASE("bag-free vertices are one-hot") {
  std::mt19937_64 rng(10);
  Block b;
  b.n_rows = 50;
  b.n_labels = 5;
  const BlockPolytope p = CompileBlock(b);
  const OracleResult r = LinearOracle(p, testing::RandomMatrix(rng, 50, 5), Vector());
  for (Index n = 0; n < 50; ++n) {
    CHECK(r.vertex.row(n).sum() == 1.0);
    CHECK(r.vertex.row(n).maxCoeff() == 1.0);
  }
}

}  // namespace
}  // namespace diffrac
