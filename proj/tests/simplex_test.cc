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

#include <random>

#include "doctest.h"
#include "support/brute_force.h"

namespace diffrac {
namespace {

TEST_CASE("minimize a single boxed variable") {
  const LinearProgram lp = LinearProgram::Boxed(Vector::Ones(1), Vector::Zero(1), Vector::Ones(1));
  const LpResult r = MinimizeLp(lp);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.x(0) == 0.0);
  CHECK(r.objective == 0.0);
}

TEST_CASE("diagonal facet of the unit square") {
  LinearProgram lp = LinearProgram::Boxed(-Vector::Ones(2), Vector::Zero(2), Vector::Ones(2));
  lp.a_ub = Matrix::Ones(1, 2);
  lp.b_ub = Vector::Ones(1);
  const LpResult r = MinimizeLp(lp);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(-1.0));
  // A vertex: one coordinate at 1, the other at 0.
  CHECK(std::min(r.x(0), r.x(1)) == doctest::Approx(0.0));
  CHECK(LpViolation(lp, r.x) <= 1e-12);
}

TEST_CASE("infeasible system reports the violated rows") {
  LinearProgram lp = LinearProgram::Boxed(Vector::Zero(2), Vector::Zero(2), Vector::Ones(2));
  lp.a_ub = -Matrix::Ones(1, 2);
  lp.b_ub = Vector::Constant(1, -3.0);  // x + y >= 3 inside the unit square
  const LpResult r = MinimizeLp(lp);
  CHECK(r.status == LpStatus::kInfeasible);
  REQUIRE(r.infeasible_rows.size() == 1);
  CHECK(r.infeasible_rows[0] == 0);
}

TEST_CASE("unbounded direction") {
  Vector upper(1);
  upper << std::numeric_limits<double>::infinity();
  const LinearProgram lp = LinearProgram::Boxed(-Vector::Ones(1), Vector::Zero(1), upper);
  CHECK(MinimizeLp(lp).status == LpStatus::kUnbounded);
}

TEST_CASE("malformed programs are rejected") {
  LinearProgram lp = LinearProgram::Boxed(Vector::Zero(2), Vector::Zero(2), Vector::Ones(2));
  lp.a_ub = Matrix::Ones(1, 3);
  lp.b_ub = Vector::Ones(1);
  CHECK_THROWS_AS(ValidateLinearProgram(lp), std::invalid_argument);
  LinearProgram crossed = LinearProgram::Boxed(Vector::Zero(1), Vector::Ones(1), Vector::Zero(1));
  CHECK_THROWS_AS(ValidateLinearProgram(crossed), std::invalid_argument);
}

TEST_CASE("random bounded programs match basis enumeration") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_int_distribution<int> nvars(2, 8);
  std::uniform_int_distribution<int> ncons(1, 5);
  int optimal = 0;
  for (int trial = 0; trial < 150; ++trial) {
    const int n = nvars(rng);
    const int m_ge = ncons(rng);
    const int m_eq = std::uniform_int_distribution<int>(0, 2)(rng);
    testing::DenseSystem sys;
    sys.a_ge = Matrix(m_ge, n);
    sys.b_ge = Vector(m_ge);
    sys.a_eq = Matrix(m_eq, n);
    sys.b_eq = Vector(m_eq);
    sys.upper = Vector(n);
    for (int j = 0; j < n; ++j) sys.upper(j) = 0.5 + 0.5 * (u(rng) + 1.0);
    for (int i = 0; i < m_ge; ++i) {
      for (int j = 0; j < n; ++j) sys.a_ge(i, j) = u(rng);
      sys.b_ge(i) = 0.5 * u(rng);
    }
    for (int i = 0; i < m_eq; ++i) {
      for (int j = 0; j < n; ++j) sys.a_eq(i, j) = u(rng) + 1.2;
      sys.b_eq(i) = 0.3 * sys.a_eq.row(i).dot(sys.upper);
    }
    Vector c(n);
    for (int j = 0; j < n; ++j) c(j) = u(rng);

    LinearProgram lp = LinearProgram::Boxed(c, Vector::Zero(n), sys.upper);
    lp.a_ub = -sys.a_ge;
    lp.b_ub = -sys.b_ge;
    lp.a_eq = sys.a_eq;
    lp.b_eq = sys.b_eq;
    const LpResult r = MinimizeLp(lp);
    const std::optional<double> brute = testing::EnumerateVertexMinimum(sys, c);
    REQUIRE(brute.has_value() == (r.status == LpStatus::kOptimal));
    if (brute) {
      ++optimal;
      CHECK(std::abs(r.objective - *brute) <= 1e-9);
      CHECK(LpViolation(lp, r.x) <= 1e-9);
    }
  }
  CHECK(optimal > 50);
}

TEST_CASE("degenerate program terminates") {
  // Many redundant copies of one facet: Bland's rule must avoid cycling.
  const int n = 6;
  LinearProgram lp = LinearProgram::Boxed(-Vector::Ones(n), Vector::Zero(n), Vector::Ones(n));
  lp.a_ub = Matrix::Ones(8, n);
  lp.b_ub = Vector::Ones(8);
  const LpResult r = MinimizeLp(lp);
  REQUIRE(r.status == LpStatus::kOptimal);
  CHECK(r.objective == doctest::Approx(-1.0));
}

}  // namespace
}  // namespace diffrac
