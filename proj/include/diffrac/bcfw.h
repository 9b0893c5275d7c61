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

#ifndef DIFFRAC_BCFW_H_
#define DIFFRAC_BCFW_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "diffrac/constraints.h"
#include "diffrac/linalg.h"
#include "diffrac/oracle.h"

namespace diffrac {

// A DIFFRAC instance over a Cartesian product of block polytopes. Block i
// owns rows [projector.offset(i), projector.offset(i) + N_i) of X and Y.
struct Problem {
  FeatureMatrix x;
  Projector projector;
  std::vector<BlockPolytope> blocks;
  int n_labels = 0;
  // Positive factor applied to the whole objective (gradients, gaps and the
  // line-search curvature alike). Iterates do not depend on it.
  double objective_scale = 1.0;

  std::size_t n_blocks() const { return blocks.size(); }
  Index total_samples() const { return x.n_samples(); }
  Index offset(std::size_t i) const { return projector.offset(i); }
  Index block_rows(std::size_t i) const { return projector.block_size(i); }
};

// Computes the projector with one slab per polytope. All polytopes must
// share the label count and their row counts must add up to N.
Problem MakeProblem(FeatureMatrix x, double lambda, std::vector<BlockPolytope> blocks);

struct SolverState {
  std::vector<Matrix> y;      // per block, N_i x K
  std::vector<Vector> slack;  // per block
  Matrix w;                   // d x K, maintained equal to P Y
  std::vector<double> gaps;   // last computed block gaps, +inf if unvisited
  std::int64_t iteration = 0;
  std::mt19937_64 rng;
};

// Feasible start of every block (see InitialFeasiblePoint), W = P Y.
SolverState InitialState(const Problem& problem, std::uint64_t seed = 0);

// Blocks stacked into the N x K matrix.
Matrix StackedAssignment(const Problem& problem, const SolverState& state);

// c (f(Y) + sum_i rho/2 |xi_i|^2).
double SlackAugmentedObjective(const Problem& problem, const SolverState& state);

// max |W - P Y| / (1 + max |P Y|), from a dense recomputation.
double WeightDrift(const Problem& problem, const SolverState& state);

// Largest constraint residual over all blocks.
double MaxResidual(const Problem& problem, const SolverState& state);

enum class Sampling { kGapProportional, kUniform, kCyclic };

const char* SamplingName(Sampling sampling);

struct SolverConfig {
  // Defaults to 50 * n_blocks.
  std::optional<std::int64_t> max_iters;
  // Stop when the sum of clamped block gaps drops below this. Defaults to
  // 1e-5 times the initial objective.
  std::optional<double> gap_tolerance;
  Sampling sampling = Sampling::kGapProportional;
  // Minimum probability per block under gap sampling. Defaults to
  // 0.01 / n_blocks; must lie in [0, 1 / n_blocks].
  std::optional<double> sampling_floor;
  // Evaluate the objective every this many steps; 0 disables.
  std::int64_t objective_log_period = 100;
  std::uint64_t seed = 0;
  OraclePath oracle_path = OraclePath::kAuto;
};

// Unvisited (+inf gap) blocks are drawn uniformly first. Afterwards block i
// is drawn with probability floor + (1 - n floor) max(g_i, 0) / sum_j max(g_j, 0),
// or uniformly when every gap is zero.
std::size_t SampleBlock(const std::vector<double>& gaps, Sampling sampling,
                        double floor, std::int64_t iteration, std::mt19937_64& rng);

// Exact minimizer over [0, 1] of the quadratic along D. `pd` is P_i D; the
// curvature is c ((1/N) <D, D - X_i P_i D> + rho |D_xi|^2).
double LineSearchGamma(MatrixCRef d, double gap, MatrixCRef x_block, MatrixCRef pd,
                       Index total_samples, double rho, const Vector& d_slack,
                       double scale = 1.0);

struct StepRecord {
  std::int64_t iteration = 0;
  // Block index, or -1 for a full batch step.
  std::int64_t block = 0;
  double gap = 0.0;
  double gamma = 0.0;
  // NaN when the step was not logged.
  double objective = std::numeric_limits<double>::quiet_NaN();
  double wall_ms = 0.0;
};

struct Trace {
  std::vector<StepRecord> steps;
};

// One iteration of the block-coordinate method on block i: gradient from the
// maintained W, oracle, block gap, line search, then the O(N_i d K) update
// of W and the block. Increments state.iteration.
StepRecord BcfwStep(const Problem& problem, SolverState& state, std::size_t i,
                    OraclePath path = OraclePath::kAuto);

// Recomputes every block gap at the current iterate without moving it.
// Returns the sum of clamped gaps.
double RecomputeAllGaps(const Problem& problem, SolverState& state,
                        OraclePath path = OraclePath::kAuto);

struct SolveResult {
  SolverState state;
  Trace trace;
  bool converged = false;
  // Sum of clamped gaps at exit (verified by a full pass when converged).
  double gap_sum = std::numeric_limits<double>::infinity();
};

using StepObserver = std::function<void(const SolverState&, const StepRecord&)>;

// Runs steps until the stale gap sum falls below the tolerance and a full
// recomputation confirms it, or until max_iters. Deterministic given the
// seed. The observer sees the state after every step.
SolveResult Solve(const Problem& problem, const SolverConfig& config,
                  const StepObserver& observer = nullptr);

// Same, continuing from an existing state.
SolveResult Solve(const Problem& problem, const SolverConfig& config,
                  SolverState state, const StepObserver& observer = nullptr);

// Classic Frank-Wolfe over the whole product polytope: monolithic gradient,
// one oracle call per block, one line search. `max_iters` counts full steps
// (default 50 * n_blocks).
SolveResult BatchFwSolve(const Problem& problem, const SolverConfig& config);
SolveResult BatchFwSolve(const Problem& problem, const SolverConfig& config,
                         SolverState state);

// Row-wise argmax, ties to the lowest column.
Matrix RoundAssignment(MatrixCRef y);

// Header plus one line per step; objective left empty when not logged.
void WriteTraceCsv(std::ostream& out, const Trace& trace);

}  // namespace diffrac

#endif  // DIFFRAC_BCFW_H_
