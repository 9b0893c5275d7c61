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

#include "diffrac/bcfw.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ostream>
#include <stdexcept>
#include <utility>

#include "diffrac/errors.h"

namespace diffrac {
namespace {

using Clock = std::chrono::steady_clock;

constexpr double kInf = std::numeric_limits<double>::infinity();

double Uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double ElapsedMs(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

double SlackPenalty(const BlockPolytope& polytope) {
  return polytope.n_slack() > 0 ? polytope.slack().penalty : 0.0;
}

std::int64_t MaxIters(const Problem& problem, const SolverConfig& config) {
  const std::int64_t n = config.max_iters.value_or(50 * static_cast<std::int64_t>(problem.n_blocks()));
  if (n < 0) throw std::invalid_argument("SolverConfig: negative max_iters");
  return n;
}

double SamplingFloor(const Problem& problem, const SolverConfig& config) {
  const double n = static_cast<double>(problem.n_blocks());
  const double floor = config.sampling_floor.value_or(0.01 / n);
  if (floor < 0.0 || floor > 1.0 / n + 1e-15) {
    throw std::invalid_argument("SolverConfig: sampling floor outside [0, 1/n_blocks]");
  }
  return floor;
}

double GapTolerance(const Problem& problem, const SolverConfig& config,
                    const SolverState& state) {
  if (config.gap_tolerance) {
    if (!(*config.gap_tolerance >= 0.0)) {
      throw std::invalid_argument("SolverConfig: negative gap tolerance");
    }
    return *config.gap_tolerance;
  }
  return 1e-5 * SlackAugmentedObjective(problem, state);
}

double ClampedGapSum(const std::vector<double>& gaps) {
  double sum = 0.0;
  for (double g : gaps) sum += std::max(g, 0.0);
  return sum;
}

struct Direction {
  Matrix d;        // N_i x K
  Vector d_slack;  // n_slack
  double gap = 0.0;
};

// Scaled block gradient and the oracle direction of block i.
Direction BlockDirection(const Problem& problem, const SolverState& state,
                         std::size_t i, OraclePath path) {
  const BlockPolytope& polytope = problem.blocks[i];
  const double c = problem.objective_scale;
  const double rho = SlackPenalty(polytope);
  const Matrix grad = c * BlockGradient(state.y[i],
                                        problem.x.Slab(problem.offset(i), problem.block_rows(i)),
                                        state.w, problem.total_samples());
  const Vector slack_grad = (c * rho) * state.slack[i];
  const OracleResult vertex = LinearOracle(polytope, grad, slack_grad, path);
  if (vertex.status != LpStatus::kOptimal) {
    throw NumericError("block " + std::to_string(polytope.block_id()) +
                       ": oracle returned " + LpStatusName(vertex.status));
  }
  Direction dir;
  dir.d = vertex.vertex - state.y[i];
  dir.d_slack = vertex.slack - state.slack[i];
  dir.gap = -(dir.d.array() * grad.array()).sum();
  if (dir.d_slack.size() > 0) dir.gap -= dir.d_slack.dot(slack_grad);
  return dir;
}

void ValidateState(const Problem& problem, const SolverState& state) {
  if (state.y.size() != problem.n_blocks() || state.slack.size() != problem.n_blocks() ||
      state.gaps.size() != problem.n_blocks()) {
    throw std::invalid_argument("SolverState: block count mismatch");
  }
  if (state.w.rows() != problem.x.dim() || state.w.cols() != problem.n_labels) {
    throw std::invalid_argument("SolverState: W shape mismatch");
  }
}

}  // namespace

Problem MakeProblem(FeatureMatrix x, double lambda, std::vector<BlockPolytope> blocks) {
  if (blocks.empty()) throw std::invalid_argument("MakeProblem: no blocks");
  std::vector<Index> sizes;
  const int k = blocks.front().n_labels();
  for (const BlockPolytope& b : blocks) {
    if (b.n_labels() != k) throw std::invalid_argument("MakeProblem: label count mismatch");
    sizes.push_back(b.n_rows());
  }
  Projector p = ComputeProjector(x, lambda, sizes);
  return Problem{std::move(x), std::move(p), std::move(blocks), k, 1.0};
}

SolverState InitialState(const Problem& problem, std::uint64_t seed) {
  SolverState state;
  state.rng.seed(seed);
  Matrix y(problem.total_samples(), problem.n_labels);
  for (std::size_t i = 0; i < problem.n_blocks(); ++i) {
    FeasiblePoint start = InitialFeasiblePoint(problem.blocks[i]);
    y.middleRows(problem.offset(i), problem.block_rows(i)) = start.y;
    state.y.push_back(std::move(start.y));
    state.slack.push_back(std::move(start.slack));
  }
  state.w = problem.projector.Apply(y);
  state.gaps.assign(problem.n_blocks(), kInf);
  return state;
}

Matrix StackedAssignment(const Problem& problem, const SolverState& state) {
  Matrix y(problem.total_samples(), problem.n_labels);
  for (std::size_t i = 0; i < problem.n_blocks(); ++i) {
    y.middleRows(problem.offset(i), problem.block_rows(i)) = state.y[i];
  }
  return y;
}

double SlackAugmentedObjective(const Problem& problem, const SolverState& state) {
  double value = ObjectiveValue(StackedAssignment(problem, state), problem.x,
                                problem.projector);
  for (std::size_t i = 0; i < problem.n_blocks(); ++i) {
    value += 0.5 * SlackPenalty(problem.blocks[i]) * state.slack[i].squaredNorm();
  }
  return problem.objective_scale * value;
}

double WeightDrift(const Problem& problem, const SolverState& state) {
  const Matrix py = problem.projector.Apply(StackedAssignment(problem, state));
  return MaxAbs(state.w - py) / (1.0 + MaxAbs(py));
}

double MaxResidual(const Problem& problem, const SolverState& state) {
  double worst = 0.0;
  for (std::size_t i = 0; i < problem.n_blocks(); ++i) {
    worst = std::max(worst, problem.blocks[i].MaxViolation(state.y[i], state.slack[i]));
  }
  return worst;
}

const char* SamplingName(Sampling sampling) {
  switch (sampling) {
    case Sampling::kGapProportional:
      return "gap";
    case Sampling::kUniform:
      return "uniform";
    case Sampling::kCyclic:
      return "cyclic";
  }
  return "unknown";
}

std::size_t SampleBlock(const std::vector<double>& gaps, Sampling sampling, double floor,
                        std::int64_t iteration, std::mt19937_64& rng) {
  const std::size_t n = gaps.size();
  if (n == 0) throw std::invalid_argument("SampleBlock: no blocks");
  auto uniform = [&](std::size_t count) {
    return std::min(count - 1, static_cast<std::size_t>(Uniform01(rng) * count));
  };
  switch (sampling) {
    case Sampling::kCyclic:
      return static_cast<std::size_t>(iteration % static_cast<std::int64_t>(n));
    case Sampling::kUniform:
      return uniform(n);
    case Sampling::kGapProportional:
      break;
  }
  std::vector<std::size_t> unvisited;
  for (std::size_t i = 0; i < n; ++i) {
    if (std::isinf(gaps[i]) && gaps[i] > 0) unvisited.push_back(i);
  }
  if (!unvisited.empty()) return unvisited[uniform(unvisited.size())];
  const double total = ClampedGapSum(gaps);
  if (!(total > 0.0)) return uniform(n);
  const double mass = 1.0 - static_cast<double>(n) * floor;
  const double u = Uniform01(rng);
  double acc = 0.0;
  std::size_t last_positive = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double p = floor + mass * std::max(gaps[i], 0.0) / total;
    if (p > 0.0) last_positive = i;
    acc += p;
    if (u < acc) return i;
  }
  return last_positive;
}

double LineSearchGamma(MatrixCRef d, double gap, MatrixCRef x_block, MatrixCRef pd,
                       Index total_samples, double rho, const Vector& d_slack,
                       double scale) {
  double curvature =
      ((d.array() * (d - x_block * pd).array()).sum()) / static_cast<double>(total_samples);
  if (d_slack.size() > 0) curvature += rho * d_slack.squaredNorm();
  curvature *= scale;
  if (curvature <= 1e-15) return gap <= 1e-15 ? 0.0 : 1.0;
  return std::clamp(gap / curvature, 0.0, 1.0);
}

StepRecord BcfwStep(const Problem& problem, SolverState& state, std::size_t i,
                    OraclePath path) {
  if (i >= problem.n_blocks()) throw std::out_of_range("BcfwStep: block index");
  const Direction dir = BlockDirection(problem, state, i, path);
  const auto x_block = problem.x.Slab(problem.offset(i), problem.block_rows(i));
  const Matrix pd = problem.projector.block(i) * dir.d;
  const double gamma =
      LineSearchGamma(dir.d, std::max(dir.gap, 0.0), x_block, pd, problem.total_samples(),
                      SlackPenalty(problem.blocks[i]), dir.d_slack, problem.objective_scale);
  if (gamma > 0.0) {
    state.w.noalias() += gamma * pd;
    state.y[i].noalias() += gamma * dir.d;
    state.slack[i].noalias() += gamma * dir.d_slack;
  }
  state.gaps[i] = dir.gap;
  StepRecord rec;
  rec.iteration = ++state.iteration;
  rec.block = static_cast<std::int64_t>(i);
  rec.gap = dir.gap;
  rec.gamma = gamma;
  return rec;
}

double RecomputeAllGaps(const Problem& problem, SolverState& state, OraclePath path) {
  for (std::size_t i = 0; i < problem.n_blocks(); ++i) {
    state.gaps[i] = BlockDirection(problem, state, i, path).gap;
  }
  return ClampedGapSum(state.gaps);
}

SolveResult Solve(const Problem& problem, const SolverConfig& config,
                  const StepObserver& observer) {
  return Solve(problem, config, InitialState(problem, config.seed), observer);
}

SolveResult Solve(const Problem& problem, const SolverConfig& config, SolverState state,
                  const StepObserver& observer) {
  ValidateState(problem, state);
  const auto start = Clock::now();
  const std::int64_t max_iters = MaxIters(problem, config);
  const double floor = SamplingFloor(problem, config);
  const double tol = GapTolerance(problem, config, state);

  SolveResult result;
  for (std::int64_t t = 0; t < max_iters; ++t) {
    const std::size_t i =
        SampleBlock(state.gaps, config.sampling, floor, state.iteration, state.rng);
    StepRecord rec = BcfwStep(problem, state, i, config.oracle_path);
    if (config.objective_log_period > 0 &&
        rec.iteration % config.objective_log_period == 0) {
      rec.objective = SlackAugmentedObjective(problem, state);
    }
    rec.wall_ms = ElapsedMs(start);
    if (observer) observer(state, rec);
    result.trace.steps.push_back(rec);

    const bool all_visited = std::none_of(state.gaps.begin(), state.gaps.end(),
                                          [](double g) { return std::isinf(g); });
    if (all_visited && ClampedGapSum(state.gaps) <= tol &&
        RecomputeAllGaps(problem, state, config.oracle_path) <= tol) {
      result.converged = true;
      break;
    }
  }
  result.gap_sum = ClampedGapSum(state.gaps);
  result.state = std::move(state);
  return result;
}

SolveResult BatchFwSolve(const Problem& problem, const SolverConfig& config) {
  return BatchFwSolve(problem, config, InitialState(problem, config.seed));
}

SolveResult BatchFwSolve(const Problem& problem, const SolverConfig& config,
                         SolverState state) {
  ValidateState(problem, state);
  const auto start = Clock::now();
  const std::int64_t max_iters = MaxIters(problem, config);
  const double tol = GapTolerance(problem, config, state);
  const double c = problem.objective_scale;
  const Index n = problem.total_samples();

  SolveResult result;
  for (std::int64_t t = 0; t < max_iters; ++t) {
    const Matrix y = StackedAssignment(problem, state);
    const Matrix grad = c * BlockGradient(y, problem.x.data(), state.w, n);
    Matrix d(n, problem.n_labels);
    std::vector<Vector> d_slack(problem.n_blocks());
    std::vector<Vector> slack_grad(problem.n_blocks());
    double gap = 0.0;
    double slack_curvature = 0.0;
    for (std::size_t i = 0; i < problem.n_blocks(); ++i) {
      const BlockPolytope& polytope = problem.blocks[i];
      const double rho = SlackPenalty(polytope);
      slack_grad[i] = (c * rho) * state.slack[i];
      const auto g_i = grad.middleRows(problem.offset(i), problem.block_rows(i));
      const OracleResult vertex =
          LinearOracle(polytope, g_i, slack_grad[i], config.oracle_path);
      if (vertex.status != LpStatus::kOptimal) {
        throw NumericError("block " + std::to_string(polytope.block_id()) +
                           ": oracle returned " + LpStatusName(vertex.status));
      }
      auto d_i = d.middleRows(problem.offset(i), problem.block_rows(i));
      d_i = vertex.vertex - state.y[i];
      d_slack[i] = vertex.slack - state.slack[i];
      double g = -(d_i.array() * g_i.array()).sum();
      if (d_slack[i].size() > 0) {
        g -= d_slack[i].dot(slack_grad[i]);
        slack_curvature += rho * d_slack[i].squaredNorm();
      }
      state.gaps[i] = g;
      gap += g;
    }
    if (gap <= tol) {
      result.converged = true;
      break;
    }
    const Matrix pd = problem.projector.Apply(d);
    double curvature =
        (d.array() * (d - problem.x.data() * pd).array()).sum() / static_cast<double>(n);
    curvature = c * (curvature + slack_curvature);
    double gamma;
    if (curvature <= 1e-15) {
      gamma = gap <= 1e-15 ? 0.0 : 1.0;
    } else {
      gamma = std::clamp(std::max(gap, 0.0) / curvature, 0.0, 1.0);
    }
    if (gamma > 0.0) {
      state.w.noalias() += gamma * pd;
      for (std::size_t i = 0; i < problem.n_blocks(); ++i) {
        state.y[i].noalias() += gamma * d.middleRows(problem.offset(i), problem.block_rows(i));
        state.slack[i].noalias() += gamma * d_slack[i];
      }
    }
    StepRecord rec;
    rec.iteration = ++state.iteration;
    rec.block = -1;
    rec.gap = gap;
    rec.gamma = gamma;
    if (config.objective_log_period > 0 &&
        rec.iteration % config.objective_log_period == 0) {
      rec.objective = SlackAugmentedObjective(problem, state);
    }
    rec.wall_ms = ElapsedMs(start);
    result.trace.steps.push_back(rec);
  }
  result.gap_sum = ClampedGapSum(state.gaps);
  result.state = std::move(state);
  return result;
}

Matrix RoundAssignment(MatrixCRef y) {
  Matrix out = Matrix::Zero(y.rows(), y.cols());
  for (Index n = 0; n < y.rows(); ++n) {
    Index best = 0;
    for (Index k = 1; k < y.cols(); ++k) {
      if (y(n, k) > y(n, best)) best = k;
    }
    if (y.cols() > 0) out(n, best) = 1.0;
  }
  return out;
}

void WriteTraceCsv(std::ostream& out, const Trace& trace) {
  out << "iter,block_id,gap,gamma,objective,wall_ms\n";
  const auto old_precision = out.precision(17);
  for (const StepRecord& s : trace.steps) {
    out << s.iteration << ',' << s.block << ',' << s.gap << ',' << s.gamma << ',';
    if (!std::isnan(s.objective)) out << s.objective;
    out << ',' << s.wall_ms << '\n';
  }
  out.precision(old_precision);
}

}  // namespace diffrac
