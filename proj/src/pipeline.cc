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

#include "diffrac/pipeline.h"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "diffrac/log.h"

namespace diffrac {
namespace {

int CountByOrigin(const BlockPolytope& polytope, MatrixCRef y, ConstraintOrigin origin) {
  const Vector no_slack = Vector::Zero(polytope.n_slack());
  int count = 0;
  for (std::size_t c = 0; c < polytope.constraints().size(); ++c) {
    const CoverageConstraint& con = polytope.constraints()[c];
    if (con.origin == origin && polytope.Coverage(c, y, no_slack) < con.rhs - 1e-9) ++count;
  }
  return count;
}

}  // namespace

SolverConfig PipelineConfig::DefaultNameSolver() {
  SolverConfig c;
  c.max_iters = 1000;
  c.gap_tolerance = std::nullopt;
  c.objective_log_period = 0;
  return c;
}

SolverConfig PipelineConfig::DefaultActionSolver() {
  SolverConfig c;
  c.objective_log_period = 0;
  return c;
}

Block BuildNameBlock(const MovieData& movie, double alpha, const SlackConfig& slack) {
  Block block;
  block.block_id = movie.movie_id;
  block.n_rows = static_cast<Index>(movie.faces.size());
  block.n_labels = movie.n_names;
  block.bags = movie.name_bags;
  block.background = BackgroundSet{NameBackgroundRows(movie), alpha};
  block.slack = slack;
  return block;
}

NameResult SolveMovieNames(const MovieData& movie, const PipelineConfig& config) {
  ValidateMovie(movie);
  NameResult r;
  r.movie_id = movie.movie_id;
  if (movie.faces.empty()) {
    r.z = r.z_rounded = r.scores = Matrix::Zero(0, movie.n_names);
    r.weights = Matrix::Zero(movie.face_features.cols(), movie.n_names);
    r.converged = true;
    return r;
  }
  std::vector<BlockPolytope> blocks;
  blocks.push_back(CompileBlock(BuildNameBlock(movie, config.alpha, config.name_slack)));
  const Problem problem =
      MakeProblem(FeatureMatrix(movie.face_features), config.lambda, std::move(blocks));
  SolveResult solved = Solve(problem, config.name_solver);
  r.z = solved.state.y[0];
  r.z_rounded = RoundAssignment(r.z);
  r.weights = solved.state.w;
  r.scores = ClassifierScores(problem.x, r.weights);
  r.converged = solved.converged;
  r.gap_sum = solved.gap_sum;
  r.objective = SlackAugmentedObjective(problem, solved.state);
  const BlockPolytope& polytope = problem.blocks[0];
  r.violated_bags = CountByOrigin(polytope, r.z_rounded, ConstraintOrigin::kAtLeastOne);
  r.background_violated =
      CountByOrigin(polytope, r.z_rounded, ConstraintOrigin::kBackground) > 0;
  r.state = std::move(solved.state);
  return r;
}

std::vector<NameResult> SolveNames(const Corpus& corpus, const PipelineConfig& config) {
  const std::size_t n = corpus.movies.size();
  std::vector<NameResult> results(n);
  unsigned threads = config.threads > 0 ? static_cast<unsigned>(config.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max<std::size_t>(n, 1)));
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        results[i] = SolveMovieNames(corpus.movies[i], config);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
  return results;
}

ActionProblem BuildActionProblem(const Corpus& corpus, const std::vector<Matrix>& z,
                                 const PipelineConfig& config) {
  if (corpus.movies.empty()) throw std::invalid_argument("BuildActionProblem: no movies");
  if (z.size() != corpus.movies.size()) {
    throw std::invalid_argument("BuildActionProblem: one Z per movie required");
  }
  const int n_actions = corpus.movies.front().n_actions;
  const Index body_dim = corpus.movies.front().body_features.cols();
  std::vector<Block> blocks;
  std::vector<int> dropped;
  Index total = 0;
  for (std::size_t m = 0; m < corpus.movies.size(); ++m) {
    const MovieData& movie = corpus.movies[m];
    ValidateMovie(movie);
    if (movie.n_actions != n_actions || movie.body_features.cols() != body_dim) {
      throw std::invalid_argument("BuildActionProblem: movies disagree on action space");
    }
    if (movie.bodies.empty()) {
      throw std::invalid_argument("BuildActionProblem: movie without body tracks");
    }
    if (z[m].rows() != static_cast<Index>(movie.faces.size()) || z[m].cols() != movie.n_names) {
      throw std::invalid_argument("BuildActionProblem: Z shape mismatch");
    }
    Block block;
    block.block_id = movie.movie_id;
    block.n_rows = static_cast<Index>(movie.bodies.size());
    block.n_labels = n_actions;
    block.bags = movie.action_bags;
    block.slack = config.action_slack;
    int n_dropped = 0;
    if (config.joint) {
      Matrix z_rows = Matrix::Zero(block.n_rows, movie.n_names);
      for (Index n = 0; n < block.n_rows; ++n) {
        if (movie.body_face[n] >= 0) z_rows.row(n) = z[m].row(movie.body_face[n]);
      }
      for (const Bag& bag : movie.person_action_bags) {
        std::optional<Bag> inst = InstantiatePersonAction(bag, z_rows, config.rounded_z);
        if (inst) {
          block.bags.push_back(std::move(*inst));
        } else {
          ++n_dropped;
        }
      }
    }
    block.background = BackgroundSet{ActionBackgroundRows(movie), config.beta};
    total += block.n_rows;
    blocks.push_back(std::move(block));
    dropped.push_back(n_dropped);
  }
  Matrix x(total, body_dim);
  Index offset = 0;
  std::vector<BlockPolytope> polytopes;
  for (std::size_t m = 0; m < corpus.movies.size(); ++m) {
    x.middleRows(offset, blocks[m].n_rows) = corpus.movies[m].body_features;
    offset += blocks[m].n_rows;
    polytopes.push_back(CompileBlock(blocks[m]));
  }
  return ActionProblem{std::move(blocks), std::move(dropped),
                       MakeProblem(FeatureMatrix(std::move(x)), config.mu, std::move(polytopes))};
}

ActionResult SolveActions(const ActionProblem& action, const PipelineConfig& config) {
  const Problem& problem = action.problem;
  SolverConfig solver = config.action_solver;
  // The shared classifier moves slowly across many blocks; the generic
  // 50 passes leave the action stage far from its optimum.
  if (!solver.max_iters) {
    solver.max_iters = kActionPassesPerBlock * static_cast<std::int64_t>(problem.n_blocks());
  }
  SolveResult solved = Solve(problem, solver);
  ActionResult r;
  r.t = StackedAssignment(problem, solved.state);
  r.t_rounded = RoundAssignment(r.t);
  r.weights = solved.state.w;
  r.scores = ClassifierScores(problem.x, r.weights);
  r.converged = solved.converged;
  r.gap_sum = solved.gap_sum;
  r.objective = SlackAugmentedObjective(problem, solved.state);
  for (std::size_t i = 0; i < problem.n_blocks(); ++i) {
    const BlockPolytope& polytope = problem.blocks[i];
    const auto rounded = r.t_rounded.middleRows(problem.offset(i), problem.block_rows(i));
    r.violated_action_bags.push_back(
        CountByOrigin(polytope, rounded, ConstraintOrigin::kAtLeastOne));
    r.violated_person_action.push_back(
        CountByOrigin(polytope, rounded, ConstraintOrigin::kPersonAction));
    r.background_violated.push_back(
        CountByOrigin(polytope, rounded, ConstraintOrigin::kBackground) > 0);
  }
  r.state = std::move(solved.state);
  r.trace = std::move(solved.trace);
  return r;
}

PipelineResult RunPipeline(const Corpus& corpus, const PipelineConfig& config) {
  PipelineResult out;
  out.names = SolveNames(corpus, config);
  std::vector<Matrix> z;
  for (const NameResult& n : out.names) z.push_back(n.z);
  const ActionProblem action = BuildActionProblem(corpus, z, config);
  out.dropped_person_action = action.dropped_person_action;
  out.actions = SolveActions(action, config);
  return out;
}

nlohmann::json DiagnosticsToJson(const std::vector<NameResult>& names,
                                 const ActionResult* actions,
                                 const std::vector<int>& dropped_person_action) {
  nlohmann::json name_blocks = nlohmann::json::array();
  for (const NameResult& n : names) {
    name_blocks.push_back({{"block_id", n.movie_id},
                           {"violated_name_bags", n.violated_bags},
                           {"background_violated", n.background_violated},
                           {"converged", n.converged},
                           {"gap_sum", n.gap_sum},
                           {"objective", n.objective}});
  }
  nlohmann::json out = {{"names", name_blocks}};
  if (actions) {
    nlohmann::json blocks = nlohmann::json::array();
    for (std::size_t i = 0; i < actions->violated_action_bags.size(); ++i) {
      blocks.push_back({{"block", i},
                        {"violated_action_bags", actions->violated_action_bags[i]},
                        {"violated_person_action", actions->violated_person_action[i]},
                        {"background_violated", actions->background_violated[i]},
                        {"dropped_person_action",
                         i < dropped_person_action.size() ? dropped_person_action[i] : 0}});
    }
    out["actions"] = {{"blocks", blocks},
                      {"converged", actions->converged},
                      {"gap_sum", actions->gap_sum},
                      {"objective", actions->objective},
                      {"iterations", actions->state.iteration}};
  }
  return out;
}

}  // namespace diffrac
