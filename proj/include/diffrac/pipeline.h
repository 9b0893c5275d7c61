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

#ifndef DIFFRAC_PIPELINE_H_
#define DIFFRAC_PIPELINE_H_

#include <cstdint>
#include <vector>

#include "diffrac/bcfw.h"
#include "diffrac/constraints.h"
#include "diffrac/corpus.h"
#include "json.hpp"

namespace diffrac {

// Default action-stage budget when action_solver.max_iters is unset.
inline constexpr std::int64_t kActionPassesPerBlock = 250;

struct PipelineConfig {
  double lambda = 1e-2;  // name-stage ridge
  double alpha = 0.3;    // name background fraction
  double mu = 1e-2;      // action-stage ridge
  double beta = 0.4;     // action background fraction
  SlackConfig name_slack;
  SlackConfig action_slack;
  // Emit person-action constraints in the action stage.
  bool joint = true;
  // Person-action coefficients from the rounded (default) or relaxed Z.
  bool rounded_z = true;
  SolverConfig name_solver = DefaultNameSolver();
  SolverConfig action_solver = DefaultActionSolver();
  // Name-stage worker threads; 0 picks the hardware concurrency.
  int threads = 0;

  static SolverConfig DefaultNameSolver();
  static SolverConfig DefaultActionSolver();
};

// Name bags, background over NameBackgroundRows with fraction alpha.
Block BuildNameBlock(const MovieData& movie, double alpha, const SlackConfig& slack);

struct NameResult {
  int movie_id = 0;
  Matrix z;          // relaxed, faces x n_names
  Matrix z_rounded;
  Matrix weights;    // face_dim x n_names
  Matrix scores;     // X1 W
  SolverState state;
  bool converged = false;
  double objective = 0.0;
  double gap_sum = 0.0;
  // Name bags violated by the rounded Z (background excluded).
  int violated_bags = 0;
  bool background_violated = false;
};

// One BCFW run on the movie's single name block.
NameResult SolveMovieNames(const MovieData& movie, const PipelineConfig& config);

// All movies, solved concurrently; results in corpus order.
std::vector<NameResult> SolveNames(const Corpus& corpus, const PipelineConfig& config);

struct ActionProblem {
  std::vector<Block> blocks;
  // Person-action bags dropped for lack of coefficient mass, per movie.
  std::vector<int> dropped_person_action;
  Problem problem;
};

// One block per movie over the stacked body features: action bags, then the
// instantiated person-action bags (when joint), then the background
// constraint with fraction beta. `z` holds the relaxed name assignment per
// movie; a body's coefficient row is the row of its linked face, or zero.
ActionProblem BuildActionProblem(const Corpus& corpus, const std::vector<Matrix>& z,
                                 const PipelineConfig& config);

struct ActionResult {
  Matrix t;  // relaxed, all bodies x n_actions, movies stacked
  Matrix t_rounded;
  Matrix weights;
  Matrix scores;
  SolverState state;
  Trace trace;
  bool converged = false;
  double objective = 0.0;
  double gap_sum = 0.0;
  // Per movie: violated coverage constraints of the rounded T, by origin.
  std::vector<int> violated_action_bags;
  std::vector<int> violated_person_action;
  std::vector<bool> background_violated;
};

// Joint BCFW run over all movies; the shared classifier couples blocks.
ActionResult SolveActions(const ActionProblem& problem, const PipelineConfig& config);

struct PipelineResult {
  std::vector<NameResult> names;
  ActionResult actions;
  std::vector<int> dropped_person_action;
};

PipelineResult RunPipeline(const Corpus& corpus, const PipelineConfig& config);

// Summary of bag violations and solver status for both stages.
nlohmann::json DiagnosticsToJson(const std::vector<NameResult>& names,
                                 const ActionResult* actions,
                                 const std::vector<int>& dropped_person_action);

}  // namespace diffrac

#endif  // DIFFRAC_PIPELINE_H_
