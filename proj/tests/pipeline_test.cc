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

#include <random>

#include "diffrac/constraints_json.h"
#include "diffrac/metrics.h"
#include "diffrac/synth.h"
#include "doctest.h"
#include "support/random_problems.h"

namespace diffrac {
namespace {

// Movie with `n` faces and bodies, one per shot, each body linked to its face.
MovieData PlainMovie(const Matrix& faces, const Matrix& bodies, int n_names, int n_actions) {
  MovieData m;
  m.n_names = n_names;
  m.n_actions = n_actions;
  m.face_features = faces;
  m.body_features = bodies;
  for (Index r = 0; r < faces.rows(); ++r) {
    m.faces.push_back({r * 10, r * 10 + 9, static_cast<int>(r), false});
    m.bodies.push_back({r * 10, r * 10 + 9, static_cast<int>(r), false});
    m.body_face.push_back(static_cast<int>(r));
  }
  return m;
}

Bag Single(Index row, int label) {
  Bag b;
  b.member_rows = {row};
  b.label = label;
  return b;
}

SyntheticSpec SmallSpec(int blocks) {
  SyntheticSpec s;
  s.n_blocks = blocks;
  s.min_tracks = 40;
  s.max_tracks = 60;
  s.n_actions = 5;
  s.body_dim = 8;
  s.name_bags_per_block = 20;
  s.action_bags_per_block = 20;
  return s;
}

PipelineConfig FastConfig() {
  PipelineConfig c;
  c.name_solver.max_iters = 300;
  c.action_solver.max_iters = 600;
  c.threads = 2;
  return c;
}

TEST_CASE("unique bags determine the names") {
  std::mt19937_64 rng(1);
  const int n = 12;
  Matrix faces = 0.1 * testing::RandomMatrix(rng, n, 4);
  std::vector<int> truth(n);
  for (int r = 0; r < n; ++r) {
    truth[r] = 1 + r % 3;
    faces(r, truth[r]) += 5.0;
  }
  MovieData m = PlainMovie(faces, faces, 4, 2);
  for (int r = 0; r < n; ++r) m.name_bags.push_back(Single(r, truth[r]));
  PipelineConfig c = FastConfig();
  c.alpha = 0.0;
  const NameResult out = SolveMovieNames(m, c);
  CHECK(Accuracy(out.z_rounded, truth) == 1.0);
  CHECK(out.violated_bags == 0);
}

TEST_CASE("full background fraction without bags") {
  std::mt19937_64 rng(2);
  const Matrix f = testing::RandomMatrix(rng, 10, 3);
  const MovieData m = PlainMovie(f, f, 3, 2);
  PipelineConfig c = FastConfig();
  c.alpha = 1.0;
  const NameResult out = SolveMovieNames(m, c);
  CHECK(out.z_rounded.col(0).isOnes());
  CHECK_FALSE(out.background_violated);
}

TEST_CASE("small synthetic movie") {
  SyntheticSpec s = SmallSpec(1);
  s.n_names = 3;
  s.face_dim = 4;  // one coordinate per centroid; 60 faces would overfit 16
  s.min_tracks = 60;
  s.max_tracks = 60;
  s.face_visible_rate = 1.0;
  const Corpus corpus = GenerateCorpus(s);
  PipelineConfig c = FastConfig();
  c.name_solver.max_iters = 1000;
  const NameResult out = SolveMovieNames(corpus.movies[0], c);
  CHECK(Accuracy(out.z_rounded, corpus.truth[0].face_names) >= 0.9);
}

TEST_CASE("person-action bag forces the linked track") {
  std::mt19937_64 rng(3);
  const Matrix f = testing::RandomMatrix(rng, 4, 3);
  MovieData m = PlainMovie(f, f, 3, 3);
  Bag pa;
  pa.kind = BagKind::kPersonAction;
  pa.member_rows = {0, 1, 2};
  pa.label = 2;
  pa.person = 1;
  m.person_action_bags.push_back(pa);
  Corpus corpus;
  corpus.movies.push_back(m);
  Matrix z = Matrix::Zero(4, 3);
  z(0, 0) = z(1, 1) = z(2, 2) = z(3, 1) = 1.0;
  PipelineConfig c = FastConfig();
  c.beta = 0.0;
  const ActionProblem ap = BuildActionProblem(corpus, {z}, c);
  REQUIRE(ap.blocks[0].bags.size() == 1);
  CHECK(ap.blocks[0].bags[0].member_rows == std::vector<Index>{1});
  const ActionResult out = SolveActions(ap, c);
  CHECK(out.t_rounded(1, 2) == 1.0);
  CHECK(out.violated_person_action[0] == 0);

  c.joint = false;
  CHECK(BuildActionProblem(corpus, {z}, c).blocks[0].bags.empty());
  // A body whose face is unlinked gets no coefficient.
  corpus.movies[0].body_face[1] = -1;
  c.joint = true;
  const ActionProblem dropped = BuildActionProblem(corpus, {z}, c);
  CHECK(dropped.blocks[0].bags.empty());
  CHECK(dropped.dropped_person_action[0] == 1);
}

TEST_CASE("constraint count over eight movies") {
  const Corpus corpus = GenerateCorpus(SmallSpec(8));
  PipelineConfig c = FastConfig();
  const std::vector<NameResult> names = SolveNames(corpus, c);
  std::vector<Matrix> z;
  for (const NameResult& n : names) z.push_back(n.z);
  const ActionProblem joint = BuildActionProblem(corpus, z, c);
  c.joint = false;
  const ActionProblem plain = BuildActionProblem(corpus, z, c);
  Index expected_rows = 0;
  std::size_t expected_joint = 0;
  std::size_t expected_plain = 0;
  for (std::size_t m = 0; m < corpus.movies.size(); ++m) {
    const MovieData& movie = corpus.movies[m];
    expected_rows += static_cast<Index>(movie.bodies.size());
    expected_plain += movie.action_bags.size() + 1;
    expected_joint += movie.action_bags.size() + movie.person_action_bags.size() -
                      joint.dropped_person_action[m] + 1;
    const auto& jc = joint.problem.blocks[m].constraints();
    const auto& pc = plain.problem.blocks[m].constraints();
    // Same rows except for the inserted person-action constraints.
    std::size_t p = 0;
    for (const CoverageConstraint& con : jc) {
      if (con.origin == ConstraintOrigin::kPersonAction) continue;
      REQUIRE(p < pc.size());
      CHECK(con.rows == pc[p].rows);
      CHECK(con.label == pc[p].label);
      CHECK(con.rhs == pc[p].rhs);
      ++p;
    }
    CHECK(p == pc.size());
  }
  std::size_t joint_count = 0;
  std::size_t plain_count = 0;
  for (const BlockPolytope& b : joint.problem.blocks) joint_count += b.constraints().size();
  for (const BlockPolytope& b : plain.problem.blocks) plain_count += b.constraints().size();
  CHECK(joint.problem.total_samples() == expected_rows);
  CHECK(joint_count == expected_joint);
  CHECK(plain_count == expected_plain);
}

TEST_CASE("single-movie action problem is a name-style block") {
  const Corpus corpus = GenerateCorpus(SmallSpec(1));
  PipelineConfig c = FastConfig();
  c.joint = false;
  const MovieData& movie = corpus.movies[0];
  const ActionProblem ap =
      BuildActionProblem(corpus, {Matrix::Zero(movie.faces.size(), movie.n_names)}, c);
  Block direct;
  direct.block_id = movie.movie_id;
  direct.n_rows = static_cast<Index>(movie.bodies.size());
  direct.n_labels = movie.n_actions;
  direct.bags = movie.action_bags;
  direct.background = BackgroundSet{ActionBackgroundRows(movie), c.beta};
  CHECK(PolytopeToJson(ap.problem.blocks[0]) == PolytopeToJson(CompileBlock(direct)));
  CHECK(MaxAbs(ap.problem.x.data() - movie.body_features) == 0.0);
}

TEST_CASE("joint solve beats stacked independent solves") {
  const Corpus corpus = GenerateCorpus(SmallSpec(4));
  PipelineConfig c = FastConfig();
  c.action_solver.max_iters = 4000;
  const std::vector<NameResult> names = SolveNames(corpus, c);
  std::vector<Matrix> z;
  for (const NameResult& n : names) z.push_back(n.z);
  const ActionProblem joint = BuildActionProblem(corpus, z, c);
  const ActionResult joint_out = SolveActions(joint, c);

  SolverState stacked = InitialState(joint.problem);
  for (std::size_t m = 0; m < corpus.movies.size(); ++m) {
    Corpus one;
    one.movies.push_back(corpus.movies[m]);
    PipelineConfig single = c;
    single.action_solver.max_iters = 1000;
    const ActionResult r = SolveActions(BuildActionProblem(one, {z[m]}, single), single);
    stacked.y[m] = r.t;
    stacked.slack[m] = r.state.slack[0];
  }
  stacked.w = joint.problem.projector.Apply(StackedAssignment(joint.problem, stacked));
  CHECK(MaxResidual(joint.problem, stacked) <= 1e-9);
  CHECK(joint_out.objective <= SlackAugmentedObjective(joint.problem, stacked));
}

TEST_CASE("pipeline is deterministic and thread-count independent") {
  const Corpus corpus = GenerateCorpus(SmallSpec(3));
  PipelineConfig c = FastConfig();
  const PipelineResult a = RunPipeline(corpus, c);
  c.threads = 1;
  const PipelineResult b = RunPipeline(corpus, c);
  for (std::size_t m = 0; m < 3; ++m) CHECK(a.names[m].z == b.names[m].z);
  CHECK(a.actions.t == b.actions.t);
  for (const NameResult& n : a.names) {
    for (Index r = 0; r < n.z_rounded.rows(); ++r) CHECK(n.z_rounded.row(r).sum() == 1.0);
  }
}

TEST_CASE("diagnostic counts recompute the original bags") {
  const Corpus corpus = GenerateCorpus(SmallSpec(2));
  PipelineConfig c = FastConfig();
  c.name_solver.max_iters = 20;
  c.action_solver.max_iters = 20;
  const PipelineResult r = RunPipeline(corpus, c);
  for (std::size_t m = 0; m < 2; ++m) {
    int violated = 0;
    for (const Bag& bag : corpus.movies[m].name_bags) {
      bool ok = false;
      for (Index row : bag.member_rows) ok |= r.names[m].z_rounded(row, bag.label) == 1.0;
      violated += !ok;
    }
    CHECK(r.names[m].violated_bags == violated);
  }
  const nlohmann::json d = DiagnosticsToJson(r.names, &r.actions, r.dropped_person_action);
  CHECK(d["names"].size() == 2);
  CHECK(d["actions"]["blocks"].size() == 2);
  CHECK(d["actions"]["iterations"] == 20);
}

TEST_CASE("relaxed coefficients differ from rounded ones") {
  const Corpus corpus = GenerateCorpus(SmallSpec(1));
  PipelineConfig c = FastConfig();
  const std::vector<NameResult> names = SolveNames(corpus, c);
  const ActionProblem rounded = BuildActionProblem(corpus, {names[0].z}, c);
  c.rounded_z = false;
  // Fractional coefficients can sum below the bound; slack keeps it feasible.
  c.action_slack.enabled = true;
  const ActionProblem relaxed = BuildActionProblem(corpus, {names[0].z}, c);
  bool fractional = false;
  for (const Bag& b : relaxed.blocks[0].bags) {
    for (double w : b.weights) fractional |= w > 0.0 && w < 1.0;
  }
  for (const Bag& b : rounded.blocks[0].bags) {
    for (double w : b.weights) CHECK(w == 1.0);
  }
  CHECK(fractional);
}

TEST_CASE("action problem input checks") {
  const Corpus corpus = GenerateCorpus(SmallSpec(2));
  const PipelineConfig c = FastConfig();
  CHECK_THROWS_AS(BuildActionProblem(corpus, {Matrix::Zero(1, 1)}, c), std::invalid_argument);
  CHECK_THROWS_AS(BuildActionProblem(Corpus{}, {}, c), std::invalid_argument);
}

}  // namespace
}  // namespace diffrac
