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

// Command-line front end: corpus generation, both solver stages, evaluation,
// parameter sweeps and the solver equivalence check.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "diffrac/bcfw.h"
#include "diffrac/checkpoint.h"
#include "diffrac/constraints_json.h"
#include "diffrac/corpus.h"
#include "diffrac/errors.h"
#include "diffrac/log.h"
#include "diffrac/pipeline.h"
#include "diffrac/sweep.h"
#include "diffrac/synth.h"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace diffrac {
namespace {

constexpr int kExitUsage = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitNumeric = 3;

// Thrown for bad arguments discovered after parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json ReadJson(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open " + path.string());
  return json::parse(in);
}

void WriteJson(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  out << j.dump(1) << '\n';
}

std::vector<double> ParseGrid(const std::string& text) {
  std::vector<double> grid;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw UsageError("bad grid value: " + item);
    grid.push_back(v);
  }
  if (grid.empty()) throw UsageError("empty grid");
  return grid;
}

fs::path NameCheckpoint(const fs::path& run, int movie_id) {
  return run / "names" / ("block_" + std::to_string(movie_id) + ".ckpt");
}

// Relaxed Z, rounded Z and scores of every movie from a solve-names run.
std::vector<NameResult> LoadNames(const fs::path& run, const Corpus& corpus) {
  std::vector<NameResult> names;
  for (const MovieData& movie : corpus.movies) {
    const SolverState state = ReadCheckpointFile(NameCheckpoint(run, movie.movie_id).string());
    if (state.y.size() != 1 ||
        state.y[0].rows() != static_cast<Index>(movie.faces.size()) ||
        state.y[0].cols() != movie.n_names ||
        state.w.rows() != movie.face_features.cols()) {
      throw UsageError("name checkpoint does not match movie " + std::to_string(movie.movie_id));
    }
    NameResult r;
    r.movie_id = movie.movie_id;
    r.z = state.y[0];
    r.z_rounded = RoundAssignment(r.z);
    r.weights = state.w;
    r.scores = movie.face_features * r.weights;
    r.state = state;
    names.push_back(std::move(r));
  }
  return names;
}

struct Common {
  int verbosity = 0;
};

void ApplyLogLevel(const Common& c) {
  SetLogLevel(c.verbosity >= 2 ? LogLevel::kDebug
                               : c.verbosity == 1 ? LogLevel::kInfo : LogLevel::kWarning);
}

void AddSolverOptions(CLI::App* cmd, SolverConfig& solver, std::int64_t& max_iters,
                      double& gap_tol) {
  cmd->add_option("--max-iters", max_iters, "Iteration cap (default per stage)");
  cmd->add_option("--gap-tol", gap_tol, "Absolute gap tolerance (default 1e-5 f(Y0))");
  cmd->add_option("--seed", solver.seed, "Block sampling seed");
  cmd->add_option("--log-period", solver.objective_log_period,
                  "Objective logging period in steps (0 = off)");
}

void FinishSolverOptions(SolverConfig& solver, std::int64_t max_iters, double gap_tol) {
  if (max_iters >= 0) solver.max_iters = max_iters;
  if (gap_tol > 0.0) solver.gap_tolerance = gap_tol;
}

void AddSlackOptions(CLI::App* cmd, SlackConfig& slack) {
  cmd->add_flag("--slack", slack.enabled, "Add one bounded slack variable per inequality");
  cmd->add_option("--slack-penalty", slack.penalty, "L2 penalty on slack");
  cmd->add_option("--slack-bound", slack.bound, "Upper bound of each slack variable");
}

int RunGen(const std::string& spec_path, const std::string& out) {
  SyntheticSpec spec;
  if (!spec_path.empty()) spec = SpecFromJson(ReadJson(spec_path));
  const Corpus corpus = GenerateCorpus(spec);
  WriteCorpus(out, corpus);
  WriteJson(fs::path(out) / "spec.json", SpecToJson(spec));
  std::size_t faces = 0, bodies = 0;
  for (const MovieData& m : corpus.movies) {
    faces += m.faces.size();
    bodies += m.bodies.size();
  }
  std::cout << "wrote " << corpus.movies.size() << " movies, " << faces << " face tracks, "
            << bodies << " body tracks to " << out << '\n';
  return 0;
}

int RunSolveNames(const std::string& corpus_dir, const std::string& out,
                  const PipelineConfig& config) {
  const Corpus corpus = ReadCorpus(corpus_dir, false);
  const std::vector<NameResult> names = SolveNames(corpus, config);
  fs::create_directories(fs::path(out) / "names");
  json blocks = json::array();
  for (const NameResult& n : names) {
    WriteCheckpointFile(NameCheckpoint(out, n.movie_id).string(), n.state);
    blocks.push_back({{"block_id", n.movie_id},
                      {"iterations", n.state.iteration},
                      {"converged", n.converged},
                      {"gap_sum", n.gap_sum},
                      {"objective", n.objective},
                      {"violated_name_bags", n.violated_bags}});
  }
  WriteJson(fs::path(out) / "names.json",
            {{"lambda", config.lambda}, {"alpha", config.alpha}, {"blocks", blocks}});
  int converged = 0;
  for (const NameResult& n : names) converged += n.converged ? 1 : 0;
  std::cout << "solved names for " << names.size() << " movies (" << converged
            << " converged) into " << out << '\n';
  return 0;
}

void WriteAssignments(const fs::path& path, const Corpus& corpus,
                      const std::vector<NameResult>& names, const ActionResult& actions) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw UsageError("cannot write " + path.string());
  out << std::setprecision(17);
  out << "track_id,block_id,name_label,action_label,name_score,action_score\n";
  Index row = 0;
  for (std::size_t m = 0; m < corpus.movies.size(); ++m) {
    const MovieData& movie = corpus.movies[m];
    for (std::size_t b = 0; b < movie.bodies.size(); ++b, ++row) {
      Index action = 0;
      actions.t_rounded.row(row).maxCoeff(&action);
      out << row << ',' << movie.movie_id << ',';
      const int face = movie.body_face[b];
      Index name = -1;
      if (face >= 0) names[m].z_rounded.row(face).maxCoeff(&name);
      out << name << ',' << action << ',';
      if (face >= 0) out << names[m].scores(face, name);
      out << ',' << actions.scores(row, action) << '\n';
    }
  }
}

int RunSolveActions(const std::string& corpus_dir, const std::string& run,
                    const std::string& dump_path, const PipelineConfig& config) {
  const Corpus corpus = ReadCorpus(corpus_dir, false);
  const std::vector<NameResult> names = LoadNames(run, corpus);
  std::vector<Matrix> z;
  for (const NameResult& n : names) z.push_back(n.z);
  const ActionProblem problem = BuildActionProblem(corpus, z, config);
  if (!dump_path.empty()) {
    json dump = json::array();
    for (const BlockPolytope& p : problem.problem.blocks) dump.push_back(PolytopeToJson(p));
    WriteJson(dump_path, dump);
  }
  const ActionResult actions = SolveActions(problem, config);
  const fs::path out(run);
  WriteCheckpointFile((out / "actions.ckpt").string(), actions.state);
  {
    std::ofstream trace(out / "actions_trace.csv", std::ios::trunc);
    WriteTraceCsv(trace, actions.trace);
  }
  WriteAssignments(out / "assignments.csv", corpus, names, actions);
  WriteJson(out / "diagnostics.json",
            DiagnosticsToJson(names, &actions, problem.dropped_person_action));
  WriteJson(out / "actions.json", {{"mu", config.mu},
                                   {"beta", config.beta},
                                   {"joint", config.joint},
                                   {"rounded_z", config.rounded_z}});
  std::cout << "solved actions over " << corpus.movies.size() << " movies in "
            << actions.state.iteration << " steps ("
            << (actions.converged ? "converged" : "iteration cap") << ")\n";
  return 0;
}

int RunEval(const std::string& run, const std::string& corpus_dir, const std::string& out,
            int eval_blocks, bool curves) {
  const Corpus corpus = ReadCorpus(corpus_dir, true);
  if (corpus.truth.empty()) throw UsageError("corpus has no truth.json");
  const std::vector<NameResult> names = LoadNames(run, corpus);
  std::optional<ActionResult> actions;
  const fs::path action_ckpt = fs::path(run) / "actions.ckpt";
  if (fs::exists(action_ckpt)) {
    ActionResult a;
    a.state = ReadCheckpointFile(action_ckpt.string());
    Index rows = 0;
    for (const Matrix& y : a.state.y) rows += y.rows();
    const int n_actions = corpus.movies.front().n_actions;
    if (a.state.y.size() != corpus.movies.size() ||
        a.state.w.rows() != corpus.movies.front().body_features.cols() ||
        a.state.w.cols() != n_actions) {
      throw UsageError("action checkpoint does not match the corpus");
    }
    a.t.resize(rows, n_actions);
    a.scores.resize(rows, n_actions);
    Index offset = 0;
    for (std::size_t m = 0; m < corpus.movies.size(); ++m) {
      const Index n = a.state.y[m].rows();
      if (n != static_cast<Index>(corpus.movies[m].bodies.size())) {
        throw UsageError("action checkpoint does not match the corpus");
      }
      a.t.middleRows(offset, n) = a.state.y[m];
      a.scores.middleRows(offset, n) = corpus.movies[m].body_features * a.state.w;
      offset += n;
    }
    a.t_rounded = RoundAssignment(a.t);
    actions = std::move(a);
  }
  const RunMetrics metrics =
      EvaluateRun(corpus, names, actions ? &*actions : nullptr, eval_blocks);
  const json j = RunMetricsToJson(metrics, curves);
  if (out.empty()) {
    std::cout << j.dump(1) << '\n';
  } else {
    WriteJson(out, j);
    std::cout << "name accuracy " << metrics.names.accuracy;
    if (metrics.actions) std::cout << ", action accuracy " << metrics.actions->accuracy;
    std::cout << '\n';
  }
  return 0;
}

int RunSweepCommand(const std::string& param, const std::string& grid,
                    const std::string& spec_path, const std::string& out, int eval_blocks,
                    bool names_only, const PipelineConfig& config) {
  SweepOptions options;
  options.param = ParseSweepParam(param);
  options.grid = ParseGrid(grid);
  if (!spec_path.empty()) options.spec = SpecFromJson(ReadJson(spec_path));
  options.config = config;
  options.eval_blocks = eval_blocks;
  options.names_only = names_only;
  const std::vector<SweepRow> rows = RunSweep(options);
  if (out.empty()) {
    WriteSweepCsv(std::cout, options.param, rows);
  } else {
    std::ofstream file(out, std::ios::trunc);
    if (!file) throw UsageError("cannot write " + out);
    WriteSweepCsv(file, options.param, rows);
  }
  return 0;
}

int RunCompare(const std::string& solver, const std::string& corpus_dir,
               const std::string& stage, double tol, const PipelineConfig& config) {
  if (solver != "bcfw" && solver != "batch-fw") throw UsageError("unknown solver: " + solver);
  const Corpus corpus = ReadCorpus(corpus_dir, false);
  std::optional<Problem> problem;
  SolverConfig solver_config;
  if (stage == "names") {
    const MovieData& movie = corpus.movies.front();
    std::vector<BlockPolytope> blocks;
    blocks.push_back(CompileBlock(BuildNameBlock(movie, config.alpha, config.name_slack)));
    problem.emplace(MakeProblem(FeatureMatrix(movie.face_features), config.lambda,
                                std::move(blocks)));
    solver_config = config.name_solver;
  } else if (stage == "actions") {
    const std::vector<NameResult> names = SolveNames(corpus, config);
    std::vector<Matrix> z;
    for (const NameResult& n : names) z.push_back(n.z);
    ActionProblem action = BuildActionProblem(corpus, z, config);
    problem.emplace(std::move(action.problem));
    solver_config = config.action_solver;
  } else {
    throw UsageError("unknown stage: " + stage);
  }
  if (!solver_config.max_iters) {
    solver_config.max_iters = 20000 * static_cast<std::int64_t>(problem->n_blocks());
  }
  SolverConfig batch_config = solver_config;
  batch_config.max_iters = 20000;
  const SolveResult bcfw = Solve(*problem, solver_config);
  const SolveResult batch = BatchFwSolve(*problem, batch_config);
  const double f_bcfw = SlackAugmentedObjective(*problem, bcfw.state);
  const double f_batch = SlackAugmentedObjective(*problem, batch.state);
  const double primary = solver == "bcfw" ? f_bcfw : f_batch;
  const double other = solver == "bcfw" ? f_batch : f_bcfw;
  const double rel = std::abs(primary - other) / std::max(std::abs(other), 1e-300);
  std::cout << std::setprecision(12) << "solver " << solver << " objective " << primary
            << ", reference " << (solver == "bcfw" ? "batch-fw" : "bcfw") << " objective "
            << other << ", relative difference " << rel << " ("
            << (rel <= tol ? "within" : "exceeds") << " tolerance " << tol << ")\n";
  return rel <= tol ? 0 : kExitNumeric;
}

}  // namespace
}  // namespace diffrac

int main(int argc, char** argv) {
  using namespace diffrac;
  CLI::App app{"Discriminative clustering with block-coordinate Frank-Wolfe"};
  app.require_subcommand(1);
  Common common;
  app.add_flag("-v,--verbose", common.verbosity, "More logging (repeatable)");

  PipelineConfig config;
  std::int64_t max_iters = -1;
  double gap_tol = -1.0;
  std::string spec_path, out, corpus_dir, run, dump_path, param, grid, solver = "bcfw",
                                                                        stage = "actions";
  int eval_blocks = 0;
  bool curves = false, names_only = false, no_joint = false, relaxed_z = false;
  double tol = 1e-4;

  CLI::App* gen = app.add_subcommand("gen", "Generate a synthetic corpus");
  gen->add_option("--spec", spec_path, "Synthetic spec JSON (defaults when omitted)");
  gen->add_option("--out", out, "Output corpus directory")->required();

  CLI::App* names = app.add_subcommand("solve-names", "Per-movie name assignment");
  names->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  names->add_option("--lambda", config.lambda, "Ridge parameter")->check(CLI::PositiveNumber);
  names->add_option("--alpha", config.alpha, "Background fraction")->check(CLI::Range(0.0, 1.0));
  names->add_option("--out", out, "Run directory")->required();
  names->add_option("--threads", config.threads, "Worker threads (0 = all cores)");
  AddSolverOptions(names, config.name_solver, max_iters, gap_tol);
  AddSlackOptions(names, config.name_slack);

  CLI::App* actions = app.add_subcommand("solve-actions", "Joint action assignment");
  actions->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  actions->add_option("--run", run, "Run directory from solve-names")->required();
  actions->add_option("--mu", config.mu, "Ridge parameter")->check(CLI::PositiveNumber);
  actions->add_option("--beta", config.beta, "Background fraction")->check(CLI::Range(0.0, 1.0));
  actions->add_flag("--no-joint", no_joint, "Drop person-action constraints");
  auto* rz = actions->add_flag("--rounded-z", "Person-action coefficients from rounded Z (default)");
  auto* xz = actions->add_flag("--relaxed-z", relaxed_z, "Coefficients from the relaxed Z");
  rz->excludes(xz);
  actions->add_option("--dump-constraints", dump_path, "Write the compiled constraints as JSON");
  AddSolverOptions(actions, config.action_solver, max_iters, gap_tol);
  AddSlackOptions(actions, config.action_slack);

  CLI::App* eval = app.add_subcommand("eval", "Score a run against ground truth");
  eval->add_option("--run", run, "Run directory")->required();
  eval->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  eval->add_option("--out", out, "Metrics JSON (stdout when omitted)");
  eval->add_option("--eval-blocks", eval_blocks, "Score only the first N movies");
  eval->add_flag("--curves", curves, "Include action PR curves");

  CLI::App* sweep = app.add_subcommand("sweep", "Run the pipeline over a parameter grid");
  sweep->add_option("--param", param, "alpha, beta or n_blocks")->required();
  sweep->add_option("--grid", grid, "Comma-separated values")->required();
  sweep->add_option("--spec", spec_path, "Synthetic spec JSON");
  sweep->add_option("--out", out, "Output CSV (stdout when omitted)");
  sweep->add_option("--eval-blocks", eval_blocks, "Score only the first N movies");
  sweep->add_flag("--names-only", names_only, "Skip the action stage");
  sweep->add_option("--lambda", config.lambda, "Name ridge parameter")->check(CLI::PositiveNumber);
  sweep->add_option("--alpha", config.alpha, "Name background fraction");
  sweep->add_option("--mu", config.mu, "Action ridge parameter")->check(CLI::PositiveNumber);
  sweep->add_option("--beta", config.beta, "Action background fraction");
  sweep->add_flag("--no-joint", no_joint, "Drop person-action constraints");

  CLI::App* compare = app.add_subcommand("compare", "Check BCFW against batch Frank-Wolfe");
  compare->add_option("--solver", solver, "bcfw or batch-fw");
  compare->add_option("--corpus", corpus_dir, "Corpus directory")->required();
  compare->add_option("--stage", stage, "names (first movie) or actions");
  compare->add_option("--tol", tol, "Relative objective tolerance");
  AddSolverOptions(compare, config.action_solver, max_iters, gap_tol);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }
  ApplyLogLevel(common);

  try {
    if (*gen) return RunGen(spec_path, out);
    if (*names) {
      FinishSolverOptions(config.name_solver, max_iters, gap_tol);
      return RunSolveNames(corpus_dir, out, config);
    }
    if (*actions) {
      FinishSolverOptions(config.action_solver, max_iters, gap_tol);
      config.joint = !no_joint;
      config.rounded_z = !relaxed_z;
      return RunSolveActions(corpus_dir, run, dump_path, config);
    }
    if (*eval) return RunEval(run, corpus_dir, out, eval_blocks, curves);
    if (*sweep) {
      config.joint = !no_joint;
      return RunSweepCommand(param, grid, spec_path, out, eval_blocks, names_only, config);
    }
    if (*compare) {
      // The comparison runs to its own long caps unless --max-iters is given.
      config.name_solver.max_iters.reset();
      config.action_solver.max_iters.reset();
      FinishSolverOptions(config.action_solver, max_iters, gap_tol);
      if (gap_tol > 0.0) config.name_solver.gap_tolerance = gap_tol;
      if (max_iters >= 0) config.name_solver.max_iters = max_iters;
      return RunCompare(solver, corpus_dir, stage, tol, config);
    }
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kExitInfeasible;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}
