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

#include "diffrac/sweep.h"

#include <cmath>
#include <ostream>
#include <stdexcept>

namespace diffrac {
namespace {

void WriteOptional(std::ostream& out, const std::optional<double>& v) {
  if (v) out << *v;
}

}  // namespace

RunMetrics EvaluateRun(const Corpus& corpus, const std::vector<NameResult>& names,
                       const ActionResult* actions, int eval_blocks) {
  if (corpus.truth.size() != corpus.movies.size()) {
    throw std::invalid_argument("EvaluateRun: corpus has no ground truth");
  }
  if (names.size() != corpus.movies.size()) {
    throw std::invalid_argument("EvaluateRun: one name result per movie required");
  }
  const std::size_t n_eval =
      eval_blocks > 0 ? std::min<std::size_t>(eval_blocks, corpus.movies.size())
                      : corpus.movies.size();
  RunMetrics out;
  std::vector<Metrics> per_movie;
  for (std::size_t m = 0; m < n_eval; ++m) {
    if (corpus.truth[m].face_names.empty()) continue;
    per_movie.push_back(Evaluate(names[m].z_rounded, names[m].scores, corpus.truth[m].face_names));
  }
  out.names = AverageMetrics(per_movie);
  if (actions) {
    Index rows = 0;
    std::vector<int> truth;
    for (std::size_t m = 0; m < n_eval; ++m) {
      rows += static_cast<Index>(corpus.movies[m].bodies.size());
      truth.insert(truth.end(), corpus.truth[m].body_actions.begin(),
                   corpus.truth[m].body_actions.end());
    }
    if (actions->t_rounded.rows() < rows) {
      throw std::invalid_argument("EvaluateRun: action result smaller than the corpus");
    }
    out.actions = Evaluate(actions->t_rounded.topRows(rows), actions->scores.topRows(rows), truth);
  }
  return out;
}

nlohmann::json RunMetricsToJson(const RunMetrics& m, bool with_curves) {
  nlohmann::json j = {{"names", MetricsToJson(m.names, false)}};
  if (m.actions) j["actions"] = MetricsToJson(*m.actions, with_curves);
  return j;
}

const char* SweepParamName(SweepParam p) {
  switch (p) {
    case SweepParam::kAlpha:
      return "alpha";
    case SweepParam::kBeta:
      return "beta";
    case SweepParam::kNBlocks:
      return "n_blocks";
  }
  return "unknown";
}

SweepParam ParseSweepParam(const std::string& name) {
  if (name == "alpha") return SweepParam::kAlpha;
  if (name == "beta") return SweepParam::kBeta;
  if (name == "n_blocks") return SweepParam::kNBlocks;
  throw std::invalid_argument("unknown sweep parameter: " + name);
}

std::vector<SweepRow> RunSweep(const SweepOptions& options) {
  if (options.grid.empty()) throw std::invalid_argument("RunSweep: empty grid");
  std::optional<Corpus> shared;
  if (options.param != SweepParam::kNBlocks) shared = GenerateCorpus(options.spec);
  std::vector<SweepRow> rows;
  for (double value : options.grid) {
    PipelineConfig config = options.config;
    std::optional<Corpus> own;
    switch (options.param) {
      case SweepParam::kAlpha:
        config.alpha = value;
        break;
      case SweepParam::kBeta:
        config.beta = value;
        break;
      case SweepParam::kNBlocks: {
        SyntheticSpec spec = options.spec;
        if (value < 1 || value != std::floor(value)) {
          throw std::invalid_argument("RunSweep: n_blocks grid values must be positive integers");
        }
        spec.n_blocks = static_cast<int>(value);
        own = GenerateCorpus(spec);
        break;
      }
    }
    const Corpus& corpus = own ? *own : *shared;
    SweepRow row;
    row.value = value;
    std::vector<NameResult> names = SolveNames(corpus, config);
    if (options.names_only) {
      row.metrics = EvaluateRun(corpus, names, nullptr, options.eval_blocks);
    } else {
      std::vector<Matrix> z;
      for (const NameResult& n : names) z.push_back(n.z);
      const ActionResult actions = SolveActions(BuildActionProblem(corpus, z, config), config);
      row.metrics = EvaluateRun(corpus, names, &actions, options.eval_blocks);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void WriteSweepCsv(std::ostream& out, SweepParam param, const std::vector<SweepRow>& rows) {
  out << "param,value,name_accuracy,name_map,name_background_ap,action_accuracy,action_map,"
         "action_background_ap\n";
  const auto old_precision = out.precision(10);
  for (const SweepRow& r : rows) {
    out << SweepParamName(param) << ',' << r.value << ',' << r.metrics.names.accuracy << ','
        << r.metrics.names.multi_class_ap << ',';
    WriteOptional(out, r.metrics.names.background_ap);
    out << ',';
    if (r.metrics.actions) {
      out << r.metrics.actions->accuracy << ',' << r.metrics.actions->multi_class_ap << ',';
      WriteOptional(out, r.metrics.actions->background_ap);
    } else {
      out << ",,";
    }
    out << '\n';
  }
  out.precision(old_precision);
}

}  // namespace diffrac
