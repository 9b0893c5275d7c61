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

#ifndef DIFFRAC_SWEEP_H_
#define DIFFRAC_SWEEP_H_

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "diffrac/metrics.h"
#include "diffrac/pipeline.h"
#include "diffrac/synth.h"
#include "json.hpp"

namespace diffrac {

struct RunMetrics {
  Metrics names;    // mean over movies
  std::optional<Metrics> actions;  // pooled over bodies
};

// Scores the first `eval_blocks` movies (all when 0). Requires truth.
RunMetrics EvaluateRun(const Corpus& corpus, const std::vector<NameResult>& names,
                       const ActionResult* actions, int eval_blocks = 0);

nlohmann::json RunMetricsToJson(const RunMetrics& m, bool with_curves = false);

enum class SweepParam { kAlpha, kBeta, kNBlocks };

const char* SweepParamName(SweepParam p);
SweepParam ParseSweepParam(const std::string& name);

struct SweepOptions {
  SweepParam param = SweepParam::kAlpha;
  std::vector<double> grid;
  SyntheticSpec spec;
  PipelineConfig config;
  // Movies scored per grid point; 0 scores all. For n_blocks sweeps a fixed
  // prefix keeps the test set identical across grid points.
  int eval_blocks = 0;
  // Skip the action stage (alpha sweeps only need the names).
  bool names_only = false;
};

struct SweepRow {
  double value = 0.0;
  RunMetrics metrics;
};

// Same corpus seed at every grid point; n_blocks regenerates with the grid
// value, alpha and beta reuse one corpus.
std::vector<SweepRow> RunSweep(const SweepOptions& options);

// param,value,name_accuracy,name_map,name_background_ap,action_accuracy,
// action_map,action_background_ap (action fields empty when not run).
void WriteSweepCsv(std::ostream& out, SweepParam param, const std::vector<SweepRow>& rows);

}  // namespace diffrac

#endif  // DIFFRAC_SWEEP_H_
