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

#ifndef DIFFRAC_METRICS_H_
#define DIFFRAC_METRICS_H_

#include <optional>
#include <utility>
#include <vector>

#include "diffrac/linalg.h"
#include "json.hpp"

namespace diffrac {

// Fraction of rows whose argmax (lowest column on ties) equals the truth.
double Accuracy(MatrixCRef pred, const std::vector<int>& truth);

// Non-interpolated AP: rank by score descending, ties by lower index first,
// and average the precision at the rank of every positive. nullopt without
// positives.
std::optional<double> AveragePrecision(const std::vector<double>& scores,
                                       const std::vector<bool>& relevant);

// (recall, precision) after each ranked item, same ordering as above.
std::vector<std::pair<double, double>> PrCurve(const std::vector<double>& scores,
                                               const std::vector<bool>& relevant);

struct Metrics {
  double accuracy = 0.0;
  // Per class; nullopt for classes without positives.
  std::vector<std::optional<double>> per_class_ap;
  // Mean over non-background classes with positives.
  double multi_class_ap = 0.0;
  std::optional<double> background_ap;
  std::vector<std::vector<std::pair<double, double>>> pr_curves;
};

// Accuracy from the rounded assignment, APs from the per-class scores.
Metrics Evaluate(MatrixCRef rounded, MatrixCRef scores, const std::vector<int>& truth);

// Unweighted mean over blocks of accuracy and of each AP (classes present in
// no block stay absent). PR curves are not averaged and left empty.
Metrics AverageMetrics(const std::vector<Metrics>& parts);

nlohmann::json MetricsToJson(const Metrics& m, bool with_curves = false);

// Spearman rank correlation with average ranks for ties; 0 when either side
// is constant.
double SpearmanCorrelation(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace diffrac

#endif  // DIFFRAC_METRICS_H_
