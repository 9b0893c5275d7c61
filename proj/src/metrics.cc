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

#include "diffrac/metrics.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace diffrac {
namespace {

std::vector<std::size_t> Ranking(const std::vector<double>& scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

std::vector<double> AverageRanks(const std::vector<double>& v) {
  std::vector<std::size_t> order(v.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
    const double r = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

double Accuracy(MatrixCRef pred, const std::vector<int>& truth) {
  if (pred.rows() != static_cast<Index>(truth.size())) {
    throw std::invalid_argument("Accuracy: shape mismatch");
  }
  if (truth.empty()) return 0.0;
  Index hits = 0;
  for (Index n = 0; n < pred.rows(); ++n) {
    Index best = 0;
    for (Index k = 1; k < pred.cols(); ++k) {
      if (pred(n, k) > pred(n, best)) best = k;
    }
    if (best == truth[n]) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(truth.size());
}

std::optional<double> AveragePrecision(const std::vector<double>& scores,
                                       const std::vector<bool>& relevant) {
  if (scores.size() != relevant.size()) {
    throw std::invalid_argument("AveragePrecision: size mismatch");
  }
  double sum = 0.0;
  std::size_t hits = 0;
  const std::vector<std::size_t> order = Ranking(scores);
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (!relevant[order[r]]) continue;
    ++hits;
    sum += static_cast<double>(hits) / static_cast<double>(r + 1);
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

std::vector<std::pair<double, double>> PrCurve(const std::vector<double>& scores,
                                               const std::vector<bool>& relevant) {
  if (scores.size() != relevant.size()) throw std::invalid_argument("PrCurve: size mismatch");
  const auto positives = static_cast<double>(std::count(relevant.begin(), relevant.end(), true));
  std::vector<std::pair<double, double>> curve;
  if (positives == 0) return curve;
  std::size_t hits = 0;
  const std::vector<std::size_t> order = Ranking(scores);
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (relevant[order[r]]) ++hits;
    curve.emplace_back(static_cast<double>(hits) / positives,
                       static_cast<double>(hits) / static_cast<double>(r + 1));
  }
  return curve;
}

Metrics Evaluate(MatrixCRef rounded, MatrixCRef scores, const std::vector<int>& truth) {
  if (scores.rows() != rounded.rows() || scores.cols() != rounded.cols()) {
    throw std::invalid_argument("Evaluate: shape mismatch");
  }
  Metrics m;
  m.accuracy = Accuracy(rounded, truth);
  double ap_sum = 0.0;
  int ap_count = 0;
  for (Index k = 0; k < scores.cols(); ++k) {
    std::vector<double> s(scores.rows());
    std::vector<bool> rel(scores.rows());
    for (Index n = 0; n < scores.rows(); ++n) {
      s[n] = scores(n, k);
      rel[n] = truth[n] == k;
    }
    const std::optional<double> ap = AveragePrecision(s, rel);
    m.per_class_ap.push_back(ap);
    m.pr_curves.push_back(PrCurve(s, rel));
    if (k == 0) {
      m.background_ap = ap;
    } else if (ap) {
      ap_sum += *ap;
      ++ap_count;
    }
  }
  m.multi_class_ap = ap_count > 0 ? ap_sum / ap_count : 0.0;
  return m;
}

Metrics AverageMetrics(const std::vector<Metrics>& parts) {
  Metrics out;
  if (parts.empty()) return out;
  std::size_t n_classes = 0;
  for (const Metrics& p : parts) n_classes = std::max(n_classes, p.per_class_ap.size());
  std::vector<double> sum(n_classes, 0.0);
  std::vector<int> count(n_classes, 0);
  double bg_sum = 0.0, map_sum = 0.0;
  int bg_count = 0;
  for (const Metrics& p : parts) {
    out.accuracy += p.accuracy / static_cast<double>(parts.size());
    map_sum += p.multi_class_ap;
    if (p.background_ap) {
      bg_sum += *p.background_ap;
      ++bg_count;
    }
    for (std::size_t k = 0; k < p.per_class_ap.size(); ++k) {
      if (p.per_class_ap[k]) {
        sum[k] += *p.per_class_ap[k];
        ++count[k];
      }
    }
  }
  for (std::size_t k = 0; k < n_classes; ++k) {
    out.per_class_ap.push_back(count[k] > 0 ? std::optional(sum[k] / count[k]) : std::nullopt);
  }
  out.multi_class_ap = map_sum / static_cast<double>(parts.size());
  if (bg_count > 0) out.background_ap = bg_sum / bg_count;
  return out;
}

nlohmann::json MetricsToJson(const Metrics& m, bool with_curves) {
  nlohmann::json ap = nlohmann::json::array();
  for (const auto& v : m.per_class_ap) ap.push_back(v ? nlohmann::json(*v) : nlohmann::json());
  nlohmann::json j = {{"accuracy", m.accuracy},
                      {"multi_class_ap", m.multi_class_ap},
                      {"background_ap", m.background_ap ? nlohmann::json(*m.background_ap)
                                                        : nlohmann::json()},
                      {"per_class_ap", ap}};
  if (with_curves) {
    nlohmann::json curves = nlohmann::json::array();
    for (const auto& c : m.pr_curves) {
      nlohmann::json pts = nlohmann::json::array();
      for (const auto& [r, p] : c) pts.push_back({r, p});
      curves.push_back(std::move(pts));
    }
    j["pr_curves"] = std::move(curves);
  }
  return j;
}

double SpearmanCorrelation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("SpearmanCorrelation: size mismatch");
  if (a.size() < 2) return 0.0;
  const std::vector<double> ra = AverageRanks(a), rb = AverageRanks(b);
  const double n = static_cast<double>(a.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) return 0.0;
  return sab / std::sqrt(saa * sbb);
}

}  // namespace diffrac
