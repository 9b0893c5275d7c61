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

#include "diffrac/checkpoint.h"

#include <fstream>
#include <stdexcept>

#include "binary_io.h"

namespace diffrac {
namespace {

constexpr std::string_view kMagic = "BCFW0001";

}  // namespace

void WriteCheckpoint(std::ostream& out, const SolverState& state) {
  const std::size_t n = state.y.size();
  if (state.slack.size() != n || state.gaps.size() != n) {
    throw std::invalid_argument("WriteCheckpoint: inconsistent state");
  }
  const Index k = state.w.cols();
  binary::WriteMagic(out, kMagic);
  binary::WriteU64(out, n);
  binary::WriteU64(out, static_cast<std::uint64_t>(k));
  binary::WriteU64(out, static_cast<std::uint64_t>(state.w.rows()));
  binary::WriteU64(out, static_cast<std::uint64_t>(state.iteration));
  for (std::size_t i = 0; i < n; ++i) {
    if (state.y[i].cols() != k) throw std::invalid_argument("WriteCheckpoint: label mismatch");
    binary::WriteU64(out, static_cast<std::uint64_t>(state.y[i].rows()));
    binary::WriteU64(out, static_cast<std::uint64_t>(state.slack[i].size()));
  }
  for (std::size_t i = 0; i < n; ++i) {
    binary::WriteRows(out, state.y[i]);
    for (Index s = 0; s < state.slack[i].size(); ++s) binary::WriteF64(out, state.slack[i][s]);
    binary::WriteF64(out, state.gaps[i]);
  }
  binary::WriteRows(out, state.w);
  if (!out) throw std::runtime_error("WriteCheckpoint: write failed");
}

SolverState ReadCheckpoint(std::istream& in) {
  binary::ExpectMagic(in, kMagic);
  const Index n = binary::CheckedDim(binary::ReadU64(in, "checkpoint header"), "checkpoint");
  const Index k = binary::CheckedDim(binary::ReadU64(in, "checkpoint header"), "checkpoint");
  const Index d = binary::CheckedDim(binary::ReadU64(in, "checkpoint header"), "checkpoint");
  SolverState state;
  state.iteration = static_cast<std::int64_t>(binary::ReadU64(in, "checkpoint header"));
  std::vector<Index> rows(n), n_slack(n);
  for (Index i = 0; i < n; ++i) {
    rows[i] = binary::CheckedDim(binary::ReadU64(in, "block sizes"), "checkpoint");
    n_slack[i] = binary::CheckedDim(binary::ReadU64(in, "block sizes"), "checkpoint");
  }
  for (Index i = 0; i < n; ++i) {
    state.y.push_back(binary::ReadRows(in, rows[i], k, "block assignment"));
    Vector slack(n_slack[i]);
    for (Index s = 0; s < n_slack[i]; ++s) slack[s] = binary::ReadF64(in, "block slack");
    state.slack.push_back(std::move(slack));
    state.gaps.push_back(binary::ReadF64(in, "block gap"));
  }
  state.w = binary::ReadRows(in, d, k, "weights");
  return state;
}

void WriteCheckpointFile(const std::string& path, const SolverState& state) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  WriteCheckpoint(out, state);
}

SolverState ReadCheckpointFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  return ReadCheckpoint(in);
}

}  // namespace diffrac
