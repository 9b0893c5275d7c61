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

#ifndef DIFFRAC_CORPUS_H_
#define DIFFRAC_CORPUS_H_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "diffrac/constraints.h"
#include "diffrac/linalg.h"
#include "json.hpp"

namespace diffrac {

struct TrackInfo {
  std::int64_t start_frame = 0;
  std::int64_t end_frame = 0;  // inclusive
  int shot = 0;
  bool crowded = false;
};

// One movie. Name bags index face rows; action and person-action bags index
// body rows. Label 0 is the background name and the background action.
struct MovieData {
  int movie_id = 0;
  int n_names = 0;    // including background
  int n_actions = 0;  // including background
  Matrix face_features;
  Matrix body_features;
  std::vector<TrackInfo> faces;
  std::vector<TrackInfo> bodies;
  // Face row linked to each body row, or -1.
  std::vector<int> body_face;
  std::vector<Bag> name_bags;
  std::vector<Bag> action_bags;
  std::vector<Bag> person_action_bags;
};

// Throws std::invalid_argument on inconsistent shapes, labels or rows.
void ValidateMovie(const MovieData& movie);

// Ground truth, kept apart from the movies so solvers never see it.
struct MovieTruth {
  int movie_id = 0;
  std::vector<int> face_names;
  std::vector<int> body_actions;
};

struct Corpus {
  std::vector<MovieData> movies;
  std::vector<MovieTruth> truth;  // empty when not loaded
};

// Face rows in no name bag, plus crowded face rows.
std::vector<Index> NameBackgroundRows(const MovieData& movie);
// Body rows in no action bag, plus crowded body rows.
std::vector<Index> ActionBackgroundRows(const MovieData& movie);

// Dense feature file: "FMAT0001", u64 N, u64 d, N*d f64 row-major, all
// little-endian.
void WriteFeatureMatrix(std::ostream& out, MatrixCRef m);
Matrix ReadFeatureMatrix(std::istream& in);

// Directory layout:
//   manifest.json  movies, tracks, links, bags, feature row offsets
//   truth.json     ground-truth labels (optional on read)
//   faces.bin      all face features, movies stacked in manifest order
//   bodies.bin     all body features, same order
// Rewriting a corpus read from disk reproduces the files byte for byte.
void WriteCorpus(const std::string& dir, const Corpus& corpus);
Corpus ReadCorpus(const std::string& dir, bool with_truth = true);

nlohmann::json BagToJson(const Bag& bag);
Bag BagFromJson(const nlohmann::json& j);

}  // namespace diffrac

#endif  // DIFFRAC_CORPUS_H_
