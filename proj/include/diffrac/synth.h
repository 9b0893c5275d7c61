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

#ifndef DIFFRAC_SYNTH_H_
#define DIFFRAC_SYNTH_H_

#include <cstdint>

#include "diffrac/corpus.h"
#include "json.hpp"

namespace diffrac {

// Synthetic stand-in for a corpus of movies with aligned scripts.
//
// Every movie is a sequence of shots holding 1-4 people (4-6 in crowded
// shots). Each person has a body track and, with probability
// face_visible_rate, a face track inside the body box; face/body links are
// recovered by GreedyTrackMatch on the generated boxes. Named characters are
// drawn per movie; background people carry label 0. Face features sit
// around per-movie name centroids (background has its own), body features
// around action centroids shared by all movies. Centroids of one set have
// pairwise distance separation * sigma.
//
// Script mentions are emitted per movie: a speaker mention becomes a name
// bag over the face tracks of `bag_window` consecutive shots, an action
// mention becomes an action bag and a person-action bag over the body tracks
// of the window. Mentions are anchored on non-crowded shots and bags never
// contain crowded tracks, so every bag row lies outside the background
// candidates. A mention's label is wrong with probability bag_noise.
struct SyntheticSpec {
  int n_blocks = 32;
  int min_tracks = 250;  // body tracks per movie
  int max_tracks = 350;
  int n_names = 5;  // named characters per movie, background excluded
  int n_actions = 14;  // including background
  int face_dim = 16;
  int body_dim = 32;
  double separation = 6.0;
  double sigma = 1.0;
  double bag_noise = 0.0;
  int name_bags_per_block = 120;
  int action_bags_per_block = 80;
  int bag_window = 1;
  double background_rate = 0.2;
  double action_background_rate = 0.5;
  double crowded_rate = 0.1;
  double face_visible_rate = 0.85;
  std::uint64_t seed = 1;
};

// Throws std::invalid_argument for out-of-range probabilities, counts < 1,
// dimensions smaller than the label count, or min_tracks > max_tracks.
void ValidateSpec(const SyntheticSpec& spec);

// Deterministic per seed. Movie i depends only on (seed, i) and the
// per-movie fields, so growing n_blocks keeps the earlier movies unchanged.
Corpus GenerateCorpus(const SyntheticSpec& spec);

nlohmann::json SpecToJson(const SyntheticSpec& spec);
// Missing keys keep their defaults; unknown keys are rejected.
SyntheticSpec SpecFromJson(const nlohmann::json& j);

}  // namespace diffrac

#endif  // DIFFRAC_SYNTH_H_
