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

#include "support/random_problems.h"

#include <algorithm>
#include <numeric>
#include <set>

namespace diffrac::testing {
namespace {

Index UniformIndex(std::mt19937_64& rng, Index lo, Index hi) {
  return std::uniform_int_distribution<Index>(lo, hi)(rng);
}

double Uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

BoxTrack RandomTrack(std::mt19937_64& rng, int max_side) {
  BoxTrack track;
  const Index first = UniformIndex(rng, 0, 3);
  const Index last = UniformIndex(rng, first, 5);
  const double x0 = static_cast<double>(UniformIndex(rng, 0, 4));
  const double y0 = static_cast<double>(UniformIndex(rng, 0, 4));
  for (Index t = first; t <= last; ++t) {
    // Mostly static boxes, with an occasional jump to vary per-frame overlap.
    const double dx = Uniform(rng, 0, 1) < 0.2 ? 1.0 : 0.0;
    const double w = static_cast<double>(UniformIndex(rng, 1, max_side));
    const double h = static_cast<double>(UniformIndex(rng, 1, max_side));
    track.frames.push_back({t, Box{x0 + dx, y0, x0 + dx + w, y0 + h}});
  }
  return track;
}

}  // namespace

Matrix RandomMatrix(std::mt19937_64& rng, Index rows, Index cols) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = normal(rng);
  }
  return m;
}

Matrix RandomAssignment(std::mt19937_64& rng, Index rows, Index cols) {
  Matrix m(rows, cols);
  for (Index i = 0; i < rows; ++i) {
    for (Index j = 0; j < cols; ++j) m(i, j) = Uniform(rng, 0.05, 1.0);
    m.row(i) /= m.row(i).sum();
  }
  return m;
}

Block RandomBlock(std::mt19937_64& rng, int block_id, const BlockShape& shape) {
  Block block;
  block.block_id = block_id;
  block.n_rows = UniformIndex(rng, shape.min_rows, shape.max_rows);
  block.n_labels = shape.n_labels;
  std::vector<int> truth(block.n_rows);
  for (int& t : truth) t = static_cast<int>(UniformIndex(rng, 0, shape.n_labels - 1));

  for (int b = 0; b < shape.n_bags; ++b) {
    const Index anchor = UniformIndex(rng, 0, block.n_rows - 1);
    std::set<Index> rows{anchor};
    const Index extra = UniformIndex(rng, 0, std::max<Index>(shape.max_bag_size - 1, 0));
    for (Index e = 0; e < extra; ++e) rows.insert(UniformIndex(rng, 0, block.n_rows - 1));
    Bag bag;
    bag.label = truth[anchor];
    bag.member_rows.assign(rows.begin(), rows.end());
    if (shape.weighted && Uniform(rng, 0, 1) < 0.5) {
      bag.kind = BagKind::kWeighted;
      double anchor_weight = 0.0;
      for (Index r : bag.member_rows) {
        bag.weights.push_back(Uniform(rng, 0.2, 1.0));
        if (r == anchor) anchor_weight = bag.weights.back();
      }
      bag.lower_bound = Uniform(rng, 0.3, 1.0) * anchor_weight;
    } else if (Uniform(rng, 0, 1) < 0.25) {
      bag.lower_bound = Uniform(rng, 0.2, 1.0);
    }
    block.bags.push_back(std::move(bag));
  }

  if (shape.background) {
    BackgroundSet bg;
    int zeros = 0;
    for (Index r = 0; r < block.n_rows; ++r) {
      if (Uniform(rng, 0, 1) < 0.6) {
        bg.member_rows.push_back(r);
        zeros += truth[r] == kBackgroundLabel;
      }
    }
    if (bg.member_rows.empty()) {
      bg.member_rows.push_back(0);
      zeros = truth[0] == kBackgroundLabel;
    }
    bg.fraction = Uniform(rng, 0.4, 1.0) * zeros / static_cast<double>(bg.member_rows.size());
    block.background = bg;
  }
  block.slack.enabled = shape.slack;
  block.slack.penalty = shape.slack_penalty;
  return block;
}

RandomInstance MakeRandomInstance(std::uint64_t seed, int n_blocks, Index dim,
                                  double lambda, const BlockShape& shape) {
  std::mt19937_64 rng(seed);
  std::vector<Block> blocks;
  std::vector<BlockPolytope> polytopes;
  Index total = 0;
  for (int i = 0; i < n_blocks; ++i) {
    blocks.push_back(RandomBlock(rng, i, shape));
    polytopes.push_back(CompileBlock(blocks.back()));
    total += blocks.back().n_rows;
  }
  Matrix x = RandomMatrix(rng, total, dim);
  return RandomInstance{std::move(blocks),
                        MakeProblem(FeatureMatrix(std::move(x)), lambda, std::move(polytopes))};
}

ShotConfig RandomShot(std::mt19937_64& rng, int n_faces, int n_bodies) {
  ShotConfig shot;
  for (int b = 0; b < n_bodies; ++b) shot.bodies.push_back(RandomTrack(rng, 3));
  for (int f = 0; f < n_faces; ++f) {
    // Exact duplicates force the tie-breaking rules.
    if (f > 0 && Uniform(rng, 0, 1) < 0.2) {
      shot.faces.push_back(shot.faces[UniformIndex(rng, 0, f - 1)]);
    } else {
      shot.faces.push_back(RandomTrack(rng, 2));
    }
  }
  return shot;
}

}  // namespace diffrac::testing
