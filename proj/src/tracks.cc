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

#include "diffrac/tracks.h"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace diffrac {

void ValidateTrack(const BoxTrack& track) {
  for (std::size_t t = 0; t < track.frames.size(); ++t) {
    const Box& b = track.frames[t].box;
    if (!(b.x0 < b.x1) || !(b.y0 < b.y1) || !std::isfinite(b.x1) || !std::isfinite(b.y1) ||
        !std::isfinite(b.x0) || !std::isfinite(b.y0)) {
      throw std::invalid_argument("BoxTrack: degenerate box");
    }
    if (t > 0 && track.frames[t - 1].frame >= track.frames[t].frame) {
      throw std::invalid_argument("BoxTrack: frames must be strictly increasing");
    }
  }
}

double IntersectionArea(const Box& a, const Box& b) {
  const double w = std::min(a.x1, b.x1) - std::max(a.x0, b.x0);
  const double h = std::min(a.y1, b.y1) - std::max(a.y0, b.y0);
  return (w > 0.0 && h > 0.0) ? w * h : 0.0;
}

double TrackOverlap(const BoxTrack& a, const BoxTrack& b) {
  double total = 0.0;
  std::size_t j = 0;
  for (const TrackFrame& fa : a.frames) {
    while (j < b.frames.size() && b.frames[j].frame < fa.frame) ++j;
    if (j == b.frames.size()) break;
    if (b.frames[j].frame == fa.frame) {
      total += IntersectionArea(fa.box, b.frames[j].box) / fa.box.Area();
    }
  }
  return total;
}

std::vector<int> GreedyTrackMatch(const std::vector<BoxTrack>& faces,
                                  const std::vector<BoxTrack>& bodies) {
  std::vector<int> best_body(faces.size(), -1);
  std::vector<double> best_overlap(faces.size(), 0.0);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    for (std::size_t b = 0; b < bodies.size(); ++b) {
      const double o = TrackOverlap(faces[f], bodies[b]);
      if (o > best_overlap[f]) {
        best_overlap[f] = o;
        best_body[f] = static_cast<int>(b);
      }
    }
  }
  std::vector<int> match(bodies.size(), -1);
  std::vector<double> kept(bodies.size(), 0.0);
  for (std::size_t f = 0; f < faces.size(); ++f) {
    const int b = best_body[f];
    if (b < 0) continue;
    if (match[b] < 0 || best_overlap[f] > kept[b]) {
      match[b] = static_cast<int>(f);
      kept[b] = best_overlap[f];
    }
  }
  return match;
}

}  // namespace diffrac
