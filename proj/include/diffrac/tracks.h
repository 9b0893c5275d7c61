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

#ifndef DIFFRAC_TRACKS_H_
#define DIFFRAC_TRACKS_H_

#include <cstdint>
#include <vector>

namespace diffrac {

// Axis-aligned pixel box with x0 < x1 and y0 < y1.
struct Box {
  double x0 = 0.0;
  double y0 = 0.0;
  double x1 = 0.0;
  double y1 = 0.0;

  double Area() const { return (x1 - x0) * (y1 - y0); }
};

struct TrackFrame {
  std::int64_t frame = 0;
  Box box;
};

// Frames strictly increasing.
struct BoxTrack {
  std::vector<TrackFrame> frames;
};

// Throws std::invalid_argument for degenerate boxes or unordered frames.
void ValidateTrack(const BoxTrack& track);

double IntersectionArea(const Box& a, const Box& b);

// O(a, b) = sum over frames t of a of Area(a(t) & b(t)) / Area(a(t)); frames
// of a missing from b contribute 0. Not symmetric.
double TrackOverlap(const BoxTrack& a, const BoxTrack& b);

// Two-stage greedy association within one shot. Stage 1 sends every face to
// the body of largest O(face, body) (lowest body index on ties, none when
// the best overlap is 0). Stage 2 lets every body keep the candidate face of
// largest overlap (lowest face index on ties). Returns, per body, the matched
// face index or -1. Each face is used at most once.
std::vector<int> GreedyTrackMatch(const std::vector<BoxTrack>& faces,
                                  const std::vector<BoxTrack>& bodies);

}  // namespace diffrac

#endif  // DIFFRAC_TRACKS_H_
