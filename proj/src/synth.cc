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

#include "diffrac/synth.h"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "diffrac/tracks.h"

namespace diffrac {
namespace {

std::uint64_t SplitMix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double Uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  // Uniform integer in [lo, hi].
  int Int(int lo, int hi) {
    const double span = static_cast<double>(hi - lo + 1);
    return lo + std::min(hi - lo, static_cast<int>(Uniform() * span));
  }
  bool Bernoulli(double p) { return Uniform() < p; }
  double Normal() { return normal_(engine_); }

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

// Columns: k-th centroid at radius separation * sigma / sqrt(2) along the
// k-th axis of a random rotation, so centroids are pairwise
// separation * sigma apart.
Matrix Centroids(Rng& rng, int dim, int count, double radius) {
  Matrix g(dim, dim);
  for (Index i = 0; i < g.size(); ++i) g.data()[i] = rng.Normal();
  const Matrix q = Eigen::HouseholderQR<Matrix>(g).householderQ();
  return radius * q.leftCols(count);
}

Vector Noisy(Rng& rng, const Vector& center, double sigma) {
  Vector v = center;
  for (Index i = 0; i < v.size(); ++i) v[i] += sigma * rng.Normal();
  return v;
}

struct Person {
  int name = 0;
  int action = 0;
  int body_row = -1;
  int face_row = -1;
};

struct Shot {
  std::int64_t first_frame = 0;
  std::int64_t n_frames = 0;
  bool crowded = false;
  std::vector<Person> people;
};

BoxTrack MakeTrack(Rng& rng, std::int64_t first, std::int64_t last, const Box& base) {
  BoxTrack track;
  // Boxes on every fifth frame of the movie, so face and body tracks share
  // their sampled frames.
  for (std::int64_t f = (first + 4) / 5 * 5; f <= last; f += 5) {
    const double jx = rng.Uniform() * 4.0 - 2.0;
    const double jy = rng.Uniform() * 4.0 - 2.0;
    track.frames.push_back({f, {base.x0 + jx, base.y0 + jy, base.x1 + jx, base.y1 + jy}});
  }
  return track;
}

int WrongLabel(Rng& rng, int truth, int first, int last) {
  if (last <= first) return truth;
  int l = rng.Int(first, last - 1);
  if (l >= truth) ++l;
  return l;
}

// Rows of the given kind in the non-crowded shots of [w0, w1).
std::vector<Index> WindowRows(const std::vector<Shot>& shots, int w0, int w1, bool faces) {
  std::vector<Index> rows;
  for (int s = w0; s < w1; ++s) {
    if (shots[s].crowded) continue;
    for (const Person& p : shots[s].people) {
      const int r = faces ? p.face_row : p.body_row;
      if (r >= 0) rows.push_back(r);
    }
  }
  std::sort(rows.begin(), rows.end());
  return rows;
}

struct SharedModel {
  Matrix action_centroids;  // body_dim x n_actions
};

void GenerateMovie(const SyntheticSpec& spec, const SharedModel& shared, int index,
                   MovieData& movie, MovieTruth& truth) {
  Rng rng(SplitMix64(spec.seed ^ SplitMix64(static_cast<std::uint64_t>(index) + 1)));
  const double radius = spec.separation * spec.sigma / std::sqrt(2.0);
  const Matrix name_centroids = Centroids(rng, spec.face_dim, spec.n_names + 1, radius);
  const int n_tracks = rng.Int(spec.min_tracks, spec.max_tracks);

  // Expected share of people in crowded shots, used to keep the overall
  // background rate at the requested value.
  const double crowd_people = spec.crowded_rate * 5.0;
  const double crowd_share = crowd_people / (crowd_people + (1.0 - spec.crowded_rate) * 2.5);
  auto split_rate = [&](double rate, double& crowd, double& normal) {
    crowd = std::min(1.0, rate + 0.6 * (rate > 0.0 ? 1.0 : 0.0));
    normal = crowd_share < 1.0
                 ? std::clamp((rate - crowd_share * crowd) / (1.0 - crowd_share), 0.0, 1.0)
                 : rate;
    if (rate >= 1.0) normal = 1.0;
  };
  double name_crowd, name_normal, action_crowd, action_normal;
  split_rate(spec.background_rate, name_crowd, name_normal);
  split_rate(spec.action_background_rate, action_crowd, action_normal);

  std::vector<Shot> shots;
  int n_bodies = 0;
  std::int64_t frame = 0;
  while (n_bodies < n_tracks) {
    Shot shot;
    shot.first_frame = frame;
    shot.n_frames = rng.Int(20, 80);
    shot.crowded = rng.Bernoulli(spec.crowded_rate);
    int count = shot.crowded ? rng.Int(4, 6) : rng.Int(1, 4);
    count = std::min(count, n_tracks - n_bodies);
    std::vector<bool> used(spec.n_names + 1, false);
    for (int k = 0; k < count; ++k) {
      Person p;
      const bool extra = rng.Bernoulli(shot.crowded ? name_crowd : name_normal);
      if (!extra) {
        // Distinct characters within a shot; fall back to background.
        int name = rng.Int(1, spec.n_names);
        for (int tries = 0; tries < spec.n_names && used[name]; ++tries) {
          name = name % spec.n_names + 1;
        }
        if (!used[name]) {
          used[name] = true;
          p.name = name;
        }
      }
      const bool idle = rng.Bernoulli(shot.crowded ? action_crowd : action_normal);
      p.action = idle ? 0 : rng.Int(1, spec.n_actions - 1);
      shot.people.push_back(p);
    }
    n_bodies += count;
    frame += shot.n_frames;
    shots.push_back(std::move(shot));
  }

  movie = MovieData{};
  movie.movie_id = index;
  movie.n_names = spec.n_names + 1;
  movie.n_actions = spec.n_actions;
  truth = MovieTruth{};
  truth.movie_id = index;

  std::vector<Vector> face_rows, body_rows;
  for (int s = 0; s < static_cast<int>(shots.size()); ++s) {
    Shot& shot = shots[s];
    const std::int64_t last = shot.first_frame + shot.n_frames - 1;
    const int count = static_cast<int>(shot.people.size());
    const double slot = 1280.0 / count;
    std::vector<BoxTrack> faces, bodies;
    std::vector<int> face_person;
    for (int k = 0; k < count; ++k) {
      Person& p = shot.people[k];
      const double width = slot * (shot.crowded ? 1.1 : 0.5 + 0.3 * rng.Uniform());
      const double x0 = slot * k + 0.5 * (slot - width);
      const double y0 = 100.0 + 100.0 * rng.Uniform();
      const Box body{x0, y0, x0 + width, y0 + 400.0 + 200.0 * rng.Uniform()};
      bodies.push_back(MakeTrack(rng, shot.first_frame, last, body));
      p.body_row = static_cast<int>(body_rows.size());
      movie.bodies.push_back({shot.first_frame, last, s, shot.crowded});
      truth.body_actions.push_back(p.action);
      body_rows.push_back(Noisy(rng, shared.action_centroids.col(p.action), spec.sigma));
      if (!rng.Bernoulli(spec.face_visible_rate)) continue;
      const double fw = 0.4 * (body.x1 - body.x0);
      const Box face{body.x0 + 0.3 * (body.x1 - body.x0), body.y0 + 10.0,
                     body.x0 + 0.3 * (body.x1 - body.x0) + fw, body.y0 + 10.0 + fw};
      const std::int64_t f0 = shot.first_frame + rng.Int(0, static_cast<int>(shot.n_frames / 3));
      const std::int64_t f1 = last - rng.Int(0, static_cast<int>(shot.n_frames / 3));
      faces.push_back(MakeTrack(rng, f0, f1, face));
      face_person.push_back(k);
      p.face_row = static_cast<int>(face_rows.size());
      movie.faces.push_back({f0, f1, s, shot.crowded});
      truth.face_names.push_back(p.name);
      face_rows.push_back(Noisy(rng, name_centroids.col(p.name), spec.sigma));
    }
    const std::vector<int> link = GreedyTrackMatch(faces, bodies);
    for (int k = 0; k < count; ++k) {
      const int f = link[k];
      movie.body_face.push_back(f < 0 ? -1 : shot.people[face_person[f]].face_row);
    }
  }
  movie.face_features.resize(static_cast<Index>(face_rows.size()), spec.face_dim);
  for (std::size_t r = 0; r < face_rows.size(); ++r) {
    movie.face_features.row(static_cast<Index>(r)) = face_rows[r].transpose();
  }
  movie.body_features.resize(static_cast<Index>(body_rows.size()), spec.body_dim);
  for (std::size_t r = 0; r < body_rows.size(); ++r) {
    movie.body_features.row(static_cast<Index>(r)) = body_rows[r].transpose();
  }

  const int n_shots = static_cast<int>(shots.size());
  auto window = [&](int s, int& w0, int& w1) {
    w0 = std::max(0, s - rng.Int(0, spec.bag_window - 1));
    w1 = std::min(n_shots, w0 + spec.bag_window);
  };
  // Speaker mentions: a visible named character.
  std::vector<std::pair<int, int>> speakers, actors;  // (shot, person)
  for (int s = 0; s < n_shots; ++s) {
    if (shots[s].crowded) continue;
    for (int k = 0; k < static_cast<int>(shots[s].people.size()); ++k) {
      const Person& p = shots[s].people[k];
      if (p.name > 0 && p.face_row >= 0) speakers.emplace_back(s, k);
      if (p.name > 0 && p.face_row >= 0 && p.action > 0) actors.emplace_back(s, k);
    }
  }
  for (int b = 0; b < spec.name_bags_per_block && !speakers.empty(); ++b) {
    const auto [s, k] = speakers[rng.Int(0, static_cast<int>(speakers.size()) - 1)];
    int w0, w1;
    window(s, w0, w1);
    Bag bag;
    bag.kind = BagKind::kAtLeastOne;
    bag.member_rows = WindowRows(shots, w0, w1, true);
    bag.label = shots[s].people[k].name;
    if (rng.Bernoulli(spec.bag_noise)) bag.label = WrongLabel(rng, bag.label, 1, spec.n_names);
    movie.name_bags.push_back(std::move(bag));
  }
  // Action mentions: a visible named character doing something.
  for (int b = 0; b < spec.action_bags_per_block && !actors.empty(); ++b) {
    const auto [s, k] = actors[rng.Int(0, static_cast<int>(actors.size()) - 1)];
    const Person& p = shots[s].people[k];
    int w0, w1;
    window(s, w0, w1);
    Bag bag;
    bag.kind = BagKind::kAtLeastOne;
    bag.member_rows = WindowRows(shots, w0, w1, false);
    bag.label = p.action;
    if (rng.Bernoulli(spec.bag_noise)) {
      bag.label = WrongLabel(rng, bag.label, 1, spec.n_actions - 1);
    }
    Bag coupled = bag;
    coupled.kind = BagKind::kPersonAction;
    coupled.person = p.name;
    movie.action_bags.push_back(std::move(bag));
    movie.person_action_bags.push_back(std::move(coupled));
  }
}

}  // namespace

void ValidateSpec(const SyntheticSpec& spec) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(std::string("SyntheticSpec: ") + what);
  };
  auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  require(spec.n_blocks >= 1, "n_blocks must be >= 1");
  require(spec.min_tracks >= 1 && spec.min_tracks <= spec.max_tracks,
          "track range must satisfy 1 <= min_tracks <= max_tracks");
  require(spec.n_names >= 1, "n_names must be >= 1");
  require(spec.n_names <= spec.min_tracks, "more names than tracks");
  require(spec.n_actions >= 2, "n_actions must include background and one action");
  require(spec.face_dim >= spec.n_names + 1, "face_dim must be >= n_names + 1");
  require(spec.body_dim >= spec.n_actions, "body_dim must be >= n_actions");
  require(spec.separation >= 0.0 && std::isfinite(spec.separation), "separation must be >= 0");
  require(spec.sigma > 0.0 && std::isfinite(spec.sigma), "sigma must be positive");
  require(prob(spec.bag_noise), "bag_noise outside [0,1]");
  require(prob(spec.background_rate), "background_rate outside [0,1]");
  require(prob(spec.action_background_rate), "action_background_rate outside [0,1]");
  require(prob(spec.crowded_rate), "crowded_rate outside [0,1]");
  require(prob(spec.face_visible_rate), "face_visible_rate outside [0,1]");
  require(spec.name_bags_per_block >= 0 && spec.action_bags_per_block >= 0,
          "bag counts must be non-negative");
  require(spec.bag_window >= 1, "bag_window must be >= 1");
}

Corpus GenerateCorpus(const SyntheticSpec& spec) {
  ValidateSpec(spec);
  Rng shared_rng(SplitMix64(spec.seed));
  SharedModel shared;
  shared.action_centroids =
      Centroids(shared_rng, spec.body_dim, spec.n_actions,
                spec.separation * spec.sigma / std::sqrt(2.0));
  Corpus corpus;
  corpus.movies.resize(spec.n_blocks);
  corpus.truth.resize(spec.n_blocks);
  for (int i = 0; i < spec.n_blocks; ++i) {
    GenerateMovie(spec, shared, i, corpus.movies[i], corpus.truth[i]);
  }
  return corpus;
}

nlohmann::json SpecToJson(const SyntheticSpec& s) {
  return {{"n_blocks", s.n_blocks},
          {"min_tracks", s.min_tracks},
          {"max_tracks", s.max_tracks},
          {"n_names", s.n_names},
          {"n_actions", s.n_actions},
          {"face_dim", s.face_dim},
          {"body_dim", s.body_dim},
          {"separation", s.separation},
          {"sigma", s.sigma},
          {"bag_noise", s.bag_noise},
          {"name_bags_per_block", s.name_bags_per_block},
          {"action_bags_per_block", s.action_bags_per_block},
          {"bag_window", s.bag_window},
          {"background_rate", s.background_rate},
          {"action_background_rate", s.action_background_rate},
          {"crowded_rate", s.crowded_rate},
          {"face_visible_rate", s.face_visible_rate},
          {"seed", s.seed}};
}

SyntheticSpec SpecFromJson(const nlohmann::json& j) {
  if (!j.is_object()) throw std::invalid_argument("spec must be a JSON object");
  SyntheticSpec s;
  const nlohmann::json defaults = SpecToJson(s);
  for (const auto& [key, value] : j.items()) {
    if (!defaults.contains(key)) throw std::invalid_argument("unknown spec key: " + key);
  }
  auto get = [&](const char* key, auto& field) {
    if (j.contains(key)) j.at(key).get_to(field);
  };
  get("n_blocks", s.n_blocks);
  get("min_tracks", s.min_tracks);
  get("max_tracks", s.max_tracks);
  get("n_names", s.n_names);
  get("n_actions", s.n_actions);
  get("face_dim", s.face_dim);
  get("body_dim", s.body_dim);
  get("separation", s.separation);
  get("sigma", s.sigma);
  get("bag_noise", s.bag_noise);
  get("name_bags_per_block", s.name_bags_per_block);
  get("action_bags_per_block", s.action_bags_per_block);
  get("bag_window", s.bag_window);
  get("background_rate", s.background_rate);
  get("action_background_rate", s.action_background_rate);
  get("crowded_rate", s.crowded_rate);
  get("face_visible_rate", s.face_visible_rate);
  get("seed", s.seed);
  ValidateSpec(s);
  return s;
}

}  // namespace diffrac
