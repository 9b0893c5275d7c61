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

#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "binary_io.h"
#include "diffrac/corpus.h"

namespace diffrac {
namespace {

constexpr std::string_view kMatrixMagic = "FMAT0001";
constexpr const char* kFormat = "diffrac-corpus-1";

using nlohmann::json;

void CheckBagRows(const Bag& bag, Index n_rows, const std::string& where) {
  if (bag.member_rows.empty()) throw std::invalid_argument(where + ": empty bag");
  for (std::size_t i = 0; i < bag.member_rows.size(); ++i) {
    const Index r = bag.member_rows[i];
    if (r < 0 || r >= n_rows || (i > 0 && bag.member_rows[i - 1] >= r)) {
      throw std::invalid_argument(where + ": bad row index");
    }
  }
}

json TracksToJson(const std::vector<TrackInfo>& tracks) {
  json out = json::array();
  for (const TrackInfo& t : tracks) {
    out.push_back({t.start_frame, t.end_frame, t.shot, t.crowded ? 1 : 0});
  }
  return out;
}

std::vector<TrackInfo> TracksFromJson(const json& j) {
  std::vector<TrackInfo> tracks;
  for (const json& t : j) {
    tracks.push_back({t.at(0).get<std::int64_t>(), t.at(1).get<std::int64_t>(),
                      t.at(2).get<int>(), t.at(3).get<int>() != 0});
  }
  return tracks;
}

json BagsToJson(const std::vector<Bag>& bags) {
  json out = json::array();
  for (const Bag& b : bags) out.push_back(BagToJson(b));
  return out;
}

std::vector<Bag> BagsFromJson(const json& j) {
  std::vector<Bag> bags;
  for (const json& b : j) bags.push_back(BagFromJson(b));
  return bags;
}

void WriteText(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << text;
}

json ReadJsonFile(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return json::parse(in);
}

}  // namespace

void ValidateMovie(const MovieData& m) {
  const std::string where = "movie " + std::to_string(m.movie_id);
  auto require = [&](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(where + ": " + what);
  };
  require(m.n_names >= 1 && m.n_actions >= 1, "label counts must be >= 1");
  require(m.face_features.rows() == static_cast<Index>(m.faces.size()),
          "face feature rows do not match face tracks");
  require(m.body_features.rows() == static_cast<Index>(m.bodies.size()),
          "body feature rows do not match body tracks");
  require(m.body_face.size() == m.bodies.size(), "body_face size mismatch");
  require(m.face_features.allFinite() && m.body_features.allFinite(), "non-finite features");
  std::set<int> used_faces;
  for (int f : m.body_face) {
    require(f >= -1 && f < static_cast<int>(m.faces.size()), "body_face out of range");
    if (f >= 0) require(used_faces.insert(f).second, "face linked to two bodies");
  }
  for (const Bag& b : m.name_bags) {
    CheckBagRows(b, m.face_features.rows(), where + " name bag");
    require(b.kind == BagKind::kAtLeastOne, "name bags must be at-least-one bags");
    require(b.label >= 0 && b.label < m.n_names, "name bag label out of range");
  }
  for (const Bag& b : m.action_bags) {
    CheckBagRows(b, m.body_features.rows(), where + " action bag");
    require(b.kind == BagKind::kAtLeastOne, "action bags must be at-least-one bags");
    require(b.label >= 0 && b.label < m.n_actions, "action bag label out of range");
  }
  for (const Bag& b : m.person_action_bags) {
    CheckBagRows(b, m.body_features.rows(), where + " person-action bag");
    require(b.kind == BagKind::kPersonAction, "person-action bag kind");
    require(b.label >= 0 && b.label < m.n_actions, "person-action action out of range");
    require(b.person >= 0 && b.person < m.n_names, "person-action person out of range");
  }
}

std::vector<Index> NameBackgroundRows(const MovieData& movie) {
  std::vector<bool> covered(movie.faces.size(), false);
  for (const Bag& b : movie.name_bags) {
    for (Index r : b.member_rows) covered[r] = true;
  }
  std::vector<Index> rows;
  for (std::size_t r = 0; r < movie.faces.size(); ++r) {
    if (!covered[r] || movie.faces[r].crowded) rows.push_back(static_cast<Index>(r));
  }
  return rows;
}

std::vector<Index> ActionBackgroundRows(const MovieData& movie) {
  std::vector<bool> covered(movie.bodies.size(), false);
  for (const Bag& b : movie.action_bags) {
    for (Index r : b.member_rows) covered[r] = true;
  }
  std::vector<Index> rows;
  for (std::size_t r = 0; r < movie.bodies.size(); ++r) {
    if (!covered[r] || movie.bodies[r].crowded) rows.push_back(static_cast<Index>(r));
  }
  return rows;
}

void WriteFeatureMatrix(std::ostream& out, MatrixCRef m) {
  binary::WriteMagic(out, kMatrixMagic);
  binary::WriteU64(out, static_cast<std::uint64_t>(m.rows()));
  binary::WriteU64(out, static_cast<std::uint64_t>(m.cols()));
  binary::WriteRows(out, m);
  if (!out) throw std::runtime_error("WriteFeatureMatrix: write failed");
}

Matrix ReadFeatureMatrix(std::istream& in) {
  binary::ExpectMagic(in, kMatrixMagic);
  const Index n = binary::CheckedDim(binary::ReadU64(in, "matrix header"), "matrix");
  const Index d = binary::CheckedDim(binary::ReadU64(in, "matrix header"), "matrix");
  return binary::ReadRows(in, n, d, "matrix payload");
}

json BagToJson(const Bag& bag) {
  json j = {{"kind", BagKindName(bag.kind)}, {"label", bag.label}, {"rows", bag.member_rows}};
  if (bag.person >= 0) j["person"] = bag.person;
  if (bag.lower_bound != 1.0) j["lower_bound"] = bag.lower_bound;
  if (!bag.weights.empty()) j["weights"] = bag.weights;
  return j;
}

Bag BagFromJson(const json& j) {
  Bag bag;
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "at_least_one") {
    bag.kind = BagKind::kAtLeastOne;
  } else if (kind == "person_action") {
    bag.kind = BagKind::kPersonAction;
  } else if (kind == "weighted") {
    bag.kind = BagKind::kWeighted;
  } else {
    throw std::invalid_argument("unknown bag kind: " + kind);
  }
  bag.label = j.at("label").get<int>();
  bag.member_rows = j.at("rows").get<std::vector<Index>>();
  bag.person = j.value("person", -1);
  bag.lower_bound = j.value("lower_bound", 1.0);
  if (j.contains("weights")) bag.weights = j.at("weights").get<std::vector<double>>();
  return bag;
}

void WriteCorpus(const std::string& dir, const Corpus& corpus) {
  namespace fs = std::filesystem;
  if (corpus.movies.empty()) throw std::invalid_argument("WriteCorpus: no movies");
  fs::create_directories(dir);
  const Index face_dim = corpus.movies.front().face_features.cols();
  const Index body_dim = corpus.movies.front().body_features.cols();
  Index n_faces = 0, n_bodies = 0;
  json movies = json::array();
  for (const MovieData& m : corpus.movies) {
    ValidateMovie(m);
    if (m.face_features.cols() != face_dim || m.body_features.cols() != body_dim) {
      throw std::invalid_argument("WriteCorpus: feature dimensions differ across movies");
    }
    movies.push_back({{"movie_id", m.movie_id},
                      {"n_names", m.n_names},
                      {"n_actions", m.n_actions},
                      {"face_offset", n_faces},
                      {"n_faces", m.faces.size()},
                      {"body_offset", n_bodies},
                      {"n_bodies", m.bodies.size()},
                      {"faces", TracksToJson(m.faces)},
                      {"bodies", TracksToJson(m.bodies)},
                      {"body_face", m.body_face},
                      {"name_bags", BagsToJson(m.name_bags)},
                      {"action_bags", BagsToJson(m.action_bags)},
                      {"person_action_bags", BagsToJson(m.person_action_bags)}});
    n_faces += m.face_features.rows();
    n_bodies += m.body_features.rows();
  }
  const json manifest = {{"format", kFormat},
                         {"face_dim", face_dim},
                         {"body_dim", body_dim},
                         {"faces_file", "faces.bin"},
                         {"bodies_file", "bodies.bin"},
                         {"movies", std::move(movies)}};
  WriteText(fs::path(dir) / "manifest.json", manifest.dump(1) + "\n");

  Matrix faces(n_faces, face_dim), bodies(n_bodies, body_dim);
  Index fo = 0, bo = 0;
  for (const MovieData& m : corpus.movies) {
    faces.middleRows(fo, m.face_features.rows()) = m.face_features;
    bodies.middleRows(bo, m.body_features.rows()) = m.body_features;
    fo += m.face_features.rows();
    bo += m.body_features.rows();
  }
  for (const auto& [name, mat] : {std::pair{"faces.bin", &faces}, std::pair{"bodies.bin", &bodies}}) {
    std::ofstream out(fs::path(dir) / name, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + (fs::path(dir) / name).string());
    WriteFeatureMatrix(out, *mat);
  }

  if (!corpus.truth.empty()) {
    json truth = json::array();
    for (const MovieTruth& t : corpus.truth) {
      truth.push_back({{"movie_id", t.movie_id},
                       {"face_names", t.face_names},
                       {"body_actions", t.body_actions}});
    }
    WriteText(fs::path(dir) / "truth.json", json{{"movies", std::move(truth)}}.dump(1) + "\n");
  }
}

Corpus ReadCorpus(const std::string& dir, bool with_truth) {
  namespace fs = std::filesystem;
  const json manifest = ReadJsonFile(fs::path(dir) / "manifest.json");
  if (manifest.value("format", "") != kFormat) {
    throw std::runtime_error("unsupported corpus format in " + dir);
  }
  auto read_matrix = [&](const std::string& name) {
    std::ifstream in(fs::path(dir) / name, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + (fs::path(dir) / name).string());
    return ReadFeatureMatrix(in);
  };
  const Matrix faces = read_matrix(manifest.at("faces_file").get<std::string>());
  const Matrix bodies = read_matrix(manifest.at("bodies_file").get<std::string>());
  Corpus corpus;
  for (const json& jm : manifest.at("movies")) {
    MovieData m;
    m.movie_id = jm.at("movie_id").get<int>();
    m.n_names = jm.at("n_names").get<int>();
    m.n_actions = jm.at("n_actions").get<int>();
    const Index fo = jm.at("face_offset").get<Index>(), nf = jm.at("n_faces").get<Index>();
    const Index bo = jm.at("body_offset").get<Index>(), nb = jm.at("n_bodies").get<Index>();
    if (fo < 0 || nf < 0 || fo + nf > faces.rows() || bo < 0 || nb < 0 ||
        bo + nb > bodies.rows()) {
      throw std::runtime_error("corpus manifest offsets exceed feature files");
    }
    m.face_features = faces.middleRows(fo, nf);
    m.body_features = bodies.middleRows(bo, nb);
    m.faces = TracksFromJson(jm.at("faces"));
    m.bodies = TracksFromJson(jm.at("bodies"));
    m.body_face = jm.at("body_face").get<std::vector<int>>();
    m.name_bags = BagsFromJson(jm.at("name_bags"));
    m.action_bags = BagsFromJson(jm.at("action_bags"));
    m.person_action_bags = BagsFromJson(jm.at("person_action_bags"));
    ValidateMovie(m);
    corpus.movies.push_back(std::move(m));
  }
  const fs::path truth_path = fs::path(dir) / "truth.json";
  if (with_truth && fs::exists(truth_path)) {
    const json truth = ReadJsonFile(truth_path);
    for (const json& jt : truth.at("movies")) {
      MovieTruth t;
      t.movie_id = jt.at("movie_id").get<int>();
      t.face_names = jt.at("face_names").get<std::vector<int>>();
      t.body_actions = jt.at("body_actions").get<std::vector<int>>();
      corpus.truth.push_back(std::move(t));
    }
    if (corpus.truth.size() != corpus.movies.size()) {
      throw std::runtime_error("truth.json does not match the manifest");
    }
  }
  return corpus;
}

}  // namespace diffrac
