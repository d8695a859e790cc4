#include "sgr/corpus.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "sgr/errors.hpp"
#include "sgr/rng.hpp"

namespace sgr {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Class tables
// ---------------------------------------------------------------------------

const std::vector<ObjectClass>& object_classes() {
  static const std::vector<ObjectClass> classes = {
      {0, "kidney", true},
      {1, "monopolar curved scissors", false},
      {2, "bipolar forceps", false},
      {3, "prograsp forceps", false},
      {4, "clip applier", false},
      {5, "suction", false},
      {6, "ultrasound probe", false},
      {7, "stapler", false},
      {8, "large needle driver", false},
  };
  return classes;
}

const std::vector<RelationClass>& relation_classes() {
  static const std::vector<RelationClass> relations = {
      {0, "manipulating"},
      {1, "grasping"},
      {2, "retracting"},
      {3, "cutting"},
      {4, "cauterizing"},
      {5, "looping"},
      {6, "suctioning"},
      {7, "clipping"},
      {8, "ultrasound sensing"},
      {9, "stapling"},
      {10, "suturing"},
      {11, "idle"},
  };
  return relations;
}

const ObjectClass& object_class(int id) {
  const auto& classes = object_classes();
  if (id < 0 || id >= static_cast<int>(classes.size()))
    throw DataError("unknown object class id " + std::to_string(id));
  return classes[static_cast<size_t>(id)];
}

const RelationClass& relation_class(int id) {
  const auto& relations = relation_classes();
  if (id < 0 || id >= static_cast<int>(relations.size()))
    throw DataError("unknown relation id " + std::to_string(id));
  return relations[static_cast<size_t>(id)];
}

int object_class_id(const std::string& name) {
  for (const auto& c : object_classes())
    if (c.name == name) return c.id;
  throw DataError("unknown object class name '" + name + "'");
}

int relation_class_id(const std::string& name) {
  for (const auto& r : relation_classes())
    if (r.name == name) return r.id;
  throw DataError("unknown relation name '" + name + "'");
}

// ---------------------------------------------------------------------------
// Frames and datasets
// ---------------------------------------------------------------------------

std::vector<int> missing_interaction_classes(const AnnotatedFrame& frame) {
  std::set<int> present;
  for (const auto& d : frame.detections) present.insert(d.class_id);
  std::set<int> missing;
  for (const auto& i : frame.interactions) {
    if (!present.count(i.subject_class)) missing.insert(i.subject_class);
    if (!present.count(i.object_class)) missing.insert(i.object_class);
  }
  return {missing.begin(), missing.end()};
}

size_t Dataset::frame_count() const {
  size_t n = 0;
  for (const auto& v : videos) n += v.frames.size();
  return n;
}

namespace {

void validate_frame(const AnnotatedFrame& frame, const std::string& where) {
  for (const auto& d : frame.detections) {
    const auto [x, y, w, h] = d.box;
    if (!(w > 0.0) || !(h > 0.0))
      throw DataError(where + ": box has non-positive extent");
    constexpr double eps = 1e-9;
    if (x < -eps || y < -eps || x + w > 1.0 + eps || y + h > 1.0 + eps)
      throw DataError(where + ": box outside the unit square");
    if (d.confidence < 0.0 || d.confidence > 1.0)
      throw DataError(where + ": confidence outside [0,1]");
    object_class(d.class_id);
  }
  for (const auto& i : frame.interactions) {
    object_class(i.subject_class);
    object_class(i.object_class);
    if (i.relation == kIdleRelationId)
      throw DataError(where + ": 'idle' cannot appear as an edge relation");
    relation_class(i.relation);
  }
  if (frame.report.empty()) throw DataError(where + ": empty report");
}

}  // namespace

void validate(const Dataset& dataset) {
  std::set<int> seen_videos;
  for (const auto& video : dataset.videos) {
    if (!seen_videos.insert(video.id).second)
      throw DataError("duplicate video id " + std::to_string(video.id));
    int prev = -1;
    for (const auto& frame : video.frames) {
      const std::string where = "video " + std::to_string(video.id) +
                                " frame " + std::to_string(frame.frame_index);
      if (frame.frame_index < 0) throw DataError(where + ": negative frame index");
      if (frame.frame_index <= prev)
        throw DataError(where + ": frame indices must be strictly increasing");
      prev = frame.frame_index;
      validate_frame(frame, where);
    }
  }
}

void assign_splits(Dataset& dataset, const std::vector<int>& val_video_ids) {
  std::set<int> known;
  for (const auto& v : dataset.videos) known.insert(v.id);
  for (int id : val_video_ids)
    if (!known.count(id))
      throw DataError("val video id " + std::to_string(id) + " not in dataset");
  const std::set<int> val(val_video_ids.begin(), val_video_ids.end());
  for (auto& v : dataset.videos)
    v.split = val.count(v.id) ? Split::val : Split::train;
}

std::vector<int> default_val_videos(const Dataset& dataset) {
  if (dataset.videos.empty()) return {};
  std::vector<int> ids;
  for (size_t pos : {size_t{0}, size_t{4}, size_t{5}})
    if (pos < dataset.videos.size()) ids.push_back(dataset.videos[pos].id);
  return ids;
}

// ---------------------------------------------------------------------------
// Text normalization and vocabulary
// ---------------------------------------------------------------------------

std::vector<std::string> normalize_text(const std::string& report) {
  static const std::string punct = "!\"#$%&'()*+,-./:;<=>?@[\\]^_`{|}~";
  std::vector<std::string> tokens;
  std::string current;
  for (const char ch : report) {
    const auto uc = static_cast<unsigned char>(ch);
    if (std::isspace(uc)) {
      if (!current.empty()) tokens.push_back(std::move(current)), current.clear();
      continue;
    }
    if (punct.find(ch) != std::string::npos) continue;
    current.push_back(static_cast<char>(std::tolower(uc)));
  }
  if (!current.empty()) tokens.push_back(std::move(current));
  return tokens;
}

int Vocabulary::id_of(const std::string& token) const {
  const auto it = token_to_id.find(token);
  return it == token_to_id.end() ? kUnk : it->second;
}

const std::string& Vocabulary::token(int id) const {
  if (id < 0 || id >= size())
    throw DataError("token id " + std::to_string(id) + " out of range");
  return id_to_token[static_cast<size_t>(id)];
}

std::vector<int> Vocabulary::encode(const std::vector<std::string>& tokens) const {
  std::vector<int> ids;
  ids.reserve(tokens.size());
  for (const auto& t : tokens) ids.push_back(id_of(t));
  return ids;
}

std::vector<std::string> Vocabulary::decode(const std::vector<int>& ids) const {
  std::vector<std::string> tokens;
  for (int id : ids)
    if (id > kUnk) tokens.push_back(token(id));
  return tokens;
}

Vocabulary build_vocab(const Dataset& dataset) {
  Vocabulary vocab;
  vocab.id_to_token = {"<pad>", "<bos>", "<eos>", "<unk>"};
  for (int i = 0; i < 4; ++i) vocab.token_to_id[vocab.id_to_token[i]] = i;

  bool any_report = false;
  for (const auto& video : dataset.videos) {
    if (video.split != Split::train) continue;
    for (const auto& frame : video.frames) {
      if (!frame.report.empty()) any_report = true;
      for (auto& tok : normalize_text(frame.report)) {
        if (vocab.token_to_id.count(tok)) continue;
        vocab.token_to_id[tok] = vocab.size();
        vocab.id_to_token.push_back(tok);
      }
    }
  }
  if (!any_report) throw DataError("cannot build a vocabulary: dataset has no reports");
  return vocab;
}

// ---------------------------------------------------------------------------
// Synthetic scene grammar
// ---------------------------------------------------------------------------

namespace {

// The relation an instrument performs is a pure function of its class and the
// horizontal position of its box, so reports stay predictable from the
// detections alone.
int relation_for(int instrument_class, double center_x) {
  switch (instrument_class) {
    case 1: return relation_class_id("cutting");
    case 2: return center_x < 0.5 ? relation_class_id("manipulating")
                                  : relation_class_id("cauterizing");
    case 3: return center_x < 0.5 ? relation_class_id("retracting")
                                  : relation_class_id("grasping");
    case 4: return relation_class_id("clipping");
    case 5: return relation_class_id("suctioning");
    case 6: return relation_class_id("ultrasound sensing");
    case 7: return relation_class_id("stapling");
    case 8: return center_x < 0.5 ? relation_class_id("looping")
                                  : relation_class_id("suturing");
    default: throw DataError("not an instrument class: " + std::to_string(instrument_class));
  }
}

std::array<double, 4> centered_box(double cx, double cy, double w, double h) {
  const double x = std::clamp(cx - w / 2.0, 0.0, 1.0 - w);
  const double y = std::clamp(cy - h / 2.0, 0.0, 1.0 - h);
  return {x, y, w, h};
}

std::string capitalize(std::string s) {
  if (!s.empty()) s[0] = static_cast<char>(std::toupper(static_cast<unsigned char>(s[0])));
  return s;
}

}  // namespace

std::string frame_report(const std::vector<int>& instrument_classes,
                         const std::vector<Interaction>& interactions) {
  if (instrument_classes.empty()) return "No instrument present.";

  std::vector<Interaction> sorted = interactions;
  std::sort(sorted.begin(), sorted.end(), [](const auto& a, const auto& b) {
    return a.subject_class < b.subject_class;
  });
  std::set<int> interacting;
  std::vector<std::string> clauses;
  for (const auto& i : sorted) {
    interacting.insert(i.subject_class);
    clauses.push_back(capitalize(object_class(i.subject_class).name) + " is " +
                      relation_class(i.relation).name + " " +
                      object_class(i.object_class).name);
  }
  std::vector<int> idle = instrument_classes;
  std::sort(idle.begin(), idle.end());
  for (int c : idle)
    if (!interacting.count(c))
      clauses.push_back(capitalize(object_class(c).name) + " is idle");

  std::string report;
  for (size_t i = 0; i < clauses.size(); ++i) {
    report += clauses[i];
    report += i + 1 < clauses.size() ? ". " : ".";
  }
  return report;
}

Dataset generate_synthetic(const SyntheticConfig& config) {
  if (config.num_videos < 1) throw UsageError("num_videos must be >= 1");
  if (config.frames_per_video < 3) throw UsageError("frames_per_video must be >= 3");
  if (config.node_dropout_rate < 0.0 || config.node_dropout_rate > 0.5)
    throw UsageError("node_dropout_rate must lie in [0, 0.5]");

  Rng rng(config.seed);
  Dataset dataset;
  dataset.videos.resize(static_cast<size_t>(config.num_videos));

  for (int v = 0; v < config.num_videos; ++v) {
    Video& video = dataset.videos[static_cast<size_t>(v)];
    video.id = v;
    for (int t = 0; t < config.frames_per_video; ++t) {
      AnnotatedFrame frame;
      frame.frame_index = t;

      const bool kidney_dropped = rng.bernoulli(config.node_dropout_rate);
      const double kcx = rng.uniform(0.35, 0.65);
      const double kcy = rng.uniform(0.35, 0.65);
      const double kw = rng.uniform(0.25, 0.40);
      const double kh = rng.uniform(0.25, 0.40);

      const int n_instr = rng.uniform_int(1, 3);
      std::array<int, 8> pool = {1, 2, 3, 4, 5, 6, 7, 8};
      for (int i = 0; i < n_instr; ++i)
        std::swap(pool[static_cast<size_t>(i)],
                  pool[static_cast<size_t>(rng.uniform_int(i, 7))]);
      std::vector<int> instruments(pool.begin(), pool.begin() + n_instr);
      std::sort(instruments.begin(), instruments.end());

      struct Placed {
        int class_id;
        double cx, cy;
        std::array<double, 4> box;
      };
      std::vector<Placed> placed;
      for (int c : instruments) {
        const double cx = rng.uniform(0.10, 0.90);
        const double cy = rng.uniform(0.10, 0.90);
        const double w = rng.uniform(0.08, 0.18);
        const double h = rng.uniform(0.08, 0.18);
        placed.push_back({c, cx, cy, centered_box(cx, cy, w, h)});
      }

      // An instrument interacts with the kidney when their centers are close;
      // at most the two closest instruments interact.
      constexpr double reach = 0.22;
      std::vector<std::pair<double, size_t>> near;
      for (size_t i = 0; i < placed.size(); ++i) {
        const double d = std::hypot(placed[i].cx - kcx, placed[i].cy - kcy);
        if (d < reach) near.emplace_back(d, i);
      }
      std::sort(near.begin(), near.end());
      if (near.size() > 2) near.resize(2);
      std::sort(near.begin(), near.end(),
                [&](const auto& a, const auto& b) {
                  return placed[a.second].class_id < placed[b.second].class_id;
                });
      for (const auto& [d, i] : near) {
        (void)d;
        frame.interactions.push_back({placed[i].class_id,
                                      relation_for(placed[i].class_id, placed[i].cx),
                                      kKidneyClassId});
      }

      if (!kidney_dropped) {
        Detection det;
        det.frame_index = t;
        det.class_id = kKidneyClassId;
        det.box = centered_box(kcx, kcy, kw, kh);
        det.confidence = rng.uniform(0.5, 1.0);
        frame.detections.push_back(det);
      }
      for (const auto& p : placed) {
        Detection det;
        det.frame_index = t;
        det.class_id = p.class_id;
        det.box = p.box;
        det.confidence = rng.uniform(0.5, 1.0);
        frame.detections.push_back(det);
      }

      frame.report = frame_report(instruments, frame.interactions);
      video.frames.push_back(std::move(frame));
    }
  }
  return dataset;
}

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

DatasetFormat parse_format(const std::string& name) {
  if (name == "jsonl") return DatasetFormat::jsonl;
  if (name == "miccai-annotations") return DatasetFormat::miccai_annotations;
  throw UsageError("unknown dataset format '" + name + "'");
}

namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

std::string frame_to_json_line(int video_id, const AnnotatedFrame& frame) {
  std::ostringstream out;
  out << "{\"video\":" << video_id << ",\"frame\":" << frame.frame_index
      << ",\"detections\":[";
  for (size_t i = 0; i < frame.detections.size(); ++i) {
    const auto& d = frame.detections[i];
    if (i) out << ",";
    out << "{\"class\":" << json(object_class(d.class_id).name).dump()
        << ",\"box\":[" << format_double(d.box[0]) << "," << format_double(d.box[1])
        << "," << format_double(d.box[2]) << "," << format_double(d.box[3])
        << "],\"conf\":" << format_double(d.confidence) << "}";
  }
  out << "],\"interactions\":[";
  for (size_t i = 0; i < frame.interactions.size(); ++i) {
    const auto& x = frame.interactions[i];
    if (i) out << ",";
    out << "[" << json(object_class(x.subject_class).name).dump() << ","
        << json(relation_class(x.relation).name).dump() << ","
        << json(object_class(x.object_class).name).dump() << "]";
  }
  out << "],\"report\":" << json(frame.report).dump() << "}";
  return out.str();
}

[[noreturn]] void fail_at(const std::string& path, size_t line, const std::string& msg) {
  throw DataError(path + ":" + std::to_string(line) + ": " + msg);
}

AnnotatedFrame parse_frame_json(const json& j, const std::string& path, size_t line,
                                int* video_id) {
  AnnotatedFrame frame;
  try {
    *video_id = j.at("video").get<int>();
    frame.frame_index = j.at("frame").get<int>();
    for (const auto& jd : j.at("detections")) {
      Detection d;
      d.frame_index = frame.frame_index;
      d.class_id = object_class_id(jd.at("class").get<std::string>());
      const auto& box = jd.at("box");
      if (box.size() != 4) fail_at(path, line, "box must have 4 entries");
      for (int k = 0; k < 4; ++k) d.box[static_cast<size_t>(k)] = box[static_cast<size_t>(k)].get<double>();
      d.confidence = jd.at("conf").get<double>();
      frame.detections.push_back(d);
    }
    for (const auto& ji : j.at("interactions")) {
      if (ji.size() != 3) fail_at(path, line, "interaction must be [subject, relation, object]");
      Interaction x;
      x.subject_class = object_class_id(ji[0].get<std::string>());
      const std::string rel = ji[1].get<std::string>();
      if (rel == "idle") fail_at(path, line, "'idle' cannot appear as an edge relation");
      x.relation = relation_class_id(rel);
      x.object_class = object_class_id(ji[2].get<std::string>());
      frame.interactions.push_back(x);
    }
    frame.report = j.at("report").get<std::string>();
  } catch (const DataError& e) {
    fail_at(path, line, e.what());
  } catch (const json::exception& e) {
    fail_at(path, line, e.what());
  }
  try {
    validate_frame(frame, "frame " + std::to_string(frame.frame_index));
  } catch (const DataError& e) {
    fail_at(path, line, e.what());
  }
  return frame;
}

Dataset load_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open '" + path + "'");
  Dataset dataset;
  std::set<int> finished_videos;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      fail_at(path, line_no, std::string("invalid JSON: ") + e.what());
    }
    int video_id = 0;
    AnnotatedFrame frame = parse_frame_json(j, path, line_no, &video_id);
    if (dataset.videos.empty() || dataset.videos.back().id != video_id) {
      if (finished_videos.count(video_id))
        fail_at(path, line_no, "video " + std::to_string(video_id) +
                                   " is not contiguous in the file");
      if (!dataset.videos.empty()) finished_videos.insert(dataset.videos.back().id);
      dataset.videos.push_back({video_id, Split::train, {}});
    }
    auto& frames = dataset.videos.back().frames;
    if (!frames.empty() && frame.frame_index <= frames.back().frame_index)
      fail_at(path, line_no, "frame indices must be strictly increasing within a video");
    frames.push_back(std::move(frame));
  }
  if (dataset.videos.empty()) throw DataError(path + ": no frames");
  return dataset;
}

int video_id_from_dirname(const std::string& name, const std::string& path) {
  std::string digits;
  for (auto it = name.rbegin(); it != name.rend(); ++it) {
    if (std::isdigit(static_cast<unsigned char>(*it))) digits.insert(digits.begin(), *it);
    else if (!digits.empty()) break;
  }
  if (digits.empty())
    throw DataError(path + ": video directory name '" + name +
                    "' carries no numeric id");
  return std::stoi(digits);
}

// Directory layout: one subdirectory per video (name ends in the numeric video
// id), one JSON file per frame:
//   {"frame": N, "objects": [{"name": ..., "bbox": [x,y,w,h],
//    "confidence": 0.9}], "interactions": [[subj, rel, obj]], "caption": ...}
Dataset load_miccai(const std::string& root) {
  namespace fs = std::filesystem;
  if (!fs::is_directory(root)) throw DataError("'" + root + "' is not a directory");

  std::vector<fs::path> video_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) video_dirs.push_back(entry.path());
  std::sort(video_dirs.begin(), video_dirs.end());
  if (video_dirs.empty()) throw DataError("'" + root + "' holds no video directories");

  Dataset dataset;
  for (const auto& dir : video_dirs) {
    Video video;
    video.id = video_id_from_dirname(dir.filename().string(), dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
      if (entry.path().extension() == ".json") files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    for (const auto& file : files) {
      std::ifstream in(file);
      if (!in) throw DataError("cannot open '" + file.string() + "'");
      json j;
      try {
        j = json::parse(in);
      } catch (const json::exception& e) {
        throw DataError(file.string() + ": invalid JSON: " + e.what());
      }
      AnnotatedFrame frame;
      try {
        frame.frame_index = j.at("frame").get<int>();
        for (const auto& jo : j.at("objects")) {
          Detection d;
          d.frame_index = frame.frame_index;
          d.class_id = object_class_id(jo.at("name").get<std::string>());
          const auto& box = jo.at("bbox");
          if (box.size() != 4) throw DataError("bbox must have 4 entries");
          for (int k = 0; k < 4; ++k) d.box[static_cast<size_t>(k)] = box[static_cast<size_t>(k)].get<double>();
          d.confidence = jo.value("confidence", 1.0);
          frame.detections.push_back(d);
        }
        if (j.contains("interactions")) {
          for (const auto& ji : j.at("interactions")) {
            if (ji.size() != 3)
              throw DataError("interaction must be [subject, relation, object]");
            Interaction x;
            x.subject_class = object_class_id(ji[0].get<std::string>());
            const std::string rel = ji[1].get<std::string>();
            if (rel == "idle") throw DataError("'idle' cannot appear as an edge relation");
            x.relation = relation_class_id(rel);
            x.object_class = object_class_id(ji[2].get<std::string>());
            frame.interactions.push_back(x);
          }
        }
        frame.report = j.at("caption").get<std::string>();
        validate_frame(frame, "frame " + std::to_string(frame.frame_index));
      } catch (const json::exception& e) {
        throw DataError(file.string() + ": " + e.what());
      } catch (const DataError& e) {
        throw DataError(file.string() + ": " + e.what());
      }
      video.frames.push_back(std::move(frame));
    }
    std::sort(video.frames.begin(), video.frames.end(),
              [](const auto& a, const auto& b) { return a.frame_index < b.frame_index; });
    for (size_t i = 1; i < video.frames.size(); ++i)
      if (video.frames[i].frame_index == video.frames[i - 1].frame_index)
        throw DataError(dir.string() + ": duplicate frame index " +
                        std::to_string(video.frames[i].frame_index));
    dataset.videos.push_back(std::move(video));
  }
  std::sort(dataset.videos.begin(), dataset.videos.end(),
            [](const auto& a, const auto& b) { return a.id < b.id; });
  validate(dataset);
  return dataset;
}

}  // namespace

Dataset load_dataset(const std::string& path, DatasetFormat format) {
  switch (format) {
    case DatasetFormat::jsonl: return load_jsonl(path);
    case DatasetFormat::miccai_annotations: return load_miccai(path);
  }
  throw UsageError("unhandled dataset format");
}

std::string to_jsonl(const Dataset& dataset) {
  std::ostringstream out;
  for (const auto& video : dataset.videos)
    for (const auto& frame : video.frames)
      out << frame_to_json_line(video.id, frame) << "\n";
  return out.str();
}

void save_jsonl(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write '" + path + "'");
  out << to_jsonl(dataset);
  if (!out) throw DataError("write failed for '" + path + "'");
}

}  // namespace sgr
