#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace sgr {

// ---------------------------------------------------------------------------
// Closed class vocabularies: one tissue (kidney) plus eight instruments, and
// eleven interactive relations plus the distinguished `idle`, which only ever
// appears in report text, never as an edge relation.
// ---------------------------------------------------------------------------

struct ObjectClass {
  int id = 0;
  std::string name;
  bool is_tissue = false;
};

struct RelationClass {
  int id = 0;
  std::string name;
};

constexpr int kNumObjectClasses = 9;
constexpr int kKidneyClassId = 0;
constexpr int kNumInteractiveRelations = 11;
constexpr int kIdleRelationId = 11;

const std::vector<ObjectClass>& object_classes();
const std::vector<RelationClass>& relation_classes();  // 11 interactive + idle

const ObjectClass& object_class(int id);
const RelationClass& relation_class(int id);
int object_class_id(const std::string& name);    // throws DataError if unknown
int relation_class_id(const std::string& name);  // throws DataError if unknown

// ---------------------------------------------------------------------------
// Frame-level data
// ---------------------------------------------------------------------------

struct Detection {
  int frame_index = 0;
  int class_id = 0;
  std::array<double, 4> box{};  // x, y, w, h, normalized to the unit square
  double confidence = 1.0;

  bool operator==(const Detection&) const = default;
};

struct Interaction {
  int subject_class = 0;
  int relation = 0;  // never kIdleRelationId
  int object_class = 0;

  bool operator==(const Interaction&) const = default;
};

struct AnnotatedFrame {
  int frame_index = 0;
  std::vector<Detection> detections;
  std::vector<Interaction> interactions;
  std::string report;

  bool operator==(const AnnotatedFrame&) const = default;
};

// Interaction endpoints with no matching detection in the frame (e.g. a
// kidney the detector missed). Sorted, deduplicated class ids.
std::vector<int> missing_interaction_classes(const AnnotatedFrame& frame);

enum class Split { train, val };

struct Video {
  int id = 0;
  Split split = Split::train;
  std::vector<AnnotatedFrame> frames;

  bool operator==(const Video&) const = default;
};

struct Dataset {
  std::vector<Video> videos;

  size_t frame_count() const;
  bool operator==(const Dataset&) const = default;
};

// Throws DataError when a type invariant is violated (boxes outside the unit
// square, non-increasing frame indices, empty reports, ...).
void validate(const Dataset& dataset);

// Marks the listed video ids as the validation split, everything else train.
void assign_splits(Dataset& dataset, const std::vector<int>& val_video_ids);

// Holdout convention: whole videos, the 1st, 5th and 6th by position when
// available, else the first video.
std::vector<int> default_val_videos(const Dataset& dataset);

// ---------------------------------------------------------------------------
// Text normalization and vocabulary
// ---------------------------------------------------------------------------

// Lowercases ASCII letters, strips the ASCII punctuation set
// !"#$%&'()*+,-./:;<=>?@[\]^_`{|}~ and splits on runs of whitespace.
std::vector<std::string> normalize_text(const std::string& report);

struct Vocabulary {
  static constexpr int kPad = 0;
  static constexpr int kBos = 1;
  static constexpr int kEos = 2;
  static constexpr int kUnk = 3;

  std::vector<std::string> id_to_token;  // includes the 4 reserved tokens
  std::map<std::string, int> token_to_id;

  int size() const { return static_cast<int>(id_to_token.size()); }
  int id_of(const std::string& token) const;  // kUnk when absent
  const std::string& token(int id) const;

  std::vector<int> encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const std::vector<int>& ids) const;  // skips reserved

  bool operator==(const Vocabulary&) const = default;
};

// Tokens ordered by first occurrence over the train split's normalized
// reports; ids 0..3 are reserved. Throws DataError when there are no reports.
Vocabulary build_vocab(const Dataset& dataset);

// ---------------------------------------------------------------------------
// Synthetic scene grammar
// ---------------------------------------------------------------------------

struct SyntheticConfig {
  int num_videos = 1;
  int frames_per_video = 3;  // >= 3
  std::uint64_t seed = 0;
  double node_dropout_rate = 0.0;  // in [0, 0.5]; kidney detection dropout
};

// Deterministic under a fixed seed. Every frame logically contains the kidney
// (its detection may be dropped to exercise tracking), 1-3 instruments, and
// 0-2 interactions that are a pure function of the generated geometry, so the
// report is predictable from the detections.
Dataset generate_synthetic(const SyntheticConfig& config);

// Report text for one frame under the fixed template grammar: interaction
// clauses sorted by instrument class id, then idle instruments by class id,
// clauses joined with ". ".
std::string frame_report(const std::vector<int>& instrument_classes,
                         const std::vector<Interaction>& interactions);

// ---------------------------------------------------------------------------
// Serialization
// ---------------------------------------------------------------------------

enum class DatasetFormat { jsonl, miccai_annotations };
DatasetFormat parse_format(const std::string& name);  // throws UsageError

// One frame object per line; floats carry 17 significant digits so a
// round-trip is exact. Unparseable frames raise a line-numbered DataError.
Dataset load_dataset(const std::string& path, DatasetFormat format);
std::string to_jsonl(const Dataset& dataset);
void save_jsonl(const Dataset& dataset, const std::string& path);

}  // namespace sgr
