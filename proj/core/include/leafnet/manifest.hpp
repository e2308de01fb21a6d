#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace leafnet {

class ManifestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Split { train, val, test };

const char* split_name(Split s);
Split parse_split(const std::string& name);

// How a record was derived from its source image. Augmented variants are
// regenerated from the original on the fly; only train records carry them.
enum class Provenance { original, flip_h, flip_v, zoom, rotate };

const char* provenance_name(Provenance p);
Provenance parse_provenance(const std::string& name);

struct ImageRecord {
  std::string path;
  int label = 0;
  Split split = Split::train;
  Provenance provenance = Provenance::original;
};

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  void validate() const;
};

struct SplitCounts {
  std::size_t train = 0, val = 0, test = 0;
};

// The declarative record of dataset contents, labels, splits, and
// augmentation provenance. The JSON form carries exactly
// {version, seed, class_names, records[{path, label, split, provenance}]}.
struct DatasetManifest {
  int version = 1;
  std::uint64_t seed = 0;
  std::vector<std::string> class_names;
  std::vector<ImageRecord> records;

  SplitCounts count_records() const;    // all records per split
  SplitCounts count_originals() const;  // provenance == original only
  std::vector<std::size_t> indices_of(Split s) const;

  std::string to_json() const;
  static DatasetManifest from_json(const std::string& text);

  void save(const std::string& path) const;
  static DatasetManifest load(const std::string& path);
};

// Stratified 80/10/10 split (floor-based per class, remainders assigned in
// train, val, test order), deterministic for a given seed. Classes are the
// sorted subdirectory names of `root`; each must hold at least
// `min_per_class` decodable image files (.png/.jpg/.jpeg). When `augment` is
// set, every train original gains the four derived records.
DatasetManifest scan_and_split(const std::string& root, const SplitRatios& ratios,
                               std::uint64_t seed, bool augment = true,
                               std::size_t min_per_class = 10);

// The split rule on pre-grouped per-class record paths; exposed separately so
// the counting behaviour is testable without a filesystem.
struct ClassSplitCounts {
  std::size_t train = 0, val = 0, test = 0;
};
ClassSplitCounts split_class_counts(std::size_t class_size, const SplitRatios& ratios);

}  // namespace leafnet
