#include "leafnet/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "leafnet/rng.hpp"

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace leafnet {

const char* split_name(Split s) {
  switch (s) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
  }
  return "?";
}

Split parse_split(const std::string& name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  throw ManifestError("unknown split \"" + name + "\" (valid: train, val, test)");
}

const char* provenance_name(Provenance p) {
  switch (p) {
    case Provenance::original: return "original";
    case Provenance::flip_h: return "flip_h";
    case Provenance::flip_v: return "flip_v";
    case Provenance::zoom: return "zoom";
    case Provenance::rotate: return "rotate";
  }
  return "?";
}

Provenance parse_provenance(const std::string& name) {
  if (name == "original") return Provenance::original;
  if (name == "flip_h") return Provenance::flip_h;
  if (name == "flip_v") return Provenance::flip_v;
  if (name == "zoom") return Provenance::zoom;
  if (name == "rotate") return Provenance::rotate;
  throw ManifestError("unknown provenance \"" + name + "\"");
}

void SplitRatios::validate() const {
  if (train <= 0 || val <= 0 || test <= 0) {
    throw ManifestError("split ratios must all be positive");
  }
  if (std::abs(train + val + test - 1.0) > 1e-9) {
    throw ManifestError("split ratios must sum to 1");
  }
}

SplitCounts DatasetManifest::count_records() const {
  SplitCounts c;
  for (const auto& r : records) {
    if (r.split == Split::train) ++c.train;
    else if (r.split == Split::val) ++c.val;
    else ++c.test;
  }
  return c;
}

SplitCounts DatasetManifest::count_originals() const {
  SplitCounts c;
  for (const auto& r : records) {
    if (r.provenance != Provenance::original) continue;
    if (r.split == Split::train) ++c.train;
    else if (r.split == Split::val) ++c.val;
    else ++c.test;
  }
  return c;
}

std::vector<std::size_t> DatasetManifest::indices_of(Split s) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (records[i].split == s) out.push_back(i);
  }
  return out;
}

std::string DatasetManifest::to_json() const {
  json j;
  j["version"] = version;
  j["seed"] = seed;
  j["class_names"] = class_names;
  json recs = json::array();
  for (const auto& r : records) {
    recs.push_back({{"path", r.path},
                    {"label", r.label},
                    {"split", split_name(r.split)},
                    {"provenance", provenance_name(r.provenance)}});
  }
  j["records"] = std::move(recs);
  return j.dump(2);
}

DatasetManifest DatasetManifest::from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw ManifestError(std::string("manifest is not valid JSON: ") + e.what());
  }
  DatasetManifest m;
  try {
    m.version = j.at("version").get<int>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.class_names = j.at("class_names").get<std::vector<std::string>>();
    for (const auto& rj : j.at("records")) {
      ImageRecord r;
      r.path = rj.at("path").get<std::string>();
      r.label = rj.at("label").get<int>();
      r.split = parse_split(rj.at("split").get<std::string>());
      r.provenance = parse_provenance(rj.at("provenance").get<std::string>());
      if (r.label < 0 || static_cast<std::size_t>(r.label) >= m.class_names.size()) {
        throw ManifestError("manifest record label " + std::to_string(r.label) + " out of range");
      }
      if (r.provenance != Provenance::original && r.split != Split::train) {
        throw ManifestError("augmented record outside the train split: " + r.path);
      }
      m.records.push_back(std::move(r));
    }
  } catch (const json::exception& e) {
    throw ManifestError(std::string("manifest is missing fields: ") + e.what());
  }
  if (m.version != 1) {
    throw ManifestError("unsupported manifest version " + std::to_string(m.version));
  }
  return m;
}

void DatasetManifest::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ManifestError("cannot write manifest: " + path);
  out << to_json() << "\n";
}

DatasetManifest DatasetManifest::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError("cannot read manifest: " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return from_json(text);
}

ClassSplitCounts split_class_counts(std::size_t class_size, const SplitRatios& ratios) {
  ClassSplitCounts c;
  c.train = static_cast<std::size_t>(std::floor(ratios.train * static_cast<double>(class_size)));
  c.val = static_cast<std::size_t>(std::floor(ratios.val * static_cast<double>(class_size)));
  c.test = static_cast<std::size_t>(std::floor(ratios.test * static_cast<double>(class_size)));
  std::size_t remainder = class_size - (c.train + c.val + c.test);
  // leftovers go train-first, then val, then test
  std::size_t* order[3] = {&c.train, &c.val, &c.test};
  for (std::size_t i = 0; remainder > 0; i = (i + 1) % 3, --remainder) ++*order[i];
  return c;
}

namespace {

bool has_image_extension(const fs::path& p) {
  std::string ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  return ext == ".png" || ext == ".jpg" || ext == ".jpeg";
}

}  // namespace

DatasetManifest scan_and_split(const std::string& root, const SplitRatios& ratios,
                               std::uint64_t seed, bool augment, std::size_t min_per_class) {
  ratios.validate();
  if (!fs::is_directory(root)) {
    throw ManifestError("dataset root is not a directory: " + root);
  }

  // class-per-directory layout: root/<class_name>/<image files>
  std::vector<std::string> class_names;
  for (const auto& entry : fs::directory_iterator(root)) {
    if (entry.is_directory()) class_names.push_back(entry.path().filename().string());
  }
  if (class_names.empty()) {
    throw ManifestError("dataset root has no class directories: " + root);
  }
  std::sort(class_names.begin(), class_names.end());

  DatasetManifest manifest;
  manifest.seed = seed;
  manifest.class_names = class_names;

  Rng rng(seed);
  for (std::size_t label = 0; label < class_names.size(); ++label) {
    std::vector<std::string> files;
    for (const auto& entry : fs::directory_iterator(fs::path(root) / class_names[label])) {
      if (entry.is_regular_file() && has_image_extension(entry.path())) {
        files.push_back(entry.path().string());
      }
    }
    if (files.empty()) {
      throw ManifestError("class directory \"" + class_names[label] + "\" contains no images");
    }
    if (files.size() < min_per_class) {
      throw ManifestError("class \"" + class_names[label] + "\" has only " +
                          std::to_string(files.size()) + " images (minimum " +
                          std::to_string(min_per_class) + ")");
    }
    std::sort(files.begin(), files.end());
    rng.shuffle(files.begin(), files.end());

    const ClassSplitCounts counts = split_class_counts(files.size(), ratios);
    for (std::size_t i = 0; i < files.size(); ++i) {
      Split split = Split::test;
      if (i < counts.train) split = Split::train;
      else if (i < counts.train + counts.val) split = Split::val;
      manifest.records.push_back({files[i], static_cast<int>(label), split, Provenance::original});
      if (augment && split == Split::train) {
        for (Provenance p : {Provenance::flip_h, Provenance::flip_v, Provenance::zoom,
                             Provenance::rotate}) {
          manifest.records.push_back({files[i], static_cast<int>(label), split, p});
        }
      }
    }
  }
  return manifest;
}

}  // namespace leafnet
