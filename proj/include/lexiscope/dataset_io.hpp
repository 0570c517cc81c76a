#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "lexiscope/corpus.hpp"
#include "lexiscope/dataset.hpp"
#include "lexiscope/error.hpp"
#include "lexiscope/features.hpp"
#include "lexiscope/lxfv.hpp"

namespace lexiscope {

// On-disk layout of one language: a word list, a manifest, and a directory
// holding one LXFV file per word (see feature_file_name).
struct DatasetPaths {
  std::string words;
  std::string manifest;
  std::string features;
  std::string language;
};

struct LoadedDataset {
  Dataset dataset;
  std::vector<std::string> missing;  // words without a feature file
};

// Loads every word that has a manifest. Words without a feature file fail
// the load unless `allow_missing` is set, in which case they are skipped and
// listed in `missing`.
inline LoadedDataset load_dataset(const DatasetPaths& paths, FeatureKind kind, bool allow_missing = false) {
  namespace fs = std::filesystem;
  LoadedDataset out;
  auto& ds = out.dataset;
  ds.kind = kind;
  ds.lexicon = load_word_list(paths.words, paths.language);
  ds.manifests = load_manifests(paths.manifest);
  for (const auto& word : ds.lexicon.words()) {
    auto m = ds.manifests.find(word);
    if (m == ds.manifests.end()) continue;
    const fs::path file = fs::path(paths.features) / feature_file_name(word);
    if (!fs::exists(file)) {
      if (!allow_missing) fail(ErrorCode::kIo, "missing feature file " + file.string());
      out.missing.push_back(word);
      continue;
    }
    ds.sets[word] = import_feature_file(file.string(), m->second, kind);
  }
  ds.validate();
  return out;
}

inline void write_feature_sets(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  for (const auto& [word, set] : ds.sets) write_lxfv((fs::path(dir) / feature_file_name(word)).string(), set.vectors);
}

// words.tsv, manifest.tsv and features/ under `dir`.
inline DatasetPaths write_dataset(const Dataset& ds, const std::string& dir) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  DatasetPaths p{(fs::path(dir) / "words.tsv").string(), (fs::path(dir) / "manifest.tsv").string(),
                 (fs::path(dir) / "features").string(), ds.lexicon.language()};
  write_word_list(ds.lexicon, p.words);
  write_manifests(ds.manifests, p.manifest, ds.lexicon.words());
  write_feature_sets(ds, p.features);
  return p;
}

}  // namespace lexiscope
