#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "lexiscope/corpus.hpp"
#include "lexiscope/error.hpp"
#include "lexiscope/numerics.hpp"

namespace lexiscope {

enum class FeatureKind { kColor, kBovw, kCnn, kTex, kCombi, kVisPca, kCombiPca };

constexpr std::string_view to_string(FeatureKind k) {
  switch (k) {
    case FeatureKind::kColor: return "color";
    case FeatureKind::kBovw: return "bovw";
    case FeatureKind::kCnn: return "cnn";
    case FeatureKind::kTex: return "tex";
    case FeatureKind::kCombi: return "combi";
    case FeatureKind::kVisPca: return "vispca";
    case FeatureKind::kCombiPca: return "combipca";
  }
  return "?";
}

inline std::optional<FeatureKind> parse_feature_kind(std::string_view s) {
  for (auto k : {FeatureKind::kColor, FeatureKind::kBovw, FeatureKind::kCnn, FeatureKind::kTex, FeatureKind::kCombi,
                 FeatureKind::kVisPca, FeatureKind::kCombiPca})
    if (s == to_string(k)) return k;
  return std::nullopt;
}

// A word's visual (or textual) representation: one row per image, in
// manifest order.
struct ImageSet {
  std::string word;
  FeatureKind kind = FeatureKind::kCnn;
  Matrix vectors;

  std::size_t size() const noexcept { return vectors.rows(); }
  std::size_t dim() const noexcept { return vectors.cols(); }
  bool operator==(const ImageSet&) const = default;
};

// One language's side of an experiment. Sets and manifests are keyed by the
// normalized word string; entries of the lexicon that share a string share a
// set.
struct Dataset {
  Lexicon lexicon;
  FeatureKind kind = FeatureKind::kCnn;
  std::map<std::string, ImageSet> sets;
  ManifestTable manifests;

  const ImageSet* find_set(const std::string& word) const {
    auto it = sets.find(word);
    return it == sets.end() ? nullptr : &it->second;
  }

  const ImageSet& set_for(const std::string& word) const {
    const ImageSet* s = find_set(word);
    if (!s) fail(ErrorCode::kUnknownWord, "no image set for '" + word + "' (" + lexicon.language() + ")");
    return *s;
  }

  std::size_t dim() const { return sets.empty() ? 0 : sets.begin()->second.dim(); }

  // Every set has this dataset's kind and one shared dimensionality, and
  // every manifest matches its set's cardinality.
  void validate() const {
    std::optional<std::size_t> d;
    for (const auto& [w, s] : sets) {
      if (s.kind != kind) fail(ErrorCode::kSetMismatch, "set '" + w + "' has kind " + std::string(to_string(s.kind)));
      if (d && s.dim() != *d) fail(ErrorCode::kDimensionMismatch, "set '" + w + "' has dim " + std::to_string(s.dim()));
      d = s.dim();
      auto m = manifests.find(w);
      if (m != manifests.end() && m->second.size() != s.size()) {
        fail(ErrorCode::kCountMismatch, "set '" + w + "' has " + std::to_string(s.size()) + " rows, manifest " +
                                            std::to_string(m->second.size()));
      }
    }
  }
};

// ---------------------------------------------------------------------------
// Cross-lingual deduplication
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxSharedImages = 10;

struct DedupeResult {
  Dataset source;
  Dataset target;
  std::vector<TranslationPair> kept;
  std::vector<TranslationPair> removed;
  std::size_t images_removed_source = 0;
  std::size_t images_removed_target = 0;
};

namespace detail {

inline std::set<Digest> digests_of(const ManifestTable& t) {
  std::set<Digest> out;
  for (const auto& [w, m] : t) out.insert(m.content_hashes.begin(), m.content_hashes.end());
  return out;
}

inline std::size_t prune_shared(Dataset& ds, const std::set<Digest>& shared) {
  std::size_t removed = 0;
  for (auto& [w, m] : ds.manifests) {
    std::vector<bool> keep(m.size());
    ImageManifest pruned{m.word, {}, {}};
    for (std::size_t i = 0; i < m.size(); ++i) {
      keep[i] = !shared.contains(m.content_hashes[i]);
      if (keep[i]) {
        pruned.image_ids.push_back(m.image_ids[i]);
        pruned.content_hashes.push_back(m.content_hashes[i]);
      } else {
        ++removed;
      }
    }
    auto s = ds.sets.find(w);
    if (s != ds.sets.end()) {
      if (s->second.size() != m.size()) fail(ErrorCode::kCountMismatch, "set/manifest size differ for '" + w + "'");
      s->second.vectors = s->second.vectors.select_rows(keep);
    }
    m = std::move(pruned);
  }
  return removed;
}

}  // namespace detail

// Removes from both languages every image whose digest occurs in both, and
// drops each gold pair whose two manifests shared more than ten digests.
// Shared counts come from the manifests before any removal.
inline DedupeResult dedupe_cross_lingual(const Dataset& source, const Dataset& target,
                                         const std::vector<TranslationPair>& pairs) {
  DedupeResult res{source, target, {}, {}, 0, 0};
  for (const auto& p : pairs) {
    std::size_t shared = 0;
    auto sm = source.manifests.find(p.source.word);
    auto tm = target.manifests.find(p.target.word);
    if (sm != source.manifests.end() && tm != target.manifests.end()) {
      const std::set<Digest> s(sm->second.content_hashes.begin(), sm->second.content_hashes.end());
      const std::set<Digest> t(tm->second.content_hashes.begin(), tm->second.content_hashes.end());
      for (const auto& d : s) shared += t.contains(d) ? 1 : 0;
    }
    (shared > kMaxSharedImages ? res.removed : res.kept).push_back(p);
  }

  const auto src = detail::digests_of(source.manifests);
  const auto tgt = detail::digests_of(target.manifests);
  std::set<Digest> both;
  for (const auto& d : src)
    if (tgt.contains(d)) both.insert(d);
  res.images_removed_source = detail::prune_shared(res.source, both);
  res.images_removed_target = detail::prune_shared(res.target, both);
  return res;
}

}  // namespace lexiscope
