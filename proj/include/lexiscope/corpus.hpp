#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexiscope/error.hpp"
#include "lexiscope/text.hpp"

namespace lexiscope {

enum class Pos { kNoun, kVerb, kAdj };

inline constexpr std::array<Pos, 3> kAllPos = {Pos::kNoun, Pos::kVerb, Pos::kAdj};

constexpr std::string_view to_string(Pos p) {
  switch (p) {
    case Pos::kNoun: return "NOUN";
    case Pos::kVerb: return "VERB";
    case Pos::kAdj: return "ADJ";
  }
  return "?";
}

inline std::optional<Pos> parse_pos(std::string_view s) {
  if (s == "NOUN") return Pos::kNoun;
  if (s == "VERB") return Pos::kVerb;
  if (s == "ADJ") return Pos::kAdj;
  return std::nullopt;
}

struct WordEntry {
  std::string word;  // normalized
  Pos pos = Pos::kNoun;
  std::string language;

  bool operator==(const WordEntry&) const = default;
};

// Word list of one language. Entry order is file order and acts as the
// tie-break order everywhere downstream.
class Lexicon {
 public:
  Lexicon() = default;
  explicit Lexicon(std::string language) : language_(std::move(language)) {}

  const std::string& language() const noexcept { return language_; }
  const std::vector<WordEntry>& entries() const noexcept { return entries_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const WordEntry& operator[](std::size_t i) const { return entries_[i]; }

  void add(std::string word, Pos pos) {
    if (word.empty()) fail(ErrorCode::kMalformedLine, "empty word");
    if (word.find_first_of("\t\n\r") != std::string::npos) fail(ErrorCode::kMalformedLine, "word contains tab or newline");
    if (index_of(word, pos)) fail(ErrorCode::kDuplicateEntry, word + "/" + std::string(to_string(pos)));
    entries_.push_back({std::move(word), pos, language_});
  }

  std::optional<std::size_t> index_of(std::string_view word, Pos pos) const {
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].word == word && entries_[i].pos == pos) return i;
    return std::nullopt;
  }

  std::optional<std::size_t> index_of(const WordEntry& e) const { return index_of(e.word, e.pos); }

  std::vector<std::size_t> indices_of(std::string_view word) const {
    std::vector<std::size_t> out;
    for (std::size_t i = 0; i < entries_.size(); ++i)
      if (entries_[i].word == word) out.push_back(i);
    return out;
  }

  // Distinct word strings in first-appearance order.
  std::vector<std::string> words() const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& e : entries_)
      if (seen.insert(e.word).second) out.push_back(e.word);
    return out;
  }

  bool operator==(const Lexicon&) const = default;

 private:
  std::string language_;
  std::vector<WordEntry> entries_;
};

// `word<TAB>POS` per line.
inline Lexicon load_word_list(const std::string& path, const std::string& language) {
  Lexicon lex(language);
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 2 || trim(fields[0]).empty()) {
      fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "expected word<TAB>POS"));
    }
    const auto pos = parse_pos(trim(fields[1]));
    if (!pos) fail(ErrorCode::kUnknownPos, line_error(path, i + 1, "unknown POS '" + std::string(fields[1]) + "'"));
    auto word = normalize_word(fields[0]);
    if (lex.index_of(word, *pos)) {
      fail(ErrorCode::kDuplicateEntry, line_error(path, i + 1, "duplicate entry '" + word + "'"));
    }
    lex.add(std::move(word), *pos);
  }
  return lex;
}

inline std::string format_word_list(const Lexicon& lex) {
  std::string out;
  for (const auto& e : lex.entries()) out += e.word + "\t" + std::string(to_string(e.pos)) + "\n";
  return out;
}

inline void write_word_list(const Lexicon& lex, const std::string& path) { write_text_file(path, format_word_list(lex)); }

struct TranslationPair {
  WordEntry source;
  WordEntry target;

  bool operator==(const TranslationPair&) const = default;
};

// `source<TAB>target` per line. An optional third POS column selects the
// entries when a word string appears with more than one POS.
inline std::vector<TranslationPair> load_translation_pairs(const std::string& path, const Lexicon& source,
                                                           const Lexicon& target) {
  std::vector<TranslationPair> pairs;
  std::set<std::size_t> seen_sources;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 2 && fields.size() != 3) {
      fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "expected source<TAB>target"));
    }
    std::optional<Pos> want;
    if (fields.size() == 3) {
      want = parse_pos(trim(fields[2]));
      if (!want) fail(ErrorCode::kUnknownPos, line_error(path, i + 1, "unknown POS"));
    }
    const auto sw = normalize_word(fields[0]);
    const auto tw = normalize_word(fields[1]);
    auto si = source.indices_of(sw);
    auto ti = target.indices_of(tw);
    if (si.empty()) fail(ErrorCode::kUnknownWord, line_error(path, i + 1, "source word '" + sw + "' not in word list"));
    if (ti.empty()) fail(ErrorCode::kUnknownWord, line_error(path, i + 1, "target word '" + tw + "' not in word list"));

    std::vector<std::pair<std::size_t, std::size_t>> matches;
    for (auto s : si)
      for (auto t : ti)
        if (source[s].pos == target[t].pos && (!want || source[s].pos == *want)) matches.emplace_back(s, t);
    if (matches.empty()) {
      fail(ErrorCode::kPosMismatch, line_error(path, i + 1, "'" + sw + "' and '" + tw + "' share no POS"));
    }
    if (matches.size() > 1) {
      fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "ambiguous POS for '" + sw + "', add a POS column"));
    }
    const auto [s, t] = matches.front();
    if (!seen_sources.insert(s).second) {
      fail(ErrorCode::kDuplicateSource, line_error(path, i + 1, "source '" + sw + "' already paired"));
    }
    pairs.push_back({source[s], target[t]});
  }
  return pairs;
}

inline std::string format_translation_pairs(const std::vector<TranslationPair>& pairs) {
  std::string out;
  for (const auto& p : pairs)
    out += p.source.word + "\t" + p.target.word + "\t" + std::string(to_string(p.source.pos)) + "\n";
  return out;
}

inline void write_translation_pairs(const std::vector<TranslationPair>& pairs, const std::string& path) {
  write_text_file(path, format_translation_pairs(pairs));
}

// ---------------------------------------------------------------------------
// Image manifests
// ---------------------------------------------------------------------------

using Digest = std::array<std::uint8_t, 32>;

inline constexpr std::size_t kMaxImagesPerWord = 50;

inline std::string to_hex(const Digest& d) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto b : d) {
    out.push_back(kHex[b >> 4]);
    out.push_back(kHex[b & 0xf]);
  }
  return out;
}

inline std::optional<Digest> parse_hex_digest(std::string_view s) {
  if (s.size() != 64) return std::nullopt;
  auto nibble = [](char c) -> int {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
  };
  Digest d{};
  for (std::size_t i = 0; i < 32; ++i) {
    const int hi = nibble(s[2 * i]);
    const int lo = nibble(s[2 * i + 1]);
    if (hi < 0 || lo < 0) return std::nullopt;
    d[i] = static_cast<std::uint8_t>(hi * 16 + lo);
  }
  return d;
}

struct ImageManifest {
  std::string word;
  std::vector<std::string> image_ids;
  std::vector<Digest> content_hashes;

  std::size_t size() const noexcept { return image_ids.size(); }
  bool operator==(const ImageManifest&) const = default;
};

using ManifestTable = std::map<std::string, ImageManifest>;

// `word<TAB>image_id<TAB>hex_digest`, rows grouped by word.
inline ManifestTable load_manifests(const std::string& path) {
  ManifestTable table;
  std::string current;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto fields = split(lines[i], '\t');
    if (fields.size() != 3) fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "expected word<TAB>image_id<TAB>digest"));
    auto word = normalize_word(fields[0]);
    const std::string id(trim(fields[1]));
    const auto digest = parse_hex_digest(trim(fields[2]));
    if (word.empty() || id.empty()) fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "empty field"));
    if (!digest) fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "digest is not 64 hex characters"));
    if (word != current && table.contains(word)) {
      fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "rows for '" + word + "' are not contiguous"));
    }
    current = word;
    auto& m = table[word];
    m.word = word;
    if (std::find(m.image_ids.begin(), m.image_ids.end(), id) != m.image_ids.end()) {
      fail(ErrorCode::kDuplicateEntry, line_error(path, i + 1, "duplicate image id '" + id + "'"));
    }
    if (m.size() == kMaxImagesPerWord) {
      fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "more than 50 images for '" + word + "'"));
    }
    m.image_ids.push_back(id);
    m.content_hashes.push_back(*digest);
  }
  return table;
}

// Rows are written in `order`; manifests for words not in `order` follow
// in key order.
inline std::string format_manifests(const ManifestTable& table, const std::vector<std::string>& order = {}) {
  std::string out;
  std::set<std::string> done;
  auto emit = [&](const ImageManifest& m) {
    for (std::size_t i = 0; i < m.size(); ++i) out += m.word + "\t" + m.image_ids[i] + "\t" + to_hex(m.content_hashes[i]) + "\n";
  };
  for (const auto& w : order) {
    auto it = table.find(w);
    if (it != table.end() && done.insert(w).second) emit(it->second);
  }
  for (const auto& [w, m] : table)
    if (!done.contains(w)) emit(m);
  return out;
}

inline void write_manifests(const ManifestTable& table, const std::string& path, const std::vector<std::string>& order = {}) {
  write_text_file(path, format_manifests(table, order));
}

// ---------------------------------------------------------------------------
// Two-fold split
// ---------------------------------------------------------------------------

struct Folds {
  std::vector<TranslationPair> a;
  std::vector<TranslationPair> b;
};

// POS-stratified split: each POS group is shuffled with the seeded engine,
// the groups are concatenated NOUN, VERB, ADJ, and items are dealt
// alternately to fold A and fold B. Folds keep input order internally.
inline Folds split_two_folds(const std::vector<TranslationPair>& pairs, std::uint64_t seed) {
  if (pairs.size() < 2) fail(ErrorCode::kTooFewPairs, "need at least 2 pairs, got " + std::to_string(pairs.size()));
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order;
  for (Pos p : kAllPos) {
    std::vector<std::size_t> group;
    for (std::size_t i = 0; i < pairs.size(); ++i)
      if (pairs[i].source.pos == p) group.push_back(i);
    std::shuffle(group.begin(), group.end(), rng);
    order.insert(order.end(), group.begin(), group.end());
  }
  std::vector<std::size_t> ia, ib;
  for (std::size_t k = 0; k < order.size(); ++k) (k % 2 == 0 ? ia : ib).push_back(order[k]);
  std::sort(ia.begin(), ia.end());
  std::sort(ib.begin(), ib.end());
  Folds f;
  for (auto i : ia) f.a.push_back(pairs[i]);
  for (auto i : ib) f.b.push_back(pairs[i]);
  return f;
}

}  // namespace lexiscope
