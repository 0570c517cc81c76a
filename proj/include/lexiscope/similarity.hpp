#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "lexiscope/corpus.hpp"
#include "lexiscope/dataset.hpp"
#include "lexiscope/error.hpp"
#include "lexiscope/numerics.hpp"
#include "lexiscope/parallel.hpp"
#include "lexiscope/text.hpp"

namespace lexiscope {

enum class SimilarityMethod { kAvgMax, kMaxMax, kSetMean, kSetMax };

inline constexpr std::array<SimilarityMethod, 4> kAllSimilarityMethods = {
    SimilarityMethod::kAvgMax, SimilarityMethod::kMaxMax, SimilarityMethod::kSetMean, SimilarityMethod::kSetMax};

constexpr std::string_view to_string(SimilarityMethod m) {
  switch (m) {
    case SimilarityMethod::kAvgMax: return "avgmax";
    case SimilarityMethod::kMaxMax: return "maxmax";
    case SimilarityMethod::kSetMean: return "setmean";
    case SimilarityMethod::kSetMax: return "setmax";
  }
  return "?";
}

inline std::optional<SimilarityMethod> parse_similarity_method(std::string_view s) {
  for (auto m : kAllSimilarityMethods)
    if (s == to_string(m)) return m;
  return std::nullopt;
}

struct Candidate {
  WordEntry target;
  double score = 0.0;
};

// Candidates for one source word, best first. `method` names what produced
// the list; `single_prediction` marks KNN-style output with only a top-1.
struct RankedList {
  WordEntry source;
  std::vector<Candidate> candidates;
  std::string method;
  bool single_prediction = false;

  // 1-based position of `target`, if present.
  std::optional<std::size_t> rank_of(const WordEntry& target) const {
    for (std::size_t i = 0; i < candidates.size(); ++i)
      if (candidates[i].target == target) return i + 1;
    return std::nullopt;
  }
};

// ---------------------------------------------------------------------------
// Set preparation
// ---------------------------------------------------------------------------

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Unit-normalized rows plus the component-wise mean and max of the raw rows.
// Zero rows stay zero, so their cosine with anything is 0.
struct PreparedSet {
  RowMatrix unit;
  Vector mean;
  Vector max;
  FeatureKind kind = FeatureKind::kCnn;

  std::size_t size() const { return static_cast<std::size_t>(unit.rows()); }
  std::size_t dim() const { return mean.size(); }
};

inline PreparedSet prepare(const ImageSet& s) {
  if (s.size() == 0) fail(ErrorCode::kEmptySet, "image set for '" + s.word + "' is empty");
  PreparedSet p;
  p.kind = s.kind;
  p.unit.resize(static_cast<Eigen::Index>(s.size()), static_cast<Eigen::Index>(s.dim()));
  for (std::size_t i = 0; i < s.size(); ++i) {
    auto r = s.vectors.row(i);
    const double n = l2_norm(r);
    for (std::size_t j = 0; j < r.size(); ++j)
      p.unit(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = n == 0.0 ? 0.0 : r[j] / n;
  }
  p.mean = column_mean(s.vectors);
  p.max = column_max(s.vectors);
  return p;
}

namespace detail {

inline void check_compatible(const PreparedSet& a, const PreparedSet& b) {
  require_same_dim(a.dim(), b.dim(), "set_similarity");
  if (a.kind != b.kind) {
    fail(ErrorCode::kSetMismatch, "feature kinds " + std::string(to_string(a.kind)) + " and " + std::string(to_string(b.kind)));
  }
}

inline RowMatrix cosine_table(const PreparedSet& a, const PreparedSet& b) {
  RowMatrix t = a.unit * b.unit.transpose();
  return t.cwiseMax(-1.0).cwiseMin(1.0);
}

}  // namespace detail

inline double set_similarity(const PreparedSet& a, const PreparedSet& b, SimilarityMethod method) {
  detail::check_compatible(a, b);
  switch (method) {
    case SimilarityMethod::kAvgMax: {
      // direction is source (a) to target (b)
      const RowMatrix t = detail::cosine_table(a, b);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < t.rows(); ++i) sum += t.row(i).maxCoeff();
      return sum / static_cast<double>(t.rows());
    }
    case SimilarityMethod::kMaxMax:
      return detail::cosine_table(a, b).maxCoeff();
    case SimilarityMethod::kSetMean:
      return cosine_similarity(a.mean, b.mean);
    case SimilarityMethod::kSetMax:
      return cosine_similarity(a.max, b.max);
  }
  return 0.0;
}

inline double set_similarity(const ImageSet& a, const ImageSet& b, SimilarityMethod method) {
  if (a.size() == 0 || b.size() == 0) fail(ErrorCode::kEmptySet, "set similarity with an empty set");
  require_same_dim(a.dim(), b.dim(), "set_similarity");
  return set_similarity(prepare(a), prepare(b), method);
}

// Target side of a ranking: the lexicon entries that have an image set, in
// lexicon order, with their prepared sets.
struct PreparedTargets {
  std::vector<WordEntry> entries;
  std::vector<std::size_t> set_index;  // entries[i] uses sets[set_index[i]]
  std::vector<PreparedSet> sets;
};

inline PreparedTargets prepare_targets(const Dataset& targets, std::size_t threads = 1) {
  PreparedTargets out;
  std::map<std::string, std::size_t> slot;
  std::vector<const ImageSet*> raw;
  for (const auto& e : targets.lexicon.entries()) {
    const ImageSet* s = targets.find_set(e.word);
    if (!s) continue;
    auto [it, inserted] = slot.emplace(e.word, raw.size());
    if (inserted) raw.push_back(s);
    out.entries.push_back(e);
    out.set_index.push_back(it->second);
  }
  out.sets.resize(raw.size());
  parallel_for(raw.size(), threads, [&](std::size_t i) { out.sets[i] = prepare(*raw[i]); });
  return out;
}

namespace detail {

inline RankedList sort_ranking(const WordEntry& source, std::vector<Candidate> cands, std::string method) {
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  return {source, std::move(cands), std::move(method), false};
}

}  // namespace detail

inline RankedList rank_translations(const WordEntry& source, const PreparedSet& source_set, const PreparedTargets& targets,
                                    SimilarityMethod method) {
  std::vector<Candidate> cands;
  cands.reserve(targets.entries.size());
  for (std::size_t i = 0; i < targets.entries.size(); ++i)
    cands.push_back({targets.entries[i], set_similarity(source_set, targets.sets[targets.set_index[i]], method)});
  return detail::sort_ranking(source, std::move(cands), std::string(to_string(method)));
}

// Scores every target word and sorts descending; equal scores keep target
// lexicon order.
inline RankedList rank_translations(const WordEntry& source, const ImageSet& source_set, const Dataset& targets,
                                    SimilarityMethod method) {
  return rank_translations(source, prepare(source_set), prepare_targets(targets), method);
}

// ---------------------------------------------------------------------------
// Nearest-neighbor voting
// ---------------------------------------------------------------------------

struct KnnResult {
  WordEntry word;
  std::size_t votes = 0;                 // votes (KNN) or clusters won (KNN-C) for `word`
  std::vector<std::size_t> vote_counts;  // per PreparedTargets entry
};

namespace detail {

// Each source row votes for the entry owning its most cosine-similar target
// image; ties go to the earliest (entry, image).
inline std::vector<std::size_t> knn_votes(const RowMatrix& source_unit, const PreparedTargets& targets) {
  if (targets.entries.empty()) fail(ErrorCode::kEmptySet, "no target image sets");
  const auto n = source_unit.rows();
  std::vector<double> best(static_cast<std::size_t>(n), -std::numeric_limits<double>::infinity());
  std::vector<std::size_t> owner(static_cast<std::size_t>(n), 0);
  for (std::size_t e = 0; e < targets.entries.size(); ++e) {
    const auto& ts = targets.sets[targets.set_index[e]];
    const RowMatrix t = (source_unit * ts.unit.transpose()).cwiseMax(-1.0).cwiseMin(1.0);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double m = t.row(i).maxCoeff();
      if (m > best[static_cast<std::size_t>(i)]) {
        best[static_cast<std::size_t>(i)] = m;
        owner[static_cast<std::size_t>(i)] = e;
      }
    }
  }
  std::vector<std::size_t> votes(targets.entries.size(), 0);
  for (auto o : owner) ++votes[o];
  return votes;
}

// Mean cosine distance over all (source image, candidate image) pairs.
inline double mean_cross_distance(const RowMatrix& source_unit, const PreparedSet& cand) {
  const RowMatrix t = (source_unit * cand.unit.transpose()).cwiseMax(-1.0).cwiseMin(1.0);
  return 1.0 - t.mean();
}

inline constexpr double kDistanceTieTolerance = 1e-12;

// Candidates with the highest primary count, then the highest secondary
// count, then the smallest mean cross distance; remaining ties go to the
// earliest entry. Distances within kDistanceTieTolerance count as equal so
// rounding noise cannot reorder mathematically tied candidates.
inline std::size_t pick_winner(const std::vector<std::size_t>& primary, const std::vector<std::size_t>& secondary,
                               const RowMatrix& source_unit, const PreparedTargets& targets) {
  const std::size_t top = *std::max_element(primary.begin(), primary.end());
  std::vector<std::size_t> tied;
  for (std::size_t i = 0; i < primary.size(); ++i)
    if (primary[i] == top) tied.push_back(i);
  if (tied.size() > 1) {
    std::size_t top2 = 0;
    for (auto i : tied) top2 = std::max(top2, secondary[i]);
    std::erase_if(tied, [&](std::size_t i) { return secondary[i] != top2; });
  }
  if (tied.size() == 1) return tied.front();
  std::size_t winner = tied.front();
  double best = std::numeric_limits<double>::infinity();
  for (auto i : tied) {
    const double d = mean_cross_distance(source_unit, targets.sets[targets.set_index[i]]);
    if (d < best - kDistanceTieTolerance) {
      best = d;
      winner = i;
    }
  }
  return winner;
}

inline void check_knn_inputs(const PreparedSet& source_set, const PreparedTargets& targets) {
  if (targets.entries.empty()) fail(ErrorCode::kEmptySet, "no target image sets");
  for (const auto& s : targets.sets) check_compatible(source_set, s);
}

}  // namespace detail

// KNN: majority vote of per-image nearest neighbors over all target images.
// Vote ties go to the tied word with the smallest mean cosine distance to the
// source images.
inline KnnResult knn_translate(const PreparedSet& source_set, const PreparedTargets& targets) {
  detail::check_knn_inputs(source_set, targets);
  auto votes = detail::knn_votes(source_set.unit, targets);
  const auto w = detail::pick_winner(votes, votes, source_set.unit, targets);
  return {targets.entries[w], votes[w], std::move(votes)};
}

inline KnnResult knn_translate(const ImageSet& source_set, const Dataset& targets) {
  return knn_translate(prepare(source_set), prepare_targets(targets));
}

// KNN-C: k-means over the source images, KNN inside each cluster, and the
// word winning the most clusters. Ties: total votes across clusters, then
// mean cosine distance to the whole source set.
inline KnnResult knn_cluster_translate(const ImageSet& source_set, const PreparedTargets& targets, std::size_t k,
                                       std::uint64_t seed) {
  if (k == 0) fail(ErrorCode::kBadConfig, "KNN-C needs k >= 1");
  if (source_set.size() < k) {
    fail(ErrorCode::kTooFewImages, "'" + source_set.word + "' has " + std::to_string(source_set.size()) + " images for k=" + std::to_string(k));
  }
  const PreparedSet whole = prepare(source_set);
  detail::check_knn_inputs(whole, targets);
  const auto km = kmeans(source_set.vectors, k, seed);

  std::vector<std::size_t> clusters_won(targets.entries.size(), 0);
  std::vector<std::size_t> total_votes(targets.entries.size(), 0);
  for (std::size_t c = 0; c < k; ++c) {
    std::vector<Eigen::Index> members;
    for (std::size_t i = 0; i < km.assignments.size(); ++i)
      if (km.assignments[i] == c) members.push_back(static_cast<Eigen::Index>(i));
    if (members.empty()) continue;
    RowMatrix sub(static_cast<Eigen::Index>(members.size()), whole.unit.cols());
    for (std::size_t r = 0; r < members.size(); ++r) sub.row(static_cast<Eigen::Index>(r)) = whole.unit.row(members[r]);
    const auto votes = detail::knn_votes(sub, targets);
    for (std::size_t e = 0; e < votes.size(); ++e) total_votes[e] += votes[e];
    ++clusters_won[detail::pick_winner(votes, votes, sub, targets)];
  }
  const auto w = detail::pick_winner(clusters_won, total_votes, whole.unit, targets);
  return {targets.entries[w], clusters_won[w], std::move(clusters_won)};
}

inline KnnResult knn_cluster_translate(const ImageSet& source_set, const Dataset& targets, std::size_t k, std::uint64_t seed) {
  return knn_cluster_translate(source_set, prepare_targets(targets), k, seed);
}

inline RankedList prediction_list(const WordEntry& source, const KnnResult& r, std::size_t denominator, std::string method) {
  const double score = denominator == 0 ? 0.0 : static_cast<double>(r.votes) / static_cast<double>(denominator);
  return {source, {{r.word, score}}, std::move(method), true};
}

// ---------------------------------------------------------------------------
// Batch scoring
// ---------------------------------------------------------------------------

struct SimilarityMatrix {
  std::vector<WordEntry> sources;  // rows
  std::vector<WordEntry> targets;  // columns
  Matrix scores;
  SimilarityMethod method = SimilarityMethod::kAvgMax;

  RankedList ranking(std::size_t row) const {
    std::vector<Candidate> cands;
    cands.reserve(targets.size());
    for (std::size_t j = 0; j < targets.size(); ++j) cands.push_back({targets[j], scores(row, j)});
    return detail::sort_ranking(sources[row], std::move(cands), std::string(to_string(method)));
  }
};

// Entry (s, t) == set_similarity(s, t). Rows are computed independently, so
// the result does not depend on `threads`.
inline SimilarityMatrix similarity_matrix(const Dataset& sources, const Dataset& targets, SimilarityMethod method,
                                          std::size_t threads = 1) {
  const PreparedTargets pt = prepare_targets(targets, threads);
  const PreparedTargets ps = prepare_targets(sources, threads);
  SimilarityMatrix out{ps.entries, pt.entries, Matrix(ps.entries.size(), pt.entries.size()), method};
  parallel_for(ps.entries.size(), threads, [&](std::size_t i) {
    const PreparedSet& s = ps.sets[ps.set_index[i]];
    auto row = out.scores.row(i);
    for (std::size_t j = 0; j < pt.entries.size(); ++j) row[j] = set_similarity(s, pt.sets[pt.set_index[j]], method);
  });
  return out;
}

// ---------------------------------------------------------------------------
// Ranking TSV: source<TAB>rank<TAB>target<TAB>score
// ---------------------------------------------------------------------------

inline std::string format_rankings(const std::vector<RankedList>& lists) {
  std::string out;
  for (const auto& l : lists)
    for (std::size_t i = 0; i < l.candidates.size(); ++i)
      out += l.source.word + "\t" + std::to_string(i + 1) + "\t" + l.candidates[i].target.word + "\t" +
             format_fixed(l.candidates[i].score, 9) + "\n";
  return out;
}

namespace detail {

// Resolves the k-th occurrence of `word` to the k-th lexicon entry with that
// word string. Entries sharing a string share a set, score identically, and
// therefore appear in lexicon order.
class OccurrenceResolver {
 public:
  explicit OccurrenceResolver(const Lexicon& lex) : lex_(lex) {}

  std::optional<WordEntry> next(const std::string& word) {
    const auto idx = lex_.indices_of(word);
    auto& k = seen_[word];
    if (k >= idx.size()) return std::nullopt;
    return lex_[idx[k++]];
  }

 private:
  const Lexicon& lex_;
  std::map<std::string, std::size_t> seen_;
};

}  // namespace detail

// Parses ranking TSV. Consecutive lines with the same source word and
// increasing rank form one list. A file whose lists all hold exactly one
// candidate, while the target lexicon holds more, is KNN-style output.
inline std::vector<RankedList> parse_rankings(const std::string& path, const Lexicon& source, const Lexicon& target,
                                              const std::string& method = {}) {
  std::vector<RankedList> lists;
  detail::OccurrenceResolver src(source);
  std::optional<detail::OccurrenceResolver> tgt;
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (trim(lines[i]).empty()) continue;
    const auto f = split(lines[i], '\t');
    if (f.size() != 4) fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "expected source<TAB>rank<TAB>target<TAB>score"));
    const std::string sw = normalize_word(f[0]);
    const std::string tw = normalize_word(f[2]);
    std::size_t rank = 0;
    auto [p, ec] = std::from_chars(f[1].data(), f[1].data() + f[1].size(), rank);
    if (ec != std::errc() || p != f[1].data() + f[1].size() || rank == 0) {
      fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "bad rank"));
    }
    double score = 0.0;
    auto [q, ec2] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), score);
    if (ec2 != std::errc() || q != f[3].data() + f[3].size()) fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "bad score"));

    const bool continues = !lists.empty() && lists.back().source.word == sw && rank == lists.back().candidates.size() + 1;
    if (!continues) {
      if (rank != 1) fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "list must start at rank 1"));
      auto se = src.next(sw);
      if (!se) fail(ErrorCode::kUnknownWord, line_error(path, i + 1, "source word '" + sw + "' not in word list"));
      lists.push_back({*se, {}, method, false});
      tgt.emplace(target);
    }
    auto te = tgt->next(tw);
    if (!te) fail(ErrorCode::kUnknownWord, line_error(path, i + 1, "target word '" + tw + "' not in word list"));
    lists.back().candidates.push_back({*te, score});
  }
  const bool single = !lists.empty() && target.size() > 1 &&
                      std::all_of(lists.begin(), lists.end(), [](const RankedList& l) { return l.candidates.size() == 1; });
  for (auto& l : lists) l.single_prediction = single;
  return lists;
}

}  // namespace lexiscope
