#pragma once

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lexiscope/corpus.hpp"
#include "lexiscope/dataset.hpp"
#include "lexiscope/error.hpp"
#include "lexiscope/numerics.hpp"
#include "lexiscope/similarity.hpp"
#include "lexiscope/text.hpp"

namespace lexiscope {

enum class Setting { kAll, kNn, kVb, kAdj };

inline constexpr std::array<Setting, 4> kAllSettings = {Setting::kAll, Setting::kNn, Setting::kVb, Setting::kAdj};

constexpr std::string_view to_string(Setting s) {
  switch (s) {
    case Setting::kAll: return "ALL";
    case Setting::kNn: return "NN";
    case Setting::kVb: return "VB";
    case Setting::kAdj: return "ADJ";
  }
  return "?";
}

constexpr bool setting_includes(Setting s, Pos p) {
  switch (s) {
    case Setting::kAll: return true;
    case Setting::kNn: return p == Pos::kNoun;
    case Setting::kVb: return p == Pos::kVerb;
    case Setting::kAdj: return p == Pos::kAdj;
  }
  return false;
}

inline constexpr std::array<std::size_t, 2> kReportedPrecision = {1, 10};

// Metrics of one setting. An absent metric means "no data", which is
// different from a score of 0.
struct SettingMetrics {
  std::size_t num_words = 0;
  std::size_t oov_excluded = 0;
  std::optional<double> mrr;
  std::map<std::size_t, double> p_at;

  std::optional<double> precision(std::size_t k) const {
    auto it = p_at.find(k);
    return it == p_at.end() ? std::nullopt : std::optional<double>(it->second);
  }
};

struct EvalReport {
  std::map<Setting, SettingMetrics> settings;

  const SettingMetrics& at(Setting s) const { return settings.at(s); }
};

// ---------------------------------------------------------------------------
// Ranking metrics
// ---------------------------------------------------------------------------

namespace detail {

inline const TranslationPair& gold_for(const RankedList& r, const std::vector<TranslationPair>& gold) {
  const TranslationPair* found = nullptr;
  for (const auto& g : gold) {
    if (g.source == r.source) {
      if (found) fail(ErrorCode::kDuplicateSource, "'" + r.source.word + "' has more than one gold target");
      found = &g;
    }
  }
  if (!found) fail(ErrorCode::kMissingGold, "no gold translation for '" + r.source.word + "'");
  return *found;
}

// Rank of the gold target; nullopt only for a missed single prediction.
inline std::optional<std::size_t> gold_rank(const RankedList& r, const std::vector<TranslationPair>& gold) {
  const auto& g = gold_for(r, gold);
  const auto rank = r.rank_of(g.target);
  if (!rank && !r.single_prediction) {
    fail(ErrorCode::kGoldNotInCandidates, "gold '" + g.target.word + "' for '" + r.source.word + "' is not among the candidates");
  }
  return rank;
}

}  // namespace detail

// (1/M) * sum of 1/rank over the M rankings.
inline double mrr(const std::vector<RankedList>& rankings, const std::vector<TranslationPair>& gold) {
  if (rankings.empty()) fail(ErrorCode::kMissingGold, "no rankings to evaluate");
  double sum = 0.0;
  for (const auto& r : rankings) {
    if (r.single_prediction) fail(ErrorCode::kBadConfig, "MRR is undefined for single-prediction output");
    sum += 1.0 / static_cast<double>(*detail::gold_rank(r, gold));
  }
  return sum / static_cast<double>(rankings.size());
}

inline double precision_at_k(const std::vector<RankedList>& rankings, const std::vector<TranslationPair>& gold, std::size_t k) {
  if (k == 0) fail(ErrorCode::kBadConfig, "precision_at_k needs k >= 1");
  if (rankings.empty()) fail(ErrorCode::kMissingGold, "no rankings to evaluate");
  std::size_t hits = 0;
  for (const auto& r : rankings) {
    const auto rank = detail::gold_rank(r, gold);
    if (rank && *rank <= k) ++hits;
  }
  return static_cast<double>(hits) / static_cast<double>(rankings.size());
}

// Splits the rankings by the POS of their source word and scores each
// setting. Rankings whose source has no gold pair are ignored; gold pairs
// that have no ranking are counted as OOV-excluded. Single-prediction lists
// only get P@1.
inline EvalReport per_setting_report(const std::vector<RankedList>& rankings, const std::vector<TranslationPair>& gold,
                                     const Lexicon& source_lexicon) {
  EvalReport report;
  for (auto s : kAllSettings) {
    SettingMetrics m;
    std::vector<RankedList> subset;
    for (const auto& r : rankings) {
      if (!setting_includes(s, r.source.pos)) continue;
      if (!source_lexicon.index_of(r.source)) fail(ErrorCode::kUnknownWord, "'" + r.source.word + "' not in source word list");
      const bool has_gold = std::any_of(gold.begin(), gold.end(), [&](const TranslationPair& g) { return g.source == r.source; });
      if (has_gold) subset.push_back(r);
    }
    for (const auto& g : gold) {
      if (!setting_includes(s, g.source.pos)) continue;
      const bool ranked = std::any_of(rankings.begin(), rankings.end(), [&](const RankedList& r) { return r.source == g.source; });
      if (!ranked) ++m.oov_excluded;
    }
    m.num_words = subset.size();
    if (!subset.empty()) {
      const bool single = std::any_of(subset.begin(), subset.end(), [](const RankedList& r) { return r.single_prediction; });
      if (single) {
        m.p_at[1] = precision_at_k(subset, gold, 1);
      } else {
        m.mrr = mrr(subset, gold);
        for (auto k : kReportedPrecision) m.p_at[k] = precision_at_k(subset, gold, k);
      }
    }
    report.settings[s] = m;
  }
  return report;
}

// Per-setting mean over the reports in which a metric is present; word
// counts are summed.
inline EvalReport average_reports(const std::vector<EvalReport>& reports) {
  EvalReport out;
  for (auto s : kAllSettings) {
    SettingMetrics m;
    double mrr_sum = 0.0;
    std::size_t mrr_n = 0;
    std::map<std::size_t, std::pair<double, std::size_t>> p_sum;
    for (const auto& r : reports) {
      auto it = r.settings.find(s);
      if (it == r.settings.end()) continue;
      const auto& sm = it->second;
      m.num_words += sm.num_words;
      m.oov_excluded += sm.oov_excluded;
      if (sm.mrr) {
        mrr_sum += *sm.mrr;
        ++mrr_n;
      }
      for (auto [k, v] : sm.p_at) {
        p_sum[k].first += v;
        ++p_sum[k].second;
      }
    }
    if (mrr_n) m.mrr = mrr_sum / static_cast<double>(mrr_n);
    for (auto [k, sv] : p_sum) m.p_at[k] = sv.first / static_cast<double>(sv.second);
    out.settings[s] = m;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Image dispersion
// ---------------------------------------------------------------------------

// Mean pairwise cosine distance within the set.
inline double image_dispersion(const ImageSet& set) {
  const std::size_t n = set.size();
  if (n < 2) fail(ErrorCode::kTooFewImages, "dispersion of '" + set.word + "' needs >= 2 images");
  double sum = 0.0;
  for (std::size_t j = 1; j < n; ++j)
    for (std::size_t k = 0; k < j; ++k) sum += 1.0 - cosine_similarity(set.vectors.row(j), set.vectors.row(k));
  return 2.0 * sum / (static_cast<double>(n) * static_cast<double>(n - 1));
}

struct WordDispersion {
  WordEntry entry;
  double d = 0.0;
};

struct DispersionReport {
  std::vector<WordDispersion> words;  // source lexicon order
  std::map<Pos, std::optional<double>> mean_by_pos;

  // Highest dispersion first; equal values keep lexicon order.
  std::vector<WordDispersion> sorted_descending() const {
    auto out = words;
    std::stable_sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.d > b.d; });
    return out;
  }

  std::optional<double> dispersion_of(const WordEntry& e) const {
    for (const auto& w : words)
      if (w.entry == e) return w.d;
    return std::nullopt;
  }
};

// Dispersion of every lexicon entry whose set has at least two images, and
// the unweighted mean per POS.
inline DispersionReport dispersion_summary(const Dataset& ds) {
  DispersionReport rep;
  std::map<std::string, double> cache;
  for (const auto& e : ds.lexicon.entries()) {
    const ImageSet* s = ds.find_set(e.word);
    if (!s || s->size() < 2) continue;
    auto it = cache.find(e.word);
    if (it == cache.end()) it = cache.emplace(e.word, image_dispersion(*s)).first;
    rep.words.push_back({e, it->second});
  }
  for (Pos p : kAllPos) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& w : rep.words)
      if (w.entry.pos == p) {
        sum += w.d;
        ++n;
      }
    rep.mean_by_pos[p] = n ? std::optional<double>(sum / static_cast<double>(n)) : std::nullopt;
  }
  return rep;
}

inline std::string format_dispersion(const std::vector<WordDispersion>& words) {
  std::string out;
  for (const auto& w : words) out += w.entry.word + "\t" + std::string(to_string(w.entry.pos)) + "\t" + format_fixed(w.d, 9) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// Dispersion vs. performance
// ---------------------------------------------------------------------------

// Ranks with ties sharing the average of their positions (1-based).
inline std::vector<double> average_ranks(const std::vector<double>& v) {
  std::vector<std::size_t> idx(v.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
  std::vector<double> ranks(v.size());
  for (std::size_t i = 0; i < idx.size();) {
    std::size_t j = i;
    while (j + 1 < idx.size() && v[idx[j + 1]] == v[idx[i]]) ++j;
    const double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t t = i; t <= j; ++t) ranks[idx[t]] = avg;
    i = j + 1;
  }
  return ranks;
}

struct Correlation {
  double rho = 0.0;
  bool degenerate = false;  // a side had zero variance; rho reported as 0
  std::size_t n = 0;
};

inline Correlation spearman(const std::vector<double>& x, const std::vector<double>& y) {
  require_same_dim(x.size(), y.size(), "spearman");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0.0 || syy == 0.0) return {0.0, true, x.size()};
  return {std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0), false, x.size()};
}

// Spearman correlation between a source word's dispersion and the
// reciprocal rank of its gold translation (0 for a missed single
// prediction).
inline Correlation dispersion_rank_correlation(const DispersionReport& dispersions, const std::vector<RankedList>& rankings,
                                               const std::vector<TranslationPair>& gold) {
  std::vector<double> d, rr;
  for (const auto& r : rankings) {
    const auto disp = dispersions.dispersion_of(r.source);
    const bool has_gold = std::any_of(gold.begin(), gold.end(), [&](const TranslationPair& g) { return g.source == r.source; });
    if (!disp || !has_gold) continue;
    const auto rank = detail::gold_rank(r, gold);
    d.push_back(*disp);
    rr.push_back(rank ? 1.0 / static_cast<double>(*rank) : 0.0);
  }
  if (d.size() < 3) fail(ErrorCode::kInsufficientOverlap, std::to_string(d.size()) + " words with both dispersion and a ranking");
  return spearman(d, rr);
}

// ---------------------------------------------------------------------------
// Report tables
// ---------------------------------------------------------------------------

enum class ReportFormat { kText, kCsv };

struct ReportRow {
  std::string method;
  EvalReport report;
};

inline constexpr std::string_view kAbsentCell = "--";

// The 12 metric cells of a row: MRR, P@1, P@10 for ALL, NN, VB, ADJ.
inline std::array<std::optional<double>, 12> report_cells(const EvalReport& r) {
  std::array<std::optional<double>, 12> cells{};
  std::size_t c = 0;
  for (auto s : kAllSettings) {
    auto it = r.settings.find(s);
    const SettingMetrics empty;
    const SettingMetrics& m = it == r.settings.end() ? empty : it->second;
    cells[c++] = m.mrr;
    cells[c++] = m.precision(1);
    cells[c++] = m.precision(10);
  }
  return cells;
}

inline std::vector<std::string> report_header() {
  std::vector<std::string> h{"method"};
  for (auto s : kAllSettings)
    for (const char* metric : {"MRR", "P@1", "P@10"}) h.push_back(std::string(to_string(s)) + " " + metric);
  return h;
}

namespace detail {

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

// Text uses two decimals; CSV carries full precision and round-trips.
inline std::string render_report(const std::vector<ReportRow>& rows, ReportFormat format) {
  const auto header = report_header();
  std::string out;
  if (format == ReportFormat::kCsv) {
    for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + detail::csv_field(header[i]);
    out += "\r\n";
    for (const auto& row : rows) {
      out += detail::csv_field(row.method);
      for (const auto& c : report_cells(row.report)) out += "," + (c ? format_exact(*c) : std::string(kAbsentCell));
      out += "\r\n";
    }
    return out;
  }
  std::size_t name_w = header[0].size();
  for (const auto& row : rows) name_w = std::max(name_w, row.method.size());
  auto pad = [](std::string s, std::size_t w, bool left) {
    while (s.size() < w) s = left ? s + " " : " " + s;
    return s;
  };
  constexpr std::size_t kCellW = 9;
  out += pad(header[0], name_w, true);
  for (std::size_t i = 1; i < header.size(); ++i) out += " " + pad(header[i], kCellW, false);
  out += "\n";
  for (const auto& row : rows) {
    out += pad(row.method, name_w, true);
    for (const auto& c : report_cells(row.report)) out += " " + pad(c ? format_fixed(*c, 2) : std::string(kAbsentCell), kCellW, false);
    out += "\n";
  }
  return out;
}

struct ParsedReportRow {
  std::string method;
  std::array<std::optional<double>, 12> cells{};
};

// Inverse of the CSV rendering.
inline std::vector<ParsedReportRow> parse_report_csv(std::string_view csv) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::string> rec;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < csv.size(); ++i) {
    const char c = csv[i];
    if (quoted) {
      if (c == '"' && i + 1 < csv.size() && csv[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      rec.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' || c == '\n') {
      if (c == '\r' && i + 1 < csv.size() && csv[i + 1] == '\n') ++i;
      rec.push_back(std::move(field));
      field.clear();
      records.push_back(std::move(rec));
      rec.clear();
    } else {
      field += c;
    }
  }
  if (!field.empty() || !rec.empty()) {
    rec.push_back(std::move(field));
    records.push_back(std::move(rec));
  }
  if (records.empty() || records.front() != report_header()) fail(ErrorCode::kMalformedLine, "unexpected report header");
  std::vector<ParsedReportRow> rows;
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != 13) fail(ErrorCode::kMalformedLine, "report row " + std::to_string(r) + " has " + std::to_string(records[r].size()) + " cells");
    ParsedReportRow row{records[r][0], {}};
    for (std::size_t c = 0; c < 12; ++c) {
      const auto& f = records[r][c + 1];
      if (f == kAbsentCell) continue;
      double v = 0.0;
      auto [p, ec] = std::from_chars(f.data(), f.data() + f.size(), v);
      if (ec != std::errc() || p != f.data() + f.size()) fail(ErrorCode::kMalformedLine, "bad report cell '" + f + "'");
      row.cells[c] = v;
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace lexiscope
