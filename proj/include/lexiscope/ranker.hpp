#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "lexiscope/corpus.hpp"
#include "lexiscope/dataset.hpp"
#include "lexiscope/error.hpp"
#include "lexiscope/eval.hpp"
#include "lexiscope/lxfv.hpp"
#include "lexiscope/numerics.hpp"
#include "lexiscope/similarity.hpp"

namespace lexiscope {

// kSigned: mean(source) - mean(target). kAbsolute: its component-wise
// absolute value. With kSigned a linear score splits into a source term and
// a target term, so every source word receives the same target order.
enum class PairEncoding { kSigned, kAbsolute };

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t epochs = 500;
  double l2 = 1e-4;
  std::optional<std::size_t> negative_ratio = 10;  // nullopt keeps every negative
  std::uint64_t seed = 0;
  PairEncoding encoding = PairEncoding::kSigned;

  void validate() const {
    if (!(learning_rate > 0.0)) fail(ErrorCode::kBadConfig, "learning rate must be positive");
    if (epochs == 0) fail(ErrorCode::kBadConfig, "epochs must be >= 1");
    if (!(l2 >= 0.0)) fail(ErrorCode::kBadConfig, "l2 must be >= 0");
    if (negative_ratio && *negative_ratio == 0) fail(ErrorCode::kBadConfig, "negative ratio must be >= 1");
  }
};

struct PairFeature {
  WordEntry source;
  WordEntry target;
  Vector x;
  int label = -1;  // +1 or -1
};

struct RankingModel {
  Vector w;
  double b = 0.0;

  double score(std::span<const double> x) const { return dot(w, x) + b; }
};

inline Vector encode_difference(std::span<const double> source_mean, std::span<const double> target_mean, PairEncoding enc) {
  require_same_dim(source_mean.size(), target_mean.size(), "pair feature");
  Vector x(source_mean.size());
  for (std::size_t j = 0; j < x.size(); ++j) {
    x[j] = source_mean[j] - target_mean[j];
    if (enc == PairEncoding::kAbsolute) x[j] = std::abs(x[j]);
  }
  return x;
}

// Difference of the two sets' mean rows, source minus target.
inline Vector make_pair_feature(const ImageSet& a, const ImageSet& b, PairEncoding enc = PairEncoding::kSigned) {
  if (a.size() == 0 || b.size() == 0) fail(ErrorCode::kEmptySet, "pair feature with an empty set");
  require_same_dim(a.dim(), b.dim(), "pair feature");
  return encode_difference(column_mean(a.vectors), column_mean(b.vectors), enc);
}

namespace detail {

class MeanCache {
 public:
  explicit MeanCache(const Dataset& ds) : ds_(ds) {}

  const Vector* find(const std::string& word) {
    auto it = cache_.find(word);
    if (it != cache_.end()) return &it->second;
    const ImageSet* s = ds_.find_set(word);
    if (!s || s->size() == 0) return nullptr;
    return &cache_.emplace(word, column_mean(s->vectors)).first->second;
  }

 private:
  const Dataset& ds_;
  std::map<std::string, Vector> cache_;
};

inline std::vector<WordEntry> unique_targets(const std::vector<TranslationPair>& gold) {
  std::vector<WordEntry> out;
  for (const auto& g : gold)
    if (std::find(out.begin(), out.end(), g.target) == out.end()) out.push_back(g.target);
  return out;
}

}  // namespace detail

// One positive per gold pair plus the non-gold (source, target) pairs over
// the gold targets, subsampled per source with the seeded sampler.
inline std::vector<PairFeature> build_training_set(const Dataset& sources, const Dataset& targets,
                                                   const std::vector<TranslationPair>& gold, const TrainConfig& cfg) {
  detail::MeanCache sm(sources), tm(targets);
  const auto pool = detail::unique_targets(gold);
  for (const auto& t : pool)
    if (!tm.find(t.word)) fail(ErrorCode::kUnresolvablePair, "no image set for target '" + t.word + "'");

  std::mt19937_64 rng(cfg.seed);
  std::vector<PairFeature> data;
  for (const auto& g : gold) {
    const Vector* s = sm.find(g.source.word);
    if (!s) fail(ErrorCode::kUnresolvablePair, "no image set for source '" + g.source.word + "'");
    data.push_back({g.source, g.target, encode_difference(*s, *tm.find(g.target.word), cfg.encoding), +1});

    std::vector<WordEntry> negatives;
    for (const auto& t : pool)
      if (!(t == g.target)) negatives.push_back(t);
    if (cfg.negative_ratio && negatives.size() > *cfg.negative_ratio) {
      std::vector<WordEntry> kept;
      std::sample(negatives.begin(), negatives.end(), std::back_inserter(kept), *cfg.negative_ratio, rng);
      negatives = std::move(kept);
    }
    for (const auto& t : negatives) data.push_back({g.source, t, encode_difference(*s, *tm.find(t.word), cfg.encoding), -1});
  }
  return data;
}

namespace detail {

// log(1 + exp(z)) without overflow.
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

inline double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace detail

// Mean logistic loss plus (l2/2)|w|^2.
inline double training_loss(const std::vector<PairFeature>& data, const RankingModel& m, double l2) {
  double loss = 0.0;
  for (const auto& p : data) loss += detail::softplus(-p.label * m.score(p.x));
  loss /= static_cast<double>(data.size());
  return loss + 0.5 * l2 * dot(m.w, m.w);
}

struct TrainResult {
  RankingModel model;
  std::vector<double> loss_history;  // [0] at initialization, then after each epoch
};

// Full-batch gradient descent from w = 0, b = 0. The L2 term is applied as
// the proximal step w <- (w - lr * grad) / (1 + lr * l2), which has the same
// fixed point as plain descent and stays stable for any l2.
inline TrainResult train(const std::vector<PairFeature>& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.empty()) fail(ErrorCode::kSingleClassData, "no training data");
  const bool has_pos = std::any_of(data.begin(), data.end(), [](const auto& p) { return p.label > 0; });
  const bool has_neg = std::any_of(data.begin(), data.end(), [](const auto& p) { return p.label < 0; });
  if (!has_pos || !has_neg) fail(ErrorCode::kSingleClassData, "training data holds a single class");
  const std::size_t dim = data.front().x.size();
  for (const auto& p : data) require_same_dim(p.x.size(), dim, "training data");

  TrainResult res{{Vector(dim, 0.0), 0.0}, {}};
  auto& m = res.model;
  res.loss_history.push_back(training_loss(data, m, cfg.l2));
  const double inv_n = 1.0 / static_cast<double>(data.size());
  Vector gw(dim);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::fill(gw.begin(), gw.end(), 0.0);
    double gb = 0.0;
    for (const auto& p : data) {
      const double y = p.label;
      const double g = -y * detail::sigmoid(-y * m.score(p.x));
      for (std::size_t j = 0; j < dim; ++j) gw[j] += g * p.x[j];
      gb += g;
    }
    const double shrink = 1.0 / (1.0 + cfg.learning_rate * cfg.l2);
    for (std::size_t j = 0; j < dim; ++j) m.w[j] = (m.w[j] - cfg.learning_rate * gw[j] * inv_n) * shrink;
    m.b -= cfg.learning_rate * gb * inv_n;
    res.loss_history.push_back(training_loss(data, m, cfg.l2));
  }
  return res;
}

// Candidates ordered by signed distance to the hyperplane, w . x + b.
inline RankedList rank_with_model(const RankingModel& model, const WordEntry& source, const ImageSet& source_set,
                                  const Dataset& targets, PairEncoding enc = PairEncoding::kSigned,
                                  const std::vector<WordEntry>* pool = nullptr) {
  if (source_set.size() == 0) fail(ErrorCode::kEmptySet, "image set for '" + source.word + "' is empty");
  require_same_dim(source_set.dim(), model.w.size(), "rank_with_model");
  const Vector sm = column_mean(source_set.vectors);
  detail::MeanCache tm(targets);
  std::vector<Candidate> cands;
  auto add = [&](const WordEntry& e) {
    const Vector* t = tm.find(e.word);
    if (t) cands.push_back({e, model.score(encode_difference(sm, *t, enc))});
  };
  if (pool) {
    for (const auto& e : *pool) add(e);
  } else {
    for (const auto& e : targets.lexicon.entries()) add(e);
  }
  std::stable_sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
  return {source, std::move(cands), "logregr", false};
}

// Model file: one LXFV row [w..., b].
inline void save_model(const std::string& path, const RankingModel& m) {
  Vector row = m.w;
  row.push_back(m.b);
  write_lxfv(path, Matrix::from_rows({row}));
}

inline RankingModel load_model(const std::string& path) {
  const Matrix mat = read_lxfv(path);
  if (mat.rows() != 1 || mat.cols() < 2) fail(ErrorCode::kCountMismatch, path + ": model file must hold one row of dim >= 2");
  Vector row = mat.row_vector(0);
  const double b = row.back();
  row.pop_back();
  return {std::move(row), b};
}

// ---------------------------------------------------------------------------
// Two-fold evaluation
// ---------------------------------------------------------------------------

// Candidates for one source word; exactly one carries label +1.
struct CandidateGroup {
  WordEntry source;
  std::vector<PairFeature> candidates;
};

struct TwoFoldResult {
  EvalReport report;  // averaged over the two test folds
  std::array<EvalReport, 2> folds;
  std::array<RankingModel, 2> models;  // models[i] was trained on the other fold
  std::vector<RankedList> rankings;    // test rankings of both folds
};

namespace detail {

inline Lexicon lexicon_of(const std::vector<TranslationPair>& pairs) {
  Lexicon lex(pairs.empty() ? "" : pairs.front().source.language);
  for (const auto& p : pairs)
    if (!lex.index_of(p.source)) lex.add(p.source.word, p.source.pos);
  return lex;
}

inline TranslationPair gold_of(const CandidateGroup& g) {
  const PairFeature* pos = nullptr;
  for (const auto& c : g.candidates)
    if (c.label > 0) {
      if (pos) fail(ErrorCode::kBadConfig, "group for '" + g.source.word + "' has more than one positive");
      pos = &c;
    }
  if (!pos) fail(ErrorCode::kBadConfig, "group for '" + g.source.word + "' has no positive");
  return {g.source, pos->target};
}

}  // namespace detail

// Two-fold evaluation over precomputed candidate features: train on one
// half of the groups (positive plus sampled negatives), rank the other half
// by model score, and average the two test reports.
inline TwoFoldResult two_fold_evaluate(const std::vector<CandidateGroup>& groups, const TrainConfig& cfg) {
  cfg.validate();
  std::vector<TranslationPair> gold;
  for (const auto& g : groups) gold.push_back(detail::gold_of(g));
  const Folds folds = split_two_folds(gold, cfg.seed);
  auto groups_of = [&](const std::vector<TranslationPair>& fold) {
    std::vector<const CandidateGroup*> out;
    for (const auto& p : fold)
      for (const auto& g : groups)
        if (g.source == p.source) out.push_back(&g);
    return out;
  };
  const std::array<std::vector<const CandidateGroup*>, 2> parts = {groups_of(folds.a), groups_of(folds.b)};
  const std::array<const std::vector<TranslationPair>*, 2> fold_gold = {&folds.a, &folds.b};

  TwoFoldResult res;
  std::mt19937_64 rng(cfg.seed);
  for (std::size_t test = 0; test < 2; ++test) {
    std::vector<PairFeature> data;
    for (const auto* g : parts[1 - test]) {
      std::vector<PairFeature> neg;
      for (const auto& c : g->candidates) (c.label > 0 ? data : neg).push_back(c);
      if (cfg.negative_ratio && neg.size() > *cfg.negative_ratio) {
        std::vector<PairFeature> kept;
        std::sample(neg.begin(), neg.end(), std::back_inserter(kept), *cfg.negative_ratio, rng);
        neg = std::move(kept);
      }
      data.insert(data.end(), neg.begin(), neg.end());
    }
    res.models[test] = train(data, cfg).model;
    std::vector<RankedList> lists;
    for (const auto* g : parts[test]) {
      std::vector<Candidate> cands;
      for (const auto& c : g->candidates) cands.push_back({c.target, res.models[test].score(c.x)});
      lists.push_back(detail::sort_ranking(g->source, std::move(cands), "logregr"));
    }
    res.folds[test] = per_setting_report(lists, *fold_gold[test], detail::lexicon_of(*fold_gold[test]));
    res.rankings.insert(res.rankings.end(), lists.begin(), lists.end());
  }
  res.report = average_reports({res.folds[0], res.folds[1]});
  return res;
}

// Dataset form: folds come from the gold pairs; each model is trained on
// one fold's words and tested on the other fold, whose target words form
// the candidate pool.
inline TwoFoldResult two_fold_evaluate(const Dataset& sources, const Dataset& targets,
                                       const std::vector<TranslationPair>& gold, const TrainConfig& cfg) {
  cfg.validate();
  const Folds folds = split_two_folds(gold, cfg.seed);
  const std::array<const std::vector<TranslationPair>*, 2> fold_gold = {&folds.a, &folds.b};
  TwoFoldResult res;
  for (std::size_t test = 0; test < 2; ++test) {
    TrainConfig fold_cfg = cfg;
    fold_cfg.seed = cfg.seed + test;
    res.models[test] = train(build_training_set(sources, targets, *fold_gold[1 - test], fold_cfg), cfg).model;
    const auto pool = detail::unique_targets(*fold_gold[test]);
    std::vector<RankedList> lists;
    for (const auto& p : *fold_gold[test]) {
      const ImageSet* s = sources.find_set(p.source.word);
      if (!s) fail(ErrorCode::kUnresolvablePair, "no image set for source '" + p.source.word + "'");
      lists.push_back(rank_with_model(res.models[test], p.source, *s, targets, cfg.encoding, &pool));
    }
    res.folds[test] = per_setting_report(lists, *fold_gold[test], sources.lexicon);
    res.rankings.insert(res.rankings.end(), lists.begin(), lists.end());
  }
  res.report = average_reports({res.folds[0], res.folds[1]});
  return res;
}

}  // namespace lexiscope
