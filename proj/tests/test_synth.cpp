#include <gtest/gtest.h>

#include "support.hpp"

using namespace lexiscope;
using namespace lexiscope::testing;

namespace {

SynthConfig small(std::uint64_t seed) {
  SynthConfig c;
  c.words_per_pos = {6, 5, 4};
  c.images_per_word = 6;
  c.dim = 12;
  c.seed = seed;
  return c;
}

std::vector<RankedList> rank_all(const SynthCorpus& c, SimilarityMethod m) {
  const auto sm = similarity_matrix(c.source, c.target, m);
  std::vector<RankedList> out;
  for (std::size_t i = 0; i < c.source.lexicon.size(); ++i) out.push_back(sm.ranking(i));
  return out;
}

TEST(Synth, ZeroNoiseZeroShiftIsPerfectForEveryMethod) {
  SynthConfig c = small(3);
  c.noise_sigma = {0, 0, 0};
  c.cross_lingual_shift = 0;
  const auto corpus = generate(c);
  for (auto m : kAllSimilarityMethods) {
    const auto rep = per_setting_report(rank_all(corpus, m), corpus.gold, corpus.source.lexicon);
    EXPECT_EQ(*rep.at(Setting::kAll).precision(1), 1.0) << to_string(m);
    EXPECT_EQ(*rep.at(Setting::kAll).mrr, 1.0) << to_string(m);
  }
  for (const auto& g : corpus.gold)
    EXPECT_EQ(knn_translate(corpus.source.sets.at(g.source.word), corpus.target).word, g.target);
}

TEST(Synth, DeterministicAndThreadIndependent) {
  const auto a = generate(small(9), 1), b = generate(small(9), 4), other = generate(small(10), 1);
  ASSERT_EQ(a.source.lexicon.size(), 15u);
  for (const auto& e : a.source.lexicon.entries()) {
    EXPECT_EQ(a.source.sets.at(e.word).vectors, b.source.sets.at(e.word).vectors);
    EXPECT_EQ(a.source.manifests.at(e.word).content_hashes, b.source.manifests.at(e.word).content_hashes);
  }
  for (const auto& e : a.target.lexicon.entries()) EXPECT_EQ(a.target.sets.at(e.word).vectors, b.target.sets.at(e.word).vectors);
  EXPECT_NE(a.source.sets.at("nn_0000").vectors, other.source.sets.at("nn_0000").vectors);
}

TEST(Synth, DatasetInvariants) {
  const auto c = generate(small(1));
  EXPECT_EQ(c.source.lexicon.language(), "en");
  EXPECT_EQ(c.target.lexicon.language(), "xx");
  ASSERT_EQ(c.gold.size(), 15u);
  EXPECT_EQ(c.gold[0].source.word, "nn_0000");
  EXPECT_EQ(c.gold[0].target.word, "nn_0000_x");
  EXPECT_EQ(c.gold[6].source.word, "vb_0000");
  EXPECT_EQ(c.gold[14].source.word, "adj_0003");
  for (const auto& g : c.gold) {
    EXPECT_EQ(g.source.pos, g.target.pos);
    const auto& s = c.source.sets.at(g.source.word);
    EXPECT_EQ(s.size(), 6u);
    EXPECT_EQ(s.dim(), 12u);
    EXPECT_EQ(s.kind, FeatureKind::kCnn);
    EXPECT_EQ(c.source.manifests.at(g.source.word).image_ids.size(), 6u);
    EXPECT_EQ(c.target.sets.at(g.target.word).size(), 6u);
  }
}

TEST(Synth, NoisierPosHasHigherDispersion) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SynthConfig c = small(seed);
    c.noise_sigma = {0.1, 0.5, 0.3};
    const auto rep = dispersion_summary(generate(c).source);
    EXPECT_LT(*rep.mean_by_pos.at(Pos::kNoun), *rep.mean_by_pos.at(Pos::kAdj)) << seed;
    EXPECT_LT(*rep.mean_by_pos.at(Pos::kAdj), *rep.mean_by_pos.at(Pos::kVerb)) << seed;
  }
}

TEST(Synth, Presets) {
  const auto tiers = synth_preset("paper-pos");
  ASSERT_TRUE(tiers);
  EXPECT_EQ(tiers->words_per_pos, (std::array<std::size_t, 3>{375, 116, 66}));
  EXPECT_LT(tiers->noise_sigma[0], tiers->noise_sigma[1]);
  const auto collapse = synth_preset("pos-collapse");
  EXPECT_EQ(collapse->noise_sigma, (std::array<double, 3>{0.1, 0.8, 0.8}));
  const auto planted = synth_preset("planted");
  EXPECT_EQ(planted->cross_lingual_shift, 0.0);
  EXPECT_EQ(planted->noise_sigma, (std::array<double, 3>{0, 0, 0}));
  EXPECT_FALSE(synth_preset("nope"));
}

TEST(Synth, PlantedCorpusSharesContentHashesAcrossLanguages) {
  SynthConfig c = *synth_preset("planted");
  c.words_per_pos = {2, 2, 2};
  c.images_per_word = 12;
  const auto corpus = generate(c);
  for (const auto& g : corpus.gold)
    EXPECT_EQ(corpus.source.manifests.at(g.source.word).content_hashes, corpus.target.manifests.at(g.target.word).content_hashes);
}

TEST(Synth, InvalidConfigs) {
  auto expect_bad = [](SynthConfig c) {
    try {
      generate(c);
      ADD_FAILURE();
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::kBadConfig);
    }
  };
  SynthConfig c = small(0);
  c.words_per_pos[1] = 0;
  expect_bad(c);
  c = small(0);
  c.noise_sigma[2] = -0.1;
  expect_bad(c);
  c = small(0);
  c.noise_sigma[0] = std::nan("");
  expect_bad(c);
  c = small(0);
  c.images_per_word = 51;
  expect_bad(c);
  c = small(0);
  c.dim = 0;
  expect_bad(c);
  c = small(0);
  c.target_language = "en";
  expect_bad(c);
}

}  // namespace
