#include <gtest/gtest.h>

#include <iterator>

#include "support.hpp"

using namespace lexiscope;
using namespace lexiscope::testing;

namespace {

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorCode::kBadConfig;
}

std::vector<std::pair<Pos, std::size_t>> nouns_at(std::initializer_list<std::size_t> ranks) {
  std::vector<std::pair<Pos, std::size_t>> out;
  for (auto r : ranks) out.push_back({Pos::kNoun, r});
  return out;
}

TEST(Mrr, Fixtures) {
  const auto a = rank_fixture(nouns_at({1, 2}), 10);
  EXPECT_EQ(mrr(a.rankings, a.gold), 0.75);
  const auto b = rank_fixture(nouns_at({1, 1, 1}), 10);
  EXPECT_EQ(mrr(b.rankings, b.gold), 1.0);
  const auto c = rank_fixture(nouns_at({1, 4, 10}), 10);
  EXPECT_EQ(mrr(c.rankings, c.gold), (1.0 + 0.25 + 0.1) / 3.0);
  EXPECT_NEAR(mrr(c.rankings, c.gold), 0.45, 1e-15);
}

TEST(PrecisionAtK, Fixtures) {
  const auto a = rank_fixture(nouns_at({1, 2}), 10);
  EXPECT_EQ(precision_at_k(a.rankings, a.gold, 1), 0.5);
  EXPECT_EQ(precision_at_k(a.rankings, a.gold, 10), 1.0);
  EXPECT_EQ(code_of([&] { precision_at_k(a.rankings, a.gold, 0); }), ErrorCode::kBadConfig);
}

TEST(Metrics, Errors) {
  auto f = rank_fixture(nouns_at({1, 2}), 3);
  auto no_gold = f.gold;
  no_gold.pop_back();
  EXPECT_EQ(code_of([&] { mrr(f.rankings, no_gold); }), ErrorCode::kMissingGold);
  f.rankings[0].candidates.erase(f.rankings[0].candidates.begin());
  EXPECT_EQ(code_of([&] { mrr(f.rankings, f.gold); }), ErrorCode::kGoldNotInCandidates);
  EXPECT_EQ(code_of([&] { precision_at_k(f.rankings, f.gold, 1); }), ErrorCode::kGoldNotInCandidates);
}

TEST(Metrics, SinglePredictionGetsOnlyP1) {
  auto f = rank_fixture(nouns_at({1, 1, 1, 1}), 4);
  for (std::size_t i = 0; i < 4; ++i) {
    auto& r = f.rankings[i];
    r.single_prediction = true;
    r.candidates = {{f.target[i % 2 == 0 ? 0 : 3], 1.0}};
  }
  EXPECT_EQ(precision_at_k(f.rankings, f.gold, 1), 0.5);
  EXPECT_EQ(code_of([&] { mrr(f.rankings, f.gold); }), ErrorCode::kBadConfig);
  const auto rep = per_setting_report(f.rankings, f.gold, f.source);
  EXPECT_EQ(rep.at(Setting::kAll).precision(1), 0.5);
  EXPECT_FALSE(rep.at(Setting::kAll).mrr);
  EXPECT_FALSE(rep.at(Setting::kAll).precision(10));
}

TEST(Metrics, RandomFixturesRespectOrdering) {
  std::mt19937_64 rng(1);
  for (int t = 0; t < 1000; ++t) {
    const std::size_t width = 1 + rng() % 30, n = 1 + rng() % 20;
    std::vector<std::pair<Pos, std::size_t>> words;
    for (std::size_t i = 0; i < n; ++i) words.push_back({kAllPos[rng() % 3], 1 + rng() % width});
    const auto f = rank_fixture(words, width);
    const double m = mrr(f.rankings, f.gold);
    double prev = 0.0;
    for (std::size_t k = 1; k <= width + 1; ++k) {
      const double p = precision_at_k(f.rankings, f.gold, k);
      EXPECT_GE(p, prev);
      EXPECT_GE(p, 0.0);
      EXPECT_LE(p, 1.0);
      prev = p;
    }
    EXPECT_GE(m, precision_at_k(f.rankings, f.gold, 1));
    EXPECT_LE(m, 1.0);
    EXPECT_EQ(prev, 1.0);
  }
}

// --- per-setting ------------------------------------------------------------

TEST(PerSetting, HandComputedSubsets) {
  const auto f = rank_fixture({{Pos::kNoun, 1}, {Pos::kNoun, 1}, {Pos::kVerb, 10}}, 10);
  const auto rep = per_setting_report(f.rankings, f.gold, f.source);
  EXPECT_NEAR(*rep.at(Setting::kAll).mrr, 0.7, 1e-15);
  EXPECT_EQ(*rep.at(Setting::kNn).mrr, 1.0);
  EXPECT_NEAR(*rep.at(Setting::kVb).mrr, 0.1, 1e-15);
  EXPECT_EQ(rep.at(Setting::kAll).num_words, 3u);
  EXPECT_EQ(rep.at(Setting::kAdj).num_words, 0u);
  EXPECT_FALSE(rep.at(Setting::kAdj).mrr);
  EXPECT_FALSE(rep.at(Setting::kAdj).precision(1));
}

TEST(PerSetting, AllIsCountWeightedMeanOfPosSettings) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 200; ++t) {
    std::vector<std::pair<Pos, std::size_t>> words;
    for (std::size_t i = 0, n = 1 + rng() % 25; i < n; ++i) words.push_back({kAllPos[rng() % 3], 1 + rng() % 12});
    const auto f = rank_fixture(words, 12);
    const auto rep = per_setting_report(f.rankings, f.gold, f.source);
    double mrr_sum = 0.0, p1_sum = 0.0, p10_sum = 0.0;
    for (auto s : {Setting::kNn, Setting::kVb, Setting::kAdj}) {
      const auto& m = rep.at(s);
      if (!m.num_words) continue;
      const double w = static_cast<double>(m.num_words);
      mrr_sum += w * *m.mrr;
      p1_sum += w * *m.precision(1);
      p10_sum += w * *m.precision(10);
    }
    const double n = static_cast<double>(rep.at(Setting::kAll).num_words);
    EXPECT_NEAR(*rep.at(Setting::kAll).mrr, mrr_sum / n, 1e-12);
    EXPECT_NEAR(*rep.at(Setting::kAll).precision(1), p1_sum / n, 1e-12);
    EXPECT_NEAR(*rep.at(Setting::kAll).precision(10), p10_sum / n, 1e-12);
  }
}

TEST(PerSetting, UnrankedGoldIsCountedAsOov) {
  auto f = rank_fixture({{Pos::kNoun, 1}, {Pos::kVerb, 2}, {Pos::kAdj, 1}}, 3);
  f.rankings.erase(f.rankings.begin() + 1);
  const auto rep = per_setting_report(f.rankings, f.gold, f.source);
  EXPECT_EQ(rep.at(Setting::kAll).num_words, 2u);
  EXPECT_EQ(rep.at(Setting::kAll).oov_excluded, 1u);
  EXPECT_EQ(rep.at(Setting::kVb).oov_excluded, 1u);
  EXPECT_EQ(*rep.at(Setting::kAll).mrr, 1.0);
}

TEST(PerSetting, UnknownSourceWord) {
  auto f = rank_fixture(nouns_at({1}), 2);
  EXPECT_EQ(code_of([&] { per_setting_report(f.rankings, f.gold, Lexicon("en")); }), ErrorCode::kUnknownWord);
}

// --- dispersion -------------------------------------------------------------

TEST(Dispersion, Fixtures) {
  EXPECT_EQ(image_dispersion(make_set("a", {{1, 2}, {1, 2}, {1, 2}})), 0.0);
  EXPECT_EQ(image_dispersion(make_set("a", {{1, 0}, {0, 1}})), 1.0);
  const double h = std::sqrt(0.5);
  const double expected = 1.0 - (2.0 * h) / 3.0;
  EXPECT_NEAR(image_dispersion(make_set("a", {{1, 0}, {0, 1}, {h, h}})), expected, 1e-12);
  EXPECT_NEAR(expected, 0.5286, 1e-4);
  EXPECT_EQ(code_of([&] { image_dispersion(make_set("a", {{1, 0}})); }), ErrorCode::kTooFewImages);
}

TEST(Dispersion, InvariantToRescalingAndOrder) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> s(0.1, 10);
  for (int t = 0; t < 100; ++t) {
    Matrix m = random_matrix(rng, 2 + rng() % 6, 5);
    const double d = image_dispersion({"w", FeatureKind::kCnn, m});
    double brute = 0.0;
    const auto rows = oracle::rows_of(m);
    for (std::size_t j = 0; j < rows.size(); ++j)
      for (std::size_t k = 0; k < rows.size(); ++k)
        if (j != k) brute += 1.0 - oracle::cosine(rows[j], rows[k]);
    EXPECT_NEAR(d, brute / static_cast<double>(rows.size() * (rows.size() - 1)), 1e-12);
    for (std::size_t i = 0; i < m.rows(); ++i) {
      const double f = s(rng);
      for (double& x : m.row(i)) x *= f;
    }
    std::vector<std::size_t> perm(m.rows());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    Matrix shuffled(0, 5);
    for (auto p : perm) shuffled.append_row(m.row_vector(p));
    EXPECT_NEAR(image_dispersion({"w", FeatureKind::kCnn, shuffled}), d, 1e-12);
  }
}

TEST(Dispersion, SummaryMeansAndSorting) {
  const auto ds = make_dataset("en",
                               {{"flat", Matrix::from_rows({{1, 1}, {2, 2}})},
                                {"wide", Matrix::from_rows({{1, 0}, {0, 1}})},
                                {"lone", Matrix::from_rows({{1, 0}})},
                                {"also", Matrix::from_rows({{1, 0}, {1, 0}})}},
                               {Pos::kNoun, Pos::kVerb, Pos::kVerb, Pos::kNoun});
  const auto rep = dispersion_summary(ds);
  ASSERT_EQ(rep.words.size(), 3u);
  EXPECT_EQ(*rep.mean_by_pos.at(Pos::kNoun), 0.0);
  EXPECT_EQ(*rep.mean_by_pos.at(Pos::kVerb), 1.0);
  EXPECT_FALSE(rep.mean_by_pos.at(Pos::kAdj));
  const auto sorted = rep.sorted_descending();
  EXPECT_EQ(sorted[0].entry.word, "wide");
  EXPECT_EQ(sorted[1].entry.word, "flat");
  EXPECT_EQ(sorted[2].entry.word, "also");
  EXPECT_EQ(format_dispersion({sorted[0]}), "wide\tVERB\t1.000000000\n");
  EXPECT_FALSE(rep.dispersion_of(ds.lexicon[2]));
}

// --- correlation ------------------------------------------------------------

TEST(Spearman, AverageRanksAndExamples) {
  EXPECT_EQ(average_ranks({3, 1, 3, 2}), (std::vector<double>{3.5, 1, 3.5, 2}));
  const auto anti = spearman({0.1, 0.2, 0.3, 0.4}, {1.0, 0.5, 0.25, 0.1});
  EXPECT_EQ(anti.rho, -1.0);
  EXPECT_FALSE(anti.degenerate);
  const auto flat = spearman({0.1, 0.2, 0.3}, {1.0, 1.0, 1.0});
  EXPECT_EQ(flat.rho, 0.0);
  EXPECT_TRUE(flat.degenerate);
}

TEST(Spearman, MatchesRankDifferenceFormulaWithoutTies) {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0, 1);
  for (int t = 0; t < 200; ++t) {
    const std::size_t n = 3 + rng() % 20;
    std::vector<double> x(n), y(n);
    for (std::size_t i = 0; i < n; ++i) {
      x[i] = u(rng);
      y[i] = u(rng);
    }
    // rank by counting smaller values; no ties with continuous draws
    double d2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double rx = 1, ry = 1;
      for (std::size_t j = 0; j < n; ++j) {
        rx += x[j] < x[i];
        ry += y[j] < y[i];
      }
      d2 += (rx - ry) * (rx - ry);
    }
    const double nn = static_cast<double>(n);
    EXPECT_NEAR(spearman(x, y).rho, 1.0 - 6.0 * d2 / (nn * (nn * nn - 1.0)), 1e-12);
  }
}

TEST(DispersionCorrelation, AntiMonotoneAndOverlap) {
  const auto f = rank_fixture(nouns_at({1, 2, 3, 4}), 4);
  DispersionReport rep;
  for (std::size_t i = 0; i < 4; ++i) rep.words.push_back({f.source[i], 0.1 * static_cast<double>(i + 1)});
  const auto c = dispersion_rank_correlation(rep, f.rankings, f.gold);
  EXPECT_EQ(c.rho, -1.0);
  EXPECT_EQ(c.n, 4u);
  rep.words.resize(2);
  EXPECT_EQ(code_of([&] { dispersion_rank_correlation(rep, f.rankings, f.gold); }), ErrorCode::kInsufficientOverlap);
}

// --- report tables ----------------------------------------------------------

EvalReport knn_like_report() {
  EvalReport r;
  for (auto s : kAllSettings) r.settings[s] = {5, 0, std::nullopt, {{1, 0.2}}};
  return r;
}

TEST(Report, ColumnStructure) {
  const auto f = rank_fixture({{Pos::kNoun, 1}, {Pos::kVerb, 2}, {Pos::kAdj, 3}}, 10);
  const auto rep = per_setting_report(f.rankings, f.gold, f.source);
  const auto csv = render_report({{"avgmax", rep}}, ReportFormat::kCsv);
  EXPECT_EQ(csv.substr(0, csv.find("\r\n")), "method,ALL MRR,ALL P@1,ALL P@10,NN MRR,NN P@1,NN P@10,VB MRR,VB P@1,VB P@10,ADJ MRR,ADJ P@1,ADJ P@10");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 2);
  const auto row = csv.substr(csv.find("\r\n") + 2);
  EXPECT_EQ(std::count(row.begin(), row.end(), ','), 12);

  const auto text = render_report({{"avgmax", rep}, {"knn", knn_like_report()}}, ReportFormat::kText);
  std::istringstream lines(text);
  std::string header, first, second;
  std::getline(lines, header);
  std::getline(lines, first);
  std::getline(lines, second);
  EXPECT_NE(first.find(" 0.61"), std::string::npos);
  std::istringstream cells(second);
  std::vector<std::string> tok{std::istream_iterator<std::string>(cells), {}};
  ASSERT_EQ(tok.size(), 13u);
  EXPECT_EQ(tok[1], "--");
  EXPECT_EQ(tok[2], "0.20");
  EXPECT_EQ(tok[3], "--");
}

TEST(Report, CsvRoundTripIsBitExact) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<ReportRow> rows;
  for (const char* name : {"avgmax", "with,comma", "with \"quote\"", "knn"}) {
    EvalReport r;
    for (auto s : kAllSettings) {
      SettingMetrics m;
      m.num_words = 1;
      if (std::string(name) != "knn") m.mrr = u(rng);
      m.p_at[1] = u(rng);
      if (s != Setting::kAdj && std::string(name) != "knn") m.p_at[10] = u(rng);
      r.settings[s] = m;
    }
    rows.push_back({name, r});
  }
  const auto csv = render_report(rows, ReportFormat::kCsv);
  EXPECT_NE(csv.find("\"with,comma\""), std::string::npos);
  EXPECT_NE(csv.find("\"with \"\"quote\"\"\""), std::string::npos);
  const auto back = parse_report_csv(csv);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    EXPECT_EQ(back[i].method, rows[i].method);
    EXPECT_EQ(back[i].cells, report_cells(rows[i].report));
  }
  EXPECT_EQ(code_of([] { parse_report_csv("method,x\r\n"); }), ErrorCode::kMalformedLine);
}

TEST(Report, AveragingIgnoresAbsentMetrics) {
  EvalReport a = knn_like_report(), b;
  b.settings[Setting::kAll] = {2, 0, 0.5, {{1, 0.4}, {10, 1.0}}};
  const auto avg = average_reports({a, b});
  EXPECT_DOUBLE_EQ(*avg.at(Setting::kAll).mrr, 0.5);
  EXPECT_DOUBLE_EQ(*avg.at(Setting::kAll).precision(1), 0.3);
  EXPECT_EQ(*avg.at(Setting::kAll).precision(10), 1.0);
  EXPECT_FALSE(avg.at(Setting::kNn).mrr);
}

}  // namespace
