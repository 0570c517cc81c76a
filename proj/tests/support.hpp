#pragma once

// Shared fixtures and independent oracles for the test binaries. The oracles
// are deliberately naive (nested loops, plain sorts, Jacobi rotations) and
// share no code with the library beyond the data types.

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "lexiscope/lexiscope.hpp"

namespace lexiscope::testing {

namespace fs = std::filesystem;

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "lexiscope-XXXXXX").string();
    if (!mkdtemp(tmpl.data())) throw std::runtime_error("mkdtemp failed");
    path_ = tmpl;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }
  std::string write(const std::string& name, const std::string& contents) const {
    const auto p = file(name);
    fs::create_directories(fs::path(p).parent_path());
    std::ofstream(p, std::ios::binary) << contents;
    return p;
  }

 private:
  fs::path path_;
};

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Every regular file under `dir`, keyed by relative path.
inline std::map<std::string, std::string> snapshot(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

struct CliResult {
  int code = -1;
  std::string out;
  std::string err;
};

#ifdef LEXISCOPE_CLI
inline CliResult run_cli(const std::string& args, const std::string& env = "") {
  TempDir io;
  const std::string cmd = env + " " + std::string(LEXISCOPE_CLI) + " " + args + " >" + io.file("out") + " 2>" + io.file("err");
  const int status = std::system(cmd.c_str());
  CliResult r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.out = slurp(io.file("out"));
  r.err = slurp(io.file("err"));
  return r;
}
#endif

// ---------------------------------------------------------------------------
// Random data
// ---------------------------------------------------------------------------

inline Matrix random_matrix(std::mt19937_64& rng, std::size_t rows, std::size_t cols, double lo = -1.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Matrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (double& x : m.row(i)) x = u(rng);
  return m;
}

inline ImageSet make_set(const std::string& word, const std::vector<Vector>& rows, FeatureKind kind = FeatureKind::kCnn) {
  return {word, kind, Matrix::from_rows(rows)};
}

// Dataset with one set per word; words are NOUN unless `pos` says otherwise.
inline Dataset make_dataset(const std::string& lang, const std::vector<std::pair<std::string, Matrix>>& sets,
                            const std::vector<Pos>& pos = {}) {
  Dataset ds;
  ds.lexicon = Lexicon(lang);
  for (std::size_t i = 0; i < sets.size(); ++i) {
    ds.lexicon.add(sets[i].first, pos.empty() ? Pos::kNoun : pos[i]);
    ds.sets[sets[i].first] = {sets[i].first, FeatureKind::kCnn, sets[i].second};
  }
  return ds;
}

inline Digest digest_of(std::uint64_t v) {
  Digest d{};
  for (int i = 0; i < 8; ++i) d[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(v >> (8 * i));
  d[31] = 0xAB;
  return d;
}

// Candidate groups for the ranker whose labels are linearly separable: a
// hidden unit direction u puts every positive at u.x >= margin and every
// negative at u.x <= -margin. POS cycles NOUN, VERB, ADJ.
inline std::vector<CandidateGroup> separable_groups(std::size_t sources, std::size_t candidates, std::size_t dim,
                                                    std::uint64_t seed, double margin = 0.5) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector u(dim);
  for (double& x : u) x = normal(rng);
  l2_normalize(u);
  auto draw = [&](bool positive) {
    Vector x(dim);
    for (double& v : x) v = normal(rng);
    const double along = dot(u, x);
    const double want = positive ? margin + std::abs(along) : -margin - std::abs(along);
    for (std::size_t j = 0; j < dim; ++j) x[j] += (want - along) * u[j];
    return x;
  };
  std::vector<CandidateGroup> groups;
  for (std::size_t s = 0; s < sources; ++s) {
    const Pos pos = kAllPos[s % 3];
    CandidateGroup g{{"src" + std::to_string(s), pos, "en"}, {}};
    std::uniform_int_distribution<std::size_t> slot(0, candidates - 1);
    const std::size_t gold = slot(rng);
    for (std::size_t c = 0; c < candidates; ++c) {
      WordEntry t{"tgt" + std::to_string(s) + "_" + std::to_string(c), pos, "de"};
      g.candidates.push_back({g.source, t, draw(c == gold), c == gold ? +1 : -1});
    }
    groups.push_back(std::move(g));
  }
  return groups;
}

struct DedupeFixture {
  Dataset src, tgt;
  std::vector<TranslationPair> pairs;
};

// One pair whose manifests share `shared` digests out of `n` images each,
// plus an unrelated pair with no overlap.
inline DedupeFixture dedupe_fixture(std::size_t shared, std::size_t n = 50) {
  DedupeFixture f;
  f.src.lexicon = Lexicon("en");
  f.src.lexicon.add("cow", Pos::kNoun);
  f.src.lexicon.add("sad", Pos::kAdj);
  f.tgt.lexicon = Lexicon("de");
  f.tgt.lexicon.add("kuh", Pos::kNoun);
  f.tgt.lexicon.add("traurig", Pos::kAdj);
  auto fill = [&](Dataset& ds, const std::string& w, std::uint64_t base, std::size_t common) {
    ImageManifest m{w, {}, {}};
    Matrix rows(0, 2);
    for (std::size_t i = 0; i < n; ++i) {
      m.image_ids.push_back(w + std::to_string(i));
      m.content_hashes.push_back(i < common ? digest_of(10'000 + i) : digest_of(base + i));
      rows.append_row(Vector{static_cast<double>(i), 1.0});
    }
    ds.manifests[w] = m;
    ds.sets[w] = {w, FeatureKind::kCnn, rows};
  };
  fill(f.src, "cow", 0, shared);
  fill(f.tgt, "kuh", 1000, shared);
  fill(f.src, "sad", 2000, 0);
  fill(f.tgt, "traurig", 3000, 0);
  f.pairs = {{f.src.lexicon[0], f.tgt.lexicon[0]}, {f.src.lexicon[1], f.tgt.lexicon[1]}};
  return f;
}

// Rankings whose gold target sits at a chosen 1-based rank. Source i is
// "w{i}" with the given POS; every list ranks the same `width` targets.
struct RankFixture {
  Lexicon source{"en"};
  Lexicon target{"de"};
  std::vector<RankedList> rankings;
  std::vector<TranslationPair> gold;
};

inline RankFixture rank_fixture(const std::vector<std::pair<Pos, std::size_t>>& words, std::size_t width) {
  RankFixture f;
  for (std::size_t j = 0; j < width; ++j) f.target.add("t" + std::to_string(j), Pos::kNoun);
  for (std::size_t i = 0; i < words.size(); ++i) {
    const auto [pos, rank] = words[i];
    f.source.add("w" + std::to_string(i), pos);
    const WordEntry src = f.source[i];
    RankedList r{src, {}, "fixture", false};
    for (std::size_t j = 0; j < width; ++j) r.candidates.push_back({f.target[j], 1.0 - static_cast<double>(j) / static_cast<double>(width)});
    f.rankings.push_back(r);
    f.gold.push_back({src, f.target[rank - 1]});
  }
  return f;
}

// ---------------------------------------------------------------------------
// Oracles
// ---------------------------------------------------------------------------

namespace oracle {

inline double cosine(const std::vector<double>& a, const std::vector<double>& b) {
  double ab = 0, aa = 0, bb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa == 0 || bb == 0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

inline std::vector<std::vector<double>> rows_of(const Matrix& m) {
  std::vector<std::vector<double>> out;
  for (std::size_t i = 0; i < m.rows(); ++i) out.push_back(m.row_vector(i));
  return out;
}

inline std::vector<double> mean_row(const std::vector<std::vector<double>>& rows) {
  std::vector<double> m(rows[0].size(), 0.0);
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size(); ++j) m[j] += r[j];
  for (double& x : m) x /= static_cast<double>(rows.size());
  return m;
}

inline std::vector<double> max_row(const std::vector<std::vector<double>>& rows) {
  std::vector<double> m = rows[0];
  for (const auto& r : rows)
    for (std::size_t j = 0; j < r.size(); ++j) m[j] = std::max(m[j], r[j]);
  return m;
}

inline double set_similarity(const Matrix& A, const Matrix& B, SimilarityMethod method) {
  const auto a = rows_of(A), b = rows_of(B);
  switch (method) {
    case SimilarityMethod::kAvgMax: {
      double sum = 0;
      for (const auto& x : a) {
        double best = -2;
        for (const auto& y : b) best = std::max(best, cosine(x, y));
        sum += best;
      }
      return sum / static_cast<double>(a.size());
    }
    case SimilarityMethod::kMaxMax: {
      double best = -2;
      for (const auto& x : a)
        for (const auto& y : b) best = std::max(best, cosine(x, y));
      return best;
    }
    case SimilarityMethod::kSetMean:
      return cosine(mean_row(a), mean_row(b));
    case SimilarityMethod::kSetMax:
      return cosine(max_row(a), max_row(b));
  }
  return 0;
}

// Index of the KNN winner among `targets` (lexicon order).
inline std::size_t knn(const Matrix& source, const std::vector<Matrix>& targets) {
  std::vector<std::size_t> votes(targets.size(), 0);
  for (std::size_t i = 0; i < source.rows(); ++i) {
    const auto x = source.row_vector(i);
    double best = -3;
    std::size_t owner = 0;
    for (std::size_t t = 0; t < targets.size(); ++t)
      for (std::size_t j = 0; j < targets[t].rows(); ++j) {
        const double c = cosine(x, targets[t].row_vector(j));
        if (c > best) {
          best = c;
          owner = t;
        }
      }
    ++votes[owner];
  }
  const std::size_t top = *std::max_element(votes.begin(), votes.end());
  std::size_t winner = targets.size();
  double best_d = 1e300;
  for (std::size_t t = 0; t < targets.size(); ++t) {
    if (votes[t] != top) continue;
    double sum = 0;
    for (std::size_t i = 0; i < source.rows(); ++i)
      for (std::size_t j = 0; j < targets[t].rows(); ++j) sum += 1.0 - cosine(source.row_vector(i), targets[t].row_vector(j));
    const double d = sum / static_cast<double>(source.rows() * targets[t].rows());
    if (d < best_d - 1e-12) {
      best_d = d;
      winner = t;
    }
  }
  return winner;
}

// Indices ordered by score descending, ties by index.
inline std::vector<std::size_t> score_then_sort(const std::vector<double>& scores) {
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    if (scores[a] != scores[b]) return scores[a] > scores[b];
    return a < b;
  });
  return idx;
}

// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
// Returns (eigenvalues descending, eigenvectors as rows).
inline std::pair<std::vector<double>, std::vector<std::vector<double>>> jacobi_eigen(std::vector<std::vector<double>> a) {
  const std::size_t n = a.size();
  std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) v[i][i] = 1.0;
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
    if (off < 1e-30) break;
    for (std::size_t p = 0; p < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a[p][q]) < 1e-300) continue;
        const double theta = (a[q][q] - a[p][p]) / (2 * a[p][q]);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a[k][p], akq = a[k][q];
          a[k][p] = c * akp - s * akq;
          a[k][q] = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a[p][k], aqk = a[q][k];
          a[p][k] = c * apk - s * aqk;
          a[q][k] = s * apk + c * aqk;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double vkp = v[k][p], vkq = v[k][q];
          v[k][p] = c * vkp - s * vkq;
          v[k][q] = s * vkp + c * vkq;
        }
      }
  }
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  std::sort(idx.begin(), idx.end(), [&](std::size_t x, std::size_t y) { return a[x][x] > a[y][y]; });
  std::vector<double> vals;
  std::vector<std::vector<double>> vecs;
  for (auto i : idx) {
    vals.push_back(a[i][i]);
    std::vector<double> col(n);
    for (std::size_t k = 0; k < n; ++k) col[k] = v[k][i];
    vecs.push_back(col);
  }
  return {vals, vecs};
}

inline std::vector<std::vector<double>> sample_covariance(const Matrix& pts) {
  const auto rows = rows_of(pts);
  const auto mu = mean_row(rows);
  const std::size_t d = mu.size();
  std::vector<std::vector<double>> c(d, std::vector<double>(d, 0.0));
  for (const auto& r : rows)
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) c[i][j] += (r[i] - mu[i]) * (r[j] - mu[j]);
  for (auto& row : c)
    for (double& x : row) x /= static_cast<double>(rows.size() - 1);
  return c;
}

// Minimum k-means inertia over every assignment of n points to 2 non-empty
// clusters.
inline double best_two_partition_inertia(const Matrix& pts) {
  const std::size_t n = pts.rows();
  double best = 1e300;
  for (std::size_t mask = 1; mask + 1 < (std::size_t{1} << n); ++mask) {
    double total = 0;
    for (int side = 0; side < 2; ++side) {
      std::vector<std::vector<double>> members;
      for (std::size_t i = 0; i < n; ++i)
        if (((mask >> i) & 1) == static_cast<std::size_t>(side)) members.push_back(pts.row_vector(i));
      const auto mu = mean_row(members);
      for (const auto& m : members)
        for (std::size_t j = 0; j < mu.size(); ++j) total += (m[j] - mu[j]) * (m[j] - mu[j]);
    }
    best = std::min(best, total);
  }
  return best;
}

}  // namespace oracle

}  // namespace lexiscope::testing
