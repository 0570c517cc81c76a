#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "lexiscope/corpus.hpp"
#include "lexiscope/dataset.hpp"
#include "lexiscope/digest.hpp"
#include "lexiscope/error.hpp"
#include "lexiscope/lxfv.hpp"
#include "lexiscope/numerics.hpp"
#include "lexiscope/parallel.hpp"

namespace lexiscope {

// Concept-plus-noise bilingual corpus. Each word pair shares a latent unit
// concept; the target side is displaced by `cross_lingual_shift` along a
// random unit direction, and every image adds isotropic Gaussian noise with
// the POS's sigma. Arrays are indexed NOUN, VERB, ADJ. The default shift is
// large enough that low-noise words are not trivially matched and small
// enough that noise, not the shift, dominates at sigma >= 0.8.
struct SynthConfig {
  std::array<std::size_t, 3> words_per_pos = {20, 20, 20};
  std::array<double, 3> noise_sigma = {0.1, 0.1, 0.1};
  std::size_t images_per_word = 50;
  std::size_t dim = 64;
  double cross_lingual_shift = 1.5;
  std::uint64_t seed = 0;
  std::string source_language = "en";
  std::string target_language = "xx";

  void validate() const {
    for (auto n : words_per_pos)
      if (n == 0) fail(ErrorCode::kBadConfig, "every POS needs at least one word");
    for (double s : noise_sigma)
      if (!(s >= 0.0) || !std::isfinite(s)) fail(ErrorCode::kBadConfig, "noise sigma must be finite and >= 0");
    if (images_per_word == 0 || images_per_word > kMaxImagesPerWord) fail(ErrorCode::kBadConfig, "images per word must be in [1, 50]");
    if (dim == 0) fail(ErrorCode::kBadConfig, "dim must be >= 1");
    if (!(cross_lingual_shift >= 0.0) || !std::isfinite(cross_lingual_shift)) fail(ErrorCode::kBadConfig, "shift must be finite and >= 0");
    if (source_language.empty() || target_language.empty() || source_language == target_language) {
      fail(ErrorCode::kBadConfig, "source and target languages must be distinct and non-empty");
    }
  }

  double sigma(Pos p) const { return noise_sigma[static_cast<std::size_t>(p)]; }
};

// Named configurations for the CLI.
inline std::optional<SynthConfig> synth_preset(std::string_view name) {
  SynthConfig c;
  if (name == "paper-pos") {
    // word counts of the original English list, noise rising NN < VB < ADJ
    c.words_per_pos = {375, 116, 66};
    c.noise_sigma = {0.1, 0.5, 0.8};
    return c;
  }
  if (name == "pos-collapse") {
    c.noise_sigma = {0.1, 0.8, 0.8};
    return c;
  }
  if (name == "planted") {
    c.noise_sigma = {0.0, 0.0, 0.0};
    c.cross_lingual_shift = 0.0;
    return c;
  }
  return std::nullopt;
}

struct SynthCorpus {
  Dataset source;
  Dataset target;
  std::vector<TranslationPair> gold;
};

namespace detail {

inline std::string synth_word(Pos p, std::size_t i, bool target) {
  static constexpr std::array<std::string_view, 3> kTag = {"nn", "vb", "adj"};
  std::string idx = std::to_string(i);
  while (idx.size() < 4) idx = "0" + idx;
  return std::string(kTag[static_cast<std::size_t>(p)]) + "_" + idx + (target ? "_x" : "");
}

// Independent engine per (seed, word, stream) so words can be generated in
// any order.
inline std::mt19937_64 word_engine(std::uint64_t seed, std::size_t word, std::uint32_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32), static_cast<std::uint32_t>(word),
                    static_cast<std::uint32_t>(static_cast<std::uint64_t>(word) >> 32), stream};
  return std::mt19937_64(seq);
}

inline Vector random_unit(std::mt19937_64& rng, std::size_t dim) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vector v(dim);
  do {
    for (double& x : v) x = normal(rng);
  } while (l2_norm(v) == 0.0);
  l2_normalize(v);
  return v;
}

inline Matrix noisy_images(const Vector& center, double sigma, std::size_t n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(n, center.size());
  for (std::size_t i = 0; i < n; ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] = center[j] + (sigma > 0.0 ? sigma * normal(rng) : 0.0);
  }
  return m;
}

// Digest of a row's f32 little-endian bytes, i.e. of the stored content.
inline Digest row_digest(std::span<const double> row) {
  std::vector<std::uint8_t> bytes;
  bytes.reserve(row.size() * 4);
  for (double v : row) put_le(bytes, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
  return sha256(bytes);
}

inline ImageManifest manifest_for(const std::string& word, const Matrix& images) {
  ImageManifest m{word, {}, {}};
  for (std::size_t i = 0; i < images.rows(); ++i) {
    m.image_ids.push_back(word + "_" + std::to_string(i));
    m.content_hashes.push_back(row_digest(images.row(i)));
  }
  return m;
}

}  // namespace detail

inline SynthCorpus generate(const SynthConfig& cfg, std::size_t threads = 1) {
  cfg.validate();
  SynthCorpus out;
  out.source.lexicon = Lexicon(cfg.source_language);
  out.target.lexicon = Lexicon(cfg.target_language);
  out.source.kind = out.target.kind = FeatureKind::kCnn;

  struct Slot {
    Pos pos;
    std::string s, t;
  };
  std::vector<Slot> slots;
  for (Pos p : kAllPos)
    for (std::size_t i = 0; i < cfg.words_per_pos[static_cast<std::size_t>(p)]; ++i)
      slots.push_back({p, detail::synth_word(p, i, false), detail::synth_word(p, i, true)});

  std::vector<Matrix> src(slots.size()), tgt(slots.size());
  parallel_for(slots.size(), threads, [&](std::size_t w) {
    auto concept_rng = detail::word_engine(cfg.seed, w, 0);
    const Vector concept_vec = detail::random_unit(concept_rng, cfg.dim);
    const Vector dir = detail::random_unit(concept_rng, cfg.dim);
    Vector shifted = concept_vec;
    for (std::size_t j = 0; j < cfg.dim; ++j) shifted[j] += cfg.cross_lingual_shift * dir[j];
    const double sigma = cfg.sigma(slots[w].pos);
    auto src_rng = detail::word_engine(cfg.seed, w, 1);
    auto tgt_rng = detail::word_engine(cfg.seed, w, 2);
    src[w] = detail::noisy_images(concept_vec, sigma, cfg.images_per_word, src_rng);
    tgt[w] = detail::noisy_images(shifted, sigma, cfg.images_per_word, tgt_rng);
  });

  for (std::size_t w = 0; w < slots.size(); ++w) {
    const auto& sl = slots[w];
    out.source.lexicon.add(sl.s, sl.pos);
    out.target.lexicon.add(sl.t, sl.pos);
    out.source.manifests[sl.s] = detail::manifest_for(sl.s, src[w]);
    out.target.manifests[sl.t] = detail::manifest_for(sl.t, tgt[w]);
    out.source.sets[sl.s] = {sl.s, FeatureKind::kCnn, std::move(src[w])};
    out.target.sets[sl.t] = {sl.t, FeatureKind::kCnn, std::move(tgt[w])};
    out.gold.push_back({out.source.lexicon.entries().back(), out.target.lexicon.entries().back()});
  }
  return out;
}

}  // namespace lexiscope
