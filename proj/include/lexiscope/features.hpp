#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "lexiscope/corpus.hpp"
#include "lexiscope/dataset.hpp"
#include "lexiscope/error.hpp"
#include "lexiscope/image.hpp"
#include "lexiscope/lxfv.hpp"
#include "lexiscope/numerics.hpp"
#include "lexiscope/text.hpp"

namespace lexiscope {

inline constexpr std::size_t kDefaultColorBins = 16;
inline constexpr std::size_t kDescriptorCells = 4;
inline constexpr std::size_t kDescriptorOrientations = 8;
inline constexpr std::size_t kDescriptorDim = kDescriptorCells * kDescriptorCells * kDescriptorOrientations;

// ---------------------------------------------------------------------------
// Color histograms
// ---------------------------------------------------------------------------

// R, G, B and gray histograms, each L1-normalized, concatenated in that
// order (dim 4 * bins).
inline Vector color_histogram(const Image& img, std::size_t bins_per_channel = kDefaultColorBins) {
  if (bins_per_channel < 2 || bins_per_channel > 256 || 256 % bins_per_channel != 0) {
    fail(ErrorCode::kBadBinCount, std::to_string(bins_per_channel) + " bins per channel (must be >= 2 and divide 256)");
  }
  const std::size_t width = 256 / bins_per_channel;
  Vector hist(4 * bins_per_channel, 0.0);
  for (const auto& p : img.pixels) {
    hist[p.r / width] += 1.0;
    hist[bins_per_channel + p.g / width] += 1.0;
    hist[2 * bins_per_channel + p.b / width] += 1.0;
    hist[3 * bins_per_channel + gray_level(p) / width] += 1.0;
  }
  for (std::size_t c = 0; c < 4; ++c) l1_normalize(std::span<double>(hist).subspan(c * bins_per_channel, bins_per_channel));
  return hist;
}

// ---------------------------------------------------------------------------
// Dense gradient-orientation descriptors
// ---------------------------------------------------------------------------

struct DescriptorConfig {
  std::size_t patch_size = 16;
  std::size_t stride = 8;
};

// Patch grid size along one axis.
constexpr std::size_t grid_count(std::size_t extent, std::size_t patch, std::size_t stride) {
  return (extent - patch) / stride + 1;
}

// One 128-d descriptor per patch of a dense grid over the grayscale plane:
// 4x4 spatial cells times 8 orientation bins of central-difference
// gradients, magnitude-weighted, L2-normalized. Rows are ordered by patch
// row, then patch column.
inline Matrix extract_descriptors(const Image& img, const DescriptorConfig& cfg = {}) {
  const std::size_t p = cfg.patch_size;
  if (p < kDescriptorCells || cfg.stride == 0) fail(ErrorCode::kBadConfig, "patch size must be >= 4 and stride >= 1");
  if (p > std::min(img.width, img.height)) {
    fail(ErrorCode::kImageTooSmall, std::to_string(img.width) + "x" + std::to_string(img.height) + " image, patch " + std::to_string(p));
  }
  const std::size_t w = img.width, h = img.height;
  std::vector<double> gray(w * h);
  for (std::size_t i = 0; i < gray.size(); ++i) gray[i] = gray_level(img.pixels[i]);
  auto at = [&](std::size_t x, std::size_t y) { return gray[y * w + x]; };

  std::vector<double> mag(w * h);
  std::vector<std::uint8_t> bin(w * h);
  constexpr double kSector = std::numbers::pi / 4.0;
  for (std::size_t y = 0; y < h; ++y) {
    for (std::size_t x = 0; x < w; ++x) {
      const double gx = at(std::min(x + 1, w - 1), y) - at(x == 0 ? 0 : x - 1, y);
      const double gy = at(x, std::min(y + 1, h - 1)) - at(x, y == 0 ? 0 : y - 1);
      mag[y * w + x] = std::hypot(gx, gy);
      double theta = std::atan2(gy, gx);
      if (theta < 0.0) theta += 2.0 * std::numbers::pi;
      bin[y * w + x] = static_cast<std::uint8_t>(static_cast<std::size_t>(theta / kSector) % kDescriptorOrientations);
    }
  }

  const std::size_t nx = grid_count(w, p, cfg.stride);
  const std::size_t ny = grid_count(h, p, cfg.stride);
  Matrix out(nx * ny, kDescriptorDim);
  for (std::size_t py = 0; py < ny; ++py) {
    for (std::size_t px = 0; px < nx; ++px) {
      auto d = out.row(py * nx + px);
      const std::size_t x0 = px * cfg.stride, y0 = py * cfg.stride;
      for (std::size_t v = 0; v < p; ++v) {
        const std::size_t cy = v * kDescriptorCells / p;
        for (std::size_t u = 0; u < p; ++u) {
          const std::size_t idx = (y0 + v) * w + (x0 + u);
          if (mag[idx] == 0.0) continue;
          const std::size_t cx = u * kDescriptorCells / p;
          d[(cy * kDescriptorCells + cx) * kDescriptorOrientations + bin[idx]] += mag[idx];
        }
      }
      l2_normalize(d);
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Bag of visual words
// ---------------------------------------------------------------------------

struct Codebook {
  Matrix centroids;
  std::size_t descriptor_dim = 0;

  std::size_t size() const noexcept { return centroids.rows(); }
};

// Uniform sample without replacement of at most `max_samples` rows drawn
// from all matrices; relative order is preserved.
inline Matrix sample_descriptors(const std::vector<Matrix>& pools, std::size_t max_samples, std::uint64_t seed) {
  std::vector<std::pair<std::size_t, std::size_t>> index;
  std::size_t dim = 0;
  for (std::size_t m = 0; m < pools.size(); ++m) {
    if (pools[m].rows() == 0) continue;
    if (dim == 0) dim = pools[m].cols();
    require_same_dim(pools[m].cols(), dim, "sample_descriptors");
    for (std::size_t r = 0; r < pools[m].rows(); ++r) index.emplace_back(m, r);
  }
  std::vector<std::pair<std::size_t, std::size_t>> picked;
  if (index.size() <= max_samples) {
    picked = std::move(index);
  } else {
    std::mt19937_64 rng(seed);
    std::sample(index.begin(), index.end(), std::back_inserter(picked), max_samples, rng);
  }
  Matrix out(0, dim);
  out.reserve_rows(picked.size());
  for (auto [m, r] : picked) out.append_row(pools[m].row(r));
  return out;
}

inline Codebook build_codebook(const Matrix& sample, std::size_t k, std::uint64_t seed, std::size_t max_iters = 100) {
  if (k == 0) fail(ErrorCode::kBadConfig, "codebook size must be >= 1");
  if (sample.rows() < k) {
    fail(ErrorCode::kTooFewDescriptors, std::to_string(sample.rows()) + " descriptors for " + std::to_string(k) + " codewords");
  }
  auto km = kmeans(sample, k, seed, max_iters);
  return {std::move(km.centroids), sample.cols()};
}

// Nearest-codeword counts, L1-normalized. No descriptors gives the zero
// vector.
inline Vector bovw_encode(const Matrix& descriptors, const Codebook& codebook) {
  Vector hist(codebook.size(), 0.0);
  if (descriptors.rows() == 0) return hist;
  require_same_dim(descriptors.cols(), codebook.descriptor_dim, "bovw_encode");
  for (std::size_t i = 0; i < descriptors.rows(); ++i) hist[nearest_row(codebook.centroids, descriptors.row(i))] += 1.0;
  l1_normalize(hist);
  return hist;
}

// ---------------------------------------------------------------------------
// Text embeddings
// ---------------------------------------------------------------------------

struct EmbeddingTable {
  std::string language;
  std::size_t dim = 0;
  std::map<std::string, Vector> vectors;

  const Vector* find(const std::string& word) const {
    auto it = vectors.find(word);
    return it == vectors.end() ? nullptr : &it->second;
  }
};

inline double parse_double(std::string_view s, const std::string& where) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) fail(ErrorCode::kMalformedLine, where + ": bad number '" + std::string(s) + "'");
  if (!std::isfinite(v)) fail(ErrorCode::kNonFiniteValue, where + ": non-finite value");
  return v;
}

// `word v1 ... vd` per line, single spaces.
inline EmbeddingTable load_embedding_table(const std::string& path, const std::string& language) {
  EmbeddingTable table{language, 0, {}};
  const auto lines = read_lines(path);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto line = trim(lines[i]);
    if (line.empty()) continue;
    std::vector<std::string_view> fields;
    for (auto f : split(line, ' '))
      if (!f.empty()) fields.push_back(f);
    if (fields.size() < 2) fail(ErrorCode::kMalformedLine, line_error(path, i + 1, "expected word and values"));
    const std::string where = line_error(path, i + 1, "");
    Vector v;
    for (std::size_t j = 1; j < fields.size(); ++j) v.push_back(parse_double(fields[j], where));
    if (table.dim == 0) table.dim = v.size();
    if (v.size() != table.dim) {
      fail(ErrorCode::kDimensionMismatch, line_error(path, i + 1, "dim " + std::to_string(v.size()) + ", expected " + std::to_string(table.dim)));
    }
    auto word = normalize_word(fields[0]);
    if (!table.vectors.emplace(word, std::move(v)).second) {
      fail(ErrorCode::kDuplicateEntry, line_error(path, i + 1, "duplicate word '" + word + "'"));
    }
  }
  return table;
}

inline std::string format_embedding_table(const EmbeddingTable& table, const std::vector<std::string>& order) {
  std::string out;
  for (const auto& w : order) {
    const Vector* v = table.find(w);
    if (!v) continue;
    out += w;
    for (double x : *v) out += " " + format_exact(x);
    out += "\n";
  }
  return out;
}

// Every image of the word carries the word's embedding.
inline ImageSet attach_text_embedding(const ImageManifest& manifest, const EmbeddingTable& table) {
  const Vector* e = table.find(manifest.word);
  if (!e) fail(ErrorCode::kOovWord, "'" + manifest.word + "' has no embedding (" + table.language + ")");
  ImageSet set{manifest.word, FeatureKind::kTex, Matrix(0, e->size())};
  for (std::size_t i = 0; i < manifest.size(); ++i) set.vectors.append_row(*e);
  return set;
}

// ---------------------------------------------------------------------------
// Combined and reduced representations
// ---------------------------------------------------------------------------

namespace detail {

inline ImageSet concat_sets(const ImageSet& vis, const ImageSet& tex, FeatureKind kind, bool normalize_parts) {
  if (vis.word != tex.word) fail(ErrorCode::kSetMismatch, "sets for '" + vis.word + "' and '" + tex.word + "'");
  if (vis.size() != tex.size()) {
    fail(ErrorCode::kSetMismatch, "'" + vis.word + "': " + std::to_string(vis.size()) + " vs " + std::to_string(tex.size()) + " images");
  }
  ImageSet out{vis.word, kind, Matrix(0, vis.dim() + tex.dim())};
  Vector row(vis.dim() + tex.dim());
  for (std::size_t i = 0; i < vis.size(); ++i) {
    auto a = vis.vectors.row(i);
    auto b = tex.vectors.row(i);
    std::copy(a.begin(), a.end(), row.begin());
    std::copy(b.begin(), b.end(), row.begin() + static_cast<std::ptrdiff_t>(a.size()));
    if (normalize_parts) {
      l2_normalize(std::span<double>(row).first(a.size()));
      l2_normalize(std::span<double>(row).subspan(a.size()));
    }
    out.vectors.append_row(row);
  }
  return out;
}

}  // namespace detail

// Row-wise [visual | text]. With normalize_parts each half is L2-normalized
// before concatenation.
inline ImageSet combine(const ImageSet& vis, const ImageSet& tex, bool normalize_parts = false) {
  if (tex.kind != FeatureKind::kTex) fail(ErrorCode::kSetMismatch, "combine expects a tex set as second argument");
  if (vis.kind != FeatureKind::kCnn) fail(ErrorCode::kSetMismatch, "combine expects a cnn set as first argument");
  return detail::concat_sets(vis, tex, FeatureKind::kCombi, normalize_parts);
}

inline ImageSet combine_pca(const ImageSet& vispca, const ImageSet& tex, bool normalize_parts = false) {
  if (tex.kind != FeatureKind::kTex) fail(ErrorCode::kSetMismatch, "combine_pca expects a tex set as second argument");
  if (vispca.kind != FeatureKind::kVisPca) fail(ErrorCode::kSetMismatch, "combine_pca expects a vispca set as first argument");
  return detail::concat_sets(vispca, tex, FeatureKind::kCombiPca, normalize_parts);
}

inline constexpr std::size_t kDefaultPcaDim = 40;

struct ReducedPair {
  Dataset source;
  Dataset target;
  PcaModel model;
};

// One PCA fitted on the images of both languages, applied to every image.
inline ReducedPair reduce_sets(const Dataset& source, const Dataset& target, std::size_t out_dim = kDefaultPcaDim) {
  if (source.kind != FeatureKind::kCnn || target.kind != FeatureKind::kCnn) {
    fail(ErrorCode::kSetMismatch, "PCA reduction expects cnn datasets");
  }
  require_same_dim(source.dim(), target.dim(), "reduce_sets");
  Matrix all(0, source.dim());
  for (const Dataset* ds : {&source, &target})
    for (const auto& [w, s] : ds->sets)
      for (std::size_t i = 0; i < s.size(); ++i) all.append_row(s.vectors.row(i));

  ReducedPair out{source, target, pca_fit(all, out_dim)};
  for (Dataset* ds : {&out.source, &out.target}) {
    ds->kind = FeatureKind::kVisPca;
    for (auto& [w, s] : ds->sets) {
      Matrix reduced(0, out_dim);
      for (std::size_t i = 0; i < s.size(); ++i) reduced.append_row(pca_transform(out.model, s.vectors.row(i)));
      s.vectors = std::move(reduced);
      s.kind = FeatureKind::kVisPca;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Feature files
// ---------------------------------------------------------------------------

// File name for a word's LXFV file. Bytes that are unsafe in a path
// component are percent-encoded; UTF-8 passes through.
inline std::string feature_file_name(const std::string& word) {
  static constexpr char kHex[] = "0123456789ABCDEF";
  std::string out;
  for (std::size_t i = 0; i < word.size(); ++i) {
    const auto c = static_cast<unsigned char>(word[i]);
    const bool unsafe = c < 0x20 || c == 0x7f || c == '/' || c == '\\' || c == '%' || c == ':' || (i == 0 && c == '.');
    if (unsafe) {
      out += '%';
      out += kHex[c >> 4];
      out += kHex[c & 0xf];
    } else {
      out += static_cast<char>(c);
    }
  }
  return out + ".lxfv";
}

inline ImageSet import_feature_file(const std::string& path, const ImageManifest& manifest, FeatureKind kind) {
  Matrix m = read_lxfv(path);
  if (m.rows() != manifest.size()) {
    fail(ErrorCode::kCountMismatch, path + ": " + std::to_string(m.rows()) + " rows for " + std::to_string(manifest.size()) +
                                        " images of '" + manifest.word + "'");
  }
  return {manifest.word, kind, std::move(m)};
}

}  // namespace lexiscope
