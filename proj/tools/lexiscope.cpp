// lexiscope: image-based bilingual lexicon induction from the command line.
//
// Exit codes: 0 success, 2 usage/configuration error, 3 data error.

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lexiscope/lexiscope.hpp"

namespace fs = std::filesystem;
using namespace lexiscope;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitData = 3;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DatasetFlags {
  std::string words, manifest, features, lang;

  void add(CLI::App* app, const std::string& side, const std::string& default_lang, bool need_features = true) {
    lang = default_lang;
    app->add_option("--" + side + "-words", words, side + " word list (word<TAB>POS)")->required()->check(CLI::ExistingFile);
    app->add_option("--" + side + "-manifest", manifest, side + " image manifest")->required()->check(CLI::ExistingFile);
    auto* f = app->add_option("--" + side + "-features", features, side + " directory of per-word LXFV files")->check(CLI::ExistingDirectory);
    if (need_features) f->required();
    app->add_option("--" + side + "-lang", lang, side + " language code")->capture_default_str();
  }

  DatasetPaths paths() const { return {words, manifest, features, lang}; }
};

void write_output(const std::string& path, const std::string& contents) {
  if (path.empty() || path == "-") {
    std::cout << contents;
  } else {
    if (fs::path(path).has_parent_path()) fs::create_directories(fs::path(path).parent_path());
    write_text_file(path, contents);
  }
}

FeatureKind kind_from(const std::string& s) {
  auto k = parse_feature_kind(s);
  if (!k) throw ConfigError("unknown feature kind '" + s + "'");
  return *k;
}

std::string image_path(const std::string& dir, const std::string& id) {
  fs::path p = fs::path(dir) / id;
  if (p.extension() != ".ppm") p += ".ppm";
  return p.string();
}

std::vector<std::string> manifest_words(const ManifestTable& table) {
  std::vector<std::string> out;
  for (const auto& [w, m] : table) out.push_back(w);
  return out;
}

// ---------------------------------------------------------------------------
// featurize
// ---------------------------------------------------------------------------

struct FeaturizeArgs {
  std::string kind, manifest, out, images, codebook, embeddings, cnn, tex, vispca;
  std::string target_manifest, target_cnn, target_out;
  std::size_t bins = kDefaultColorBins, patch = 16, stride = 8, dim = kDefaultPcaDim;
  bool normalize = false;
};

Dataset load_kind_dir(const std::string& manifest, const std::string& dir, FeatureKind kind) {
  Dataset ds;
  ds.kind = kind;
  ds.manifests = load_manifests(manifest);
  for (const auto& [w, m] : ds.manifests) ds.sets[w] = import_feature_file((fs::path(dir) / feature_file_name(w)).string(), m, kind);
  ds.validate();
  return ds;
}

int cmd_featurize(const FeaturizeArgs& a, std::size_t threads) {
  auto need = [&](const std::string& v, const char* flag) {
    if (v.empty()) throw ConfigError("--kind " + a.kind + " requires " + flag);
  };
  const FeatureKind kind = kind_from(a.kind);
  if (kind == FeatureKind::kCnn) throw ConfigError("cnn features are produced by the external exporter, not by featurize");

  if (kind == FeatureKind::kVisPca) {
    need(a.cnn, "--cnn");
    need(a.target_manifest, "--target-manifest");
    need(a.target_cnn, "--target-cnn");
    need(a.target_out, "--target-out");
    const auto src = load_kind_dir(a.manifest, a.cnn, FeatureKind::kCnn);
    const auto tgt = load_kind_dir(a.target_manifest, a.target_cnn, FeatureKind::kCnn);
    const auto reduced = reduce_sets(src, tgt, a.dim);
    if (reduced.model.degenerate) {
      std::cerr << "warning: PCA data has rank " << reduced.model.rank << " < " << a.dim << "; basis padded\n";
    }
    write_feature_sets(reduced.source, a.out);
    write_feature_sets(reduced.target, a.target_out);
    return 0;
  }

  const ManifestTable manifests = load_manifests(a.manifest);
  const auto words = manifest_words(manifests);
  std::vector<std::optional<Matrix>> rows(words.size());
  std::optional<Codebook> codebook;
  std::optional<EmbeddingTable> embeddings;

  switch (kind) {
    case FeatureKind::kColor:
      need(a.images, "--images");
      break;
    case FeatureKind::kBovw: {
      need(a.images, "--images");
      need(a.codebook, "--codebook");
      Matrix c = read_lxfv(a.codebook);
      const std::size_t d = c.cols();
      codebook = Codebook{std::move(c), d};
      break;
    }
    case FeatureKind::kTex:
      need(a.embeddings, "--embeddings");
      embeddings = load_embedding_table(a.embeddings, "");
      break;
    case FeatureKind::kCombi:
      need(a.cnn, "--cnn");
      need(a.tex, "--tex");
      break;
    case FeatureKind::kCombiPca:
      need(a.vispca, "--vispca");
      need(a.tex, "--tex");
      break;
    default:
      break;
  }

  const DescriptorConfig dcfg{a.patch, a.stride};
  std::vector<char> oov(words.size(), 0);
  parallel_for(words.size(), threads, [&](std::size_t i) {
    const ImageManifest& m = manifests.at(words[i]);
    const std::string file = feature_file_name(m.word);
    Matrix out(0, 0);
    switch (kind) {
      case FeatureKind::kColor:
        for (const auto& id : m.image_ids) out.append_row(color_histogram(read_ppm(image_path(a.images, id)), a.bins));
        break;
      case FeatureKind::kBovw:
        for (const auto& id : m.image_ids)
          out.append_row(bovw_encode(extract_descriptors(read_ppm(image_path(a.images, id)), dcfg), *codebook));
        break;
      case FeatureKind::kTex:
        if (!embeddings->find(m.word)) {
          oov[i] = 1;
          return;
        }
        out = attach_text_embedding(m, *embeddings).vectors;
        break;
      case FeatureKind::kCombi:
        out = combine(import_feature_file((fs::path(a.cnn) / file).string(), m, FeatureKind::kCnn),
                      import_feature_file((fs::path(a.tex) / file).string(), m, FeatureKind::kTex), a.normalize)
                  .vectors;
        break;
      case FeatureKind::kCombiPca:
        out = combine_pca(import_feature_file((fs::path(a.vispca) / file).string(), m, FeatureKind::kVisPca),
                          import_feature_file((fs::path(a.tex) / file).string(), m, FeatureKind::kTex), a.normalize)
                  .vectors;
        break;
      default:
        break;
    }
    rows[i] = std::move(out);
  });

  fs::create_directories(a.out);
  std::size_t oov_count = 0;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (oov[i]) {
      std::cerr << "oov: " << words[i] << "\n";
      ++oov_count;
      continue;
    }
    write_lxfv((fs::path(a.out) / feature_file_name(words[i])).string(), *rows[i]);
  }
  if (oov_count) std::cerr << oov_count << " word(s) without an embedding were skipped\n";
  return 0;
}

// ---------------------------------------------------------------------------
// codebook
// ---------------------------------------------------------------------------

struct CodebookArgs {
  std::string images, manifest, out;
  std::size_t k = 256, max_descriptors = 50000, patch = 16, stride = 8;
};

int cmd_codebook(const CodebookArgs& a, std::uint64_t seed, std::size_t threads) {
  const ManifestTable manifests = load_manifests(a.manifest);
  std::vector<std::string> ids;
  for (const auto& [w, m] : manifests) ids.insert(ids.end(), m.image_ids.begin(), m.image_ids.end());
  std::vector<Matrix> pools(ids.size());
  const DescriptorConfig dcfg{a.patch, a.stride};
  parallel_for(ids.size(), threads, [&](std::size_t i) { pools[i] = extract_descriptors(read_ppm(image_path(a.images, ids[i])), dcfg); });
  const Matrix sample = sample_descriptors(pools, a.max_descriptors, seed);
  const Codebook cb = build_codebook(sample, a.k, seed);
  if (fs::path(a.out).has_parent_path()) fs::create_directories(fs::path(a.out).parent_path());
  write_lxfv(a.out, cb.centroids);
  std::cout << "codebook: " << cb.size() << " codewords from " << sample.rows() << " descriptors\n";
  return 0;
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

struct RankArgs {
  DatasetFlags source, target;
  std::string kind = "cnn", method, out;
  std::size_t k = 3;
};

std::string oov_sidecar(const std::string& out) { return out + ".oov.tsv"; }

int cmd_rank(const RankArgs& a, std::uint64_t seed, std::size_t threads) {
  const FeatureKind kind = kind_from(a.kind);
  const bool allow_missing = kind == FeatureKind::kTex;
  const auto src = load_dataset(a.source.paths(), kind, allow_missing);
  const auto tgt = load_dataset(a.target.paths(), kind, allow_missing);

  std::vector<RankedList> lists;
  if (auto sim = parse_similarity_method(a.method)) {
    const auto m = similarity_matrix(src.dataset, tgt.dataset, *sim, threads);
    for (std::size_t i = 0; i < m.sources.size(); ++i) lists.push_back(m.ranking(i));
  } else {
    const auto pt = prepare_targets(tgt.dataset, threads);
    std::vector<WordEntry> entries;
    for (const auto& e : src.dataset.lexicon.entries())
      if (src.dataset.find_set(e.word)) entries.push_back(e);
    lists.resize(entries.size());
    parallel_for(entries.size(), threads, [&](std::size_t i) {
      const ImageSet& s = src.dataset.set_for(entries[i].word);
      const KnnResult r = a.method == "knn" ? knn_translate(prepare(s), pt) : knn_cluster_translate(s, pt, a.k, seed);
      lists[i] = prediction_list(entries[i], r, a.method == "knn" ? s.size() : a.k, a.method);
    });
  }
  write_output(a.out, format_rankings(lists));

  if (!src.missing.empty() || !tgt.missing.empty()) {
    std::string side;
    for (const auto& w : src.missing) side += src.dataset.lexicon.language() + "\t" + w + "\n";
    for (const auto& w : tgt.missing) side += tgt.dataset.lexicon.language() + "\t" + w + "\n";
    std::cerr << src.missing.size() + tgt.missing.size() << " word(s) without features excluded\n";
    if (!a.out.empty() && a.out != "-") write_text_file(oov_sidecar(a.out), side);
  }
  return 0;
}

// ---------------------------------------------------------------------------
// train-eval
// ---------------------------------------------------------------------------

struct TrainEvalArgs {
  DatasetFlags source, target;
  std::string pairs, kind = "cnn", neg_ratio = "10", encoding = "signed", format = "text", out, rankings_out;
  double lr = 0.1, l2 = 1e-4;
  std::size_t epochs = 500;
};

int cmd_train_eval(const TrainEvalArgs& a, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.learning_rate = a.lr;
  cfg.l2 = a.l2;
  cfg.epochs = a.epochs;
  cfg.seed = seed;
  cfg.encoding = a.encoding == "abs" ? PairEncoding::kAbsolute : PairEncoding::kSigned;
  if (a.neg_ratio == "all") {
    cfg.negative_ratio = std::nullopt;
  } else {
    try {
      cfg.negative_ratio = std::stoul(a.neg_ratio);
    } catch (...) {
      throw ConfigError("--neg-ratio must be a positive integer or 'all'");
    }
  }
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const FeatureKind kind = kind_from(a.kind);
  const auto src = load_dataset(a.source.paths(), kind, kind == FeatureKind::kTex);
  const auto tgt = load_dataset(a.target.paths(), kind, kind == FeatureKind::kTex);
  auto gold = load_translation_pairs(a.pairs, src.dataset.lexicon, tgt.dataset.lexicon);
  std::erase_if(gold, [&](const TranslationPair& p) {
    return !src.dataset.find_set(p.source.word) || !tgt.dataset.find_set(p.target.word);
  });
  const auto res = two_fold_evaluate(src.dataset, tgt.dataset, gold, cfg);
  write_output(a.out, render_report({{"logregr", res.report}}, a.format == "csv" ? ReportFormat::kCsv : ReportFormat::kText));
  if (!a.rankings_out.empty()) write_output(a.rankings_out, format_rankings(res.rankings));
  return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

struct EvalArgs {
  std::string rankings, gold, source_words, target_words, source_lang = "en", target_lang = "xx", format = "text", out,
      dispersion;
};

std::set<std::string> load_oov(const std::string& path, const std::string& lang) {
  std::set<std::string> out;
  if (!fs::exists(path)) return out;
  for (const auto& line : read_lines(path)) {
    const auto f = split(line, '\t');
    if (f.size() == 2 && f[0] == lang) out.insert(std::string(f[1]));
  }
  return out;
}

int cmd_eval(const EvalArgs& a) {
  const Lexicon src = load_word_list(a.source_words, a.source_lang);
  const Lexicon tgt = load_word_list(a.target_words, a.target_lang);
  const auto gold = load_translation_pairs(a.gold, src, tgt);

  std::vector<fs::path> files;
  if (fs::is_directory(a.rankings)) {
    for (const auto& e : fs::directory_iterator(a.rankings)) {
      const auto name = e.path().filename().string();
      if (e.is_regular_file() && e.path().extension() == ".tsv" && !name.ends_with(".oov.tsv")) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(a.rankings);
  }
  if (files.empty()) throw ConfigError("no ranking files in " + a.rankings);

  std::optional<DispersionReport> disp;
  if (!a.dispersion.empty()) {
    DispersionReport d;
    for (const auto& line : read_lines(a.dispersion)) {
      const auto f = split(line, '\t');
      if (f.size() != 3) continue;
      const auto pos = parse_pos(f[1]);
      const auto idx = pos ? src.index_of(normalize_word(f[0]), *pos) : std::nullopt;
      if (idx) d.words.push_back({src[*idx], parse_double(f[2], a.dispersion)});
    }
    disp = std::move(d);
  }

  std::vector<ReportRow> rows;
  for (const auto& f : files) {
    auto lists = parse_rankings(f.string(), src, tgt, f.stem().string());
    const auto oov_src = load_oov(f.string() + ".oov.tsv", src.language());
    const auto oov_tgt = load_oov(f.string() + ".oov.tsv", tgt.language());
    std::erase_if(lists, [&](const RankedList& l) {
      if (oov_src.contains(l.source.word)) return true;
      for (const auto& g : gold)
        if (g.source == l.source && oov_tgt.contains(g.target.word)) return true;
      return false;
    });
    rows.push_back({f.stem().string(), per_setting_report(lists, gold, src)});
    if (disp) {
      const auto c = dispersion_rank_correlation(*disp, lists, gold);
      std::cerr << f.stem().string() << ": spearman(dispersion, reciprocal rank) = " << format_fixed(c.rho, 4) << " over " << c.n
                << " words" << (c.degenerate ? " (degenerate)" : "") << "\n";
    }
  }
  write_output(a.out, render_report(rows, a.format == "csv" ? ReportFormat::kCsv : ReportFormat::kText));
  return 0;
}

// ---------------------------------------------------------------------------
// dispersion
// ---------------------------------------------------------------------------

struct DispersionArgs {
  DatasetFlags data;
  std::string kind = "cnn", out;
};

int cmd_dispersion(const DispersionArgs& a) {
  const auto loaded = load_dataset(a.data.paths(), kind_from(a.kind), true);
  const auto rep = dispersion_summary(loaded.dataset);
  std::string summary;
  for (Pos p : kAllPos) {
    const auto m = rep.mean_by_pos.at(p);
    summary += "mean d " + std::string(to_string(p)) + "\t" + (m ? format_fixed(*m, 4) : std::string("--")) + "\n";
  }
  const std::string table = format_dispersion(rep.sorted_descending());
  if (a.out.empty() || a.out == "-") {
    std::cout << table;
    std::cerr << summary;
  } else {
    write_output(a.out, table);
    std::cout << summary;
  }
  return 0;
}

// ---------------------------------------------------------------------------
// synth
// ---------------------------------------------------------------------------

struct SynthArgs {
  std::string preset, out;
  std::optional<std::size_t> nn, vb, adj, images, dim;
  std::optional<double> sigma_nn, sigma_vb, sigma_adj, shift;
};

int cmd_synth(const SynthArgs& a, std::uint64_t seed, std::size_t threads) {
  SynthConfig cfg;
  if (!a.preset.empty()) {
    auto p = synth_preset(a.preset);
    if (!p) throw ConfigError("unknown preset '" + a.preset + "'");
    cfg = *p;
  }
  if (a.nn) cfg.words_per_pos[0] = *a.nn;
  if (a.vb) cfg.words_per_pos[1] = *a.vb;
  if (a.adj) cfg.words_per_pos[2] = *a.adj;
  if (a.sigma_nn) cfg.noise_sigma[0] = *a.sigma_nn;
  if (a.sigma_vb) cfg.noise_sigma[1] = *a.sigma_vb;
  if (a.sigma_adj) cfg.noise_sigma[2] = *a.sigma_adj;
  if (a.images) cfg.images_per_word = *a.images;
  if (a.dim) cfg.dim = *a.dim;
  if (a.shift) cfg.cross_lingual_shift = *a.shift;
  cfg.seed = seed;
  try {
    cfg.validate();
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
  const auto corpus = generate(cfg, threads);
  write_dataset(corpus.source, (fs::path(a.out) / "source").string());
  write_dataset(corpus.target, (fs::path(a.out) / "target").string());
  write_translation_pairs(corpus.gold, (fs::path(a.out) / "pairs.tsv").string());
  std::cout << "synth: " << corpus.gold.size() << " word pairs, " << cfg.images_per_word << " images/word, dim " << cfg.dim << "\n";
  return 0;
}

// ---------------------------------------------------------------------------
// dedupe
// ---------------------------------------------------------------------------

struct DedupeArgs {
  DatasetFlags source, target;
  std::string pairs, kind = "cnn", out;
};

int cmd_dedupe(const DedupeArgs& a) {
  const bool with_features = !a.source.features.empty() && !a.target.features.empty();
  auto load = [&](const DatasetFlags& f) {
    if (with_features) return load_dataset(f.paths(), kind_from(a.kind)).dataset;
    Dataset ds;
    ds.lexicon = load_word_list(f.words, f.lang);
    ds.manifests = load_manifests(f.manifest);
    return ds;
  };
  const Dataset src = load(a.source);
  const Dataset tgt = load(a.target);
  const auto pairs = load_translation_pairs(a.pairs, src.lexicon, tgt.lexicon);
  const auto res = dedupe_cross_lingual(src, tgt, pairs);
  const fs::path out(a.out);
  fs::create_directories(out);
  write_manifests(res.source.manifests, (out / "source_manifest.tsv").string(), res.source.lexicon.words());
  write_manifests(res.target.manifests, (out / "target_manifest.tsv").string(), res.target.lexicon.words());
  write_translation_pairs(res.kept, (out / "pairs.tsv").string());
  write_translation_pairs(res.removed, (out / "removed_pairs.tsv").string());
  if (with_features) {
    write_feature_sets(res.source, (out / "source_features").string());
    write_feature_sets(res.target, (out / "target_features").string());
  }
  std::cout << "dedupe: kept " << res.kept.size() << " pairs, removed " << res.removed.size() << "; dropped "
            << res.images_removed_source << " source and " << res.images_removed_target << " target images\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"lexiscope: bilingual lexicon induction from image sets"};
  app.require_subcommand(1);
  std::uint64_t seed = 0;
  std::size_t threads = default_thread_count();
  app.add_option("--seed", seed, "seed for every random choice")->capture_default_str();
  app.add_option("--threads", threads, "worker threads (default: LEXISCOPE_THREADS or 1)")->check(CLI::PositiveNumber);

  const std::vector<std::string> kinds = {"color", "bovw", "cnn", "tex", "combi", "vispca", "combipca"};
  const std::vector<std::string> formats = {"text", "csv"};

  FeaturizeArgs fz;
  auto* featurize = app.add_subcommand("featurize", "write per-word LXFV feature files");
  featurize->add_option("--kind", fz.kind, "color|bovw|tex|combi|vispca|combipca")->required()->check(CLI::IsMember(kinds));
  featurize->add_option("--manifest", fz.manifest, "image manifest")->required()->check(CLI::ExistingFile);
  featurize->add_option("--out", fz.out, "output directory")->required();
  featurize->add_option("--images", fz.images, "directory of PPM images")->check(CLI::ExistingDirectory);
  featurize->add_option("--bins", fz.bins, "color bins per channel")->capture_default_str();
  featurize->add_option("--codebook", fz.codebook, "codebook LXFV file")->check(CLI::ExistingFile);
  featurize->add_option("--patch", fz.patch, "descriptor patch size")->capture_default_str();
  featurize->add_option("--stride", fz.stride, "descriptor grid stride")->capture_default_str();
  featurize->add_option("--embeddings", fz.embeddings, "embedding table (word v1 ... vd)")->check(CLI::ExistingFile);
  featurize->add_option("--cnn", fz.cnn, "directory of cnn LXFV files")->check(CLI::ExistingDirectory);
  featurize->add_option("--tex", fz.tex, "directory of tex LXFV files")->check(CLI::ExistingDirectory);
  featurize->add_option("--vispca", fz.vispca, "directory of vispca LXFV files")->check(CLI::ExistingDirectory);
  featurize->add_option("--target-manifest", fz.target_manifest, "target manifest (vispca)")->check(CLI::ExistingFile);
  featurize->add_option("--target-cnn", fz.target_cnn, "target cnn directory (vispca)")->check(CLI::ExistingDirectory);
  featurize->add_option("--target-out", fz.target_out, "target output directory (vispca)");
  featurize->add_option("--dim", fz.dim, "PCA output dimensionality")->capture_default_str();
  featurize->add_flag("--normalize", fz.normalize, "L2-normalize each part before concatenation");

  CodebookArgs cb;
  auto* codebook = app.add_subcommand("codebook", "cluster sampled descriptors into a codebook");
  codebook->add_option("--images", cb.images, "directory of PPM images")->required()->check(CLI::ExistingDirectory);
  codebook->add_option("--manifest", cb.manifest, "image manifest")->required()->check(CLI::ExistingFile);
  codebook->add_option("--out", cb.out, "output LXFV file")->required();
  codebook->add_option("--k", cb.k, "number of codewords")->capture_default_str();
  codebook->add_option("--max-descriptors", cb.max_descriptors, "descriptor sample size")->capture_default_str();
  codebook->add_option("--patch", cb.patch, "descriptor patch size")->capture_default_str();
  codebook->add_option("--stride", cb.stride, "descriptor grid stride")->capture_default_str();

  RankArgs rk;
  auto* rank = app.add_subcommand("rank", "rank target words for every source word");
  rk.source.add(rank, "source", "en");
  rk.target.add(rank, "target", "xx");
  rank->add_option("--kind", rk.kind, "feature kind of the inputs")->capture_default_str()->check(CLI::IsMember(kinds));
  rank->add_option("--method", rk.method, "avgmax|maxmax|setmean|setmax|knn|knnc")
      ->required()
      ->check(CLI::IsMember({"avgmax", "maxmax", "setmean", "setmax", "knn", "knnc"}));
  rank->add_option("--k", rk.k, "clusters for knnc")->capture_default_str()->check(CLI::PositiveNumber);
  rank->add_option("--out", rk.out, "output TSV (default stdout)");

  TrainEvalArgs te;
  auto* train_eval = app.add_subcommand("train-eval", "two-fold logistic-regression ranking");
  te.source.add(train_eval, "source", "en");
  te.target.add(train_eval, "target", "xx");
  train_eval->add_option("--pairs", te.pairs, "gold pairs TSV")->required()->check(CLI::ExistingFile);
  train_eval->add_option("--kind", te.kind, "feature kind of the inputs")->capture_default_str()->check(CLI::IsMember(kinds));
  train_eval->add_option("--lr", te.lr, "learning rate")->capture_default_str();
  train_eval->add_option("--epochs", te.epochs, "gradient steps")->capture_default_str();
  train_eval->add_option("--l2", te.l2, "L2 penalty")->capture_default_str();
  train_eval->add_option("--neg-ratio", te.neg_ratio, "negatives per positive, or 'all'")->capture_default_str();
  train_eval->add_option("--encoding", te.encoding, "pair feature: signed|abs")->capture_default_str()->check(CLI::IsMember({"signed", "abs"}));
  train_eval->add_option("--format", te.format, "text|csv")->capture_default_str()->check(CLI::IsMember(formats));
  train_eval->add_option("--out", te.out, "report file (default stdout)");
  train_eval->add_option("--rankings-out", te.rankings_out, "write the held-out rankings TSV");

  EvalArgs ev;
  auto* eval = app.add_subcommand("eval", "score rankings: MRR, P@1, P@10 per POS setting");
  eval->add_option("--rankings", ev.rankings, "ranking TSV or directory of them")->required()->check(CLI::ExistingPath);
  eval->add_option("--gold", ev.gold, "gold pairs TSV")->required()->check(CLI::ExistingFile);
  eval->add_option("--source-words", ev.source_words, "source word list")->required()->check(CLI::ExistingFile);
  eval->add_option("--target-words", ev.target_words, "target word list")->required()->check(CLI::ExistingFile);
  eval->add_option("--source-lang", ev.source_lang, "source language code")->capture_default_str();
  eval->add_option("--target-lang", ev.target_lang, "target language code")->capture_default_str();
  eval->add_option("--format", ev.format, "text|csv")->capture_default_str()->check(CLI::IsMember(formats));
  eval->add_option("--out", ev.out, "report file (default stdout)");
  eval->add_option("--dispersion", ev.dispersion, "dispersion TSV; reports its rank correlation")->check(CLI::ExistingFile);

  DispersionArgs dp;
  auto* dispersion = app.add_subcommand("dispersion", "per-word image dispersion, highest first");
  dispersion->add_option("--words", dp.data.words, "word list")->required()->check(CLI::ExistingFile);
  dispersion->add_option("--manifest", dp.data.manifest, "image manifest")->required()->check(CLI::ExistingFile);
  dispersion->add_option("--features", dp.data.features, "directory of LXFV files")->required()->check(CLI::ExistingDirectory);
  dispersion->add_option("--lang", dp.data.lang, "language code")->default_val("en");
  dispersion->add_option("--kind", dp.kind, "feature kind")->capture_default_str()->check(CLI::IsMember(kinds));
  dispersion->add_option("--out", dp.out, "output TSV (default stdout)");

  SynthArgs sy;
  auto* synth = app.add_subcommand("synth", "write a synthetic bilingual corpus");
  synth->add_option("--preset", sy.preset, "paper-pos|pos-collapse|planted")->check(CLI::IsMember({"paper-pos", "pos-collapse", "planted"}));
  synth->add_option("--out", sy.out, "output directory")->required();
  synth->add_option("--nn", sy.nn, "noun pairs");
  synth->add_option("--vb", sy.vb, "verb pairs");
  synth->add_option("--adj", sy.adj, "adjective pairs");
  synth->add_option("--sigma-nn", sy.sigma_nn, "noun noise sigma");
  synth->add_option("--sigma-vb", sy.sigma_vb, "verb noise sigma");
  synth->add_option("--sigma-adj", sy.sigma_adj, "adjective noise sigma");
  synth->add_option("--images", sy.images, "images per word");
  synth->add_option("--dim", sy.dim, "feature dimensionality");
  synth->add_option("--shift", sy.shift, "cross-lingual concept shift");

  DedupeArgs dd;
  auto* dedupe = app.add_subcommand("dedupe", "remove images shared across languages");
  dd.source.add(dedupe, "source", "en", false);
  dd.target.add(dedupe, "target", "xx", false);
  dedupe->add_option("--pairs", dd.pairs, "gold pairs TSV")->required()->check(CLI::ExistingFile);
  dedupe->add_option("--kind", dd.kind, "feature kind (with --*-features)")->capture_default_str()->check(CLI::IsMember(kinds));
  dedupe->add_option("--out", dd.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const CLI::App* failing = &app;
    for (auto* sub : app.get_subcommands()) failing = sub;
    std::cerr << failing->help();
    return kExitConfig;
  }

  try {
    if (*featurize) return cmd_featurize(fz, threads);
    if (*codebook) return cmd_codebook(cb, seed, threads);
    if (*rank) return cmd_rank(rk, seed, threads);
    if (*train_eval) return cmd_train_eval(te, seed);
    if (*eval) return cmd_eval(ev);
    if (*dispersion) return cmd_dispersion(dp);
    if (*synth) return cmd_synth(sy, seed, threads);
    if (*dedupe) return cmd_dedupe(dd);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.code() == ErrorCode::kBadConfig ? kExitConfig : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitConfig;
}
