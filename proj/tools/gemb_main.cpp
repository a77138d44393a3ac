// Copyright (C) 2026 The gemb authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License

// Command-line front end. Every subcommand is a thin wrapper over one
// library call: it loads inputs, runs the operation, writes the artifact,
// and prints a one-line summary (or a full report for evaluate/pipeline).

#include <CLI11.hpp>
#include <Eigen/Core>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "gemb/dataset.hpp"
#include "gemb/embedding.hpp"
#include "gemb/error.hpp"
#include "gemb/eval.hpp"
#include "gemb/gmm.hpp"
#include "gemb/hashing.hpp"
#include "gemb/model_io.hpp"
#include "gemb/pca.hpp"
#include "gemb/pipeline.hpp"
#include "gemb/synth.hpp"

namespace {

using namespace gemb;

int g_threads = 0;  // 0 = leave the backend default alone

void apply_threads() {
  if (g_threads > 0) Eigen::setNbThreads(g_threads);
}

FileFormat parse_format(const std::string& name) {
  if (name == "binary") return FileFormat::kBinary;
  if (name == "csv") return FileFormat::kCsv;
  throw ConfigError("format must be binary or csv, got '" + name + "'");
}

FeatureMatrix load_input(const std::string& path, const std::string& format,
                         const std::string& labels_path = "") {
  FeatureMatrix x = load_features(path, parse_format(format));
  if (!labels_path.empty()) {
    x.labels = load_labels(labels_path, x.rows());
    validate(x);
  }
  return x;
}

// Reports go to stdout and, when requested, to a file as well.
void emit(const std::string& text, const std::string& out_path) {
  std::cout << text;
  if (out_path.empty()) return;
  std::ofstream out(out_path);
  if (!out) throw IoError("cannot open " + out_path + " for writing");
  out << text;
  if (!out) throw IoError("write failed for " + out_path);
}

std::string fmt_double(double v, int precision = 4) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(precision);
  os << v;
  return os.str();
}

// Config-file keys exposed as flags. Each flag records a key=value line;
// the lines are appended after the (serialized) base config, so flags win.
void add_config_flags(CLI::App* cmd, std::vector<std::string>* overrides) {
  const auto capture = [overrides](const std::string& key) {
    return [overrides, key](const std::string& value) { overrides->push_back(key + "=" + value); };
  };
  cmd->add_option_function<std::string>("--gamma", capture("gamma"),
                                        "PCA variance-retention fraction in (0,1]");
  cmd->add_option_function<std::string>("--alpha", capture("alpha"),
                                        "power-normalization exponent in (0,1]");
  cmd->add_option_function<std::string>("--components", capture("n_components"),
                                        "GMM component count, or 'auto' (= bits)");
  cmd->add_option_function<std::string>("--covariance", capture("covariance"),
                                        "GMM covariance kind: full or diagonal");
  cmd->add_option_function<std::string>("--bits", capture("n_bits"), "hash code length");
  cmd->add_option_function<std::string>("--hasher", capture("hasher"), "itq, lsh, or none");
  cmd->add_option_function<std::string>("--em-max-iters", capture("em_max_iters"),
                                        "EM iteration cap");
  cmd->add_option_function<std::string>("--em-tol", capture("em_tol"),
                                        "EM relative log-likelihood tolerance");
  cmd->add_option_function<std::string>("--em-reg-covar", capture("em_reg_covar"),
                                        "covariance ridge, or 'auto'");
  cmd->add_option_function<std::string>("--em-n-init", capture("em_n_init"), "EM restarts");
  cmd->add_option_function<std::string>("--itq-iters", capture("itq_iters"),
                                        "ITQ alternation iterations");
  cmd->add_option_function<std::string>("--query-fraction", capture("query_fraction"),
                                        "per-class query fraction in (0,1)");
  cmd->add_option_function<std::string>("--stratified", capture("stratified"),
                                        "per-class split: true or false");
  cmd->add_option_function<std::string>("--fit-on-database-only", capture("fit_on_database_only"),
                                        "fit the embedding on the database split only");
  cmd->add_option_function<std::string>("--k", capture("eval_k"), "precision@k depth");
  cmd->add_option_function<std::string>("--radius", capture("eval_r"), "precision@r radius");
  cmd->add_option_function<std::string>("--map-cutoff", capture("map_cutoff"),
                                        "mAP ranking cutoff, or 'none' for the full list");
  cmd->add_option_function<std::string>("--trials", capture("trials"), "number of query resplits");
  cmd->add_option_function<std::string>("--seed", capture("seed"), "master seed");
}

PipelineConfig resolve_config(const std::string& config_path,
                              const std::vector<std::string>& overrides) {
  const PipelineConfig base = config_path.empty() ? PipelineConfig{} : load_config(config_path);
  std::string text = serialize_config(base);
  for (const std::string& line : overrides) text += line + "\n";
  return parse_config(text);
}

std::string render_reports(const PipelineResult& result, bool table) {
  std::string text;
  if (result.baseline) text += "[embedded]\n";
  text += table ? format_report_table(result.report) : format_report(result.report);
  if (result.baseline) {
    text += "[baseline]\n";
    text += table ? format_report_table(*result.baseline) : format_report(*result.baseline);
  }
  return text;
}

void print_bic_table(const FeatureMatrix& x, const std::vector<int>& components,
                     const std::string& covariance, EmConfig base) {
  std::vector<CovarianceKind> kinds;
  if (covariance == "full" || covariance == "both") kinds.push_back(CovarianceKind::kFull);
  if (covariance == "diagonal" || covariance == "both") kinds.push_back(CovarianceKind::kDiagonal);
  if (kinds.empty()) throw ConfigError("covariance must be full, diagonal, or both");
  std::cout << "N\tcovariance\tD\tbic\n";
  for (int n : components) {
    for (CovarianceKind kind : kinds) {
      EmConfig cfg = base;
      cfg.n_components = n;
      cfg.kind = kind;
      const EmResult result = fit_gmm(x, cfg);
      std::cout << n << "\t" << to_string(kind) << "\t" << x.cols() << "\t"
                << fmt_double(bic(result.model, x), 3) << "\n";
    }
  }
}

void register_synth(CLI::App& app) {
  auto* cmd = app.add_subcommand("synth", "Generate a labeled Gaussian-blob dataset");
  auto cfg = std::make_shared<SynthConfig>();
  auto out = std::make_shared<std::string>();
  auto labels_out = std::make_shared<std::string>();
  cmd->add_option("--out", *out, "output descriptor file (binary)")->required();
  cmd->add_option("--labels-out", *labels_out, "output label sidecar")->required();
  cmd->add_option("--classes", cfg->n_classes, "number of classes");
  cmd->add_option("--per-class", cfg->per_class, "samples per class");
  cmd->add_option("--dim", cfg->dim, "descriptor dimensionality");
  cmd->add_option("--class-sep", cfg->class_sep, "std of class centers per dimension");
  cmd->add_option("--noise", cfg->noise, "within-class std per dimension");
  cmd->add_option("--correlation", cfg->correlation, "within-class equicorrelation in [0,1)");
  cmd->add_option("--seed", cfg->seed, "generator seed");
  cmd->callback([cfg, out, labels_out]() {
    apply_threads();
    const FeatureMatrix x = make_blobs(*cfg);
    save_features(*out, x);
    save_labels(*labels_out, *x.labels);
    std::cout << "synth: m=" << x.rows() << " d=" << x.cols() << " classes=" << cfg->n_classes
              << " -> " << *out << ", " << *labels_out << "\n";
  });
}

void register_fit_pca(CLI::App& app) {
  auto* cmd = app.add_subcommand("fit-pca", "Fit a variance-retaining PCA projection");
  auto input = std::make_shared<std::string>();
  auto format = std::make_shared<std::string>("binary");
  auto gamma = std::make_shared<double>(0.85);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--input", *input, "descriptor file")->required();
  cmd->add_option("--format", *format, "binary or csv");
  cmd->add_option("--gamma", *gamma, "variance-retention fraction in (0,1]");
  cmd->add_option("--out", *out, "output model file")->required();
  cmd->callback([input, format, gamma, out]() {
    apply_threads();
    const FeatureMatrix x = load_input(*input, *format);
    const PcaModel model = fit_pca(x, *gamma);
    ModelFile models;
    models.pca = model;
    save_models(*out, models);
    const double total = model.eigenvalues.sum();
    const double kept = model.eigenvalues.head(model.d_out).sum();
    std::cout << "fit-pca: m=" << x.rows() << " d_in=" << model.d_in << " d_out=" << model.d_out
              << " retained=" << fmt_double(total > 0.0 ? kept / total : 1.0) << "\n";
  });
}

struct EmFlags {
  int max_iters = 200;
  double tol = 1e-5;
  double reg_covar = -1.0;  // negative = auto
  int n_init = 3;
  uint64_t seed = 0;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--max-iters", max_iters, "EM iteration cap");
    cmd->add_option("--tol", tol, "relative log-likelihood tolerance");
    cmd->add_option("--reg-covar", reg_covar, "covariance ridge (negative = auto)");
    cmd->add_option("--n-init", n_init, "EM restarts");
    cmd->add_option("--seed", seed, "initialization seed");
  }

  EmConfig to_config() const {
    EmConfig cfg;
    cfg.max_iters = max_iters;
    cfg.tol = tol;
    if (reg_covar >= 0.0) cfg.reg_covar = reg_covar;
    cfg.n_init = n_init;
    cfg.seed = seed;
    return cfg;
  }
};

// Loads a model file and returns its PCA stage, accepting either a bare
// pca section or the one nested in a gemb section.
PcaModel pca_stage_of(const std::string& path) {
  const ModelFile models = load_models(path);
  if (models.pca) return *models.pca;
  if (models.gemb) return models.gemb->pca;
  throw ConfigError(path + " contains no pca stage");
}

void register_fit_gmm(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "fit-gmm", "Fit a Gaussian mixture (optionally through a stored PCA projection)");
  auto input = std::make_shared<std::string>();
  auto format = std::make_shared<std::string>("binary");
  auto pca_path = std::make_shared<std::string>();
  auto components = std::make_shared<int>(8);
  auto covariance = std::make_shared<std::string>("full");
  auto alpha = std::make_shared<double>(0.15);
  auto out = std::make_shared<std::string>();
  auto sweep = std::make_shared<std::vector<int>>();
  auto em = std::make_shared<EmFlags>();
  cmd->add_option("--input", *input, "descriptor file")->required();
  cmd->add_option("--format", *format, "binary or csv");
  cmd->add_option("--models", *pca_path, "model file whose PCA stage projects the input first");
  cmd->add_option("--components", *components, "number of mixture components");
  cmd->add_option("--covariance", *covariance, "full or diagonal (both: only with --bic-sweep)");
  cmd->add_option("--alpha", *alpha,
                  "power-normalization exponent stored when a PCA stage is present");
  cmd->add_option("--out", *out, "output model file");
  cmd->add_option("--bic-sweep", *sweep, "fit each component count and print a BIC table")
      ->delimiter(',');
  em->add_to(cmd);
  cmd->callback([input, format, pca_path, components, covariance, alpha, out, sweep, em]() {
    apply_threads();
    FeatureMatrix x = load_input(*input, *format);
    std::optional<PcaModel> pca;
    if (!pca_path->empty()) {
      pca = pca_stage_of(*pca_path);
      x = project(*pca, x);
    }
    if (!sweep->empty()) {
      print_bic_table(x, *sweep, *covariance, em->to_config());
      return;
    }
    if (out->empty()) throw ConfigError("--out is required unless --bic-sweep is given");
    EmConfig cfg = em->to_config();
    cfg.n_components = *components;
    if (*covariance == "full")
      cfg.kind = CovarianceKind::kFull;
    else if (*covariance == "diagonal")
      cfg.kind = CovarianceKind::kDiagonal;
    else
      throw ConfigError("covariance must be full or diagonal, got '" + *covariance + "'");
    const EmResult result = fit_gmm(x, cfg);
    ModelFile models;
    models.gmm = result.model;
    if (pca) {
      models.pca = pca;
      GembModel gemb;
      gemb.pca = *pca;
      gemb.gmm = result.model;
      gemb.alpha = *alpha;
      gemb.gamma = pca->gamma;
      models.gemb = std::move(gemb);
    }
    save_models(*out, models);
    std::cout << "fit-gmm: m=" << x.rows() << " D=" << x.cols() << " N=" << cfg.n_components
              << " covariance=" << to_string(cfg.kind)
              << " ll=" << fmt_double(result.final_log_likelihood, 3)
              << " iters=" << result.n_iters
              << " bic=" << fmt_double(bic(result.model, x), 3) << "\n";
  });
}

void register_bic(CLI::App& app) {
  auto* cmd = app.add_subcommand("bic", "Fit GMMs over a component grid and print a BIC table");
  auto input = std::make_shared<std::string>();
  auto format = std::make_shared<std::string>("binary");
  auto pca_path = std::make_shared<std::string>();
  auto components = std::make_shared<std::vector<int>>();
  auto covariance = std::make_shared<std::string>("both");
  auto em = std::make_shared<EmFlags>();
  cmd->add_option("--input", *input, "descriptor file")->required();
  cmd->add_option("--format", *format, "binary or csv");
  cmd->add_option("--models", *pca_path, "model file whose PCA stage projects the input first");
  cmd->add_option("--components", *components, "component counts, comma separated")
      ->required()
      ->delimiter(',');
  cmd->add_option("--covariance", *covariance, "full, diagonal, or both");
  em->add_to(cmd);
  cmd->callback([input, format, pca_path, components, covariance, em]() {
    apply_threads();
    FeatureMatrix x = load_input(*input, *format);
    if (!pca_path->empty()) x = project(pca_stage_of(*pca_path), x);
    print_bic_table(x, *components, *covariance, em->to_config());
  });
}

void register_embed(CLI::App& app) {
  auto* cmd = app.add_subcommand("embed", "Apply a fitted embedding model to descriptors");
  auto input = std::make_shared<std::string>();
  auto format = std::make_shared<std::string>("binary");
  auto models_path = std::make_shared<std::string>();
  auto out = std::make_shared<std::string>();
  cmd->add_option("--input", *input, "descriptor file")->required();
  cmd->add_option("--format", *format, "binary or csv");
  cmd->add_option("--models", *models_path, "model file with an embedding section")->required();
  cmd->add_option("--out", *out, "output embedding file (binary descriptor format)")->required();
  cmd->callback([input, format, models_path, out]() {
    apply_threads();
    const FeatureMatrix x = load_input(*input, *format);
    const ModelFile models = load_models(*models_path);
    if (!models.gemb) throw ConfigError(*models_path + " contains no embedding section");
    const EmbeddingMatrix z = embed(*models.gemb, x);
    FeatureMatrix z_features;
    z_features.data = z.data;
    save_features(*out, z_features);
    std::cout << "embed: m=" << z.data.rows() << " N=" << z.data.cols()
              << " median_log10=" << fmt_double(median_log10(z)) << "\n";
  });
}

void register_fit_hash(CLI::App& app) {
  auto* cmd = app.add_subcommand("fit-hash", "Fit a binary hashing model (ITQ or LSH)");
  auto input = std::make_shared<std::string>();
  auto format = std::make_shared<std::string>("binary");
  auto hasher = std::make_shared<std::string>("itq");
  auto bits = std::make_shared<int>(32);
  auto iters = std::make_shared<int>(50);
  auto seed = std::make_shared<uint64_t>(0);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--input", *input, "feature or embedding file")->required();
  cmd->add_option("--format", *format, "binary or csv");
  cmd->add_option("--hasher", *hasher, "itq or lsh");
  cmd->add_option("--bits", *bits, "code length")->required();
  cmd->add_option("--iters", *iters, "ITQ alternation iterations");
  cmd->add_option("--seed", *seed, "rotation / hyperplane seed");
  cmd->add_option("--out", *out, "output model file")->required();
  cmd->callback([input, format, hasher, bits, iters, seed, out]() {
    apply_threads();
    const FeatureMatrix x = load_input(*input, *format);
    ModelFile models;
    if (*hasher == "itq") {
      ItqTrainLog log;
      models.itq = fit_itq(x.data, *bits, *iters, *seed, &log);
      save_models(*out, models);
      std::cout << "fit-itq: m=" << x.rows() << " d=" << x.cols() << " bits=" << *bits
                << " loss=" << (log.losses.empty() ? "n/a" : fmt_double(log.losses.back(), 3))
                << "\n";
    } else if (*hasher == "lsh") {
      models.lsh = fit_lsh(x.data, *bits, *seed);
      save_models(*out, models);
      std::cout << "fit-lsh: d=" << x.cols() << " bits=" << *bits << "\n";
    } else {
      throw ConfigError("hasher must be itq or lsh, got '" + *hasher + "'");
    }
  });
}

void register_encode(CLI::App& app) {
  auto* cmd = app.add_subcommand("encode", "Encode features into packed binary codes");
  auto input = std::make_shared<std::string>();
  auto format = std::make_shared<std::string>("binary");
  auto models_path = std::make_shared<std::string>();
  auto hasher = std::make_shared<std::string>("auto");
  auto out = std::make_shared<std::string>();
  cmd->add_option("--input", *input, "feature or embedding file")->required();
  cmd->add_option("--format", *format, "binary or csv");
  cmd->add_option("--models", *models_path, "model file with a hashing section")->required();
  cmd->add_option("--hasher", *hasher, "itq, lsh, or auto (the only hashing section present)");
  cmd->add_option("--out", *out, "output code file")->required();
  cmd->callback([input, format, models_path, hasher, out]() {
    apply_threads();
    const FeatureMatrix x = load_input(*input, *format);
    const ModelFile models = load_models(*models_path);
    BinaryCodes codes;
    if (*hasher == "auto") {
      if (models.itq && models.lsh)
        throw ConfigError(*models_path + " has both hashers; pass --hasher itq or lsh");
      if (models.itq)
        codes = encode(*models.itq, x.data);
      else if (models.lsh)
        codes = encode(*models.lsh, x.data);
      else
        throw ConfigError(*models_path + " contains no hashing section");
    } else if (*hasher == "itq") {
      if (!models.itq) throw ConfigError(*models_path + " contains no itq section");
      codes = encode(*models.itq, x.data);
    } else if (*hasher == "lsh") {
      if (!models.lsh) throw ConfigError(*models_path + " contains no lsh section");
      codes = encode(*models.lsh, x.data);
    } else {
      throw ConfigError("hasher must be itq, lsh, or auto, got '" + *hasher + "'");
    }
    save_codes(*out, codes);
    std::cout << "encode: m=" << codes.n_rows << " bits=" << codes.n_bits << " -> " << *out
              << "\n";
  });
}

void register_query(CLI::App& app) {
  auto* cmd = app.add_subcommand("query", "Rank database codes by Hamming distance to queries");
  auto database = std::make_shared<std::string>();
  auto queries = std::make_shared<std::string>();
  auto labels_path = std::make_shared<std::string>();
  auto top = std::make_shared<int64_t>(10);
  auto row = std::make_shared<int64_t>(-1);
  cmd->add_option("--database", *database, "database code file")->required();
  cmd->add_option("--queries", *queries, "query code file")->required();
  cmd->add_option("--labels", *labels_path, "database label sidecar (adds a label column)");
  cmd->add_option("--top", *top, "neighbors to print per query");
  cmd->add_option("--row", *row, "print a single query row (default: all)");
  cmd->callback([database, queries, labels_path, top, row]() {
    apply_threads();
    if (*top < 1) throw ConfigError("--top must be >= 1");
    RetrievalIndex index;
    index.codes = load_codes(*database);
    const BinaryCodes query_codes = load_codes(*queries);
    std::vector<int> labels;
    if (!labels_path->empty()) {
      labels = load_labels(*labels_path, index.codes.n_rows);
      index.labels = labels;
    } else {
      index.labels.assign(static_cast<size_t>(index.codes.n_rows), 0);
    }
    const int64_t begin = *row >= 0 ? *row : 0;
    const int64_t end = *row >= 0 ? *row + 1 : query_codes.n_rows;
    if (begin >= query_codes.n_rows) throw ConfigError("--row out of range");
    std::cout << "query\trank\tindex\tdist" << (labels.empty() ? "" : "\tlabel") << "\n";
    for (int64_t q = begin; q < end; ++q) {
      const auto order = rank_by_hamming(index, query_codes, q);
      const int64_t n = std::min<int64_t>(*top, static_cast<int64_t>(order.size()));
      for (int64_t r = 0; r < n; ++r) {
        const int64_t idx = order[static_cast<size_t>(r)];
        std::cout << q << "\t" << r << "\t" << idx << "\t"
                  << hamming_distance(index.codes, idx, query_codes, q);
        if (!labels.empty()) std::cout << "\t" << labels[static_cast<size_t>(idx)];
        std::cout << "\n";
      }
    }
  });
}

void register_evaluate(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "evaluate", "Score retrieval quality (code files, or descriptors with repeated trials)");
  auto db_codes = std::make_shared<std::string>();
  auto db_labels = std::make_shared<std::string>();
  auto query_codes = std::make_shared<std::string>();
  auto query_labels = std::make_shared<std::string>();
  auto features = std::make_shared<std::string>();
  auto labels = std::make_shared<std::string>();
  auto format = std::make_shared<std::string>("binary");
  auto config_path = std::make_shared<std::string>();
  auto overrides = std::make_shared<std::vector<std::string>>();
  auto compare = std::make_shared<bool>(false);
  auto table = std::make_shared<bool>(false);
  auto out = std::make_shared<std::string>();
  cmd->add_option("--database-codes", *db_codes, "database code file (code mode)");
  cmd->add_option("--database-labels", *db_labels, "database label sidecar (code mode)");
  cmd->add_option("--query-codes", *query_codes, "query code file (code mode)");
  cmd->add_option("--query-labels", *query_labels, "query label sidecar (code mode)");
  cmd->add_option("--features", *features, "descriptor file (descriptor mode: split + trials)");
  cmd->add_option("--labels", *labels, "label sidecar (descriptor mode)");
  cmd->add_option("--format", *format, "binary or csv");
  cmd->add_option("--config", *config_path, "pipeline config file (descriptor mode)");
  cmd->add_flag("--compare", *compare, "also run the hasher without the embedding");
  cmd->add_flag("--table", *table, "tab-separated output instead of key=value sections");
  cmd->add_option("--out", *out, "also write the report to this file");
  add_config_flags(cmd, overrides.get());
  cmd->callback([db_codes, db_labels, query_codes, query_labels, features, labels, format,
                 config_path, overrides, compare, table, out]() {
    apply_threads();
    if (!features->empty()) {
      if (labels->empty()) throw ConfigError("descriptor mode requires --labels");
      const FeatureMatrix x = load_input(*features, *format, *labels);
      const PipelineConfig cfg = resolve_config(*config_path, *overrides);
      PipelineOptions options;
      options.run_baseline = *compare;
      emit(render_reports(run_pipeline(x, cfg, options), *table), *out);
      return;
    }
    if (db_codes->empty() || db_labels->empty() || query_codes->empty() || query_labels->empty())
      throw ConfigError(
          "code mode needs --database-codes, --database-labels, --query-codes, --query-labels "
          "(or use --features for descriptor mode)");
    if (*compare) throw ConfigError("--compare requires descriptor mode (--features)");
    RetrievalIndex index;
    index.codes = load_codes(*db_codes);
    index.labels = load_labels(*db_labels, index.codes.n_rows);
    const BinaryCodes qc = load_codes(*query_codes);
    const std::vector<int> ql = load_labels(*query_labels, qc.n_rows);
    const PipelineConfig cfg = resolve_config(*config_path, *overrides);
    const EvalOptions eval_options{cfg.eval_k, cfg.eval_r, cfg.map_cutoff};
    std::vector<TrialResult> trial;
    trial.push_back(evaluate(index, qc, ql, eval_options));
    const EvalReport report = aggregate_trials(std::move(trial), cfg.eval_k, cfg.eval_r);
    emit(*table ? format_report_table(report) : format_report(report), *out);
  });
}

void register_pipeline(CLI::App& app) {
  auto* cmd = app.add_subcommand(
      "pipeline", "Run split -> embed -> hash -> evaluate end to end over repeated trials");
  auto features = std::make_shared<std::string>();
  auto labels = std::make_shared<std::string>();
  auto format = std::make_shared<std::string>("binary");
  auto config_path = std::make_shared<std::string>();
  auto overrides = std::make_shared<std::vector<std::string>>();
  auto baseline = std::make_shared<bool>(false);
  auto artifacts = std::make_shared<std::string>();
  auto table = std::make_shared<bool>(false);
  auto out = std::make_shared<std::string>();
  auto print_config = std::make_shared<bool>(false);
  cmd->add_option("--features", *features, "descriptor file")->required();
  cmd->add_option("--labels", *labels, "label sidecar")->required();
  cmd->add_option("--format", *format, "binary or csv");
  cmd->add_option("--config", *config_path, "config file; flags override its keys");
  cmd->add_flag("--baseline", *baseline, "also run the hasher without the embedding");
  cmd->add_option("--save-artifacts", *artifacts, "directory for per-trial intermediate files");
  cmd->add_flag("--table", *table, "tab-separated output instead of key=value sections");
  cmd->add_option("--out", *out, "also write the report to this file");
  cmd->add_flag("--print-config", *print_config, "print the resolved config and exit");
  add_config_flags(cmd, overrides.get());
  cmd->callback([features, labels, format, config_path, overrides, baseline, artifacts, table,
                 out, print_config]() {
    apply_threads();
    const PipelineConfig cfg = resolve_config(*config_path, *overrides);
    if (*print_config) {
      std::cout << serialize_config(cfg);
      return;
    }
    const FeatureMatrix x = load_input(*features, *format, *labels);
    PipelineOptions options;
    options.run_baseline = *baseline;
    options.artifacts_dir = *artifacts;
    emit(render_reports(run_pipeline(x, cfg, options), *table), *out);
  });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gemb: GMM posterior embeddings and binary hashing for descriptor retrieval"};
  app.require_subcommand(1);

  if (const char* env = std::getenv("GEMB_THREADS")) g_threads = std::atoi(env);
  app.add_option("--threads", g_threads, "linear-algebra thread count (or GEMB_THREADS)");

  register_synth(app);
  register_fit_pca(app);
  register_fit_gmm(app);
  register_bic(app);
  register_embed(app);
  register_fit_hash(app);
  register_encode(app);
  register_query(app);
  register_evaluate(app);
  register_pipeline(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const gemb::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
