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

#include "gemb/pipeline.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "gemb/embedding.hpp"
#include "gemb/error.hpp"
#include "gemb/hashing.hpp"
#include "gemb/model_io.hpp"
#include "gemb/rng.hpp"

namespace gemb {

namespace {

// Shortest decimal form that round-trips, so serialize/parse is exact and
// config files stay readable.
std::string format_double(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc{}) throw NumericalError("cannot format double");
  return std::string(buf, ptr);
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not a number: '" + value + "'");
  }
}

int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const int64_t v = std::stoll(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an integer: '" + value + "'");
  }
}

uint64_t parse_uint(const std::string& key, const std::string& value) {
  try {
    size_t pos = 0;
    const uint64_t v = std::stoull(value, &pos);
    if (pos != value.size() || value[0] == '-') throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key + ": not an unsigned integer: '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true") return true;
  if (value == "false") return false;
  throw ConfigError(key + ": expected true or false, got '" + value + "'");
}

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

void apply_key(PipelineConfig& cfg, const std::string& key, const std::string& value) {
  if (key == "gamma") {
    cfg.gamma = parse_double(key, value);
  } else if (key == "alpha") {
    cfg.alpha = parse_double(key, value);
  } else if (key == "n_components") {
    cfg.n_components = value == "auto" ? 0 : static_cast<int>(parse_int(key, value));
  } else if (key == "covariance") {
    if (value == "full")
      cfg.covariance = CovarianceKind::kFull;
    else if (value == "diagonal")
      cfg.covariance = CovarianceKind::kDiagonal;
    else
      throw ConfigError("covariance: expected full or diagonal, got '" + value + "'");
  } else if (key == "n_bits") {
    cfg.n_bits = static_cast<int>(parse_int(key, value));
  } else if (key == "hasher") {
    if (value == "itq")
      cfg.hasher = HasherKind::kItq;
    else if (value == "lsh")
      cfg.hasher = HasherKind::kLsh;
    else if (value == "none")
      cfg.hasher = HasherKind::kNone;
    else
      throw ConfigError("hasher: expected itq, lsh, or none, got '" + value + "'");
  } else if (key == "em_max_iters") {
    cfg.em_max_iters = static_cast<int>(parse_int(key, value));
  } else if (key == "em_tol") {
    cfg.em_tol = parse_double(key, value);
  } else if (key == "em_reg_covar") {
    if (value == "auto")
      cfg.em_reg_covar.reset();
    else
      cfg.em_reg_covar = parse_double(key, value);
  } else if (key == "em_n_init") {
    cfg.em_n_init = static_cast<int>(parse_int(key, value));
  } else if (key == "itq_iters") {
    cfg.itq_iters = static_cast<int>(parse_int(key, value));
  } else if (key == "query_fraction") {
    cfg.query_fraction = parse_double(key, value);
  } else if (key == "stratified") {
    cfg.stratified = parse_bool(key, value);
  } else if (key == "fit_on_database_only") {
    cfg.fit_on_database_only = parse_bool(key, value);
  } else if (key == "eval_k") {
    cfg.eval_k = parse_int(key, value);
  } else if (key == "eval_r") {
    cfg.eval_r = static_cast<int>(parse_int(key, value));
  } else if (key == "map_cutoff") {
    if (value == "none")
      cfg.map_cutoff.reset();
    else
      cfg.map_cutoff = parse_int(key, value);
  } else if (key == "trials") {
    cfg.trials = static_cast<int>(parse_int(key, value));
  } else if (key == "seed") {
    cfg.seed = parse_uint(key, value);
  } else {
    throw ConfigError("unknown config key '" + key + "'");
  }
}

void validate_config(const PipelineConfig& cfg) {
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) throw ConfigError("gamma must be in (0, 1]");
  if (!(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) throw ConfigError("alpha must be in (0, 1]");
  if (cfg.n_components < 0) throw ConfigError("n_components must be positive or auto");
  if (cfg.n_bits < 1) throw ConfigError("n_bits must be >= 1");
  if (cfg.em_max_iters < 1) throw ConfigError("em_max_iters must be >= 1");
  if (!(cfg.em_tol > 0.0)) throw ConfigError("em_tol must be > 0");
  if (cfg.em_reg_covar && *cfg.em_reg_covar < 0.0)
    throw ConfigError("em_reg_covar must be >= 0 or auto");
  if (cfg.em_n_init < 1) throw ConfigError("em_n_init must be >= 1");
  if (cfg.itq_iters < 0) throw ConfigError("itq_iters must be >= 0");
  if (!(cfg.query_fraction > 0.0 && cfg.query_fraction < 1.0))
    throw ConfigError("query_fraction must be in (0, 1)");
  if (cfg.eval_k < 1) throw ConfigError("eval_k must be >= 1");
  if (cfg.eval_r < 0) throw ConfigError("eval_r must be >= 0");
  if (cfg.map_cutoff && *cfg.map_cutoff < 1) throw ConfigError("map_cutoff must be >= 1 or none");
  if (cfg.trials < 1) throw ConfigError("trials must be >= 1");
  if (cfg.hasher == HasherKind::kItq && cfg.resolved_components() < cfg.n_bits)
    throw ConfigError("ITQ needs an embedding of at least n_bits dimensions; n_components (" +
                      std::to_string(cfg.resolved_components()) + ") < n_bits (" +
                      std::to_string(cfg.n_bits) + ")");
}

FeatureMatrix to_features(const Eigen::MatrixXd& data, const std::vector<int>& labels) {
  FeatureMatrix out;
  out.data = data;
  out.labels = labels;
  return out;
}

struct TrialArtifacts {
  std::filesystem::path dir;
  int trial = 0;
  bool enabled = false;

  std::string path(const std::string& stem) const {
    return (dir / ("trial" + std::to_string(trial) + "." + stem)).string();
  }

  void features(const std::string& stem, const FeatureMatrix& x) const {
    if (!enabled) return;
    save_features(path(stem + ".features.bin"), x);
    if (x.labels) save_labels(path(stem + ".labels.txt"), *x.labels);
  }

  void embedding(const std::string& stem, const EmbeddingMatrix& z,
                 const std::vector<int>& labels) const {
    if (!enabled) return;
    save_features(path(stem + ".features.bin"), to_features(z.data, labels));
    save_labels(path(stem + ".labels.txt"), labels);
  }

  void codes(const std::string& stem, const BinaryCodes& c) const {
    if (!enabled) return;
    save_codes(path(stem + ".codes.bin"), c);
  }

  void models(const std::string& stem, const ModelFile& m) const {
    if (!enabled) return;
    save_models(path(stem + ".models.bin"), m);
  }
};

}  // namespace

const char* to_string(HasherKind kind) {
  switch (kind) {
    case HasherKind::kItq: return "itq";
    case HasherKind::kLsh: return "lsh";
    case HasherKind::kNone: return "none";
  }
  return "?";
}

const char* to_string(CovarianceKind kind) {
  return kind == CovarianceKind::kFull ? "full" : "diagonal";
}

PipelineConfig parse_config(const std::string& text) {
  PipelineConfig cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    apply_key(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  validate_config(cfg);
  return cfg;
}

PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const PipelineConfig& cfg) {
  std::ostringstream os;
  os << "gamma=" << format_double(cfg.gamma) << "\n";
  os << "alpha=" << format_double(cfg.alpha) << "\n";
  os << "n_components="
     << (cfg.n_components > 0 ? std::to_string(cfg.n_components) : std::string("auto")) << "\n";
  os << "covariance=" << to_string(cfg.covariance) << "\n";
  os << "n_bits=" << cfg.n_bits << "\n";
  os << "hasher=" << to_string(cfg.hasher) << "\n";
  os << "em_max_iters=" << cfg.em_max_iters << "\n";
  os << "em_tol=" << format_double(cfg.em_tol) << "\n";
  os << "em_reg_covar="
     << (cfg.em_reg_covar ? format_double(*cfg.em_reg_covar) : std::string("auto")) << "\n";
  os << "em_n_init=" << cfg.em_n_init << "\n";
  os << "itq_iters=" << cfg.itq_iters << "\n";
  os << "query_fraction=" << format_double(cfg.query_fraction) << "\n";
  os << "stratified=" << (cfg.stratified ? "true" : "false") << "\n";
  os << "fit_on_database_only=" << (cfg.fit_on_database_only ? "true" : "false") << "\n";
  os << "eval_k=" << cfg.eval_k << "\n";
  os << "eval_r=" << cfg.eval_r << "\n";
  os << "map_cutoff=" << (cfg.map_cutoff ? std::to_string(*cfg.map_cutoff) : std::string("none"))
     << "\n";
  os << "trials=" << cfg.trials << "\n";
  os << "seed=" << cfg.seed << "\n";
  return os.str();
}

PipelineResult run_pipeline(const FeatureMatrix& data, const PipelineConfig& cfg,
                            const PipelineOptions& options) {
  validate_config(cfg);
  validate(data);
  if (!data.has_labels()) throw DataError("pipeline requires a labeled dataset");
  if (cfg.hasher == HasherKind::kNone && options.artifacts_dir.empty())
    throw ConfigError("hasher=none writes embeddings only; an artifacts directory is required");
  if (!options.artifacts_dir.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(options.artifacts_dir, ec);
    if (ec) throw IoError("cannot create " + options.artifacts_dir + ": " + ec.message());
  }

  const auto fit_hasher_and_evaluate = [&](const Eigen::MatrixXd& db, const Eigen::MatrixXd& qy,
                                           const std::vector<int>& db_labels,
                                           const std::vector<int>& query_labels,
                                           uint64_t trial_seed, const TrialArtifacts& artifacts,
                                           const std::string& stem) {
    BinaryCodes db_codes, query_codes;
    ModelFile models;
    if (cfg.hasher == HasherKind::kItq) {
      const ItqModel itq = fit_itq(db, cfg.n_bits, cfg.itq_iters,
                                   rng::derive_seed(trial_seed, "itq"));
      db_codes = encode(itq, db);
      query_codes = encode(itq, qy);
      models.itq = itq;
    } else {
      const LshModel lsh = fit_lsh(db, cfg.n_bits, rng::derive_seed(trial_seed, "lsh"));
      db_codes = encode(lsh, db);
      query_codes = encode(lsh, qy);
      models.lsh = lsh;
    }
    artifacts.models(stem + ".hasher", models);
    artifacts.codes(stem + ".database", db_codes);
    artifacts.codes(stem + ".query", query_codes);
    const EvalOptions eval_options{cfg.eval_k, cfg.eval_r, cfg.map_cutoff};
    return evaluate(RetrievalIndex{std::move(db_codes), db_labels}, query_codes, query_labels,
                    eval_options);
  };

  std::vector<TrialResult> embedded_trials;
  std::vector<TrialResult> baseline_trials;

  for (int t = 0; t < cfg.trials; ++t) {
    const uint64_t trial_seed = cfg.seed + static_cast<uint64_t>(t);
    TrialArtifacts artifacts{options.artifacts_dir, t, !options.artifacts_dir.empty()};

    const Split parts =
        split(data, SplitSpec{cfg.query_fraction, rng::derive_seed(trial_seed, "split"),
                              cfg.stratified});
    artifacts.features("database", parts.database);
    artifacts.features("query", parts.query);
    const std::vector<int>& db_labels = *parts.database.labels;
    const std::vector<int>& query_labels = *parts.query.labels;

    EmConfig em;
    em.max_iters = cfg.em_max_iters;
    em.tol = cfg.em_tol;
    em.reg_covar = cfg.em_reg_covar;
    em.n_init = cfg.em_n_init;
    em.seed = rng::derive_seed(trial_seed, "kmeans");
    const GembModel gemb =
        fit_gemb(cfg.fit_on_database_only ? parts.database : data, cfg.gamma,
                 cfg.resolved_components(), cfg.covariance, cfg.alpha, em);
    ModelFile gemb_file;
    gemb_file.gemb = gemb;
    artifacts.models("gemb", gemb_file);

    const EmbeddingMatrix db_emb = embed(gemb, parts.database);
    const EmbeddingMatrix query_emb = embed(gemb, parts.query);
    artifacts.embedding("database.embedded", db_emb, db_labels);
    artifacts.embedding("query.embedded", query_emb, query_labels);

    if (cfg.hasher != HasherKind::kNone) {
      embedded_trials.push_back(fit_hasher_and_evaluate(db_emb.data, query_emb.data, db_labels,
                                                        query_labels, trial_seed, artifacts,
                                                        "embedded"));
      if (options.run_baseline)
        baseline_trials.push_back(fit_hasher_and_evaluate(parts.database.data, parts.query.data,
                                                          db_labels, query_labels, trial_seed,
                                                          artifacts, "baseline"));
    }
  }

  PipelineResult result;
  if (!embedded_trials.empty())
    result.report = aggregate_trials(std::move(embedded_trials), cfg.eval_k, cfg.eval_r);
  if (!baseline_trials.empty())
    result.baseline = aggregate_trials(std::move(baseline_trials), cfg.eval_k, cfg.eval_r);
  return result;
}

}  // namespace gemb
