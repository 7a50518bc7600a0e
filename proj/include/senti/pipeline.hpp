#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "senti/corpus.hpp"
#include "senti/errors.hpp"
#include "senti/hash.hpp"
#include "senti/pegasos.hpp"
#include "senti/polarity.hpp"
#include "senti/tokenize.hpp"
#include "senti/vocabulary.hpp"

namespace senti {

struct PipelineConfig {
  std::string business_path;
  std::string review_path;
  std::string out_dir = "run";
  std::uint64_t seed = 1;
  SplitRatio ratio;  // 3:2:5
  FeatureMode feature_mode = FeatureMode::bag_of_words;
  bool remove_stopwords = false;
  bool stem = false;
  std::string stopwords_path;
  double lambda = 0.0003;
  std::vector<double> lambda_grid;  // nonempty => sweep
  int max_epochs = 5;
  std::int64_t min_doc_freq = 1;
  int top_k = 5;
  std::string stoplist_path;
  std::string restaurant_category = "Restaurants";
  std::string polarity_corpus = "train";  // or "full"

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["business_path"] = business_path;
    j["review_path"] = review_path;
    j["out_dir"] = out_dir;
    j["seed"] = seed;
    j["split_ratio"] = std::to_string(ratio.train) + ":" +
                       std::to_string(ratio.validation) + ":" +
                       std::to_string(ratio.test);
    j["feature_mode"] = to_string(feature_mode);
    j["remove_stopwords"] = remove_stopwords;
    j["stem"] = stem;
    j["stopwords_path"] = stopwords_path;
    j["lambda"] = lambda;
    j["lambda_grid"] = lambda_grid;
    j["max_epochs"] = max_epochs;
    j["min_doc_freq"] = min_doc_freq;
    j["top_k"] = top_k;
    j["stoplist_path"] = stoplist_path;
    j["restaurant_category"] = restaurant_category;
    j["polarity_corpus"] = polarity_corpus;
    return j;
  }
};

namespace detail {

inline bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "1" || v == "on" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "off" || v == "no") return false;
  throw ConfigError("bad boolean for " + key + ": " + v);
}

inline std::vector<double> parse_double_list(const std::string& v) {
  std::vector<double> out;
  std::istringstream in(v);
  std::string piece;
  while (std::getline(in, piece, ','))
    if (!piece.empty()) out.push_back(std::stod(piece));
  return out;
}

inline SplitRatio parse_ratio(const std::string& v) {
  SplitRatio r;
  std::istringstream in(v);
  std::string a, b, c;
  if (!std::getline(in, a, ':') || !std::getline(in, b, ':') ||
      !std::getline(in, c))
    throw ConfigError("split_ratio must look like 3:2:5");
  r.train = std::stod(a);
  r.validation = std::stod(b);
  r.test = std::stod(c);
  if (!(r.train >= 0 && r.validation >= 0 && r.test > 0))
    throw ConfigError("split ratios must be positive");
  return r;
}

}  // namespace detail

inline void apply_config_entry(PipelineConfig& cfg, const std::string& key,
                               const std::string& value) {
  try {
    if (key == "business_path") cfg.business_path = value;
    else if (key == "review_path") cfg.review_path = value;
    else if (key == "out_dir") cfg.out_dir = value;
    else if (key == "seed") cfg.seed = std::stoull(value);
    else if (key == "split_ratio") cfg.ratio = detail::parse_ratio(value);
    else if (key == "feature_mode") cfg.feature_mode = feature_mode_from_string(value);
    else if (key == "remove_stopwords") cfg.remove_stopwords = detail::parse_bool(value, key);
    else if (key == "stem") cfg.stem = detail::parse_bool(value, key);
    else if (key == "stopwords_path") cfg.stopwords_path = value;
    else if (key == "lambda") cfg.lambda = std::stod(value);
    else if (key == "lambda_grid") cfg.lambda_grid = detail::parse_double_list(value);
    else if (key == "max_epochs") cfg.max_epochs = std::stoi(value);
    else if (key == "min_doc_freq") cfg.min_doc_freq = std::stoll(value);
    else if (key == "top_k") cfg.top_k = std::stoi(value);
    else if (key == "stoplist_path") cfg.stoplist_path = value;
    else if (key == "restaurant_category") cfg.restaurant_category = value;
    else if (key == "polarity_corpus") cfg.polarity_corpus = value;
    else throw ConfigError("unknown config key: " + key);
  } catch (const std::invalid_argument&) {
    throw ConfigError("bad value for " + key + ": " + value);
  } catch (const std::out_of_range&) {
    throw ConfigError("value out of range for " + key + ": " + value);
  }
}

// Flat key = value lines, '#' comments.
inline PipelineConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  PipelineConfig cfg;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line is not key = value: " + line);
    auto trim = [](std::string s) {
      std::size_t b = s.find_first_not_of(" \t");
      std::size_t e = s.find_last_not_of(" \t");
      return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
    };
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return cfg;
}

inline void validate_config(const PipelineConfig& cfg) {
  if (!(cfg.lambda > 0)) throw ConfigError("lambda must be > 0");
  if (cfg.max_epochs < 1) throw ConfigError("max_epochs must be >= 1");
  if (cfg.top_k < 1) throw ConfigError("top_k must be >= 1");
  if (cfg.min_doc_freq < 1) throw ConfigError("min_doc_freq must be >= 1");
  if (cfg.polarity_corpus != "train" && cfg.polarity_corpus != "full")
    throw ConfigError("polarity_corpus must be 'train' or 'full'");
  for (double l : cfg.lambda_grid)
    if (!(l > 0)) throw ConfigError("lambda grid entries must be > 0");
}

namespace paths {
inline std::string train_split(const PipelineConfig& c) { return c.out_dir + "/train.jsonl"; }
inline std::string validation_split(const PipelineConfig& c) { return c.out_dir + "/validation.jsonl"; }
inline std::string test_split(const PipelineConfig& c) { return c.out_dir + "/test.jsonl"; }
inline std::string ingest_summary(const PipelineConfig& c) { return c.out_dir + "/ingest_summary.json"; }
inline std::string vocab(const PipelineConfig& c) { return c.out_dir + "/vocab.tsv"; }
inline std::string vocab_categories(const PipelineConfig& c) { return c.out_dir + "/vocab.categories.tsv"; }
inline std::string model(const PipelineConfig& c) { return c.out_dir + "/model.tsv"; }
inline std::string manifest(const PipelineConfig& c) { return c.out_dir + "/manifest.json"; }
inline std::string timings(const PipelineConfig& c) { return c.out_dir + "/timings.json"; }
inline std::string report_json(const PipelineConfig& c) { return c.out_dir + "/report.json"; }
inline std::string report_csv(const PipelineConfig& c) { return c.out_dir + "/report.csv"; }
}  // namespace paths

namespace detail {

inline void write_json(const nlohmann::json& j, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << '\n';
}

inline nlohmann::json read_json_or_empty(const std::string& path) {
  std::ifstream in(path);
  if (!in) return nlohmann::json::object();
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  return j.is_discarded() ? nlohmann::json::object() : j;
}

// Wall-clock timings live in a sidecar so the manifest stays byte-identical
// across reruns.
class StageTimer {
 public:
  StageTimer(const PipelineConfig& cfg, std::string stage)
      : path_(paths::timings(cfg)),
        stage_(std::move(stage)),
        start_(std::chrono::steady_clock::now()) {}

  ~StageTimer() {
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - start_)
                        .count();
    try {
      nlohmann::json j = read_json_or_empty(path_);
      j[stage_ + "_ms"] = ms;
      write_json(j, path_);
    } catch (...) {
    }
  }

 private:
  std::string path_;
  std::string stage_;
  std::chrono::steady_clock::time_point start_;
};

inline void update_manifest(const PipelineConfig& cfg, const std::string& stage,
                            const nlohmann::json& payload) {
  nlohmann::json m = read_json_or_empty(paths::manifest(cfg));
  m["format"] = "senti-manifest v1";
  m["config"] = cfg.to_json();
  m[stage] = payload;
  write_json(m, paths::manifest(cfg));
}

inline Preprocessing make_preprocessing(const PipelineConfig& cfg) {
  Preprocessing prep;
  prep.remove_stopwords = cfg.remove_stopwords;
  prep.stem = cfg.stem;
  if (cfg.remove_stopwords) {
    if (cfg.stopwords_path.empty())
      throw ConfigError("remove_stopwords is on but stopwords_path is unset");
    prep.stopwords = load_word_list(cfg.stopwords_path);
  }
  return prep;
}

inline std::vector<LabeledVector> vectorize_split(
    const std::vector<ReviewRecord>& recs, const Vocabulary& vocab,
    FeatureMode mode, const Preprocessing& prep) {
  std::vector<LabeledVector> out;
  out.reserve(recs.size());
  for (const auto& r : recs)
    out.emplace_back(vectorize(tokenize(r.text, prep), vocab, mode), r.label);
  return out;
}

// Recount frequency tables over an arbitrary record slice with the term ids
// held fixed. Used when reports are scored over the full corpus.
inline Vocabulary recount_frequencies(const Vocabulary& vocab,
                                      const std::vector<ReviewRecord>& recs,
                                      const Preprocessing& prep) {
  Vocabulary out;
  out.term_to_id = vocab.term_to_id;
  out.terms = vocab.terms;
  out.doc_freq.assign(vocab.size(), 0);
  out.total_freq.assign(vocab.size(), 0);
  out.n_docs = static_cast<std::int64_t>(recs.size());
  for (const auto& rec : recs) {
    for (const auto& c : rec.categories) out.n_docs_per_category[c] += 1;
    std::unordered_map<TermId, std::int64_t> doc_counts;
    for (const auto& tok : tokenize(rec.text, prep)) {
      TermId id = out.id_of(tok);
      if (id >= 0) doc_counts[id] += 1;
    }
    for (const auto& [id, count] : doc_counts) {
      out.doc_freq[id] += 1;
      out.total_freq[id] += count;
      for (const auto& c : rec.categories) out.category_freq[c][id] += count;
    }
  }
  return out;
}

}  // namespace detail

struct IngestOutcome {
  IngestStats stats;
  std::size_t n_train = 0, n_validation = 0, n_test = 0;
};

inline IngestOutcome cmd_ingest(const PipelineConfig& cfg) {
  validate_config(cfg);
  std::filesystem::create_directories(cfg.out_dir);
  detail::StageTimer timer(cfg, "ingest");

  IngestStats stats;
  auto businesses = load_businesses(cfg.business_path, stats);
  auto restaurants = filter_restaurants(businesses, cfg.restaurant_category);
  stats.restaurants_kept = restaurants.size();
  auto reviews = load_reviews(cfg.review_path, stats);
  auto records = join_and_label(reviews, restaurants, stats);
  if (records.empty())
    throw ValidationError("join produced no labeled reviews");
  if (records.size() < 10)
    std::cerr << "warning: only " << records.size()
              << " reviews; 3:2:5 split is degenerate\n";

  SplitCorpus corpus =
      split(std::move(records), derive_seed(cfg.seed, "split"), cfg.ratio);
  save_reviews_jsonl(corpus.train, paths::train_split(cfg));
  save_reviews_jsonl(corpus.validation, paths::validation_split(cfg));
  save_reviews_jsonl(corpus.test, paths::test_split(cfg));

  nlohmann::json summary;
  summary["businesses_loaded"] = stats.businesses_loaded;
  summary["businesses_skipped"] = stats.businesses_skipped;
  summary["restaurants_kept"] = stats.restaurants_kept;
  summary["reviews_loaded"] = stats.reviews_loaded;
  summary["reviews_skipped"] = stats.reviews_skipped;
  summary["reviews_unmatched"] = stats.reviews_unmatched;
  summary["reviews_joined"] = stats.reviews_joined;
  summary["split_seed"] = corpus.seed;
  summary["n_train"] = corpus.train.size();
  summary["n_validation"] = corpus.validation.size();
  summary["n_test"] = corpus.test.size();
  summary["input_checksums"] = {
      {"business", checksum_file(cfg.business_path)},
      {"review", checksum_file(cfg.review_path)}};
  summary["split_checksums"] = {
      {"train", checksum_file(paths::train_split(cfg))},
      {"validation", checksum_file(paths::validation_split(cfg))},
      {"test", checksum_file(paths::test_split(cfg))}};
  detail::write_json(summary, paths::ingest_summary(cfg));
  detail::update_manifest(cfg, "ingest", summary);

  return {stats, corpus.train.size(), corpus.validation.size(),
          corpus.test.size()};
}

struct TrainOutcome {
  double lambda_used = 0.0;
  EvalResult validation;
  EvalResult test;
  std::optional<SweepResult> sweep;
};

inline TrainOutcome cmd_train(const PipelineConfig& cfg) {
  validate_config(cfg);
  detail::StageTimer timer(cfg, "train");

  auto train_recs = load_reviews_jsonl(paths::train_split(cfg));
  auto val_recs = load_reviews_jsonl(paths::validation_split(cfg));
  auto test_recs = load_reviews_jsonl(paths::test_split(cfg));
  if (train_recs.empty() || val_recs.empty() || test_recs.empty())
    throw ValidationError("one or more splits are empty; rerun ingest");

  const Preprocessing prep = detail::make_preprocessing(cfg);
  Vocabulary vocab = build_vocabulary(train_recs, prep, cfg.min_doc_freq);
  save_vocabulary(vocab, paths::vocab(cfg), paths::vocab_categories(cfg));
  const std::string vhash = vocabulary_hash(vocab);

  auto train_vecs = detail::vectorize_split(train_recs, vocab, cfg.feature_mode, prep);
  auto val_vecs = detail::vectorize_split(val_recs, vocab, cfg.feature_mode, prep);
  auto test_vecs = detail::vectorize_split(test_recs, vocab, cfg.feature_mode, prep);

  TrainConfig tc;
  tc.max_epochs = cfg.max_epochs;
  tc.seed = derive_seed(cfg.seed, "train");

  TrainOutcome outcome;
  if (!cfg.lambda_grid.empty()) {
    outcome.sweep = sweep_lambda(train_vecs, val_vecs, cfg.lambda_grid, tc,
                                 cfg.feature_mode, vhash);
    outcome.lambda_used = outcome.sweep->best_lambda;
  } else {
    outcome.lambda_used = cfg.lambda;
  }
  tc.lambda = outcome.lambda_used;
  LinearModel model = train(train_vecs, tc, cfg.feature_mode, vhash);
  outcome.validation = evaluate(model, val_vecs);
  outcome.test = evaluate(model, test_vecs);
  save_model(model, paths::model(cfg));

  nlohmann::json j;
  j["lambda_used"] = outcome.lambda_used;
  j["vocab_hash"] = vhash;
  j["vocab_size"] = vocab.size();
  j["model_checksum"] = checksum_file(paths::model(cfg));
  auto eval_json = [](const EvalResult& e) {
    return nlohmann::json{{"accuracy", e.accuracy}, {"error", e.error},
                          {"n", e.n_samples},       {"tp", e.tp},
                          {"fp", e.fp},             {"tn", e.tn},
                          {"fn", e.fn}};
  };
  j["validation"] = eval_json(outcome.validation);
  j["test"] = eval_json(outcome.test);
  if (outcome.sweep) {
    j["best_lambda"] = outcome.sweep->best_lambda;
    nlohmann::json table = nlohmann::json::array();
    for (const auto& row : outcome.sweep->table)
      table.push_back({{"lambda", row.lambda},
                       {"validation_accuracy", row.validation.accuracy},
                       {"validation_error", row.validation.error}});
    j["sweep_table"] = table;
  }
  detail::update_manifest(cfg, "train", j);
  return outcome;
}

// Same wiring as cmd_train with the grid forced on.
inline TrainOutcome cmd_sweep(PipelineConfig cfg) {
  if (cfg.lambda_grid.empty()) cfg.lambda_grid = default_lambda_grid();
  return cmd_train(cfg);
}

inline PolarityReport cmd_report(const PipelineConfig& cfg) {
  validate_config(cfg);
  detail::StageTimer timer(cfg, "report");

  LinearModel model = load_model(paths::model(cfg));
  Vocabulary vocab =
      load_vocabulary(paths::vocab(cfg), paths::vocab_categories(cfg));
  if (!model.vocab_hash.empty() && model.vocab_hash != vocabulary_hash(vocab))
    throw ValidationError("model was trained against a different vocabulary");

  std::unordered_set<std::string> stoplist;
  std::string stoplist_id = "none";
  if (!cfg.stoplist_path.empty()) {
    stoplist = load_word_list(cfg.stoplist_path);
    stoplist_id =
        std::filesystem::path(cfg.stoplist_path).stem().string() + "-" +
        checksum_file(cfg.stoplist_path).substr(0, 8);
  }

  const auto scores = word_scores(model, vocab);
  const Vocabulary* stats = &vocab;
  Vocabulary full_stats;
  if (cfg.polarity_corpus == "full") {
    std::vector<ReviewRecord> all = load_reviews_jsonl(paths::train_split(cfg));
    for (auto&& r : load_reviews_jsonl(paths::validation_split(cfg))) all.push_back(std::move(r));
    for (auto&& r : load_reviews_jsonl(paths::test_split(cfg))) all.push_back(std::move(r));
    full_stats = detail::recount_frequencies(vocab, all,
                                             detail::make_preprocessing(cfg));
    stats = &full_stats;
  }

  PolarityReport report;
  report.k = cfg.top_k;
  report.stoplist_id = stoplist_id;
  report.model_hash = checksum_file(paths::model(cfg));
  report.vocab_hash = vocabulary_hash(vocab);
  report.feature_mode = to_string(model.feature_mode);

  std::vector<PolarityEntry> overall;
  overall.reserve(scores.size());
  for (const auto& s : scores) overall.push_back(overall_polarity(s, *stats));
  report.scopes.push_back(
      top_k_report(filter_generic(overall, stoplist), cfg.top_k));
  for (const auto& [cat, n] : stats->n_docs_per_category) {
    std::vector<PolarityEntry> entries;
    entries.reserve(scores.size());
    for (const auto& s : scores)
      entries.push_back(category_polarity(s, cat, *stats));
    report.scopes.push_back(
        top_k_report(filter_generic(entries, stoplist), cfg.top_k, cat));
  }

  save_report_json(report, paths::report_json(cfg));
  save_report_csv(report, paths::report_csv(cfg));
  detail::update_manifest(cfg, "report",
                          {{"model_hash", report.model_hash},
                           {"vocab_hash", report.vocab_hash},
                           {"stoplist_id", report.stoplist_id},
                           {"k", report.k}});
  return report;
}

// 0 success, 2 config error, 3 I/O error, 4 validation failure
inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e)) return 2;
  if (dynamic_cast<const IoError*>(&e)) return 3;
  if (dynamic_cast<const ValidationError*>(&e)) return 4;
  return 1;
}

}  // namespace senti
