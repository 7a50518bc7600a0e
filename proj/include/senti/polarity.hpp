#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "senti/errors.hpp"
#include "senti/pegasos.hpp"
#include "senti/vocabulary.hpp"

namespace senti {

struct WordScore {
  std::string term;
  double score = 0.0;
};

struct PolarityEntry {
  std::string term;
  std::optional<std::string> category;  // absent => overall
  double polarity = 0.0;
};

struct ScopeReport {
  std::optional<std::string> category;
  std::vector<PolarityEntry> positive;  // descending polarity
  std::vector<PolarityEntry> negative;  // ascending polarity
};

struct PolarityReport {
  int k = 5;
  std::string stoplist_id;
  std::string model_hash;
  std::string vocab_hash;
  std::string feature_mode;
  std::vector<ScopeReport> scopes;  // overall first, then categories
};

// One score per term the trainer actually touched; untouched terms score 0
// and are omitted. Output is ordered by term id.
inline std::vector<WordScore> word_scores(const LinearModel& model,
                                          const Vocabulary& vocab) {
  if (!model.vocab_hash.empty() && model.vocab_hash != vocabulary_hash(vocab))
    throw ValidationError("model/vocabulary hash mismatch");
  std::vector<std::pair<TermId, double>> rows;
  rows.reserve(model.weights.size());
  for (const auto& [id, w] : model.weights) {
    if (id < 0 || id >= static_cast<TermId>(vocab.size()))
      throw ValidationError("model weight id outside vocabulary");
    rows.emplace_back(id, model.scale * w);
  }
  std::sort(rows.begin(), rows.end());
  std::vector<WordScore> out;
  out.reserve(rows.size());
  for (const auto& [id, w] : rows) out.push_back({vocab.terms[id], w});
  return out;
}

inline PolarityEntry overall_polarity(const WordScore& score,
                                      const Vocabulary& vocab) {
  if (vocab.n_docs <= 0) throw ValidationError("vocabulary has zero reviews");
  TermId id = vocab.id_of(score.term);
  const double freq = id < 0 ? 0.0 : static_cast<double>(vocab.total_freq[id]);
  return {score.term, std::nullopt,
          score.score * freq / static_cast<double>(vocab.n_docs)};
}

inline PolarityEntry category_polarity(const WordScore& score,
                                       const std::string& category,
                                       const Vocabulary& vocab) {
  auto it = vocab.n_docs_per_category.find(category);
  if (it == vocab.n_docs_per_category.end() || it->second <= 0)
    throw ValidationError("unknown category: " + category);
  double freq = 0.0;
  auto cat_it = vocab.category_freq.find(category);
  if (cat_it != vocab.category_freq.end()) {
    TermId id = vocab.id_of(score.term);
    auto f = cat_it->second.find(id);
    if (f != cat_it->second.end()) freq = static_cast<double>(f->second);
  }
  return {score.term, category,
          score.score * freq / static_cast<double>(it->second)};
}

inline std::vector<PolarityEntry> filter_generic(
    const std::vector<PolarityEntry>& entries,
    const std::unordered_set<std::string>& stoplist) {
  std::vector<PolarityEntry> out;
  out.reserve(entries.size());
  for (const auto& e : entries)
    if (!stoplist.count(e.term)) out.push_back(e);
  return out;
}

// k largest positive polarities descending, k most negative ascending.
// Equal polarities order lexicographically by term.
inline ScopeReport top_k_report(const std::vector<PolarityEntry>& entries,
                                int k,
                                std::optional<std::string> category = {}) {
  if (k < 1) throw ConfigError("k must be >= 1");
  ScopeReport scope;
  scope.category = std::move(category);
  std::vector<PolarityEntry> pos, neg;
  for (const auto& e : entries) {
    if (e.polarity > 0) pos.push_back(e);
    else if (e.polarity < 0) neg.push_back(e);
  }
  auto by_desc = [](const PolarityEntry& a, const PolarityEntry& b) {
    if (a.polarity != b.polarity) return a.polarity > b.polarity;
    return a.term < b.term;
  };
  auto by_asc = [](const PolarityEntry& a, const PolarityEntry& b) {
    if (a.polarity != b.polarity) return a.polarity < b.polarity;
    return a.term < b.term;
  };
  std::sort(pos.begin(), pos.end(), by_desc);
  std::sort(neg.begin(), neg.end(), by_asc);
  if (pos.size() > static_cast<std::size_t>(k)) pos.resize(k);
  if (neg.size() > static_cast<std::size_t>(k)) neg.resize(k);
  scope.positive = std::move(pos);
  scope.negative = std::move(neg);
  return scope;
}

inline PolarityReport build_report(const LinearModel& model,
                                   const Vocabulary& vocab,
                                   const std::unordered_set<std::string>& stoplist,
                                   int k, const std::string& stoplist_id) {
  PolarityReport report;
  report.k = k;
  report.stoplist_id = stoplist_id;
  report.vocab_hash = vocabulary_hash(vocab);
  report.feature_mode = to_string(model.feature_mode);
  const auto scores = word_scores(model, vocab);

  std::vector<PolarityEntry> overall;
  overall.reserve(scores.size());
  for (const auto& s : scores) overall.push_back(overall_polarity(s, vocab));
  report.scopes.push_back(top_k_report(filter_generic(overall, stoplist), k));

  for (const auto& [cat, n] : vocab.n_docs_per_category) {
    std::vector<PolarityEntry> entries;
    entries.reserve(scores.size());
    for (const auto& s : scores)
      entries.push_back(category_polarity(s, cat, vocab));
    report.scopes.push_back(
        top_k_report(filter_generic(entries, stoplist), k, cat));
  }
  return report;
}

inline nlohmann::json report_to_json(const PolarityReport& r) {
  nlohmann::json j;
  j["format"] = "senti-report v1";
  j["k"] = r.k;
  j["stoplist_id"] = r.stoplist_id;
  j["model_hash"] = r.model_hash;
  j["vocab_hash"] = r.vocab_hash;
  j["feature_mode"] = r.feature_mode;
  j["scopes"] = nlohmann::json::array();
  for (const auto& s : r.scopes) {
    nlohmann::json js;
    js["scope"] = s.category ? *s.category : "overall";
    auto dump = [](const std::vector<PolarityEntry>& v) {
      nlohmann::json a = nlohmann::json::array();
      for (const auto& e : v)
        a.push_back({{"term", e.term}, {"polarity", e.polarity}});
      return a;
    };
    js["positive"] = dump(s.positive);
    js["negative"] = dump(s.negative);
    j["scopes"].push_back(js);
  }
  return j;
}

inline void save_report_json(const PolarityReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << report_to_json(r).dump(2) << '\n';
}

inline void save_report_csv(const PolarityReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "# senti-report v1, mode=" << r.feature_mode
      << ", stoplist=" << r.stoplist_id << ", vocab=" << r.vocab_hash << '\n';
  out << "scope,rank,term,polarity,sign\n";
  for (const auto& s : r.scopes) {
    const std::string scope = s.category ? *s.category : "overall";
    auto rows = [&](const std::vector<PolarityEntry>& v, const char* sign) {
      int rank = 1;
      for (const auto& e : v)
        out << '"' << scope << "\"," << rank++ << ",\"" << e.term << "\","
            << detail::fmt_double(e.polarity) << ',' << sign << '\n';
    };
    rows(s.positive, "+");
    rows(s.negative, "-");
  }
}

}  // namespace senti
