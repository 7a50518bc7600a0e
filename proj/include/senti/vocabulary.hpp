#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "senti/corpus.hpp"
#include "senti/errors.hpp"
#include "senti/hash.hpp"
#include "senti/sparse_vector.hpp"
#include "senti/tokenize.hpp"

namespace senti {

enum class FeatureMode { bag_of_words, tf_idf };

inline std::string to_string(FeatureMode m) {
  return m == FeatureMode::bag_of_words ? "bow" : "tfidf";
}

inline FeatureMode feature_mode_from_string(const std::string& s) {
  if (s == "bow" || s == "bag_of_words") return FeatureMode::bag_of_words;
  if (s == "tfidf" || s == "tf_idf") return FeatureMode::tf_idf;
  throw ConfigError("unknown feature mode: " + s);
}

// Term <-> id mapping plus the frequency statistics the polarity indices
// need. Ids are dense 0..V-1 in first-occurrence order over the input
// sequence, so identical input yields identical ids.
class Vocabulary {
 public:
  std::unordered_map<std::string, TermId> term_to_id;
  std::vector<std::string> terms;            // id -> term
  std::vector<std::int64_t> doc_freq;        // id -> #docs containing term
  std::vector<std::int64_t> total_freq;      // id -> total occurrences
  std::map<std::string, std::unordered_map<TermId, std::int64_t>> category_freq;
  std::map<std::string, std::int64_t> n_docs_per_category;
  std::int64_t n_docs = 0;

  std::size_t size() const { return terms.size(); }

  TermId id_of(const std::string& term) const {
    auto it = term_to_id.find(term);
    return it == term_to_id.end() ? -1 : it->second;
  }
};

inline Vocabulary build_vocabulary(const std::vector<ReviewRecord>& train,
                                   const Preprocessing& prep = {},
                                   std::int64_t min_doc_freq = 1) {
  if (train.empty())
    throw ValidationError("cannot build a vocabulary from an empty corpus");
  Vocabulary v;
  v.n_docs = static_cast<std::int64_t>(train.size());
  for (const auto& rec : train) {
    for (const auto& c : rec.categories) v.n_docs_per_category[c] += 1;
    std::unordered_map<TermId, std::int64_t> doc_counts;
    for (const auto& tok : tokenize(rec.text, prep)) {
      auto [it, fresh] = v.term_to_id.try_emplace(
          tok, static_cast<TermId>(v.terms.size()));
      if (fresh) {
        v.terms.push_back(tok);
        v.doc_freq.push_back(0);
        v.total_freq.push_back(0);
      }
      doc_counts[it->second] += 1;
    }
    for (const auto& [id, count] : doc_counts) {
      v.doc_freq[id] += 1;
      v.total_freq[id] += count;
      for (const auto& c : rec.categories) v.category_freq[c][id] += count;
    }
  }
  if (min_doc_freq <= 1) return v;

  // Re-densify ids after pruning, preserving first-occurrence order.
  Vocabulary kept;
  kept.n_docs = v.n_docs;
  kept.n_docs_per_category = v.n_docs_per_category;
  std::vector<TermId> remap(v.size(), -1);
  for (TermId id = 0; id < static_cast<TermId>(v.size()); ++id) {
    if (v.doc_freq[id] < min_doc_freq) continue;
    remap[id] = static_cast<TermId>(kept.terms.size());
    kept.term_to_id.emplace(v.terms[id], remap[id]);
    kept.terms.push_back(v.terms[id]);
    kept.doc_freq.push_back(v.doc_freq[id]);
    kept.total_freq.push_back(v.total_freq[id]);
  }
  for (const auto& [cat, freqs] : v.category_freq) {
    auto& dst = kept.category_freq[cat];
    for (const auto& [id, count] : freqs)
      if (remap[id] >= 0) dst[remap[id]] = count;
  }
  return kept;
}

// ln(N / df). Base is a recorded choice; any fixed base rescales all weights
// uniformly and the SVM adapts.
inline double idf(const Vocabulary& vocab, const std::string& term) {
  TermId id = vocab.id_of(term);
  if (id < 0) throw ValidationError("idf of unknown term: " + term);
  return std::log(static_cast<double>(vocab.n_docs) /
                  static_cast<double>(vocab.doc_freq[id]));
}

inline SparseVector vectorize(const TokenStream& tokens,
                              const Vocabulary& vocab, FeatureMode mode) {
  std::unordered_map<TermId, double> counts;
  for (const auto& tok : tokens) {
    TermId id = vocab.id_of(tok);
    if (id >= 0) counts[id] += 1.0;
  }
  SparseVector out;
  for (const auto& [id, tf] : counts) {
    double value = tf;
    if (mode == FeatureMode::tf_idf)
      value *= std::log(static_cast<double>(vocab.n_docs) /
                        static_cast<double>(vocab.doc_freq[id]));
    out.set(id, value);
  }
  return out;
}

namespace detail {

inline std::string vocab_canonical(const Vocabulary& v) {
  std::ostringstream os;
  os << "senti-vocab v1\nn_docs " << v.n_docs << '\n';
  for (TermId id = 0; id < static_cast<TermId>(v.size()); ++id)
    os << v.terms[id] << '\t' << id << '\t' << v.doc_freq[id] << '\t'
       << v.total_freq[id] << '\n';
  for (const auto& [cat, n] : v.n_docs_per_category)
    os << "@category\t" << cat << '\t' << n << '\n';
  for (const auto& [cat, freqs] : v.category_freq) {
    std::vector<std::pair<TermId, std::int64_t>> rows(freqs.begin(),
                                                      freqs.end());
    std::sort(rows.begin(), rows.end());
    for (const auto& [id, count] : rows)
      os << cat << '\t' << id << '\t' << count << '\n';
  }
  return os.str();
}

}  // namespace detail

inline std::string vocabulary_hash(const Vocabulary& v) {
  return hex64(fnv1a(detail::vocab_canonical(v)));
}

// Flat text format, one term per line, plus a sidecar file for the
// per-category tables. Both carry a version tag.
inline void save_vocabulary(const Vocabulary& v, const std::string& path,
                            const std::string& sidecar_path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "# senti-vocab v1\n# n_docs " << v.n_docs << '\n';
  for (TermId id = 0; id < static_cast<TermId>(v.size()); ++id)
    out << v.terms[id] << '\t' << id << '\t' << v.doc_freq[id] << '\t'
        << v.total_freq[id] << '\n';

  std::ofstream side(sidecar_path, std::ios::binary);
  if (!side) throw IoError("cannot write " + sidecar_path);
  side << "# senti-vocab-categories v1\n";
  for (const auto& [cat, n] : v.n_docs_per_category)
    side << "@category\t" << cat << '\t' << n << '\n';
  for (const auto& [cat, freqs] : v.category_freq) {
    std::vector<std::pair<TermId, std::int64_t>> rows(freqs.begin(),
                                                      freqs.end());
    std::sort(rows.begin(), rows.end());
    for (const auto& [id, count] : rows)
      side << cat << '\t' << id << '\t' << count << '\n';
  }
}

inline Vocabulary load_vocabulary(const std::string& path,
                                  const std::string& sidecar_path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  Vocabulary v;
  std::string line;
  if (!std::getline(in, line) || line != "# senti-vocab v1")
    throw ValidationError("bad vocabulary header in " + path);
  if (!std::getline(in, line) || line.rfind("# n_docs ", 0) != 0)
    throw ValidationError("missing n_docs in " + path);
  v.n_docs = std::stoll(line.substr(9));
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string term;
    TermId id;
    std::int64_t df, tf;
    if (!std::getline(row, term, '\t') || !(row >> id >> df >> tf))
      throw ValidationError("bad vocabulary row: " + line);
    if (id != static_cast<TermId>(v.terms.size()))
      throw ValidationError("vocabulary ids must be dense and ordered");
    v.term_to_id.emplace(term, id);
    v.terms.push_back(term);
    v.doc_freq.push_back(df);
    v.total_freq.push_back(tf);
  }

  std::ifstream side(sidecar_path);
  if (!side) throw IoError("cannot open " + sidecar_path);
  if (!std::getline(side, line) || line != "# senti-vocab-categories v1")
    throw ValidationError("bad category sidecar header in " + sidecar_path);
  while (std::getline(side, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string first, second;
    std::getline(row, first, '\t');
    std::getline(row, second, '\t');
    if (first == "@category") {
      std::int64_t n;
      row >> n;
      v.n_docs_per_category[second] = n;
    } else {
      TermId id;
      std::int64_t count;
      std::istringstream rest(second);
      rest >> id;
      row >> count;
      v.category_freq[first][id] = count;
    }
  }
  return v;
}

}  // namespace senti
