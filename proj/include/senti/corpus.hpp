#pragma once

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "senti/errors.hpp"
#include "senti/rng.hpp"

namespace senti {

struct BusinessRecord {
  std::string business_id;
  std::set<std::string> categories;
  std::string state;
};

struct RawReview {
  std::string review_id;
  std::string business_id;
  int stars = 0;  // 1..5
  std::string text;
};

struct ReviewRecord {
  std::string review_id;
  std::set<std::string> categories;
  int label = 0;  // +1 or -1
  std::string text;
};

struct SplitRatio {
  double train = 3;
  double validation = 2;
  double test = 5;
};

struct SplitCorpus {
  std::vector<ReviewRecord> train;
  std::vector<ReviewRecord> validation;
  std::vector<ReviewRecord> test;
  std::uint64_t seed = 0;
};

struct IngestStats {
  std::size_t businesses_loaded = 0;
  std::size_t businesses_skipped = 0;
  std::size_t restaurants_kept = 0;
  std::size_t reviews_loaded = 0;
  std::size_t reviews_skipped = 0;
  std::size_t reviews_unmatched = 0;
  std::size_t reviews_joined = 0;
};

inline constexpr int kPositiveStarThreshold = 4;

inline int label_from_stars(int stars) {
  return stars >= kPositiveStarThreshold ? +1 : -1;
}

namespace detail {

// Yelp dumps store categories either as an array or as a comma-separated
// string depending on dataset vintage; accept both.
inline std::set<std::string> parse_categories(const nlohmann::json& j) {
  std::set<std::string> out;
  if (!j.contains("categories") || j["categories"].is_null()) return out;
  const auto& c = j["categories"];
  if (c.is_array()) {
    for (const auto& item : c)
      if (item.is_string()) out.insert(item.get<std::string>());
  } else if (c.is_string()) {
    std::string s = c.get<std::string>();
    std::size_t pos = 0;
    while (pos <= s.size()) {
      std::size_t comma = s.find(',', pos);
      std::string piece = s.substr(pos, comma == std::string::npos
                                            ? std::string::npos
                                            : comma - pos);
      std::size_t b = piece.find_first_not_of(' ');
      std::size_t e = piece.find_last_not_of(' ');
      if (b != std::string::npos) out.insert(piece.substr(b, e - b + 1));
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  return out;
}

}  // namespace detail

// One JSON object per line. Lines lacking a business_id (or unparseable) are
// counted and skipped; duplicate ids keep the first occurrence.
inline std::vector<BusinessRecord> load_businesses(const std::string& path,
                                                   IngestStats& stats) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open business file: " + path);
  std::vector<BusinessRecord> out;
  std::unordered_set<std::string> seen;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("business_id") ||
        !j["business_id"].is_string() ||
        j["business_id"].get<std::string>().empty()) {
      ++stats.businesses_skipped;
      continue;
    }
    BusinessRecord rec;
    rec.business_id = j["business_id"].get<std::string>();
    if (!seen.insert(rec.business_id).second) {
      ++stats.businesses_skipped;
      continue;
    }
    rec.categories = detail::parse_categories(j);
    if (j.contains("state") && j["state"].is_string())
      rec.state = j["state"].get<std::string>();
    out.push_back(std::move(rec));
    ++stats.businesses_loaded;
  }
  return out;
}

inline std::vector<RawReview> load_reviews(const std::string& path,
                                           IngestStats& stats) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open review file: " + path);
  std::vector<RawReview> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.contains("review_id") ||
        !j.contains("business_id") || !j.contains("stars") ||
        !j["stars"].is_number_integer()) {
      ++stats.reviews_skipped;
      continue;
    }
    const int stars = j["stars"].get<int>();
    if (stars < 1 || stars > 5) {  // half-star or out-of-range: reject
      ++stats.reviews_skipped;
      continue;
    }
    RawReview rec;
    rec.review_id = j["review_id"].get<std::string>();
    rec.business_id = j["business_id"].get<std::string>();
    rec.stars = stars;
    if (j.contains("text") && j["text"].is_string())
      rec.text = j["text"].get<std::string>();
    out.push_back(std::move(rec));
    ++stats.reviews_loaded;
  }
  return out;
}

inline std::vector<BusinessRecord> filter_restaurants(
    const std::vector<BusinessRecord>& businesses,
    const std::string& marker = "Restaurants") {
  std::vector<BusinessRecord> out;
  for (const auto& b : businesses)
    if (b.categories.count(marker)) out.push_back(b);
  return out;
}

// Inner join on business_id, label from stars. Order follows review input
// order so downstream shuffles are reproducible.
inline std::vector<ReviewRecord> join_and_label(
    const std::vector<RawReview>& reviews,
    const std::vector<BusinessRecord>& businesses, IngestStats& stats) {
  std::unordered_map<std::string, const BusinessRecord*> by_id;
  for (const auto& b : businesses) by_id.emplace(b.business_id, &b);
  std::vector<ReviewRecord> out;
  for (const auto& r : reviews) {
    auto it = by_id.find(r.business_id);
    if (it == by_id.end()) {
      ++stats.reviews_unmatched;
      continue;
    }
    out.push_back(ReviewRecord{r.review_id, it->second->categories,
                               label_from_stars(r.stars), r.text});
  }
  stats.reviews_joined = out.size();
  return out;
}

// floor(n*train), floor(n*validation), remainder to test.
inline void split_sizes(std::size_t n, const SplitRatio& ratio,
                        std::size_t& n_train, std::size_t& n_val) {
  const double total = ratio.train + ratio.validation + ratio.test;
  if (!(total > 0) || ratio.train < 0 || ratio.validation < 0 || ratio.test < 0)
    throw ConfigError("split ratios must be positive and finite");
  n_train = static_cast<std::size_t>(n * (ratio.train / total));
  n_val = static_cast<std::size_t>(n * (ratio.validation / total));
}

inline SplitCorpus split(std::vector<ReviewRecord> records, std::uint64_t seed,
                         const SplitRatio& ratio = SplitRatio{}) {
  if (records.empty()) throw ValidationError("cannot split an empty corpus");
  Rng rng(seed);
  rng.shuffle(records);
  std::size_t n_train = 0, n_val = 0;
  split_sizes(records.size(), ratio, n_train, n_val);
  SplitCorpus out;
  out.seed = seed;
  out.train.assign(records.begin(), records.begin() + n_train);
  out.validation.assign(records.begin() + n_train,
                        records.begin() + n_train + n_val);
  out.test.assign(records.begin() + n_train + n_val, records.end());
  return out;
}

inline nlohmann::json review_to_json(const ReviewRecord& r) {
  nlohmann::json j;
  j["review_id"] = r.review_id;
  j["categories"] = r.categories;
  j["label"] = r.label;
  j["text"] = r.text;
  return j;
}

inline ReviewRecord review_from_json(const nlohmann::json& j) {
  ReviewRecord r;
  r.review_id = j.at("review_id").get<std::string>();
  for (const auto& c : j.at("categories")) r.categories.insert(c.get<std::string>());
  r.label = j.at("label").get<int>();
  if (r.label != 1 && r.label != -1)
    throw ValidationError("review label must be +1 or -1");
  r.text = j.at("text").get<std::string>();
  return r;
}

inline void save_reviews_jsonl(const std::vector<ReviewRecord>& recs,
                               const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  for (const auto& r : recs) out << review_to_json(r).dump() << '\n';
}

inline std::vector<ReviewRecord> load_reviews_jsonl(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<ReviewRecord> out;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    out.push_back(review_from_json(nlohmann::json::parse(line)));
  }
  return out;
}

}  // namespace senti
