#pragma once

#include <cctype>
#include <fstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "senti/errors.hpp"

namespace senti {

// Stopword removal and stemming default OFF; they are retained only as a
// reproduction switch (enabling them lowers accuracy on this task).
struct Preprocessing {
  bool remove_stopwords = false;
  bool stem = false;
  std::unordered_set<std::string> stopwords;
};

using TokenStream = std::vector<std::string>;

namespace detail {

inline bool is_token_char(unsigned char c) {
  return std::isalnum(c) != 0;  // bytes >= 0x80 split, ASCII alnum kept
}

inline bool has_vowel(std::string_view s) {
  for (char c : s)
    if (c == 'a' || c == 'e' || c == 'i' || c == 'o' || c == 'u' || c == 'y')
      return true;
  return false;
}

}  // namespace detail

// Light suffix stripper, roughly Porter step 1. Enough to merge plural and
// participle forms when the stemming switch is on.
inline std::string stem_token(std::string w) {
  auto ends = [&](std::string_view suf) {
    return w.size() >= suf.size() &&
           std::string_view(w).substr(w.size() - suf.size()) == suf;
  };
  auto chop = [&](std::size_t n) { w.erase(w.size() - n); };

  if (ends("sses")) chop(2);
  else if (ends("ies")) { chop(3); w += 'y'; }
  else if (!ends("ss") && ends("s") && w.size() > 3) chop(1);

  if (ends("ing") && w.size() > 5 && detail::has_vowel({w.data(), w.size() - 3}))
    chop(3);
  else if (ends("ed") && w.size() > 4 && detail::has_vowel({w.data(), w.size() - 2}))
    chop(2);

  if (ends("ly") && w.size() > 4) chop(2);
  return w;
}

inline TokenStream tokenize(std::string_view text,
                            const Preprocessing& prep = {}) {
  TokenStream out;
  std::string cur;
  auto flush = [&] {
    if (cur.empty()) return;
    std::string token = std::move(cur);
    cur.clear();
    if (prep.remove_stopwords && prep.stopwords.count(token)) return;
    if (prep.stem) token = stem_token(std::move(token));
    if (!token.empty()) out.push_back(std::move(token));
  };
  for (unsigned char c : text) {
    if (detail::is_token_char(c))
      cur += static_cast<char>(std::tolower(c));
    else
      flush();
  }
  flush();
  return out;
}

inline std::unordered_set<std::string> load_word_list(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open word list: " + path);
  std::unordered_set<std::string> out;
  std::string line;
  while (std::getline(in, line)) {
    while (!line.empty() && (line.back() == '\r' || line.back() == ' '))
      line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    out.insert(line);
  }
  return out;
}

}  // namespace senti
