#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>

namespace senti {

using TermId = std::int32_t;

// Sparse feature vector: term id -> value. Zero values are never stored.
struct SparseVector {
  std::unordered_map<TermId, double> entries;

  void set(TermId id, double value) {
    if (value == 0.0)
      entries.erase(id);
    else
      entries[id] = value;
  }

  double get(TermId id) const {
    auto it = entries.find(id);
    return it == entries.end() ? 0.0 : it->second;
  }

  std::size_t nnz() const { return entries.size(); }
  bool empty() const { return entries.empty(); }

  bool all_finite() const {
    for (const auto& [id, v] : entries)
      if (!std::isfinite(v)) return false;
    return true;
  }
};

}  // namespace senti
