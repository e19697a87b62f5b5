#pragma once

// Minimal hitting sets by bounded depth-first branching: pick the first conflict
// the partial set misses and branch on each of its elements. Every minimal
// hitting set within the bound is reached this way; non-minimal results are
// filtered afterwards.

#include <algorithm>
#include <set>
#include <vector>

#include "dcrypps/error.hpp"

namespace dcrypps {

namespace detail {

template <typename T>
bool hits(const std::set<T>& candidate, const std::set<T>& conflict) {
  for (const auto& x : conflict) {
    if (candidate.count(x)) return true;
  }
  return false;
}

template <typename T>
void branch(const std::vector<std::set<T>>& conflicts, std::set<T>& current, int max_cardinality,
            std::set<std::set<T>>& found) {
  const std::set<T>* missed = nullptr;
  for (const auto& c : conflicts) {
    if (!hits(current, c)) {
      missed = &c;
      break;
    }
  }
  if (!missed) {
    found.insert(current);
    return;
  }
  if (static_cast<int>(current.size()) >= max_cardinality) return;
  for (const auto& x : *missed) {
    current.insert(x);
    branch(conflicts, current, max_cardinality, found);
    current.erase(x);
  }
}

}  // namespace detail

// Sorted by cardinality, then lexicographically.
template <typename T>
std::vector<std::set<T>> minimal_hitting_sets(const std::vector<std::set<T>>& conflicts,
                                              int max_cardinality) {
  if (max_cardinality < 1) throw Error(ErrorCode::kInvalidArgument, "max_cardinality must be >= 1");
  std::set<std::set<T>> found;
  std::set<T> current;
  detail::branch(conflicts, current, max_cardinality, found);

  std::vector<std::set<T>> sorted(found.begin(), found.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const auto& a, const auto& b) { return a.size() < b.size(); });
  std::vector<std::set<T>> out;
  for (const auto& s : sorted) {
    bool superset = std::any_of(out.begin(), out.end(), [&](const std::set<T>& m) {
      return std::includes(s.begin(), s.end(), m.begin(), m.end());
    });
    if (!superset) out.push_back(s);
  }
  return out;
}

}  // namespace dcrypps
