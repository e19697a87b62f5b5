#pragma once

// Structural support of a violation: every component that could contribute to
// the observables it mentions, with its hop distance from their anchors.
//
// Neighbours of a component c in the dependency graph:
//   c reads-from x     -> x
//   x controls c       -> x
//   hosted-on, communicates-over, shares-resource -> the other endpoint

#include <algorithm>
#include <deque>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dcrypps/error.hpp"
#include "dcrypps/model.hpp"
#include "dcrypps/property.hpp"

namespace dcrypps {

struct SupportEntry {
  std::string component;
  int distance = 0;
  bool common = true;  // in the support of every member of a joint assertion

  friend bool operator==(const SupportEntry&, const SupportEntry&) = default;
};

inline std::map<std::string, std::vector<std::string>> support_adjacency(const SystemModel& model) {
  std::map<std::string, std::vector<std::string>> adj;
  for (const auto& e : model.edges) {
    switch (e.kind) {
      case EdgeKind::kReadsFrom:
        adj[e.src].push_back(e.dst);
        break;
      case EdgeKind::kControls:
        adj[e.dst].push_back(e.src);
        break;
      case EdgeKind::kHostedOn:
      case EdgeKind::kCommunicatesOver:
      case EdgeKind::kSharesResource:
        adj[e.src].push_back(e.dst);
        adj[e.dst].push_back(e.src);
        break;
    }
  }
  return adj;
}

// Multi-source BFS from the anchors; sorted by (distance, id).
inline std::vector<SupportEntry> support_from(const SystemModel& model,
                                              const std::set<std::string>& anchors) {
  auto adj = support_adjacency(model);
  std::map<std::string, int> dist;
  std::deque<std::string> queue;
  for (const auto& a : anchors) {
    model.component(a);
    dist.emplace(a, 0);
    queue.push_back(a);
  }
  while (!queue.empty()) {
    std::string u = std::move(queue.front());
    queue.pop_front();
    auto it = adj.find(u);
    if (it == adj.end()) continue;
    for (const auto& v : it->second) {
      if (dist.emplace(v, dist[u] + 1).second) queue.push_back(v);
    }
  }
  std::vector<SupportEntry> out;
  for (const auto& [id, d] : dist) out.push_back({id, d, true});
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.distance != y.distance ? x.distance < y.distance : x.component < y.component;
  });
  return out;
}

inline std::set<std::string> anchors_of(const SystemModel& model,
                                        const std::set<std::string>& observables) {
  std::set<std::string> anchors;
  for (const auto& name : observables) {
    auto it = model.observables.find(name);
    if (it == model.observables.end()) {
      throw Error(ErrorCode::kReference, "unresolved observable '" + name + "'");
    }
    anchors.insert(it->second.anchor);
  }
  return anchors;
}

inline std::vector<SupportEntry> support_set(const SystemModel& model, const InvariantProperty& p) {
  return support_from(model, anchors_of(model, p.observables()));
}

// Union over members keeping the smallest distance; `common` marks components
// supporting every member.
inline std::vector<SupportEntry> support_set(const SystemModel& model,
                                             const ViolationAssertion& assertion) {
  std::map<std::string, SupportEntry> merged;
  std::map<std::string, std::size_t> hits;
  for (const auto& p : assertion.members) {
    for (const auto& e : support_set(model, p)) {
      auto [it, inserted] = merged.emplace(e.component, e);
      if (!inserted) it->second.distance = std::min(it->second.distance, e.distance);
      ++hits[e.component];
    }
  }
  std::vector<SupportEntry> out;
  for (auto& [id, e] : merged) {
    e.common = hits[id] == assertion.members.size();
    out.push_back(e);
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) {
    return x.distance != y.distance ? x.distance < y.distance : x.component < y.component;
  });
  return out;
}

// Components the assertion's observables are anchored on.
inline std::set<std::string> assertion_anchors(const SystemModel& model,
                                               const ViolationAssertion& assertion) {
  std::set<std::string> anchors;
  for (const auto& p : assertion.members) {
    for (const auto& a : anchors_of(model, p.observables())) anchors.insert(a);
  }
  return anchors;
}

// True when any observable the assertion mentions is a control-loop timing quantity.
inline bool assertion_has_deadline(const SystemModel& model, const ViolationAssertion& assertion) {
  for (const auto& p : assertion.members) {
    for (const auto& name : p.observables()) {
      auto it = model.observables.find(name);
      if (it != model.observables.end() && it->second.deadline) return true;
    }
  }
  return false;
}

}  // namespace dcrypps
