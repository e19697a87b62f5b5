#pragma once

// Independent reference implementations the tests compare against.

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dcrypps/dcrypps.hpp"

namespace oracle {

using namespace dcrypps;

// All minimal hitting sets by enumerating every subset of the universe.
inline std::vector<std::set<int>> brute_force_mhs(const std::vector<std::set<int>>& conflicts, int max_card) {
  std::set<int> universe;
  for (const auto& c : conflicts) universe.insert(c.begin(), c.end());
  std::vector<int> u(universe.begin(), universe.end());
  std::vector<std::set<int>> hitting;
  for (unsigned mask = 0; mask < (1u << u.size()); ++mask) {
    std::set<int> s;
    for (std::size_t i = 0; i < u.size(); ++i) {
      if (mask & (1u << i)) s.insert(u[i]);
    }
    bool hits_all = true;
    for (const auto& c : conflicts) {
      bool hit = false;
      for (int x : c) hit = hit || s.count(x);
      hits_all = hits_all && hit;
    }
    if (hits_all) hitting.push_back(s);
  }
  std::vector<std::set<int>> out;
  for (const auto& s : hitting) {
    bool minimal = true;
    for (const auto& t : hitting) {
      if (t.size() < s.size() && std::includes(s.begin(), s.end(), t.begin(), t.end())) minimal = false;
    }
    if (minimal && static_cast<int>(s.size()) <= max_card) out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  return out;
}

// Shortest hop counts by Bellman-Ford style relaxation over the edge list.
inline std::map<std::string, int> relaxed_distances(const SystemModel& m, const std::set<std::string>& anchors) {
  std::map<std::string, int> d;
  for (const auto& a : anchors) d[a] = 0;
  for (std::size_t round = 0; round < m.components.size(); ++round) {
    for (const auto& e : m.edges) {
      std::vector<std::pair<std::string, std::string>> arcs;  // from -> to in support direction
      switch (e.kind) {
        case EdgeKind::kReadsFrom: arcs = {{e.src, e.dst}}; break;
        case EdgeKind::kControls: arcs = {{e.dst, e.src}}; break;
        default: arcs = {{e.src, e.dst}, {e.dst, e.src}}; break;
      }
      for (const auto& [f, t] : arcs) {
        if (!d.count(f)) continue;
        if (!d.count(t) || d[t] > d[f] + 1) d[t] = d[f] + 1;
      }
    }
  }
  return d;
}

// Checks the ledger invariants of one report; returns the number of violations.
inline int ledger_violations(const DerivationReport& r, std::string* why) {
  int bad = 0;
  auto note = [&](const std::string& s) {
    ++bad;
    if (why && why->empty()) *why = s;
  };
  std::set<std::pair<std::string, std::string>> suppressed;
  for (std::size_t i = 0; i < r.ledger.size(); ++i) {
    const auto& e = r.ledger[i];
    const auto& trace = r.traces[i];
    for (const auto& c : trace.causes) {
      if (c.cause.is_cyber() && suppressed.count({c.component, c.cause.attack}) && !c.mitigated) {
        note("suppressed cause reappeared: " + c.key() + " in " + e.assertion);
      }
    }
    for (std::size_t k = 1; k < e.trail.size(); ++k) {
      if (e.trail[k] > e.trail[k - 1]) note("residual increased in " + e.assertion);
    }
    if (e.residual_risk > e.initial_risk) note("residual above initial in " + e.assertion);
    if (!e.unresolved && e.residual_risk > e.effective_target) note("target missed in " + e.assertion);
    if (e.unresolved) {
      for (const auto& c : e.causes) {
        if (c.cause.is_cyber() && !c.mitigated) note("unresolved with open cyber cause in " + e.assertion);
      }
    }
    double recomputed = 1.0;
    for (const auto& c : e.causes) recomputed *= 1.0 - c.adjusted_probability;
    if (std::abs((1.0 - recomputed) - e.residual_risk) > 1e-12) note("residual mismatch in " + e.assertion);
    for (const auto& k : e.mitigated) {
      auto slash = k.find("/cyber-attack:");
      suppressed.insert({k.substr(0, slash), k.substr(slash + 14)});
    }
  }
  std::set<std::pair<std::string, std::set<std::string>>> keys;
  for (const auto& q : r.requirements) {
    if (!keys.insert({q.attack, q.targets}).second) note("duplicate requirement key " + q.id);
    if (q.provenance.empty()) note("requirement without provenance " + q.id);
    for (const auto& p : q.provenance) {
      bool found = std::any_of(r.ledger.begin(), r.ledger.end(), [&](const auto& e) { return e.assertion == p.assertion; });
      if (!found) note("provenance references a missing trace");
      if (p.residual_after > p.residual_before) note("provenance residual increased");
    }
  }
  return bad;
}

}  // namespace oracle
