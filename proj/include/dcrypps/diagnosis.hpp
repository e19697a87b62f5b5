#pragma once

// Reverse diagnosis of a hypothesised violation: structural conflicts, their
// minimal hitting sets, and candidates built from the causes each implicated
// component admits (hardware failure, software bug, applicable attacks).

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dcrypps/attack_kb.hpp"
#include "dcrypps/error.hpp"
#include "dcrypps/hitting_set.hpp"
#include "dcrypps/model.hpp"
#include "dcrypps/property.hpp"
#include "dcrypps/support.hpp"

namespace dcrypps {

enum class CauseClass { kCyberAttack, kHardwareFailure, kSoftwareBug };

struct CauseKind {
  CauseClass cls = CauseClass::kHardwareFailure;
  std::string attack;  // set for cyber-attack

  static CauseKind cyber(std::string attack_id) { return {CauseClass::kCyberAttack, std::move(attack_id)}; }
  static CauseKind hardware() { return {CauseClass::kHardwareFailure, {}}; }
  static CauseKind software() { return {CauseClass::kSoftwareBug, {}}; }

  bool is_cyber() const { return cls == CauseClass::kCyberAttack; }

  std::string id() const {
    switch (cls) {
      case CauseClass::kCyberAttack: return "cyber-attack:" + attack;
      case CauseClass::kHardwareFailure: return "hardware-failure";
      case CauseClass::kSoftwareBug: return "software-bug";
    }
    return "?";
  }

  friend auto operator<=>(const CauseKind&, const CauseKind&) = default;
};

// Overrides for uncertain parameters, keyed attack/<id>, defect/<component>,
// failure/<component>.
using ParamTable = std::map<std::string, double>;

inline std::string param_key(const std::string& component, const CauseKind& cause) {
  switch (cause.cls) {
    case CauseClass::kCyberAttack: return "attack/" + cause.attack;
    case CauseClass::kHardwareFailure: return "failure/" + component;
    case CauseClass::kSoftwareBug: return "defect/" + component;
  }
  return {};
}

inline double hardware_failure_probability(double mtbf_hours, double mission_hours) {
  return 1.0 - std::exp(-mission_hours / mtbf_hours);
}

struct ProbabilityContext {
  double mission_hours = 10.0;
  const AttackKb* kb = nullptr;
  const ParamTable* params = nullptr;
};

// Base probability before distance decay. `exposure` scales attack likelihood.
inline double cause_probability(const ComponentInstance& c, const CauseKind& cause,
                                const ProbabilityContext& ctx, double exposure = 1.0) {
  if (!(ctx.mission_hours > 0.0)) throw Error(ErrorCode::kInvalidArgument, "mission_hours must be > 0");
  if (ctx.params) {
    auto it = ctx.params->find(param_key(c.id, cause));
    if (it != ctx.params->end()) return cause.is_cyber() ? it->second * exposure : it->second;
  }
  switch (cause.cls) {
    case CauseClass::kHardwareFailure:
      if (!c.mtbf_hours) {
        throw Error(ErrorCode::kInvalidArgument, "component '" + c.id + "' has no mtbf-hours");
      }
      return hardware_failure_probability(*c.mtbf_hours, ctx.mission_hours);
    case CauseClass::kSoftwareBug:
      if (!c.defect_rate) {
        throw Error(ErrorCode::kInvalidArgument, "component '" + c.id + "' has no defect-rate");
      }
      return *c.defect_rate;
    case CauseClass::kCyberAttack: {
      const AttackModel* a = ctx.kb ? find_attack(*ctx.kb, cause.attack) : nullptr;
      if (!a) throw Error(ErrorCode::kInvalidArgument, "unknown attack model '" + cause.attack + "'");
      return a->base_likelihood * exposure;
    }
  }
  return 0.0;
}

inline void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "alpha must be in (0,1]");
}

inline double adjust_for_distance(double base, int distance, double alpha) {
  check_alpha(alpha);
  if (distance < 0) throw Error(ErrorCode::kInvalidArgument, "distance must be >= 0");
  return base * std::pow(alpha, distance);
}

struct CauseHypothesis {
  std::string component;
  CauseKind cause;
  double base_probability = 0.0;
  int distance = 0;
  double adjusted_probability = 0.0;
  double exposure = 1.0;  // surface factor for cyber causes
  bool mitigated = false;
  double effectiveness = 0.0;  // of the mitigation when mitigated
  std::vector<AttackMatch> matches;

  std::string key() const { return component + "/" + cause.id(); }
};

struct Candidate {
  std::vector<CauseHypothesis> causes;  // sorted by (component, cause id)
  double probability = 0.0;

  std::size_t cardinality() const { return causes.size(); }
};

// (component, attack id) -> effectiveness of the requirement that mitigates it
using Mitigations = std::map<std::pair<std::string, std::string>, double>;

struct DiagnosisConfig {
  double mission_hours = 10.0;
  double alpha = 0.6;
  int max_cardinality = 2;
  std::size_t candidate_cap = 10000;
  ParamTable params;
};

struct DiagnosisResult {
  std::string assertion;
  std::vector<SupportEntry> support;
  std::vector<std::set<std::string>> conflicts;
  std::vector<std::set<std::string>> hitting_sets;
  std::vector<CauseHypothesis> causes;  // every cause of an implicated component
  std::vector<Candidate> candidates;
  std::size_t total_candidates = 0;
  bool truncated = false;
};

// One conflict per violated property: that property's support set.
inline std::vector<std::set<std::string>> conflicts_for(const SystemModel& model,
                                                        const ViolationAssertion& assertion) {
  std::vector<std::set<std::string>> out;
  for (const auto& p : assertion.members) {
    std::set<std::string> conflict;
    for (const auto& e : support_set(model, p)) conflict.insert(e.component);
    if (conflict.empty()) {
      throw Error(ErrorCode::kInvalidArgument, "property " + p.id + " has an empty support set");
    }
    out.push_back(std::move(conflict));
  }
  return out;
}

inline bool candidate_before(const Candidate& x, const Candidate& y) {
  if (x.probability != y.probability) return x.probability > y.probability;
  if (x.cardinality() != y.cardinality()) return x.cardinality() < y.cardinality();
  for (std::size_t i = 0; i < x.causes.size(); ++i) {
    if (x.causes[i].component != y.causes[i].component) return x.causes[i].component < y.causes[i].component;
  }
  for (std::size_t i = 0; i < x.causes.size(); ++i) {
    auto a = x.causes[i].cause.id();
    auto b = y.causes[i].cause.id();
    if (a != b) return a < b;
  }
  return false;
}

// Causes a component admits at a given distance, with mitigations applied.
// Fully mitigated attacks are dropped.
inline std::vector<CauseHypothesis> component_causes(const SystemModel& model, const Topology& topo,
                                                     const std::string& id, int distance, bool deadline,
                                                     const AttackKb& kb,
                                                     const ThreatAssumptions& assumptions,
                                                     const DiagnosisConfig& config,
                                                     const Mitigations& mitigations) {
  const auto& c = model.component(id);
  ProbabilityContext ctx{config.mission_hours, &kb, &config.params};
  std::vector<CauseHypothesis> out;
  auto add = [&](CauseKind kind, double exposure, std::vector<AttackMatch> matches) {
    CauseHypothesis h;
    h.component = id;
    h.base_probability = cause_probability(c, kind, ctx, exposure);
    h.distance = distance;
    h.adjusted_probability = adjust_for_distance(h.base_probability, distance, config.alpha);
    h.exposure = exposure;
    if (kind.is_cyber()) {
      auto m = mitigations.find({id, kind.attack});
      if (m != mitigations.end()) {
        if (m->second >= 1.0) return;
        h.mitigated = true;
        h.effectiveness = m->second;
        h.adjusted_probability *= 1.0 - m->second;
      }
    }
    h.cause = std::move(kind);
    h.matches = std::move(matches);
    out.push_back(std::move(h));
  };
  if (c.mtbf_hours || config.params.count(param_key(id, CauseKind::hardware()))) {
    add(CauseKind::hardware(), 1.0, {});
  }
  if (c.defect_rate || config.params.count(param_key(id, CauseKind::software()))) {
    add(CauseKind::software(), 1.0, {});
  }
  std::map<std::string, std::vector<AttackMatch>> by_attack;
  for (auto& m : applicable_attacks(model, topo, id, deadline, assumptions, kb)) {
    by_attack[m.attack].push_back(std::move(m));
  }
  for (auto& [attack, matches] : by_attack) {
    double exposure = 0.0;
    for (const auto& m : matches) exposure = std::max(exposure, m.exposure);
    add(CauseKind::cyber(attack), exposure, std::move(matches));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.cause.id() < y.cause.id(); });
  return out;
}

inline DiagnosisResult diagnose(const SystemModel& model, const ViolationAssertion& assertion,
                                const AttackKb& kb, const ThreatAssumptions& assumptions,
                                const DiagnosisConfig& config, const Mitigations& mitigations = {}) {
  check_alpha(config.alpha);
  if (config.max_cardinality < 1) {
    throw Error(ErrorCode::kInvalidArgument, "max_cardinality must be >= 1");
  }
  DiagnosisResult result;
  result.assertion = assertion.id;
  result.support = support_set(model, assertion);
  result.conflicts = conflicts_for(model, assertion);
  result.hitting_sets = minimal_hitting_sets(result.conflicts, config.max_cardinality);

  const Topology topo(model);
  const bool deadline = assertion_has_deadline(model, assertion);
  std::map<std::string, int> distance;
  for (const auto& e : result.support) distance[e.component] = e.distance;

  std::map<std::string, std::vector<CauseHypothesis>> per_component;
  for (const auto& hs : result.hitting_sets) {
    for (const auto& id : hs) {
      if (per_component.count(id)) continue;
      per_component[id] =
          component_causes(model, topo, id, distance.at(id), deadline, kb, assumptions, config, mitigations);
    }
  }
  for (const auto& [id, causes] : per_component) {
    result.causes.insert(result.causes.end(), causes.begin(), causes.end());
  }

  for (const auto& hs : result.hitting_sets) {
    std::vector<const std::vector<CauseHypothesis>*> lists;
    bool viable = true;
    for (const auto& id : hs) {
      const auto& l = per_component.at(id);
      if (l.empty()) viable = false;
      lists.push_back(&l);
    }
    if (!viable) continue;
    std::vector<std::size_t> idx(lists.size(), 0);
    for (;;) {
      Candidate cand;
      cand.probability = 1.0;
      for (std::size_t i = 0; i < lists.size(); ++i) {
        const auto& h = (*lists[i])[idx[i]];
        cand.causes.push_back(h);
        cand.probability *= h.adjusted_probability;
      }
      result.candidates.push_back(std::move(cand));
      std::size_t i = 0;
      while (i < idx.size() && ++idx[i] == lists[i]->size()) idx[i++] = 0;
      if (i == idx.size()) break;
    }
  }
  std::sort(result.candidates.begin(), result.candidates.end(), candidate_before);
  result.total_candidates = result.candidates.size();
  if (result.candidates.size() > config.candidate_cap) {
    result.candidates.resize(config.candidate_cap);
    result.truncated = true;
  }
  return result;
}

}  // namespace dcrypps
