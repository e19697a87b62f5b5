#pragma once

// Main derivation loop. For each violation assertion: diagnose, then walk the
// ranked candidates turning the most likely unmitigated attack cause into a
// requirement until the residual risk meets the assertion's target or only
// non-cyber causes remain. Mitigations are global across assertions.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dcrypps/attack_kb.hpp"
#include "dcrypps/canonical.hpp"
#include "dcrypps/diagnosis.hpp"
#include "dcrypps/error.hpp"
#include "dcrypps/model.hpp"
#include "dcrypps/property.hpp"

namespace dcrypps {

struct DerivationConfig {
  std::map<Severity, double> base_risk_target{{Severity::kCatastrophic, 0.001},
                                              {Severity::kReducedCapability, 0.01},
                                              {Severity::kAnnoyance, 0.05}};
  double mission_hours = 10.0;
  double alpha = 0.6;
  int max_cardinality = 2;
  int max_joint = 2;
  double effectiveness_default = 1.0;
  std::uint64_t seed = 0;
  std::size_t candidate_cap = 10000;
  std::map<std::string, double> importance;  // per-component overrides
  // certificate
  std::size_t samples = 10000;
  double required_ps = 0.9;
  double uncertainty_strength = 20.0;

  double target(Severity s) const { return base_risk_target.at(s); }

  void validate() const {
    auto fail = [](const std::string& msg) { throw Error(ErrorCode::kInvalidArgument, msg); };
    for (Severity s : {Severity::kCatastrophic, Severity::kReducedCapability, Severity::kAnnoyance}) {
      auto it = base_risk_target.find(s);
      if (it == base_risk_target.end()) fail("missing risk target for " + std::string(to_string(s)));
      if (!(it->second >= 0.0 && it->second <= 1.0)) {
        fail("risk target for " + std::string(to_string(s)) + " must be in [0,1]");
      }
    }
    if (!(target(Severity::kCatastrophic) <= target(Severity::kReducedCapability) &&
          target(Severity::kReducedCapability) <= target(Severity::kAnnoyance))) {
      fail("risk targets must satisfy catastrophic <= reduced-capability <= annoyance");
    }
    if (!(mission_hours > 0.0)) fail("mission_hours must be > 0");
    if (!(alpha > 0.0 && alpha <= 1.0)) fail("alpha must be in (0,1]");
    if (max_cardinality < 1) fail("max_cardinality must be >= 1");
    if (max_joint < 1) fail("max_joint must be >= 1");
    if (!(effectiveness_default > 0.0 && effectiveness_default <= 1.0)) {
      fail("effectiveness_default must be in (0,1]");
    }
    if (candidate_cap < 1) fail("candidate_cap must be >= 1");
    for (const auto& [id, w] : importance) {
      if (!(w >= 1.0)) fail("importance of " + id + " must be >= 1");
    }
    if (samples < 1) fail("samples must be >= 1");
    if (!(required_ps >= 0.0 && required_ps <= 1.0)) fail("required_ps must be in [0,1]");
    if (!(uncertainty_strength > 0.0)) fail("uncertainty_strength must be > 0");
  }

  DiagnosisConfig diagnosis() const {
    DiagnosisConfig d;
    d.mission_hours = mission_hours;
    d.alpha = alpha;
    d.max_cardinality = max_cardinality;
    d.candidate_cap = candidate_cap;
    return d;
  }
};

inline double effective_target(double base_target, double importance) {
  if (!(importance >= 1.0)) throw Error(ErrorCode::kInvalidArgument, "importance must be >= 1");
  return base_target / importance;
}

// Independent-union rule.
inline double residual_risk(const std::vector<double>& probabilities) {
  double keep = 1.0;
  for (double p : probabilities) keep *= 1.0 - p;
  return 1.0 - keep;
}

inline double residual_risk(const std::vector<CauseHypothesis>& causes) {
  std::vector<double> ps;
  for (const auto& c : causes) ps.push_back(c.adjusted_probability);
  return residual_risk(ps);
}

// Adjusted probability of a ledger cause for a given base probability.
inline double mitigated_probability(double base, const CauseHypothesis& c, double alpha) {
  double p = adjust_for_distance(base, c.distance, alpha);
  if (c.mitigated) p *= 1.0 - c.effectiveness;
  return p;
}

struct Provenance {
  std::string assertion;
  std::size_t candidate_rank = 0;  // 1-based, in the assertion's trace
  std::string component;
  double residual_before = 0.0;
  double residual_after = 0.0;
};

struct CyberRequirement {
  std::string id;
  std::string text;
  std::string attack;
  std::set<std::string> targets;
  std::vector<Provenance> provenance;
  double effectiveness = 1.0;
};

struct LedgerEntry {
  std::string assertion;
  std::vector<std::string> violated;
  Severity severity = Severity::kAnnoyance;
  double importance = 1.0;
  double effective_target = 0.0;
  double initial_risk = 0.0;
  double residual_risk = 0.0;
  std::vector<double> trail;  // residual after each emission, starting with the initial risk
  std::vector<std::string> mitigated;  // cause keys mitigated while closing this assertion
  std::vector<CauseHypothesis> causes;
  bool unresolved = false;
};

struct AssertionShare {
  std::string assertion;
  double residual = 0.0;
  double contribution = 0.0;  // share of the total log-risk
};

struct ProbabilisticCertificate {
  double ps = 1.0;
  double required_ps = 0.0;
  double confidence = 0.0;
  std::vector<AssertionShare> per_assertion;
  std::size_t samples = 0;
  std::uint64_t seed = 0;
};

struct DerivationReport {
  std::string model_digest;
  DerivationConfig config;
  ThreatAssumptions assumptions;
  std::vector<CyberRequirement> requirements;
  std::vector<LedgerEntry> ledger;
  std::vector<DiagnosisResult> traces;
  std::vector<std::string> unresolved;
  std::optional<ProbabilisticCertificate> certificate;
};

inline double assertion_importance(const SystemModel& model, const ViolationAssertion& assertion,
                                   const DerivationConfig& config) {
  double w = 1.0;
  for (const auto& id : assertion_anchors(model, assertion)) {
    auto it = config.importance.find(id);
    w = std::max(w, it != config.importance.end() ? it->second : model.component(id).importance);
  }
  return w;
}

inline DerivationReport derive(const SystemModel& model, const std::vector<InvariantProperty>& properties,
                               const AttackKb& kb, const ThreatAssumptions& assumptions,
                               const DerivationConfig& config) {
  config.validate();
  assumptions.validate();
  for (const auto& [id, w] : config.importance) {
    if (!model.has_component(id)) {
      throw Error(ErrorCode::kReference, "importance override for unknown component '" + id + "'");
    }
  }
  DerivationReport report;
  report.model_digest = model_digest(model);
  report.config = config;
  report.assumptions = assumptions;
  if (properties.empty()) return report;

  const DiagnosisConfig dcfg = config.diagnosis();
  Mitigations mitigations;
  std::map<std::pair<std::string, std::set<std::string>>, std::size_t> by_key;

  for (const auto& assertion : enumerate_assertions(properties, config.max_joint)) {
    DiagnosisResult trace = diagnose(model, assertion, kb, assumptions, dcfg, mitigations);
    LedgerEntry entry;
    entry.assertion = assertion.id;
    entry.violated = assertion.violated;
    entry.severity = assertion.severity;
    entry.importance = assertion_importance(model, assertion, config);
    entry.effective_target = effective_target(config.target(assertion.severity), entry.importance);
    entry.causes = trace.causes;
    entry.initial_risk = residual_risk(entry.causes);
    double residual = entry.initial_risk;
    entry.trail.push_back(residual);

    while (residual > entry.effective_target) {
      const CauseHypothesis* pick = nullptr;
      std::size_t rank = 0;
      for (std::size_t i = 0; i < trace.candidates.size() && !pick; ++i) {
        for (const auto& h : trace.candidates[i].causes) {
          if (h.cause.is_cyber() && !h.mitigated && !mitigations.count({h.component, h.cause.attack})) {
            pick = &h;
            rank = i + 1;
            break;
          }
        }
      }
      if (!pick) break;

      const AttackModel& attack = *find_attack(kb, pick->cause.attack);
      const double effectiveness = attack.mitigation_effectiveness * config.effectiveness_default;
      std::vector<std::pair<std::size_t, std::size_t>> touched;  // (requirement, provenance index)
      for (const auto& match : pick->matches) {
        auto targets = requirement_targets(attack, match);
        auto key = std::make_pair(attack.id, targets);
        auto it = by_key.find(key);
        if (it == by_key.end()) {
          CyberRequirement req;
          req.id = "REQ-" + std::to_string(report.requirements.size() + 1);
          req.text = render_requirement(model, attack, match);
          req.attack = attack.id;
          req.targets = targets;
          req.effectiveness = effectiveness;
          report.requirements.push_back(std::move(req));
          it = by_key.emplace(key, report.requirements.size() - 1).first;
        }
        auto& req = report.requirements[it->second];
        bool already = std::any_of(req.provenance.begin(), req.provenance.end(), [&](const Provenance& p) {
          return p.assertion == assertion.id && p.component == pick->component;
        });
        if (already) continue;
        req.provenance.push_back({assertion.id, rank, pick->component, residual, residual});
        touched.emplace_back(it->second, req.provenance.size() - 1);
      }

      const std::string component = pick->component;
      const std::string attack_id = pick->cause.attack;
      mitigations[{component, attack_id}] = effectiveness;
      for (auto& h : entry.causes) {
        if (h.component == component && h.cause.is_cyber() && h.cause.attack == attack_id) {
          h.mitigated = true;
          h.effectiveness = effectiveness;
          h.adjusted_probability = mitigated_probability(h.base_probability, h, config.alpha);
          entry.mitigated.push_back(h.key());
        }
      }
      residual = residual_risk(entry.causes);
      entry.trail.push_back(residual);
      for (auto [r, p] : touched) report.requirements[r].provenance[p].residual_after = residual;
    }
    entry.residual_risk = residual;
    entry.unresolved = residual > entry.effective_target;
    if (entry.unresolved) report.unresolved.push_back(assertion.id);
    report.ledger.push_back(std::move(entry));
    report.traces.push_back(std::move(trace));
  }
  return report;
}

}  // namespace dcrypps
