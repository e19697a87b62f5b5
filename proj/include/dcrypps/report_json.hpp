#pragma once

// JSON form of derivation reports and configs, report diffs, and the
// provenance narrative. Key order is fixed so equal reports dump to equal bytes.

#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "dcrypps/attack_kb.hpp"
#include "dcrypps/derivation.hpp"
#include "dcrypps/error.hpp"
#include "dcrypps/pcc.hpp"

namespace dcrypps {

inline constexpr std::string_view kReportFormat = "dcrypps-report 1";

inline ojson to_json(const ThreatAssumptions& a) {
  ojson channels = ojson::array();
  for (auto c : a.remote_channels) channels.push_back(to_string(c));
  return ojson{{"physical_access", a.physical_access},
               {"supply_chain_tampering", a.supply_chain_tampering},
               {"full_design_knowledge", a.full_design_knowledge},
               {"remote_channels", channels}};
}

inline ojson to_json(const DerivationConfig& c) {
  ojson targets = ojson::object();
  for (Severity s : {Severity::kCatastrophic, Severity::kReducedCapability, Severity::kAnnoyance}) {
    targets[std::string(to_string(s))] = c.target(s);
  }
  ojson importance = ojson::object();
  for (const auto& [id, w] : c.importance) importance[id] = w;
  return ojson{{"base_risk_target", targets},
               {"mission_hours", c.mission_hours},
               {"alpha", c.alpha},
               {"max_cardinality", c.max_cardinality},
               {"max_joint", c.max_joint},
               {"effectiveness_default", c.effectiveness_default},
               {"seed", c.seed},
               {"candidate_cap", c.candidate_cap},
               {"importance", importance},
               {"samples", c.samples},
               {"required_ps", c.required_ps},
               {"uncertainty_strength", c.uncertainty_strength}};
}

namespace detail {

[[noreturn]] inline void config_fail(const std::string& key, const std::string& msg) {
  throw Error(ErrorCode::kInvalidArgument, "config." + key + ": " + msg);
}

inline double config_number(const ojson& v, const std::string& key) {
  if (!v.is_number()) config_fail(key, "expected a number");
  return v.get<double>();
}

inline long long config_integer(const ojson& v, const std::string& key) {
  if (!v.is_number_integer()) config_fail(key, "expected an integer");
  return v.get<long long>();
}

}  // namespace detail

// Applies overrides on top of `base` and validates the result.
inline DerivationConfig config_from_json(const ojson& j, DerivationConfig base = {}) {
  using detail::config_fail;
  if (j.is_null()) return base;
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    if (key == "base_risk_target") {
      if (!v.is_object()) config_fail(key, "expected an object");
      for (const auto& [sev, x] : v.items()) {
        auto s = parse_severity(sev);
        if (!s) config_fail(key + "." + sev, "unknown severity");
        base.base_risk_target[*s] = detail::config_number(x, key + "." + sev);
      }
    } else if (key == "mission_hours") {
      base.mission_hours = detail::config_number(v, key);
    } else if (key == "alpha") {
      base.alpha = detail::config_number(v, key);
    } else if (key == "max_cardinality") {
      base.max_cardinality = static_cast<int>(detail::config_integer(v, key));
    } else if (key == "max_joint") {
      base.max_joint = static_cast<int>(detail::config_integer(v, key));
    } else if (key == "effectiveness_default") {
      base.effectiveness_default = detail::config_number(v, key);
    } else if (key == "seed") {
      if (!v.is_number_unsigned()) config_fail(key, "expected a non-negative integer");
      base.seed = v.get<std::uint64_t>();
    } else if (key == "candidate_cap") {
      auto n = detail::config_integer(v, key);
      if (n < 1) config_fail(key, "must be >= 1");
      base.candidate_cap = static_cast<std::size_t>(n);
    } else if (key == "importance") {
      if (!v.is_object()) config_fail(key, "expected an object");
      for (const auto& [id, w] : v.items()) base.importance[id] = detail::config_number(w, key + "." + id);
    } else if (key == "samples") {
      auto n = detail::config_integer(v, key);
      if (n < 1) config_fail(key, "must be >= 1");
      base.samples = static_cast<std::size_t>(n);
    } else if (key == "required_ps") {
      base.required_ps = detail::config_number(v, key);
    } else if (key == "uncertainty_strength") {
      base.uncertainty_strength = detail::config_number(v, key);
    } else {
      config_fail(key, "unknown field");
    }
  }
  base.validate();
  return base;
}

inline ojson to_json(const CauseHypothesis& h) {
  ojson j = ojson::object();
  j["component"] = h.component;
  j["cause"] = h.cause.id();
  j["exposure"] = h.exposure;
  j["distance"] = h.distance;
  j["base"] = h.base_probability;
  j["adjusted"] = h.adjusted_probability;
  j["mitigated"] = h.mitigated;
  j["effectiveness"] = h.effectiveness;
  return j;
}

inline CauseKind cause_kind_from_id(const std::string& id) {
  if (id == "hardware-failure") return CauseKind::hardware();
  if (id == "software-bug") return CauseKind::software();
  const std::string prefix = "cyber-attack:";
  if (id.rfind(prefix, 0) == 0 && id.size() > prefix.size()) return CauseKind::cyber(id.substr(prefix.size()));
  throw Error(ErrorCode::kSchema, "unknown cause '" + id + "'");
}

inline ojson to_json(const DiagnosisResult& d) {
  ojson support = ojson::array();
  for (const auto& e : d.support) {
    support.push_back(ojson{{"component", e.component}, {"distance", e.distance}, {"common", e.common}});
  }
  ojson conflicts = ojson::array();
  for (const auto& c : d.conflicts) conflicts.push_back(c);
  ojson hitting = ojson::array();
  for (const auto& h : d.hitting_sets) hitting.push_back(h);
  ojson candidates = ojson::array();
  for (std::size_t i = 0; i < d.candidates.size(); ++i) {
    ojson causes = ojson::array();
    for (const auto& h : d.candidates[i].causes) causes.push_back(h.key());
    candidates.push_back(ojson{{"rank", i + 1}, {"probability", d.candidates[i].probability}, {"causes", causes}});
  }
  return ojson{{"assertion", d.assertion},     {"support", support},
               {"conflicts", conflicts},       {"hitting_sets", hitting},
               {"total_candidates", d.total_candidates}, {"truncated", d.truncated},
               {"candidates", candidates}};
}

inline ojson to_json(const ProbabilisticCertificate& c) {
  ojson per = ojson::object();
  for (const auto& s : c.per_assertion) {
    per[s.assertion] = ojson{{"residual", s.residual}, {"contribution", s.contribution}};
  }
  return ojson{{"ps", c.ps},
               {"required_ps", c.required_ps},
               {"confidence", c.confidence},
               {"samples", c.samples},
               {"seed", c.seed},
               {"per_assertion", per}};
}

inline ojson to_json(const DerivationReport& r) {
  ojson reqs = ojson::array();
  for (const auto& q : r.requirements) {
    ojson prov = ojson::array();
    for (const auto& p : q.provenance) {
      prov.push_back(ojson{{"assertion", p.assertion},
                           {"candidate_rank", p.candidate_rank},
                           {"component", p.component},
                           {"residual_before", p.residual_before},
                           {"residual_after", p.residual_after}});
    }
    reqs.push_back(ojson{{"id", q.id},
                         {"text", q.text},
                         {"attack", q.attack},
                         {"targets", q.targets},
                         {"effectiveness", q.effectiveness},
                         {"provenance", prov}});
  }
  ojson assertions = ojson::array();
  ojson accumulated = ojson::object();
  for (const auto& e : r.ledger) {
    ojson causes = ojson::array();
    for (const auto& h : e.causes) causes.push_back(to_json(h));
    assertions.push_back(ojson{{"assertion", e.assertion},
                               {"violated", e.violated},
                               {"severity", to_string(e.severity)},
                               {"importance", e.importance},
                               {"effective_target", e.effective_target},
                               {"initial_risk", e.initial_risk},
                               {"residual_risk", e.residual_risk},
                               {"status", e.unresolved ? "unresolved" : "met"},
                               {"trail", e.trail},
                               {"mitigated", e.mitigated},
                               {"causes", causes}});
    accumulated[e.assertion] = e.residual_risk;
  }
  ojson traces = ojson::array();
  for (const auto& t : r.traces) traces.push_back(to_json(t));
  ojson j = ojson::object();
  j["format"] = kReportFormat;
  j["model_digest"] = r.model_digest;
  j["config"] = to_json(r.config);
  j["assumptions"] = to_json(r.assumptions);
  j["requirements"] = reqs;
  j["ledger"] = ojson{{"assertions", assertions}, {"accumulated", accumulated}};
  j["traces"] = traces;
  j["unresolved"] = r.unresolved;
  j["certificate"] = r.certificate ? to_json(*r.certificate) : ojson(nullptr);
  return j;
}

inline std::string dump_report(const DerivationReport& r) { return to_json(r).dump(2) + "\n"; }

// Rebuilds everything but the traces, which only carry display data.
inline DerivationReport report_from_json(const ojson& j) {
  try {
    if (!j.is_object() || j.value("format", "") != kReportFormat) {
      throw Error(ErrorCode::kSchema, "not a derivation report");
    }
    DerivationReport r;
    r.model_digest = j.at("model_digest").get<std::string>();
    r.config = config_from_json(j.at("config"));
    const ojson& a = j.at("assumptions");
    r.assumptions.physical_access = a.at("physical_access").get<bool>();
    r.assumptions.supply_chain_tampering = a.at("supply_chain_tampering").get<bool>();
    r.assumptions.full_design_knowledge = a.at("full_design_knowledge").get<bool>();
    r.assumptions.remote_channels.clear();
    for (const auto& c : a.at("remote_channels")) {
      auto rc = parse_remote_channel(c.get<std::string>());
      if (!rc) throw Error(ErrorCode::kSchema, "unknown remote channel in report");
      r.assumptions.remote_channels.insert(*rc);
    }
    for (const auto& q : j.at("requirements")) {
      CyberRequirement req;
      req.id = q.at("id").get<std::string>();
      req.text = q.at("text").get<std::string>();
      req.attack = q.at("attack").get<std::string>();
      req.targets = q.at("targets").get<std::set<std::string>>();
      req.effectiveness = q.at("effectiveness").get<double>();
      for (const auto& p : q.at("provenance")) {
        req.provenance.push_back({p.at("assertion").get<std::string>(), p.at("candidate_rank").get<std::size_t>(),
                                  p.at("component").get<std::string>(), p.at("residual_before").get<double>(),
                                  p.at("residual_after").get<double>()});
      }
      r.requirements.push_back(std::move(req));
    }
    for (const auto& e : j.at("ledger").at("assertions")) {
      LedgerEntry entry;
      entry.assertion = e.at("assertion").get<std::string>();
      entry.violated = e.at("violated").get<std::vector<std::string>>();
      auto sev = parse_severity(e.at("severity").get<std::string>());
      if (!sev) throw Error(ErrorCode::kSchema, "unknown severity in report");
      entry.severity = *sev;
      entry.importance = e.at("importance").get<double>();
      entry.effective_target = e.at("effective_target").get<double>();
      entry.initial_risk = e.at("initial_risk").get<double>();
      entry.residual_risk = e.at("residual_risk").get<double>();
      entry.unresolved = e.at("status").get<std::string>() == "unresolved";
      entry.trail = e.at("trail").get<std::vector<double>>();
      entry.mitigated = e.at("mitigated").get<std::vector<std::string>>();
      for (const auto& h : e.at("causes")) {
        CauseHypothesis c;
        c.component = h.at("component").get<std::string>();
        c.cause = cause_kind_from_id(h.at("cause").get<std::string>());
        c.exposure = h.at("exposure").get<double>();
        c.distance = h.at("distance").get<int>();
        c.base_probability = h.at("base").get<double>();
        c.adjusted_probability = h.at("adjusted").get<double>();
        c.mitigated = h.at("mitigated").get<bool>();
        c.effectiveness = h.at("effectiveness").get<double>();
        entry.causes.push_back(std::move(c));
      }
      r.ledger.push_back(std::move(entry));
    }
    r.unresolved = j.at("unresolved").get<std::vector<std::string>>();
    const ojson& c = j.at("certificate");
    if (!c.is_null()) {
      ProbabilisticCertificate cert;
      cert.ps = c.at("ps").get<double>();
      cert.required_ps = c.at("required_ps").get<double>();
      cert.confidence = c.at("confidence").get<double>();
      cert.samples = c.at("samples").get<std::size_t>();
      cert.seed = c.at("seed").get<std::uint64_t>();
      for (const auto& [assertion, s] : c.at("per_assertion").items()) {
        cert.per_assertion.push_back({assertion, s.at("residual").get<double>(), s.at("contribution").get<double>()});
      }
      r.certificate = cert;
    }
    return r;
  } catch (const ojson::exception& e) {
    throw Error(ErrorCode::kSchema, std::string("malformed report: ") + e.what());
  }
}

inline DerivationReport parse_report(std::string_view text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const ojson::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("report is not valid JSON: ") + e.what());
  }
  return report_from_json(j);
}

struct RequirementChange {
  CyberRequirement before;
  CyberRequirement after;
};

struct ResidualDelta {
  std::string assertion;
  std::optional<double> before;
  std::optional<double> after;
};

struct ReportDiff {
  std::vector<CyberRequirement> added;
  std::vector<CyberRequirement> removed;
  std::vector<RequirementChange> changed;
  std::vector<ResidualDelta> residuals;

  bool empty() const { return added.empty() && removed.empty() && changed.empty() && residuals.empty(); }
};

// Requirements are compared by (attack, targets); ids may differ between runs.
inline ReportDiff diff_reports(const DerivationReport& a, const DerivationReport& b) {
  if (a.model_digest != b.model_digest) {
    throw Error(ErrorCode::kConflict, "reports describe different models");
  }
  using Key = std::pair<std::string, std::set<std::string>>;
  std::map<Key, const CyberRequirement*> left;
  std::map<Key, const CyberRequirement*> right;
  for (const auto& q : a.requirements) left.emplace(Key{q.attack, q.targets}, &q);
  for (const auto& q : b.requirements) right.emplace(Key{q.attack, q.targets}, &q);
  ReportDiff d;
  for (const auto& q : b.requirements) {
    auto it = left.find({q.attack, q.targets});
    if (it == left.end()) {
      d.added.push_back(q);
    } else if (it->second->text != q.text || it->second->effectiveness != q.effectiveness) {
      d.changed.push_back({*it->second, q});
    }
  }
  for (const auto& q : a.requirements) {
    if (!right.count({q.attack, q.targets})) d.removed.push_back(q);
  }
  std::map<std::string, double> ra;
  std::map<std::string, double> rb;
  std::vector<std::string> order;
  for (const auto& e : a.ledger) {
    ra[e.assertion] = e.residual_risk;
    order.push_back(e.assertion);
  }
  for (const auto& e : b.ledger) {
    rb[e.assertion] = e.residual_risk;
    if (!ra.count(e.assertion)) order.push_back(e.assertion);
  }
  for (const auto& id : order) {
    std::optional<double> x;
    std::optional<double> y;
    if (auto it = ra.find(id); it != ra.end()) x = it->second;
    if (auto it = rb.find(id); it != rb.end()) y = it->second;
    if (x != y) d.residuals.push_back({id, x, y});
  }
  return d;
}

inline ojson to_json(const ReportDiff& d) {
  auto brief = [](const CyberRequirement& q) {
    return ojson{{"id", q.id}, {"attack", q.attack}, {"targets", q.targets}, {"text", q.text}};
  };
  ojson added = ojson::array();
  for (const auto& q : d.added) added.push_back(brief(q));
  ojson removed = ojson::array();
  for (const auto& q : d.removed) removed.push_back(brief(q));
  ojson changed = ojson::array();
  for (const auto& c : d.changed) changed.push_back(ojson{{"before", brief(c.before)}, {"after", brief(c.after)}});
  ojson residuals = ojson::array();
  for (const auto& r : d.residuals) {
    ojson x = r.before ? ojson(*r.before) : ojson(nullptr);
    ojson y = r.after ? ojson(*r.after) : ojson(nullptr);
    ojson delta = r.before && r.after ? ojson(*r.after - *r.before) : ojson(nullptr);
    residuals.push_back(ojson{{"assertion", r.assertion}, {"before", x}, {"after", y}, {"delta", delta}});
  }
  return ojson{{"empty", d.empty()}, {"added", added}, {"removed", removed}, {"changed", changed},
               {"residuals", residuals}};
}

// Six significant digits, independent of the C locale.
inline std::string format_probability(double p) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, p, std::chars_format::general, 6);
  return ec == std::errc() ? std::string(buf, end) : std::string("?");
}

inline std::string explain(const DerivationReport& r, const std::string& req_id) {
  const CyberRequirement* q = nullptr;
  for (const auto& x : r.requirements) {
    if (x.id == req_id) q = &x;
  }
  if (!q) throw Error(ErrorCode::kNotFound, "no requirement " + req_id + " in report");
  std::ostringstream out;
  out << q->id << ": " << q->text << "\n";
  out << "  attack model: " << q->attack << "\n";
  out << "  targets:";
  for (const auto& t : q->targets) out << " " << t;
  out << "\n";
  out << "  effectiveness: " << format_probability(q->effectiveness) << "\n";
  for (const auto& p : q->provenance) {
    out << "  - violation " << p.assertion << ": candidate #" << p.candidate_rank << " blames "
        << p.component << " (" << q->attack << "); residual risk " << format_probability(p.residual_before)
        << " -> " << format_probability(p.residual_after) << "\n";
  }
  return out.str();
}

}  // namespace dcrypps
