#pragma once

// Attack-type catalog and structural matcher.
//
// An attack model applies to a component when its kind is listed, every named
// structural predicate holds, its own exposure tags intersect the rule's, and
// the threat assumptions grant the access the attack needs. Predicates also
// bind roles used by templates and requirement targets:
//
//   feeds-concentrator          peer = concentrator the component feeds
//   flow-over-network           peer = program exchanging data with it,
//                               channel = network both attach to,
//                               endpoint = where the program attaches
//   cohosted-management-server  peer = management server on the same board
//   consumes-external-data      (program reading non-software producers)
//   communicates-over-network   channel = network it talks over directly
//   remote-exposure             (internet-facing or radio tags)
//   hosts-multiple-programs     (board hosting >= 2 programs/servers)
//   hosts-deadline-program      peer = hosted program with a deadline
//   remotely-reachable-board    (board reachable from a remote-exposed part)
//   carries-control-loop        peer = deadline program whose loop uses it

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "dcrypps/error.hpp"
#include "dcrypps/model.hpp"
#include "dcrypps/property.hpp"

namespace dcrypps {

using ojson = nlohmann::ordered_json;

enum class AttackCategory { kPhysical, kSensorSpoofing, kTiming, kTransferFunctionModification };

inline std::string_view to_string(AttackCategory c) {
  switch (c) {
    case AttackCategory::kPhysical: return "physical";
    case AttackCategory::kSensorSpoofing: return "sensor-spoofing";
    case AttackCategory::kTiming: return "timing";
    case AttackCategory::kTransferFunctionModification: return "transfer-function-modification";
  }
  return "?";
}

inline std::optional<AttackCategory> parse_attack_category(std::string_view s) {
  if (s == "physical") return AttackCategory::kPhysical;
  if (s == "sensor-spoofing") return AttackCategory::kSensorSpoofing;
  if (s == "timing") return AttackCategory::kTiming;
  if (s == "transfer-function-modification") return AttackCategory::kTransferFunctionModification;
  return std::nullopt;
}

struct ApplicabilityRule {
  std::set<ComponentKind> kinds;
  std::vector<std::string> edges;
  std::set<Exposure> exposure;
  bool requires_deadline = false;
  std::set<RemoteChannel> requires_remote_channel;
  bool requires_physical_access = false;
  bool requires_supply_chain = false;
  bool requires_design_knowledge = false;

  friend bool operator==(const ApplicabilityRule&, const ApplicabilityRule&) = default;
};

struct AttackModel {
  std::string id;
  std::string name;
  AttackCategory category = AttackCategory::kSensorSpoofing;
  ApplicabilityRule applicability;
  double base_likelihood = 0.0;
  std::string requirement_template;
  std::map<Exposure, std::string> channel_templates;  // chosen by the channel's exposure
  std::vector<std::string> targets{"component"};
  double mitigation_effectiveness = 1.0;

  friend bool operator==(const AttackModel&, const AttackModel&) = default;
};

using AttackKb = std::vector<AttackModel>;

inline const AttackModel* find_attack(const AttackKb& kb, std::string_view id) {
  for (const auto& a : kb) {
    if (a.id == id) return &a;
  }
  return nullptr;
}

struct AttackMatch {
  std::string attack;
  std::string component;
  std::map<std::string, std::string> bindings;  // role -> component id
  std::vector<std::string> rationale;
  double exposure = 0.4;  // factor of the attacked surface

  friend bool operator==(const AttackMatch&, const AttackMatch&) = default;
};

namespace detail {

inline const std::map<std::string, std::set<std::string>>& predicate_roles() {
  static const std::map<std::string, std::set<std::string>> roles = {
      {"feeds-concentrator", {"peer"}},
      {"flow-over-network", {"peer", "channel", "endpoint"}},
      {"cohosted-management-server", {"peer"}},
      {"consumes-external-data", {}},
      {"communicates-over-network", {"channel"}},
      {"remote-exposure", {}},
      {"hosts-multiple-programs", {}},
      {"hosts-deadline-program", {"peer"}},
      {"remotely-reachable-board", {}},
      {"carries-control-loop", {"peer"}},
  };
  return roles;
}

inline std::vector<std::string> placeholders(std::string_view tmpl) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] != '{') continue;
    auto close = tmpl.find('}', i);
    if (close == std::string_view::npos) break;
    out.emplace_back(tmpl.substr(i + 1, close - i - 1));
    i = close;
  }
  return out;
}

[[noreturn]] inline void schema_fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::kSchema, path + ": " + msg);
}

inline const ojson& require(const ojson& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) schema_fail(path + "." + key, "missing field");
  return obj.at(key);
}

inline std::string req_string(const ojson& obj, const std::string& key, const std::string& path) {
  const ojson& v = require(obj, key, path);
  if (!v.is_string() || v.get<std::string>().empty()) {
    schema_fail(path + "." + key, "expected a nonempty string");
  }
  return v.get<std::string>();
}

inline double probability_field(const ojson& v, const std::string& path, bool open_zero) {
  if (!v.is_number()) schema_fail(path, "expected a number");
  double x = v.get<double>();
  bool ok = open_zero ? (x > 0.0 && x <= 1.0) : (x >= 0.0 && x <= 1.0);
  if (!ok) schema_fail(path, open_zero ? "expected a number in (0,1]" : "expected a number in [0,1]");
  return x;
}

inline std::vector<std::string> string_list(const ojson& obj, const std::string& key,
                                            const std::string& path) {
  std::vector<std::string> out;
  if (!obj.contains(key)) return out;
  const ojson& v = obj.at(key);
  if (!v.is_array()) schema_fail(path + "." + key, "expected an array of strings");
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_string()) {
      schema_fail(path + "." + key + "[" + std::to_string(i) + "]", "expected a string");
    }
    out.push_back(v[i].get<std::string>());
  }
  return out;
}

inline bool bool_field(const ojson& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) return false;
  if (!obj.at(key).is_boolean()) schema_fail(path + "." + key, "expected true or false");
  return obj.at(key).get<bool>();
}

inline AttackModel attack_from_json(const ojson& j, const std::string& path) {
  if (!j.is_object()) schema_fail(path, "expected an object");
  static const std::set<std::string> known = {
      "id", "name", "category", "applicability", "base_likelihood", "requirement_template",
      "channel_templates", "targets", "mitigation_effectiveness"};
  for (const auto& [k, v] : j.items()) {
    if (!known.count(k)) schema_fail(path + "." + k, "unknown field");
  }
  AttackModel a;
  a.id = req_string(j, "id", path);
  a.name = req_string(j, "name", path);
  std::string cat = req_string(j, "category", path);
  auto c = parse_attack_category(cat);
  if (!c) schema_fail(path + ".category", "unknown category '" + cat + "'");
  a.category = *c;

  const std::string rpath = path + ".applicability";
  const ojson& r = require(j, "applicability", path);
  if (!r.is_object()) schema_fail(rpath, "expected an object");
  static const std::set<std::string> rule_keys = {
      "kinds", "edges", "exposure", "requires_deadline", "requires_remote_channel",
      "requires_physical_access", "requires_supply_chain", "requires_design_knowledge"};
  for (const auto& [k, v] : r.items()) {
    if (!rule_keys.count(k)) schema_fail(rpath + "." + k, "unknown field");
  }
  ApplicabilityRule& rule = a.applicability;
  for (const auto& k : string_list(r, "kinds", rpath)) {
    auto kind = parse_component_kind(k);
    if (!kind) schema_fail(rpath + ".kinds", "unknown component kind '" + k + "'");
    rule.kinds.insert(*kind);
  }
  for (const auto& e : string_list(r, "edges", rpath)) {
    if (!predicate_roles().count(e)) schema_fail(rpath + ".edges", "unknown edge pattern '" + e + "'");
    rule.edges.push_back(e);
  }
  for (const auto& t : string_list(r, "exposure", rpath)) {
    auto e = parse_exposure(t);
    if (!e) schema_fail(rpath + ".exposure", "unknown exposure tag '" + t + "'");
    rule.exposure.insert(*e);
  }
  for (const auto& ch : string_list(r, "requires_remote_channel", rpath)) {
    auto rc = parse_remote_channel(ch);
    if (!rc || *rc == RemoteChannel::kNone) {
      schema_fail(rpath + ".requires_remote_channel", "expected internet or radio, got '" + ch + "'");
    }
    rule.requires_remote_channel.insert(*rc);
  }
  rule.requires_deadline = bool_field(r, "requires_deadline", rpath);
  rule.requires_physical_access = bool_field(r, "requires_physical_access", rpath);
  rule.requires_supply_chain = bool_field(r, "requires_supply_chain", rpath);
  rule.requires_design_knowledge = bool_field(r, "requires_design_knowledge", rpath);
  if (rule.kinds.empty() && rule.edges.empty() && rule.exposure.empty() && !rule.requires_deadline &&
      rule.requires_remote_channel.empty() && !rule.requires_physical_access &&
      !rule.requires_supply_chain && !rule.requires_design_knowledge) {
    schema_fail(rpath, "at least one applicability requirement must be set");
  }

  a.base_likelihood = probability_field(require(j, "base_likelihood", path), path + ".base_likelihood", false);
  a.requirement_template = req_string(j, "requirement_template", path);
  if (j.contains("channel_templates")) {
    const ojson& ct = j.at("channel_templates");
    if (!ct.is_object()) schema_fail(path + ".channel_templates", "expected an object");
    for (const auto& [tag, text] : ct.items()) {
      auto e = parse_exposure(tag);
      if (!e) schema_fail(path + ".channel_templates." + tag, "unknown exposure tag");
      if (!text.is_string()) schema_fail(path + ".channel_templates." + tag, "expected a string");
      a.channel_templates.emplace(*e, text.get<std::string>());
    }
  }
  if (j.contains("targets")) {
    a.targets = string_list(j, "targets", path);
    if (a.targets.empty()) schema_fail(path + ".targets", "expected at least one role");
  }
  if (j.contains("mitigation_effectiveness")) {
    a.mitigation_effectiveness =
        probability_field(j.at("mitigation_effectiveness"), path + ".mitigation_effectiveness", true);
  }

  std::set<std::string> bound{"component"};
  for (const auto& e : rule.edges) {
    for (const auto& role : predicate_roles().at(e)) bound.insert(role);
  }
  auto check_roles = [&](const std::vector<std::string>& roles, const std::string& where) {
    for (const auto& role : roles) {
      if (!bound.count(role)) schema_fail(where, "role {" + role + "} is never bound by the rule");
    }
  };
  check_roles(placeholders(a.requirement_template), path + ".requirement_template");
  for (const auto& [tag, text] : a.channel_templates) {
    if (!bound.count("channel")) schema_fail(path + ".channel_templates", "rule binds no channel");
    check_roles(placeholders(text), path + ".channel_templates." + std::string(to_string(tag)));
  }
  check_roles(a.targets, path + ".targets");
  return a;
}

}  // namespace detail

// Accepts {"attacks": [...]} or a bare array; blank text is an empty catalog.
inline AttackKb parse_kb(std::string_view source) {
  if (source.find_first_not_of(" \t\r\n") == std::string_view::npos) return {};
  ojson doc;
  try {
    doc = ojson::parse(source);
  } catch (const ojson::parse_error& e) {
    throw Error(ErrorCode::kSchema, std::string("KB is not valid JSON: ") + e.what());
  }
  const ojson* list = &doc;
  std::string base = "attacks";
  if (doc.is_object()) {
    for (const auto& [k, v] : doc.items()) {
      if (k != "format" && k != "attacks") detail::schema_fail(k, "unknown field");
    }
    if (!doc.contains("attacks")) return {};
    list = &doc.at("attacks");
  }
  if (!list->is_array()) detail::schema_fail(base, "expected an array");
  AttackKb kb;
  std::set<std::string> ids;
  for (std::size_t i = 0; i < list->size(); ++i) {
    AttackModel a = detail::attack_from_json((*list)[i], base + "[" + std::to_string(i) + "]");
    if (!ids.insert(a.id).second) {
      throw Error(ErrorCode::kSchema, "duplicate attack id '" + a.id + "'");
    }
    kb.push_back(std::move(a));
  }
  return kb;
}

inline ojson to_json(const AttackModel& a) {
  ojson rule = ojson::object();
  const auto& r = a.applicability;
  ojson kinds = ojson::array();
  for (auto k : r.kinds) kinds.push_back(to_string(k));
  rule["kinds"] = kinds;
  rule["edges"] = r.edges;
  ojson exposure = ojson::array();
  for (auto e : r.exposure) exposure.push_back(to_string(e));
  rule["exposure"] = exposure;
  rule["requires_deadline"] = r.requires_deadline;
  ojson channels = ojson::array();
  for (auto c : r.requires_remote_channel) channels.push_back(to_string(c));
  rule["requires_remote_channel"] = channels;
  rule["requires_physical_access"] = r.requires_physical_access;
  rule["requires_supply_chain"] = r.requires_supply_chain;
  rule["requires_design_knowledge"] = r.requires_design_knowledge;

  ojson j = ojson::object();
  j["id"] = a.id;
  j["name"] = a.name;
  j["category"] = to_string(a.category);
  j["applicability"] = rule;
  j["base_likelihood"] = a.base_likelihood;
  j["requirement_template"] = a.requirement_template;
  ojson ct = ojson::object();
  for (const auto& [tag, text] : a.channel_templates) ct[std::string(to_string(tag))] = text;
  j["channel_templates"] = ct;
  j["targets"] = a.targets;
  j["mitigation_effectiveness"] = a.mitigation_effectiveness;
  return j;
}

inline ojson kb_to_json(const AttackKb& kb) {
  ojson list = ojson::array();
  for (const auto& a : kb) list.push_back(to_json(a));
  return ojson{{"format", "dcrypps-attack-kb 1"}, {"attacks", list}};
}

// Derived structural facts the predicates consult.
struct Topology {
  std::set<std::pair<std::string, std::string>> flows;  // (producer, consumer)
  std::map<std::string, std::set<std::string>> networks_of;  // direct communicates-over
  std::map<std::string, std::string> host_of;
  std::map<std::string, std::set<std::string>> hosted;
  // network -> point through which a component reaches it (itself or its board)
  std::map<std::string, std::map<std::string, std::string>> attachments;

  explicit Topology(const SystemModel& model) {
    for (const auto& e : model.edges) {
      switch (e.kind) {
        case EdgeKind::kReadsFrom: flows.emplace(e.dst, e.src); break;
        case EdgeKind::kControls: flows.emplace(e.src, e.dst); break;
        case EdgeKind::kCommunicatesOver: networks_of[e.src].insert(e.dst); break;
        case EdgeKind::kHostedOn:
          host_of.emplace(e.src, e.dst);
          hosted[e.dst].insert(e.src);
          break;
        case EdgeKind::kSharesResource: break;
      }
    }
    for (const auto& [name, o] : model.observables) {
      for (const auto& in : o.inputs) {
        std::string producer = in;
        auto obs = model.observables.find(in);
        if (obs != model.observables.end()) producer = obs->second.anchor;
        if (producer != o.anchor && model.has_component(producer)) flows.emplace(producer, o.anchor);
      }
    }
    for (const auto& [id, c] : model.components) {
      auto& att = attachments[id];
      if (auto it = networks_of.find(id); it != networks_of.end()) {
        for (const auto& n : it->second) att.emplace(n, id);
      }
      auto host = host_of.find(id);
      if (host == host_of.end()) continue;
      const std::string& board = host->second;
      std::vector<std::string> via{board};
      for (const auto& s : hosted[board]) {
        if (s != id) via.push_back(s);
      }
      for (const auto& v : via) {
        if (auto it = networks_of.find(v); it != networks_of.end()) {
          for (const auto& n : it->second) att.emplace(n, board);
        }
      }
    }
  }

  std::set<std::string> flow_peers(const std::string& c) const {
    std::set<std::string> out;
    for (const auto& [p, q] : flows) {
      if (p == c) out.insert(q);
      if (q == c) out.insert(p);
    }
    return out;
  }

  const std::map<std::string, std::string>& attached(const std::string& c) const {
    static const std::map<std::string, std::string> none;
    auto it = attachments.find(c);
    return it == attachments.end() ? none : it->second;
  }
};

namespace detail {

using Binding = std::map<std::string, std::string>;

inline bool remote_tagged(const ComponentInstance& c) {
  return c.exposure.count(Exposure::kInternetFacing) || c.exposure.count(Exposure::kRadio);
}

inline std::vector<Binding> evaluate_predicate(const std::string& name, const SystemModel& model,
                                               const Topology& topo, const ComponentInstance& c) {
  std::vector<Binding> out;
  auto kind_of = [&](const std::string& id) { return model.component(id).kind; };
  auto deadline_programs_on = [&](const std::string& board) {
    std::vector<std::string> progs;
    if (auto it = topo.hosted.find(board); it != topo.hosted.end()) {
      for (const auto& s : it->second) {
        if (model.component(s).deadline_ms) progs.push_back(s);
      }
    }
    return progs;
  };

  if (name == "feeds-concentrator") {
    for (const auto& [p, q] : topo.flows) {
      if (p == c.id && kind_of(q) == ComponentKind::kConcentrator) out.push_back({{"peer", q}});
    }
  } else if (name == "flow-over-network") {
    const auto& mine = topo.attached(c.id);
    for (const auto& peer : topo.flow_peers(c.id)) {
      if (kind_of(peer) != ComponentKind::kProgram) continue;
      const auto& theirs = topo.attached(peer);
      for (const auto& [net, my_point] : mine) {
        auto it = theirs.find(net);
        if (it == theirs.end()) continue;
        out.push_back({{"peer", peer}, {"channel", net}, {"endpoint", it->second}});
      }
    }
  } else if (name == "cohosted-management-server") {
    auto host = topo.host_of.find(c.id);
    if (host != topo.host_of.end()) {
      for (const auto& s : topo.hosted.at(host->second)) {
        const auto& other = model.component(s);
        if (s != c.id && other.kind == ComponentKind::kServer && other.roles.count("management")) {
          out.push_back({{"peer", s}});
        }
      }
    }
  } else if (name == "consumes-external-data") {
    for (const auto& [p, q] : topo.flows) {
      if (q == c.id && !is_software(kind_of(p))) {
        out.push_back({});
        break;
      }
    }
  } else if (name == "communicates-over-network") {
    if (auto it = topo.networks_of.find(c.id); it != topo.networks_of.end()) {
      for (const auto& n : it->second) out.push_back({{"channel", n}});
    }
  } else if (name == "remote-exposure") {
    if (remote_tagged(c)) out.push_back({});
  } else if (name == "hosts-multiple-programs") {
    auto it = topo.hosted.find(c.id);
    if (it != topo.hosted.end() && it->second.size() >= 2) out.push_back({});
  } else if (name == "hosts-deadline-program") {
    for (const auto& p : deadline_programs_on(c.id)) out.push_back({{"peer", p}});
  } else if (name == "remotely-reachable-board") {
    bool reachable = remote_tagged(c);
    std::vector<std::string> parts{c.id};
    if (auto it = topo.hosted.find(c.id); it != topo.hosted.end()) {
      parts.insert(parts.end(), it->second.begin(), it->second.end());
    }
    for (const auto& p : parts) {
      if (remote_tagged(model.component(p))) reachable = true;
      if (auto it = topo.networks_of.find(p); it != topo.networks_of.end()) {
        for (const auto& n : it->second) {
          if (remote_tagged(model.component(n))) reachable = true;
        }
      }
    }
    if (reachable) out.push_back({});
  } else if (name == "carries-control-loop") {
    std::set<std::string> seen;
    for (const auto& [id, other] : model.components) {
      if (!other.deadline_ms || !topo.attached(id).count(c.id)) continue;
      for (const auto& peer : topo.flow_peers(id)) {
        auto k = kind_of(peer);
        if ((k == ComponentKind::kSensor || k == ComponentKind::kActuator) &&
            topo.attached(peer).count(c.id) && seen.insert(id).second) {
          out.push_back({{"peer", id}});
        }
      }
    }
  }
  return out;
}

inline std::vector<Binding> join(const std::vector<Binding>& left, const std::vector<Binding>& right) {
  std::vector<Binding> out;
  for (const auto& l : left) {
    for (const auto& r : right) {
      Binding merged = l;
      bool ok = true;
      for (const auto& [k, v] : r) {
        auto [it, inserted] = merged.emplace(k, v);
        if (!inserted && it->second != v) {
          ok = false;
          break;
        }
      }
      if (ok && std::find(out.begin(), out.end(), merged) == out.end()) out.push_back(merged);
    }
  }
  return out;
}

}  // namespace detail

inline bool access_permitted(const ApplicabilityRule& rule, const ThreatAssumptions& assumptions) {
  if (rule.requires_physical_access && !assumptions.physical_access) return false;
  if (rule.requires_supply_chain && !assumptions.supply_chain_tampering) return false;
  if (rule.requires_design_knowledge && !assumptions.full_design_knowledge) return false;
  if (!rule.requires_remote_channel.empty()) {
    bool any = std::any_of(rule.requires_remote_channel.begin(), rule.requires_remote_channel.end(),
                           [&](RemoteChannel ch) { return assumptions.permits(ch); });
    if (!any) return false;
  }
  return true;
}

// Matches of one attack model against one component; `deadline` tells whether
// the violation concerns control-loop timing.
inline std::vector<AttackMatch> match_attack(const SystemModel& model, const Topology& topo,
                                             const AttackModel& attack, const ComponentInstance& c,
                                             bool deadline, const ThreatAssumptions& assumptions) {
  const ApplicabilityRule& rule = attack.applicability;
  if (!rule.kinds.empty() && !rule.kinds.count(c.kind)) return {};
  if (!rule.exposure.empty()) {
    bool any = std::any_of(c.exposure.begin(), c.exposure.end(),
                           [&](Exposure e) { return rule.exposure.count(e) != 0; });
    if (!any) return {};
  }
  if (rule.requires_deadline && !deadline) return {};
  if (!access_permitted(rule, assumptions)) return {};

  std::vector<detail::Binding> bindings{{}};
  for (const auto& pred : rule.edges) {
    bindings = detail::join(bindings, detail::evaluate_predicate(pred, model, topo, c));
    if (bindings.empty()) return {};
  }
  std::vector<AttackMatch> out;
  for (auto& b : bindings) {
    AttackMatch m;
    m.attack = attack.id;
    m.component = c.id;
    std::string surface = c.id;
    if (auto ch = b.find("channel"); ch != b.end()) surface = ch->second;
    m.exposure = exposure_factor(model.component(surface).exposure);
    if (!rule.kinds.empty()) m.rationale.push_back("kind " + std::string(to_string(c.kind)));
    for (const auto& pred : rule.edges) m.rationale.push_back(pred);
    if (!rule.exposure.empty()) m.rationale.push_back("exposure");
    if (rule.requires_deadline) m.rationale.push_back("deadline observable");
    m.bindings = std::move(b);
    out.push_back(std::move(m));
  }
  std::sort(out.begin(), out.end(), [](const auto& x, const auto& y) { return x.bindings < y.bindings; });
  return out;
}

// All matches for a component, ordered by attack id.
inline std::vector<AttackMatch> applicable_attacks(const SystemModel& model, const Topology& topo,
                                                   const std::string& component, bool deadline,
                                                   const ThreatAssumptions& assumptions,
                                                   const AttackKb& kb) {
  std::vector<const AttackModel*> ordered;
  for (const auto& a : kb) ordered.push_back(&a);
  std::sort(ordered.begin(), ordered.end(), [](auto* x, auto* y) { return x->id < y->id; });
  std::vector<AttackMatch> out;
  const auto& c = model.component(component);
  for (const auto* a : ordered) {
    auto matches = match_attack(model, topo, *a, c, deadline, assumptions);
    out.insert(out.end(), matches.begin(), matches.end());
  }
  return out;
}

inline std::string fill_template(const std::string& tmpl, const std::map<std::string, std::string>& values) {
  std::string out;
  for (std::size_t i = 0; i < tmpl.size(); ++i) {
    if (tmpl[i] != '{') {
      out.push_back(tmpl[i]);
      continue;
    }
    auto close = tmpl.find('}', i);
    if (close == std::string::npos) {
      out.append(tmpl, i, std::string::npos);
      break;
    }
    std::string key = tmpl.substr(i + 1, close - i - 1);
    auto it = values.find(key);
    if (it == values.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unbound placeholder {" + key + "}");
    }
    out += it->second;
    i = close;
  }
  return out;
}

inline const std::string& choose_template(const SystemModel& model, const AttackModel& attack,
                                          const AttackMatch& match) {
  auto ch = match.bindings.find("channel");
  if (ch == match.bindings.end() || attack.channel_templates.empty()) return attack.requirement_template;
  const std::string* best = nullptr;
  double best_factor = -1.0;
  for (Exposure e : model.component(ch->second).exposure) {
    auto it = attack.channel_templates.find(e);
    if (it != attack.channel_templates.end() && exposure_factor(e) > best_factor) {
      best = &it->second;
      best_factor = exposure_factor(e);
    }
  }
  return best ? *best : attack.requirement_template;
}

// Placeholders are filled with display names.
inline std::string render_requirement(const SystemModel& model, const AttackModel& attack,
                                      const AttackMatch& match) {
  std::map<std::string, std::string> values;
  values["component"] = model.component(match.component).display_name();
  for (const auto& [role, id] : match.bindings) values[role] = model.component(id).display_name();
  return fill_template(choose_template(model, attack, match), values);
}

inline std::set<std::string> requirement_targets(const AttackModel& attack, const AttackMatch& match) {
  std::set<std::string> out;
  for (const auto& role : attack.targets) {
    if (role == "component") {
      out.insert(match.component);
      continue;
    }
    auto it = match.bindings.find(role);
    if (it == match.bindings.end()) {
      throw Error(ErrorCode::kInvalidArgument, "unbound target role '" + role + "'");
    }
    out.insert(it->second);
  }
  return out;
}

}  // namespace dcrypps
