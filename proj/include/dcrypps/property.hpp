#pragma once

// Desirable properties, their negations, and the properties document:
//
//   (threshold MaximumSensorDisagreement 50 "m")
//   (observable GPS.pos :anchor controller.program :inputs [gps])
//   (property sensor-agreement :category safety :severity catastrophic
//     :expr (<= (dist GPS.pos VOR.pos) MaximumSensorDisagreement))
//   (assumptions :physical-access false :remote-channels [internet radio])
//
// Expressions are symbolic. They are kept in negation normal form, which makes
// negate() an exact involution.

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dcrypps/error.hpp"
#include "dcrypps/model.hpp"
#include "dcrypps/sexpr.hpp"

namespace dcrypps {

// Ascending order, so larger means more severe.
enum class Severity { kAnnoyance, kReducedCapability, kCatastrophic };

inline std::string_view to_string(Severity s) {
  switch (s) {
    case Severity::kAnnoyance: return "annoyance";
    case Severity::kReducedCapability: return "reduced-capability";
    case Severity::kCatastrophic: return "catastrophic";
  }
  return "?";
}

inline std::optional<Severity> parse_severity(std::string_view s) {
  if (s == "annoyance") return Severity::kAnnoyance;
  if (s == "reduced-capability") return Severity::kReducedCapability;
  if (s == "catastrophic") return Severity::kCatastrophic;
  return std::nullopt;
}

inline constexpr std::string_view kCategories[] = {
    "information-security", "performance", "regulations", "resources", "safety",
    "system-protection"};

inline bool is_category(std::string_view s) {
  return std::find(std::begin(kCategories), std::end(kCategories), s) != std::end(kCategories);
}

enum class CompareOp { kLt, kLe, kGt, kGe };

inline std::string_view to_string(CompareOp op) {
  switch (op) {
    case CompareOp::kLt: return "<";
    case CompareOp::kLe: return "<=";
    case CompareOp::kGt: return ">";
    case CompareOp::kGe: return ">=";
  }
  return "?";
}

inline std::optional<CompareOp> parse_compare_op(std::string_view s) {
  if (s == "<") return CompareOp::kLt;
  if (s == "<=" || s == "≤") return CompareOp::kLe;
  if (s == ">") return CompareOp::kGt;
  if (s == ">=" || s == "≥") return CompareOp::kGe;
  return std::nullopt;
}

inline CompareOp flip(CompareOp op) {
  switch (op) {
    case CompareOp::kLt: return CompareOp::kGe;
    case CompareOp::kGe: return CompareOp::kLt;
    case CompareOp::kLe: return CompareOp::kGt;
    case CompareOp::kGt: return CompareOp::kLe;
  }
  return op;
}

// An observable, or dist(a, b) between two observables.
struct Term {
  std::string a;
  std::optional<std::string> b;

  std::vector<std::string> observables() const {
    std::vector<std::string> out{a};
    if (b) out.push_back(*b);
    return out;
  }

  std::string to_string() const { return b ? "(dist " + a + " " + *b + ")" : a; }

  friend bool operator==(const Term&, const Term&) = default;
};

struct PropertyExpr {
  enum class Kind { kCompare, kAnd, kOr, kNot };
  Kind kind = Kind::kCompare;
  CompareOp op = CompareOp::kLt;
  Term lhs;
  std::string threshold;
  std::vector<PropertyExpr> children;

  static PropertyExpr compare(CompareOp op, Term lhs, std::string threshold) {
    PropertyExpr e;
    e.op = op;
    e.lhs = std::move(lhs);
    e.threshold = std::move(threshold);
    return e;
  }
  static PropertyExpr junction(Kind kind, std::vector<PropertyExpr> children) {
    PropertyExpr e;
    e.kind = kind;
    e.children = std::move(children);
    return e;
  }

  std::string to_string() const {
    switch (kind) {
      case Kind::kCompare:
        return "(" + std::string(dcrypps::to_string(op)) + " " + lhs.to_string() + " " +
               threshold + ")";
      case Kind::kAnd:
      case Kind::kOr:
      case Kind::kNot: {
        std::string out = kind == Kind::kAnd ? "(and" : kind == Kind::kOr ? "(or" : "(not";
        for (const auto& c : children) out += " " + c.to_string();
        return out + ")";
      }
    }
    return "?";
  }

  void collect_observables(std::set<std::string>& out) const {
    if (kind == Kind::kCompare) {
      for (auto& o : lhs.observables()) out.insert(o);
    }
    for (const auto& c : children) c.collect_observables(out);
  }

  void collect_thresholds(std::set<std::string>& out) const {
    if (kind == Kind::kCompare) out.insert(threshold);
    for (const auto& c : children) c.collect_thresholds(out);
  }

  friend bool operator==(const PropertyExpr&, const PropertyExpr&) = default;
};

namespace detail {

inline PropertyExpr push_negation(const PropertyExpr& e, bool negated) {
  using K = PropertyExpr::Kind;
  switch (e.kind) {
    case K::kCompare:
      return negated ? PropertyExpr::compare(flip(e.op), e.lhs, e.threshold) : e;
    case K::kNot:
      return push_negation(e.children.at(0), !negated);
    case K::kAnd:
    case K::kOr: {
      std::vector<PropertyExpr> kids;
      for (const auto& c : e.children) kids.push_back(push_negation(c, negated));
      K k = negated ? (e.kind == K::kAnd ? K::kOr : K::kAnd) : e.kind;
      return PropertyExpr::junction(k, std::move(kids));
    }
  }
  return e;
}

}  // namespace detail

// Negation normal form: no `not` nodes, comparisons flipped instead.
inline PropertyExpr to_nnf(const PropertyExpr& e) { return detail::push_negation(e, false); }

inline PropertyExpr negate_expr(const PropertyExpr& e) { return detail::push_negation(e, true); }

struct Threshold {
  std::string name;
  double value = 0.0;
  std::string unit;

  friend bool operator==(const Threshold&, const Threshold&) = default;
};

struct InvariantProperty {
  std::string id;
  std::string category;
  Severity severity = Severity::kAnnoyance;
  PropertyExpr expression;
  SourceSpan span;

  std::set<std::string> observables() const {
    std::set<std::string> out;
    expression.collect_observables(out);
    return out;
  }
};

struct ViolationAssertion {
  std::string id;  // member ids joined by '+'
  std::vector<std::string> violated;
  std::vector<InvariantProperty> members;
  PropertyExpr expression;
  Severity severity = Severity::kAnnoyance;
};

inline ViolationAssertion negate(const InvariantProperty& p) {
  ViolationAssertion a;
  a.id = p.id;
  a.violated = {p.id};
  a.members = {p};
  a.expression = negate_expr(p.expression);
  a.severity = p.severity;
  return a;
}

// Each member is asserted violated at the same time.
inline ViolationAssertion joint_violation(const std::vector<InvariantProperty>& members) {
  if (members.empty()) throw Error(ErrorCode::kInvalidArgument, "joint violation needs members");
  if (members.size() == 1) return negate(members.front());
  ViolationAssertion a;
  std::vector<PropertyExpr> kids;
  for (const auto& p : members) {
    if (!a.id.empty()) a.id += "+";
    a.id += p.id;
    a.violated.push_back(p.id);
    kids.push_back(negate_expr(p.expression));
    a.severity = std::max(a.severity, p.severity);
  }
  a.members = members;
  a.expression = PropertyExpr::junction(PropertyExpr::Kind::kAnd, std::move(kids));
  return a;
}

// Singletons first, then pairs, up to max_joint-tuples. Properties are ordered
// by severity (most severe first) then id; tuples follow lexicographically,
// which keeps each size class ordered by its most severe member.
inline std::vector<ViolationAssertion> enumerate_assertions(std::vector<InvariantProperty> properties,
                                                            int max_joint) {
  if (max_joint < 1) throw Error(ErrorCode::kInvalidArgument, "max_joint must be >= 1");
  std::stable_sort(properties.begin(), properties.end(), [](const auto& x, const auto& y) {
    if (x.severity != y.severity) return x.severity > y.severity;
    return x.id < y.id;
  });
  const int k = static_cast<int>(properties.size());
  std::vector<ViolationAssertion> out;
  for (int size = 1; size <= std::min(max_joint, k); ++size) {
    std::vector<int> idx(size);
    for (int i = 0; i < size; ++i) idx[i] = i;
    for (;;) {
      std::vector<InvariantProperty> members;
      for (int i : idx) members.push_back(properties[i]);
      out.push_back(joint_violation(members));
      int i = size - 1;
      while (i >= 0 && idx[i] == k - size + i) --i;
      if (i < 0) break;
      ++idx[i];
      for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  return out;
}

enum class RemoteChannel { kInternet, kNone, kRadio };

inline std::string_view to_string(RemoteChannel c) {
  switch (c) {
    case RemoteChannel::kInternet: return "internet";
    case RemoteChannel::kNone: return "none";
    case RemoteChannel::kRadio: return "radio";
  }
  return "?";
}

inline std::optional<RemoteChannel> parse_remote_channel(std::string_view s) {
  if (s == "internet") return RemoteChannel::kInternet;
  if (s == "none") return RemoteChannel::kNone;
  if (s == "radio") return RemoteChannel::kRadio;
  return std::nullopt;
}

// Attacker capabilities. Defaults are remote-only with full design knowledge.
struct ThreatAssumptions {
  bool physical_access = false;
  bool supply_chain_tampering = false;
  bool full_design_knowledge = true;
  std::set<RemoteChannel> remote_channels{RemoteChannel::kInternet, RemoteChannel::kRadio};

  bool permits(RemoteChannel c) const {
    return c != RemoteChannel::kNone && remote_channels.count(c) != 0;
  }

  void validate() const {
    if (remote_channels.empty() && !(physical_access && supply_chain_tampering)) {
      throw Error(ErrorCode::kInvalidArgument,
                  "assumptions: remote-channels may only be empty when physical access and "
                  "supply-chain tampering are both granted");
    }
    if (remote_channels.count(RemoteChannel::kNone) && remote_channels.size() > 1) {
      throw Error(ErrorCode::kInvalidArgument, "assumptions: 'none' excludes other remote channels");
    }
  }

  friend bool operator==(const ThreatAssumptions&, const ThreatAssumptions&) = default;
};

struct PropertiesDoc {
  std::map<std::string, Threshold> thresholds;
  std::vector<Observable> observables;
  std::vector<InvariantProperty> properties;
  ThreatAssumptions assumptions;
};

namespace detail {

using sexpr::Datum;

[[noreturn]] inline void doc_fail(const std::string& msg, const SourceSpan& span) {
  throw Error(ErrorCode::kParse, msg, span);
}

inline std::string doc_name(const Datum& d, const char* what) {
  if (!d.is_name()) doc_fail(std::string("expected ") + what, d.span);
  return d.text;
}

inline bool doc_bool(const Datum& d) {
  if (d.is_symbol("true")) return true;
  if (d.is_symbol("false")) return false;
  doc_fail("expected true or false", d.span);
}

// Options after the leading positional items: (:key value)*
inline std::map<std::string, const Datum*> doc_options(const Datum& form, std::size_t from,
                                                       const std::set<std::string>& allowed) {
  std::map<std::string, const Datum*> out;
  for (std::size_t i = from; i < form.items.size(); i += 2) {
    const Datum& k = form.items[i];
    if (!k.is(sexpr::Kind::kKeyword)) doc_fail("expected an option keyword", k.span);
    if (!allowed.count(k.text)) doc_fail("unknown option :" + k.text, k.span);
    if (i + 1 >= form.items.size()) doc_fail("option :" + k.text + " has no value", k.span);
    if (!out.emplace(k.text, &form.items[i + 1]).second) {
      doc_fail("duplicate option :" + k.text, k.span);
    }
  }
  return out;
}

inline Term parse_term(const Datum& d) {
  if (d.is_name()) return Term{d.text, std::nullopt};
  if (d.is(sexpr::Kind::kList) && d.items.size() == 3 && d.items[0].is_symbol("dist")) {
    return Term{doc_name(d.items[1], "observable name"), doc_name(d.items[2], "observable name")};
  }
  doc_fail("expected an observable or (dist a b)", d.span);
}

inline PropertyExpr parse_expr(const Datum& d) {
  if (!d.is(sexpr::Kind::kList) || d.items.empty() || !d.items[0].is(sexpr::Kind::kSymbol)) {
    doc_fail("expected an expression list", d.span);
  }
  const std::string& head = d.items[0].text;
  if (head == "and" || head == "or") {
    if (d.items.size() < 2) doc_fail("(" + head + ") needs operands", d.span);
    std::vector<PropertyExpr> kids;
    for (std::size_t i = 1; i < d.items.size(); ++i) kids.push_back(parse_expr(d.items[i]));
    return PropertyExpr::junction(head == "and" ? PropertyExpr::Kind::kAnd : PropertyExpr::Kind::kOr,
                                  std::move(kids));
  }
  if (head == "not") {
    if (d.items.size() != 2) doc_fail("(not) takes one operand", d.span);
    return PropertyExpr::junction(PropertyExpr::Kind::kNot, {parse_expr(d.items[1])});
  }
  auto op = parse_compare_op(head);
  if (!op) doc_fail("unknown operator '" + head + "'", d.items[0].span);
  if (d.items.size() != 3) doc_fail("comparison takes a term and a threshold", d.span);
  return PropertyExpr::compare(*op, parse_term(d.items[1]), doc_name(d.items[2], "threshold name"));
}

}  // namespace detail

inline PropertiesDoc parse_properties(std::string_view source, std::string file = {}) {
  using detail::doc_fail;
  using detail::doc_name;
  PropertiesDoc doc;
  std::set<std::string> property_ids;
  std::set<std::string> observable_names;
  bool assumptions_seen = false;
  for (const auto& form : sexpr::read(source, std::move(file))) {
    if (!form.is(sexpr::Kind::kList) || form.items.empty() ||
        !form.items[0].is(sexpr::Kind::kSymbol)) {
      doc_fail("unknown top-level form", form.span);
    }
    const std::string& head = form.items[0].text;
    if (head == "threshold") {
      if (form.items.size() < 3 || form.items.size() > 4 ||
          !form.items[2].is(sexpr::Kind::kNumber) ||
          (form.items.size() == 4 && !form.items[3].is(sexpr::Kind::kString))) {
        doc_fail("threshold form is (threshold Name value \"unit\")", form.span);
      }
      Threshold t{doc_name(form.items[1], "threshold name"), form.items[2].number,
                  form.items.size() == 4 ? form.items[3].text : std::string()};
      if (doc.thresholds.count(t.name)) doc_fail("duplicate threshold " + t.name, form.span);
      std::string name = t.name;
      doc.thresholds.emplace(std::move(name), std::move(t));
    } else if (head == "observable") {
      if (form.items.size() < 2) doc_fail("observable needs a name", form.span);
      Observable o;
      o.name = doc_name(form.items[1], "observable name");
      auto opts = detail::doc_options(form, 2, {"anchor", "inputs", "deadline"});
      if (!opts.count("anchor")) doc_fail("observable " + o.name + " needs :anchor", form.span);
      o.anchor = doc_name(*opts["anchor"], "anchor component");
      if (opts.count("inputs")) {
        const sexpr::Datum& in = *opts["inputs"];
        if (!in.is_sequence()) doc_fail(":inputs expects a vector", in.span);
        for (const auto& x : in.items) o.inputs.insert(doc_name(x, "input name"));
      }
      if (opts.count("deadline")) o.deadline = detail::doc_bool(*opts["deadline"]);
      if (!observable_names.insert(o.name).second) {
        doc_fail("duplicate observable " + o.name, form.span);
      }
      doc.observables.push_back(std::move(o));
    } else if (head == "property") {
      if (form.items.size() < 2) doc_fail("property needs an id", form.span);
      InvariantProperty p;
      p.span = form.span;
      p.id = doc_name(form.items[1], "property id");
      if (p.id.find('+') != std::string::npos) doc_fail("property ids may not contain '+'", form.span);
      auto opts = detail::doc_options(form, 2, {"category", "severity", "expr"});
      for (const char* required : {"category", "severity", "expr"}) {
        if (!opts.count(required)) {
          doc_fail("property " + p.id + " needs :" + required, form.span);
        }
      }
      p.category = doc_name(*opts["category"], "category");
      if (!is_category(p.category)) doc_fail("unknown category " + p.category, opts["category"]->span);
      auto sev = parse_severity(doc_name(*opts["severity"], "severity"));
      if (!sev) doc_fail("unknown severity " + opts["severity"]->text, opts["severity"]->span);
      p.severity = *sev;
      p.expression = to_nnf(detail::parse_expr(*opts["expr"]));
      if (!property_ids.insert(p.id).second) doc_fail("duplicate property " + p.id, form.span);
      doc.properties.push_back(std::move(p));
    } else if (head == "assumptions") {
      if (assumptions_seen) doc_fail("duplicate assumptions form", form.span);
      assumptions_seen = true;
      auto opts = detail::doc_options(
          form, 1,
          {"physical-access", "supply-chain-tampering", "full-design-knowledge", "remote-channels"});
      ThreatAssumptions& a = doc.assumptions;
      if (opts.count("physical-access")) a.physical_access = detail::doc_bool(*opts["physical-access"]);
      if (opts.count("supply-chain-tampering")) {
        a.supply_chain_tampering = detail::doc_bool(*opts["supply-chain-tampering"]);
      }
      if (opts.count("full-design-knowledge")) {
        a.full_design_knowledge = detail::doc_bool(*opts["full-design-knowledge"]);
      }
      if (opts.count("remote-channels")) {
        const sexpr::Datum& rc = *opts["remote-channels"];
        if (!rc.is_sequence()) doc_fail(":remote-channels expects a vector", rc.span);
        a.remote_channels.clear();
        for (const auto& x : rc.items) {
          auto c = parse_remote_channel(doc_name(x, "remote channel"));
          if (!c) doc_fail("unknown remote channel " + x.text, x.span);
          a.remote_channels.insert(*c);
        }
      }
      try {
        a.validate();
      } catch (const Error& e) {
        doc_fail(e.detail(), form.span);
      }
    } else {
      doc_fail("unknown top-level form '" + head + "'", form.span);
    }
  }
  return doc;
}

struct Issue {
  std::string code;
  std::string message;
  std::optional<SourceSpan> span;

  std::string to_string() const {
    return (span ? span->to_string() + ": " : std::string()) + code + ": " + message;
  }
};

// Adds the document's observables to the model. Re-attaching an identical
// definition is a no-op; a different one under the same name is an error.
inline void attach_observables(SystemModel& model, const PropertiesDoc& doc) {
  for (const auto& o : doc.observables) {
    auto it = model.observables.find(o.name);
    if (it != model.observables.end()) {
      if (!(it->second == o)) {
        throw Error(ErrorCode::kConflict, "observable '" + o.name + "' already defined differently");
      }
      continue;
    }
    model.observables.emplace(o.name, o);
  }
  model.validate();
}

// Unresolved names in the properties against a model whose observables are attached.
inline std::vector<Issue> check_properties(const SystemModel& model, const PropertiesDoc& doc) {
  std::vector<Issue> issues;
  for (const auto& p : doc.properties) {
    for (const auto& o : p.observables()) {
      if (!model.observables.count(o)) {
        issues.push_back({"unresolved_reference",
                          "property " + p.id + " references unknown observable '" + o + "'", p.span});
      }
    }
    std::set<std::string> thresholds;
    p.expression.collect_thresholds(thresholds);
    for (const auto& t : thresholds) {
      if (!doc.thresholds.count(t)) {
        issues.push_back({"unresolved_reference",
                          "property " + p.id + " references unknown threshold '" + t + "'", p.span});
      }
    }
  }
  return issues;
}

}  // namespace dcrypps
