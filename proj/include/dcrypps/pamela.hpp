#pragma once

// Structural subset of the Pamela modeling language: `defpclass` forms with a
// parameter vector, a `:fields` map of pclass / lvar / literal initializers and
// a `:meta` map of diagnosis attributes.
//
//   (defpclass GPS [localnet]
//     :meta {:kind sensor :mtbf-hours 20000 :exposure [radio] :display "GPS"})
//   (defpclass Unit []
//     :fields {:net (lvar "localnetwork" Network)
//              :gps (pclass GPS :net)})
//
// Instantiation turns a root class into a SystemModel. Wiring rules:
//  - a component handed a network it does not forward to a child field
//    communicates over that network;
//  - a program or server handed a board, or declared as a field of a board
//    class, is hosted on that board;
//  - `:reads-from` / `:controls` meta lists add dataflow edges;
//  - lvar fields with equal labels anywhere in one tree share one instance.
// A class without `:kind` that declares component fields is an assembly: it
// wires its fields but is not itself a component.

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dcrypps/error.hpp"
#include "dcrypps/model.hpp"
#include "dcrypps/sexpr.hpp"

namespace dcrypps::pamela {

struct FieldInit {
  enum class Kind { kPclass, kLvar, kLiteral };
  Kind kind = Kind::kLiteral;
  // class name (pclass), label (lvar), or literal text
  std::string target;
  // pclass: argument references; lvar: optional class name of the shared resource
  std::vector<std::string> args;
  SourceSpan span;

  friend bool operator==(const FieldInit&, const FieldInit&) = default;
};

struct ClassMeta {
  std::optional<ComponentKind> kind;
  std::string display;
  std::optional<double> mtbf_hours;
  std::optional<double> defect_rate;
  std::set<Exposure> exposure;
  std::optional<double> importance;
  std::optional<double> deadline_ms;
  std::set<std::string> roles;
  std::vector<std::string> reads_from;
  std::vector<std::string> controls;

  friend bool operator==(const ClassMeta&, const ClassMeta&) = default;
};

struct PClassDef {
  std::string name;
  std::vector<std::string> params;
  std::vector<std::pair<std::string, FieldInit>> fields;  // declaration order
  ClassMeta meta;
  SourceSpan span;

  const FieldInit* field(std::string_view field_name) const {
    for (const auto& [n, f] : fields) {
      if (n == field_name) return &f;
    }
    return nullptr;
  }

  bool has_component_fields() const {
    return std::any_of(fields.begin(), fields.end(), [](const auto& nf) {
      return nf.second.kind != FieldInit::Kind::kLiteral;
    });
  }

  bool is_assembly() const { return !meta.kind && has_component_fields(); }
};

namespace detail {

using sexpr::Datum;
using sexpr::Kind;

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg, const SourceSpan& span) {
  throw Error(code, msg, span);
}

inline void reject_elisions(const Datum& d) {
  if (d.is_symbol("...")) {
    fail(ErrorCode::kUnsupported, "unsupported form: '...' elision", d.span);
  }
  for (const auto& item : d.items) reject_elisions(item);
}

inline std::string name_of(const Datum& d, const char* what) {
  if (!d.is_name()) {
    fail(ErrorCode::kParse, std::string("expected ") + what + ", got " + sexpr::kind_name(d.kind),
         d.span);
  }
  return d.text;
}

inline double number_of(const Datum& d, const std::string& key) {
  if (!d.is(Kind::kNumber)) fail(ErrorCode::kParse, ":" + key + " expects a number", d.span);
  return d.number;
}

inline std::vector<std::string> names_of(const Datum& d, const std::string& key) {
  std::vector<std::string> out;
  if (d.is_name()) {
    out.push_back(d.text);
    return out;
  }
  if (!d.is_sequence()) fail(ErrorCode::kParse, ":" + key + " expects a vector of names", d.span);
  for (const auto& item : d.items) out.push_back(name_of(item, "name"));
  return out;
}

inline ClassMeta parse_meta(const Datum& map) {
  if (!map.is(Kind::kMap)) fail(ErrorCode::kParse, ":meta expects a {…} map", map.span);
  ClassMeta meta;
  std::set<std::string> seen;
  for (std::size_t i = 0; i < map.items.size(); i += 2) {
    const Datum& k = map.items[i];
    const Datum& v = map.items[i + 1];
    std::string key = name_of(k, "meta key");
    if (!seen.insert(key).second) fail(ErrorCode::kParse, "duplicate meta key :" + key, k.span);
    if (key == "kind") {
      auto kind = parse_component_kind(name_of(v, "component kind"));
      if (!kind) fail(ErrorCode::kParse, "unknown component kind '" + v.text + "'", v.span);
      meta.kind = kind;
    } else if (key == "display") {
      if (!v.is(Kind::kString)) fail(ErrorCode::kParse, ":display expects a string", v.span);
      meta.display = v.text;
    } else if (key == "mtbf-hours") {
      meta.mtbf_hours = number_of(v, key);
      if (!(*meta.mtbf_hours > 0)) fail(ErrorCode::kParse, ":mtbf-hours must be > 0", v.span);
    } else if (key == "defect-rate") {
      meta.defect_rate = number_of(v, key);
      if (*meta.defect_rate < 0 || *meta.defect_rate > 1) {
        fail(ErrorCode::kParse, ":defect-rate must be in [0,1]", v.span);
      }
    } else if (key == "importance") {
      meta.importance = number_of(v, key);
      if (!(*meta.importance >= 1)) fail(ErrorCode::kParse, ":importance must be >= 1", v.span);
    } else if (key == "deadline-ms") {
      meta.deadline_ms = number_of(v, key);
      if (!(*meta.deadline_ms > 0)) fail(ErrorCode::kParse, ":deadline-ms must be > 0", v.span);
    } else if (key == "exposure") {
      for (const auto& tag : names_of(v, key)) {
        auto e = parse_exposure(tag);
        if (!e) fail(ErrorCode::kParse, "unknown exposure tag '" + tag + "'", v.span);
        meta.exposure.insert(*e);
      }
    } else if (key == "roles") {
      for (const auto& r : names_of(v, key)) meta.roles.insert(r);
    } else if (key == "reads-from") {
      meta.reads_from = names_of(v, key);
    } else if (key == "controls") {
      meta.controls = names_of(v, key);
    } else {
      fail(ErrorCode::kUnsupported, "unsupported meta attribute :" + key, k.span);
    }
  }
  return meta;
}

inline FieldInit parse_field_init(const Datum& v) {
  FieldInit f;
  f.span = v.span;
  if (v.is(Kind::kList)) {
    if (v.items.empty() || !v.items[0].is(Kind::kSymbol)) {
      fail(ErrorCode::kParse, "malformed field map: initializer must be (pclass …) or (lvar …)",
           v.span);
    }
    const std::string& head = v.items[0].text;
    if (head == "pclass") {
      if (v.items.size() < 2) fail(ErrorCode::kParse, "pclass needs a class name", v.span);
      f.kind = FieldInit::Kind::kPclass;
      f.target = name_of(v.items[1], "class name");
      for (std::size_t i = 2; i < v.items.size(); ++i) {
        f.args.push_back(name_of(v.items[i], "argument reference"));
      }
    } else if (head == "lvar") {
      if (v.items.size() < 2 || v.items.size() > 3 || !v.items[1].is(Kind::kString) ||
          v.items[1].text.empty()) {
        fail(ErrorCode::kParse, "lvar needs a nonempty string label and an optional class",
             v.span);
      }
      f.kind = FieldInit::Kind::kLvar;
      f.target = v.items[1].text;
      if (v.items.size() == 3) f.args.push_back(name_of(v.items[2], "class name"));
    } else {
      fail(ErrorCode::kUnsupported, "unsupported field initializer '" + head + "'", v.span);
    }
    return f;
  }
  if (v.is(Kind::kNumber) || v.is(Kind::kString) || v.is(Kind::kKeyword) || v.is(Kind::kSymbol)) {
    f.kind = FieldInit::Kind::kLiteral;
    f.target = v.text;
    return f;
  }
  fail(ErrorCode::kParse, "malformed field map: unexpected " + std::string(sexpr::kind_name(v.kind)),
       v.span);
}

inline PClassDef parse_defpclass(const Datum& form) {
  reject_elisions(form);
  PClassDef def;
  def.span = form.span;
  if (form.items.size() < 3) {
    fail(ErrorCode::kParse, "defpclass needs a name and a parameter vector", form.span);
  }
  def.name = name_of(form.items[1], "class name");
  const Datum& params = form.items[2];
  if (!params.is(Kind::kVector)) {
    fail(ErrorCode::kParse, "defpclass " + def.name + ": expected [params]", params.span);
  }
  for (const auto& p : params.items) {
    std::string name = name_of(p, "parameter name");
    if (name == "self") fail(ErrorCode::kParse, "'self' is reserved", p.span);
    if (std::find(def.params.begin(), def.params.end(), name) != def.params.end()) {
      fail(ErrorCode::kParse, "duplicate parameter '" + name + "'", p.span);
    }
    def.params.push_back(std::move(name));
  }
  bool fields_seen = false;
  bool meta_seen = false;
  for (std::size_t i = 3; i < form.items.size(); i += 2) {
    const Datum& key = form.items[i];
    if (!key.is(Kind::kKeyword)) {
      fail(ErrorCode::kParse, "defpclass " + def.name + ": expected an option keyword", key.span);
    }
    if (key.text != "fields" && key.text != "meta") {
      fail(ErrorCode::kUnsupported, "unsupported form: option :" + key.text, key.span);
    }
    if (i + 1 >= form.items.size()) {
      fail(ErrorCode::kParse, "option :" + key.text + " has no value", key.span);
    }
    const Datum& value = form.items[i + 1];
    if (key.text == "fields") {
      if (fields_seen) fail(ErrorCode::kParse, "duplicate :fields option", key.span);
      fields_seen = true;
      if (!value.is(Kind::kMap)) fail(ErrorCode::kParse, "malformed field map: expected {…}", value.span);
      for (std::size_t j = 0; j < value.items.size(); j += 2) {
        const Datum& fk = value.items[j];
        std::string fname = name_of(fk, "field name");
        if (fname == "self") fail(ErrorCode::kParse, "'self' is reserved", fk.span);
        if (def.field(fname) ||
            std::find(def.params.begin(), def.params.end(), fname) != def.params.end()) {
          fail(ErrorCode::kParse, "malformed field map: duplicate name '" + fname + "'", fk.span);
        }
        def.fields.emplace_back(fname, parse_field_init(value.items[j + 1]));
      }
    } else {
      if (meta_seen) fail(ErrorCode::kParse, "duplicate :meta option", key.span);
      meta_seen = true;
      def.meta = parse_meta(value);
    }
  }
  return def;
}

}  // namespace detail

inline std::vector<PClassDef> parse(std::string_view source, std::string file = {}) {
  std::vector<PClassDef> defs;
  std::set<std::string> names;
  for (const auto& form : sexpr::read(source, std::move(file))) {
    if (!form.is(sexpr::Kind::kList) || form.items.empty() ||
        !form.items[0].is_symbol("defpclass")) {
      std::string what = form.is(sexpr::Kind::kList) && !form.items.empty() && form.items[0].is_name()
                             ? "'" + form.items[0].text + "'"
                             : std::string(sexpr::kind_name(form.kind));
      throw Error(ErrorCode::kParse, "unknown top-level form " + what, form.span);
    }
    PClassDef def = detail::parse_defpclass(form);
    if (!names.insert(def.name).second) {
      throw Error(ErrorCode::kParse, "duplicate class name '" + def.name + "'", form.span);
    }
    defs.push_back(std::move(def));
  }
  return defs;
}

// Last-defined class that no other class instantiates.
inline std::string default_root(const std::vector<PClassDef>& defs) {
  std::set<std::string> referenced;
  for (const auto& d : defs) {
    for (const auto& [n, f] : d.fields) {
      if (f.kind == FieldInit::Kind::kPclass) referenced.insert(f.target);
      if (f.kind == FieldInit::Kind::kLvar && !f.args.empty()) referenced.insert(f.args[0]);
    }
  }
  for (auto it = defs.rbegin(); it != defs.rend(); ++it) {
    if (!referenced.count(it->name)) return it->name;
  }
  throw Error(ErrorCode::kModel, "no root class: every class is instantiated by another");
}

namespace detail {

class Instantiator {
 public:
  explicit Instantiator(const std::vector<PClassDef>& defs) {
    for (const auto& d : defs) classes_.emplace(d.name, &d);
  }

  SystemModel run(const std::string& root) {
    const PClassDef& def = lookup(root, std::nullopt);
    if (!def.params.empty()) {
      throw Error(ErrorCode::kModel, "arity mismatch: root class " + root + " takes " +
                                         std::to_string(def.params.size()) + " arguments, got 0",
                  def.span);
    }
    build(def, def.is_assembly() ? std::string() : root, {}, /*nested=*/false);
    model_.validate();
    return std::move(model_);
  }

 private:
  // Scope values are component ids; empty optional marks a non-instance name.
  using Scope = std::map<std::string, std::optional<std::string>>;

  std::map<std::string, const PClassDef*> classes_;
  std::map<std::string, std::string> lvars_;  // label -> component id
  std::vector<std::string> stack_;
  SystemModel model_;

  const PClassDef& lookup(const std::string& name, const std::optional<SourceSpan>& span) {
    auto it = classes_.find(name);
    if (it == classes_.end()) throw Error(ErrorCode::kModel, "unknown class '" + name + "'", span);
    return *it->second;
  }

  static std::string child_id(const std::string& parent, const std::string& field) {
    return parent.empty() ? field : parent + "." + field;
  }

  std::string resolve(const Scope& scope, const std::string& ref, const std::string& self,
                      const SourceSpan& span) {
    if (ref == "self") {
      if (self.empty()) throw Error(ErrorCode::kReference, "'self' used inside an assembly", span);
      return self;
    }
    auto it = scope.find(ref);
    if (it == scope.end()) throw Error(ErrorCode::kReference, "unresolved reference '" + ref + "'", span);
    if (!it->second) throw Error(ErrorCode::kReference, "'" + ref + "' is not a component instance", span);
    return *it->second;
  }

  void add_component(const PClassDef& def, const std::string& id) {
    ComponentInstance c;
    c.id = id;
    c.class_name = def.name;
    c.kind = def.meta.kind.value_or(ComponentKind::kOther);
    c.display = def.meta.display;
    c.mtbf_hours = def.meta.mtbf_hours;
    c.defect_rate = def.meta.defect_rate;
    c.exposure = def.meta.exposure;
    c.importance = def.meta.importance.value_or(1.0);
    c.deadline_ms = def.meta.deadline_ms;
    c.roles = def.meta.roles;
    model_.components.emplace(id, std::move(c));
  }

  // `self_id` is empty for assemblies; `prefix` names nested fields.
  void build(const PClassDef& def, const std::string& self_id, const std::vector<std::string>& args,
             bool nested, const std::string& prefix_override = {}) {
    if (std::find(stack_.begin(), stack_.end(), def.name) != stack_.end()) {
      std::string cycle;
      for (const auto& s : stack_) cycle += s + " -> ";
      throw Error(ErrorCode::kModel, "instantiation cycle: " + cycle + def.name, def.span);
    }
    stack_.push_back(def.name);
    (void)nested;
    const std::string prefix = self_id.empty() ? prefix_override : self_id;

    if (!self_id.empty()) add_component(def, self_id);

    Scope scope;
    for (std::size_t i = 0; i < def.params.size(); ++i) scope[def.params[i]] = args[i];

    std::set<std::string> forwarded;
    for (const auto& [fname, f] : def.fields) {
      if (f.kind == FieldInit::Kind::kPclass) forwarded.insert(f.args.begin(), f.args.end());
    }

    for (const auto& [fname, f] : def.fields) {
      switch (f.kind) {
        case FieldInit::Kind::kLiteral:
          scope[fname] = std::nullopt;
          break;
        case FieldInit::Kind::kLvar: {
          auto it = lvars_.find(f.target);
          if (it != lvars_.end()) {
            scope[fname] = it->second;
            break;
          }
          std::string id = child_id(prefix, fname);
          lvars_.emplace(f.target, id);
          if (f.args.empty()) {
            ComponentInstance c;
            c.id = id;
            c.class_name = "Resource";
            c.display = f.target;
            model_.components.emplace(id, std::move(c));
          } else {
            const PClassDef& cls = lookup(f.args[0], f.span);
            if (!cls.params.empty()) {
              throw Error(ErrorCode::kModel,
                          "arity mismatch: lvar class " + cls.name + " must take no arguments",
                          f.span);
            }
            if (cls.is_assembly()) {
              throw Error(ErrorCode::kModel, "lvar class " + cls.name + " must be a component",
                          f.span);
            }
            build(cls, id, {}, true);
          }
          scope[fname] = id;
          break;
        }
        case FieldInit::Kind::kPclass: {
          const PClassDef& cls = lookup(f.target, f.span);
          if (cls.params.size() != f.args.size()) {
            throw Error(ErrorCode::kModel,
                        "arity mismatch: " + cls.name + " takes " +
                            std::to_string(cls.params.size()) + " arguments, got " +
                            std::to_string(f.args.size()),
                        f.span);
          }
          std::vector<std::string> child_args;
          for (const auto& ref : f.args) child_args.push_back(resolve(scope, ref, self_id, f.span));
          std::string id = child_id(prefix, fname);
          if (cls.is_assembly()) {
            build(cls, {}, child_args, true, id);
            scope[fname] = std::nullopt;
          } else {
            build(cls, id, child_args, true);
            scope[fname] = id;
            if (!self_id.empty()) {
              const auto& me = model_.components.at(self_id);
              const auto& child = model_.components.at(id);
              if (me.kind == ComponentKind::kBoard && is_software(child.kind)) {
                model_.edges.insert({id, EdgeKind::kHostedOn, self_id});
              }
            }
          }
          break;
        }
      }
    }

    if (!self_id.empty()) {
      const auto kind = model_.components.at(self_id).kind;
      for (std::size_t i = 0; i < def.params.size(); ++i) {
        const std::string& target = args[i];
        if (target == self_id) continue;
        const auto tkind = model_.components.at(target).kind;
        if (tkind == ComponentKind::kNetwork && !forwarded.count(def.params[i])) {
          model_.edges.insert({self_id, EdgeKind::kCommunicatesOver, target});
        }
        if (tkind == ComponentKind::kBoard && is_software(kind)) {
          model_.edges.insert({self_id, EdgeKind::kHostedOn, target});
        }
      }
      for (const auto& ref : def.meta.reads_from) {
        model_.edges.insert({self_id, EdgeKind::kReadsFrom, resolve(scope, ref, self_id, def.span)});
      }
      for (const auto& ref : def.meta.controls) {
        model_.edges.insert({self_id, EdgeKind::kControls, resolve(scope, ref, self_id, def.span)});
      }
    }
    stack_.pop_back();
  }
};

}  // namespace detail

inline SystemModel instantiate(const std::vector<PClassDef>& defs, const std::string& root) {
  return detail::Instantiator(defs).run(root);
}

inline SystemModel load_model(std::string_view source, std::string file = {},
                              std::optional<std::string> root = std::nullopt) {
  auto defs = parse(source, std::move(file));
  if (defs.empty()) return SystemModel{};
  return instantiate(defs, root ? *root : default_root(defs));
}

}  // namespace dcrypps::pamela
