#pragma once

#include <algorithm>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dcrypps/error.hpp"

namespace dcrypps {

// Declared in lexical order of their names so enum order == name order.
enum class ComponentKind {
  kActuator,
  kBoard,
  kConcentrator,
  kNetwork,
  kOther,
  kProgram,
  kSensor,
  kServer,
  kStation,
};

inline constexpr std::string_view kComponentKindNames[] = {
    "actuator", "board", "concentrator", "network", "other",
    "program",  "sensor", "server",      "station"};

inline std::string_view to_string(ComponentKind k) {
  return kComponentKindNames[static_cast<int>(k)];
}

inline std::optional<ComponentKind> parse_component_kind(std::string_view s) {
  for (int i = 0; i < static_cast<int>(std::size(kComponentKindNames)); ++i) {
    if (kComponentKindNames[i] == s) return static_cast<ComponentKind>(i);
  }
  return std::nullopt;
}

// Software runs on a board; everything else is hardware or infrastructure.
inline bool is_software(ComponentKind k) {
  return k == ComponentKind::kProgram || k == ComponentKind::kServer;
}

enum class Exposure { kInternetFacing, kLocalOnly, kRadio };

inline std::string_view to_string(Exposure e) {
  switch (e) {
    case Exposure::kInternetFacing: return "internet-facing";
    case Exposure::kLocalOnly: return "local-only";
    case Exposure::kRadio: return "radio";
  }
  return "?";
}

inline std::optional<Exposure> parse_exposure(std::string_view s) {
  if (s == "internet-facing") return Exposure::kInternetFacing;
  if (s == "local-only") return Exposure::kLocalOnly;
  if (s == "radio") return Exposure::kRadio;
  return std::nullopt;
}

// Multiplier applied to an attack's base likelihood.
inline double exposure_factor(Exposure e) {
  switch (e) {
    case Exposure::kInternetFacing: return 1.0;
    case Exposure::kRadio: return 0.8;
    case Exposure::kLocalOnly: return 0.4;
  }
  return 0.4;
}

// Largest factor among the tags; an untagged surface counts as local-only.
inline double exposure_factor(const std::set<Exposure>& tags) {
  if (tags.empty()) return exposure_factor(Exposure::kLocalOnly);
  double f = 0.0;
  for (Exposure e : tags) f = std::max(f, exposure_factor(e));
  return f;
}

enum class EdgeKind { kCommunicatesOver, kControls, kHostedOn, kReadsFrom, kSharesResource };

inline constexpr std::string_view kEdgeKindNames[] = {
    "communicates-over", "controls", "hosted-on", "reads-from", "shares-resource"};

inline std::string_view to_string(EdgeKind k) { return kEdgeKindNames[static_cast<int>(k)]; }

inline std::optional<EdgeKind> parse_edge_kind(std::string_view s) {
  for (int i = 0; i < static_cast<int>(std::size(kEdgeKindNames)); ++i) {
    if (kEdgeKindNames[i] == s) return static_cast<EdgeKind>(i);
  }
  return std::nullopt;
}

struct ComponentInstance {
  std::string id;
  std::string class_name;
  ComponentKind kind = ComponentKind::kOther;
  std::string display;  // human-readable name used in requirement text
  std::optional<double> mtbf_hours;
  std::optional<double> defect_rate;
  std::set<Exposure> exposure;
  double importance = 1.0;
  std::optional<double> deadline_ms;
  std::set<std::string> roles;

  const std::string& display_name() const { return display.empty() ? id : display; }

  friend bool operator==(const ComponentInstance&, const ComponentInstance&) = default;
};

struct DependencyEdge {
  std::string src;
  EdgeKind kind = EdgeKind::kCommunicatesOver;
  std::string dst;

  friend auto operator<=>(const DependencyEdge&, const DependencyEdge&) = default;
};

struct Observable {
  std::string name;
  std::string anchor;            // component that maintains the value
  std::set<std::string> inputs;  // component ids or observable names
  bool deadline = false;         // value is a timing quantity of the control loop

  friend bool operator==(const Observable&, const Observable&) = default;
};

struct SystemModel {
  std::map<std::string, ComponentInstance> components;
  std::set<DependencyEdge> edges;
  std::map<std::string, Observable> observables;

  friend bool operator==(const SystemModel&, const SystemModel&) = default;

  const ComponentInstance& component(const std::string& id) const {
    auto it = components.find(id);
    if (it == components.end()) {
      throw Error(ErrorCode::kReference, "unknown component '" + id + "'");
    }
    return it->second;
  }

  bool has_component(const std::string& id) const { return components.count(id) != 0; }

  // Throws on the first broken invariant.
  void validate() const {
    for (const auto& [id, c] : components) {
      if (id != c.id) throw Error(ErrorCode::kModel, "component key/id mismatch for '" + id + "'");
      if (c.mtbf_hours && !(*c.mtbf_hours > 0.0)) {
        throw Error(ErrorCode::kModel, "component '" + id + "': mtbf-hours must be > 0");
      }
      if (c.defect_rate && !(*c.defect_rate >= 0.0 && *c.defect_rate <= 1.0)) {
        throw Error(ErrorCode::kModel, "component '" + id + "': defect-rate must be in [0,1]");
      }
      if (!(c.importance >= 1.0)) {
        throw Error(ErrorCode::kModel, "component '" + id + "': importance must be >= 1");
      }
      if (c.deadline_ms && !(*c.deadline_ms > 0.0)) {
        throw Error(ErrorCode::kModel, "component '" + id + "': deadline-ms must be > 0");
      }
    }
    for (const auto& e : edges) {
      if (!has_component(e.src) || !has_component(e.dst)) {
        throw Error(ErrorCode::kModel, "edge " + e.src + " " + std::string(to_string(e.kind)) +
                                           " " + e.dst + " references an unknown component");
      }
      if (e.src == e.dst &&
          (e.kind == EdgeKind::kCommunicatesOver || e.kind == EdgeKind::kReadsFrom)) {
        throw Error(ErrorCode::kModel, "self-loop " + std::string(to_string(e.kind)) +
                                           " edge on '" + e.src + "'");
      }
    }
    for (const auto& [name, o] : observables) {
      if (!has_component(o.anchor)) {
        throw Error(ErrorCode::kReference,
                    "observable '" + name + "' anchored on unknown component '" + o.anchor + "'");
      }
      for (const auto& in : o.inputs) {
        if (!has_component(in) && !observables.count(in)) {
          throw Error(ErrorCode::kReference,
                      "observable '" + name + "' input '" + in + "' does not resolve");
        }
      }
    }
  }
};

}  // namespace dcrypps
