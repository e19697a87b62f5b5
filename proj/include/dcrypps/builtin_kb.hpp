#pragma once

// The shipped attack catalog; data/attack_kb.json holds the same text.

#include <string_view>

#include "dcrypps/attack_kb.hpp"

namespace dcrypps {

inline constexpr std::string_view kBuiltinKbJson = R"kb({
  "format": "dcrypps-attack-kb 1",
  "attacks": [
    {
      "id": "spoof-via-concentrator",
      "name": "Sensor spoofing through a penetrated data concentrator",
      "category": "sensor-spoofing",
      "applicability": {
        "kinds": ["sensor"],
        "edges": ["feeds-concentrator"],
        "requires_remote_channel": ["internet", "radio"]
      },
      "base_likelihood": 0.30,
      "requirement_template": "{peer} must authenticate the data it concentrates from {component} and be hardened against penetration.",
      "targets": ["peer"],
      "mitigation_effectiveness": 1.0
    },
    {
      "id": "spoof-via-mitm",
      "name": "Man-in-the-middle on a sensor or actuator data path",
      "category": "sensor-spoofing",
      "applicability": {
        "kinds": ["actuator", "sensor", "station"],
        "edges": ["flow-over-network"],
        "requires_remote_channel": ["internet", "radio"]
      },
      "base_likelihood": 0.30,
      "requirement_template": "Traffic from {component} to {peer} over {channel} must be integrity-protected and authenticated.",
      "channel_templates": {
        "internet-facing": "{channel} communication between {component} and {endpoint} should be authenticated using public key encryption."
      },
      "targets": ["peer", "channel"],
      "mitigation_effectiveness": 1.0
    },
    {
      "id": "tfm-web-management",
      "name": "Control parameters changed through a co-hosted management web server",
      "category": "transfer-function-modification",
      "applicability": {
        "kinds": ["program"],
        "edges": ["cohosted-management-server"],
        "requires_remote_channel": ["internet"]
      },
      "base_likelihood": 0.20,
      "requirement_template": "{component} must accept control parameter and code updates only when they are authenticated, whatever arrives through {peer}.",
      "targets": ["component"],
      "mitigation_effectiveness": 1.0
    },
    {
      "id": "tfm-numeric-sensitivity",
      "name": "Crafted input values triggering numeric faults in controller code",
      "category": "transfer-function-modification",
      "applicability": {
        "kinds": ["program"],
        "edges": ["consumes-external-data"],
        "requires_remote_channel": ["internet", "radio"],
        "requires_design_knowledge": true
      },
      "base_likelihood": 0.05,
      "requirement_template": "{component} must check the range and rate of change of every input value before using it in control computations.",
      "targets": ["component"],
      "mitigation_effectiveness": 1.0
    },
    {
      "id": "tfm-protocol-overflow",
      "name": "Buffer overflow in a real-time network protocol handler",
      "category": "transfer-function-modification",
      "applicability": {
        "kinds": ["program"],
        "edges": ["communicates-over-network"],
        "requires_remote_channel": ["internet", "radio"]
      },
      "base_likelihood": 0.30,
      "requirement_template": "{component} must decode every message received over {channel} with bounds-checked parsing.",
      "targets": ["component"],
      "mitigation_effectiveness": 1.0
    },
    {
      "id": "tfm-open-ports",
      "name": "Remote login through open service ports",
      "category": "transfer-function-modification",
      "applicability": {
        "kinds": ["board", "server"],
        "edges": ["communicates-over-network"],
        "exposure": ["internet-facing", "radio"],
        "requires_remote_channel": ["internet", "radio"]
      },
      "base_likelihood": 0.20,
      "requirement_template": "{channel} must not carry remote login traffic (such as FTP or Telnet) to {component}; only the ports the design requires may be reachable.",
      "targets": ["channel"],
      "mitigation_effectiveness": 1.0
    },
    {
      "id": "timing-process-load",
      "name": "Load on co-located processes delays the control loop",
      "category": "timing",
      "applicability": {
        "kinds": ["board"],
        "edges": ["hosts-multiple-programs", "hosts-deadline-program"],
        "requires_deadline": true,
        "requires_remote_channel": ["internet", "radio"]
      },
      "base_likelihood": 0.10,
      "requirement_template": "{peer} must be scheduled on {component} so that load from other processes cannot make it miss its deadline.",
      "targets": ["peer"],
      "mitigation_effectiveness": 1.0
    },
    {
      "id": "timing-job-flood",
      "name": "Remote session launching competing jobs",
      "category": "timing",
      "applicability": {
        "kinds": ["board"],
        "edges": ["remotely-reachable-board", "hosts-deadline-program"],
        "requires_deadline": true,
        "requires_remote_channel": ["internet", "radio"]
      },
      "base_likelihood": 0.10,
      "requirement_template": "Remote sessions on {component} must not be able to start jobs that compete with {peer}.",
      "targets": ["peer"],
      "mitigation_effectiveness": 1.0
    },
    {
      "id": "timing-network-saturation",
      "name": "Network saturation stretching the sense-compute-actuate loop",
      "category": "timing",
      "applicability": {
        "kinds": ["network"],
        "edges": ["carries-control-loop"],
        "requires_deadline": true,
        "requires_remote_channel": ["internet", "radio"]
      },
      "base_likelihood": 0.10,
      "requirement_template": "{component} must reserve bandwidth for the control loop of {peer} so that flooding cannot delay it past its deadline.",
      "targets": ["component"],
      "mitigation_effectiveness": 1.0
    },
    {
      "id": "physical-tamper",
      "name": "Hardware modification by an attacker with physical access",
      "category": "physical",
      "applicability": {
        "kinds": ["actuator", "board", "concentrator", "network", "sensor"],
        "requires_physical_access": true
      },
      "base_likelihood": 0.10,
      "requirement_template": "{component} must be tamper-evident and protected against hardware modification.",
      "targets": ["component"],
      "mitigation_effectiveness": 1.0
    }
  ]
}
)kb";

inline const AttackKb& builtin_kb() {
  static const AttackKb kb = parse_kb(kBuiltinKbJson);
  return kb;
}

// `builtin` names the shipped catalog; anything else is KB document text.
inline AttackKb load_kb(std::string_view source) {
  if (source == "builtin") return builtin_kb();
  return parse_kb(source);
}

}  // namespace dcrypps
