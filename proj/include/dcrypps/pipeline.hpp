#pragma once

// Loading model + properties, and running derivation plus certificate. The CLI
// and the service both go through here so they emit the same report bytes.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dcrypps/attack_kb.hpp"
#include "dcrypps/derivation.hpp"
#include "dcrypps/error.hpp"
#include "dcrypps/model.hpp"
#include "dcrypps/pamela.hpp"
#include "dcrypps/pcc.hpp"
#include "dcrypps/property.hpp"
#include "dcrypps/report_json.hpp"

namespace dcrypps {

struct Inputs {
  SystemModel model;
  PropertiesDoc properties;
};

inline Issue issue_from(const Error& e) { return {to_string(e.code()), e.detail(), e.span()}; }

// Attaches the document's observables; reports unresolved names as issues.
inline std::vector<Issue> bind_properties(Inputs& in) {
  try {
    attach_observables(in.model, in.properties);
  } catch (const Error& e) {
    return {issue_from(e)};
  }
  return check_properties(in.model, in.properties);
}

// Throws on the first blocking issue.
inline Inputs load_inputs(std::string_view model_source, const std::string& model_file,
                          std::string_view properties_source, const std::string& properties_file,
                          const std::optional<std::string>& root = std::nullopt) {
  Inputs in;
  in.model = pamela::load_model(model_source, model_file, root);
  in.properties = parse_properties(properties_source, properties_file);
  auto issues = bind_properties(in);
  if (!issues.empty()) {
    throw Error(ErrorCode::kReference, issues.front().message, issues.front().span);
  }
  return in;
}

inline DerivationReport run_pipeline(const Inputs& in, const AttackKb& kb, const DerivationConfig& config) {
  DerivationReport report = derive(in.model, in.properties.properties, kb, in.properties.assumptions, config);
  report.certificate = certify(report, kb);
  return report;
}

}  // namespace dcrypps
