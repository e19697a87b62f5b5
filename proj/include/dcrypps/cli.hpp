#pragma once

// Command-line driver: validate, derive, explain, serve.
// Exit status: 0 success, 1 validation/derivation error, 2 usage error.

#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "dcrypps/builtin_kb.hpp"
#include "dcrypps/error.hpp"
#include "dcrypps/pipeline.hpp"
#include "dcrypps/report_json.hpp"
#include "dcrypps/service.hpp"

namespace dcrypps {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

inline std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s + " " : s + std::string(width - s.size(), ' ');
}

inline std::string join_targets(const std::set<std::string>& targets) {
  std::string out;
  for (const auto& t : targets) out += (out.empty() ? "" : ",") + t;
  return out;
}

inline void print_summary(std::ostream& out, const DerivationReport& r) {
  out << pad("REQ", 8) << pad("ATTACK", 26) << "TARGETS\n";
  for (const auto& q : r.requirements) {
    out << pad(q.id, 8) << pad(q.attack, 26) << join_targets(q.targets) << "\n";
  }
  out << "\n" << pad("ASSERTION", 44) << pad("TARGET", 12) << pad("RESIDUAL", 12) << "STATUS\n";
  for (const auto& e : r.ledger) {
    out << pad(e.assertion, 44) << pad(format_probability(e.effective_target), 12)
        << pad(format_probability(e.residual_risk), 12) << (e.unresolved ? "unresolved" : "met") << "\n";
  }
  out << "\n" << r.requirements.size() << " requirements, " << r.ledger.size() << " assertions, "
      << r.unresolved.size() << " unresolved\n";
  if (r.certificate) {
    out << "Ps " << format_probability(r.certificate->ps) << "  confidence "
        << format_probability(r.certificate->confidence) << " (required Ps "
        << format_probability(r.certificate->required_ps) << ", " << r.certificate->samples << " samples)\n";
  }
}

}  // namespace detail

inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Derive cyber-security requirements from a CPS design model"};
  app.require_subcommand(1);

  std::string model_path;
  std::string properties_path;
  std::optional<std::string> root;

  auto* validate = app.add_subcommand("validate", "Check a model and its properties");
  validate->add_option("model", model_path, "Model (.pam)")->required();
  validate->add_option("--properties", properties_path, "Properties document")->required();
  validate->add_option("--root", root, "Root class (default: last uninstantiated class)");

  DerivationConfig config;
  std::string kb_source = "builtin";
  std::string out_path;
  std::optional<double> risk_catastrophic;
  std::optional<double> risk_reduced;
  std::optional<double> risk_annoyance;
  std::vector<std::string> importance;
  auto* derive_cmd = app.add_subcommand("derive", "Derive requirements and a certificate");
  derive_cmd->add_option("model", model_path, "Model (.pam)")->required();
  derive_cmd->add_option("--properties", properties_path, "Properties document")->required();
  derive_cmd->add_option("--root", root, "Root class");
  derive_cmd->add_option("--kb", kb_source, "Attack KB file, or 'builtin'");
  derive_cmd->add_option("--risk-target-catastrophic", risk_catastrophic, "Base risk target, catastrophic");
  derive_cmd->add_option("--risk-target-reduced", risk_reduced, "Base risk target, reduced capability");
  derive_cmd->add_option("--risk-target-annoyance", risk_annoyance, "Base risk target, annoyance");
  derive_cmd->add_option("--alpha", config.alpha, "Distance decay per hop");
  derive_cmd->add_option("--max-faults", config.max_cardinality, "Largest candidate cardinality");
  derive_cmd->add_option("--max-joint", config.max_joint, "Largest joint violation");
  derive_cmd->add_option("--mission-hours", config.mission_hours, "Mission duration for MTBF");
  derive_cmd->add_option("--seed", config.seed, "Monte Carlo seed");
  derive_cmd->add_option("--samples", config.samples, "Monte Carlo draws");
  derive_cmd->add_option("--required-ps", config.required_ps, "Ps the certificate must reach");
  derive_cmd->add_option("--effectiveness", config.effectiveness_default, "Mitigation effectiveness scale");
  derive_cmd->add_option("--importance", importance, "component=weight (repeatable)");
  derive_cmd->add_option("--out", out_path, "Report path, '-' for stdout")->required();

  std::string report_path;
  std::string req_id;
  auto* explain_cmd = app.add_subcommand("explain", "Show why a requirement was derived");
  explain_cmd->add_option("report", report_path, "Report file")->required();
  explain_cmd->add_option("requirement", req_id, "Requirement id, e.g. REQ-1")->required();

  std::optional<int> port;
  std::string data_dir = "dcrypps-data";
  std::string host = "127.0.0.1";
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service");
  serve_cmd->add_option("--port", port, "Listen port (default 8080, or DCRYPPS_PORT)");
  serve_cmd->add_option("--host", host, "Listen address");
  serve_cmd->add_option("--data-dir", data_dir, "Record store directory");
  serve_cmd->add_option("--kb", kb_source, "Attack KB file, or 'builtin'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return kExitOk;
    }
    err << "usage error: " << e.what() << "\n" << "run with --help for usage\n";
    return kExitUsage;
  }

  auto read_or_usage = [&](const std::string& path) -> std::optional<std::string> {
    auto text = detail::read_file(path);
    if (!text) err << "usage error: cannot read " << path << "\n";
    return text;
  };
  auto load_kb_arg = [&]() -> std::optional<AttackKb> {
    if (kb_source == "builtin") return builtin_kb();
    auto text = read_or_usage(kb_source);
    if (!text) return std::nullopt;
    return parse_kb(*text);
  };

  try {
    if (*validate) {
      auto model_text = read_or_usage(model_path);
      auto props_text = read_or_usage(properties_path);
      if (!model_text || !props_text) return kExitUsage;
      std::vector<Issue> issues;
      try {
        Inputs in;
        in.model = pamela::load_model(*model_text, model_path, root);
        in.properties = parse_properties(*props_text, properties_path);
        issues = bind_properties(in);
      } catch (const Error& e) {
        issues.push_back(issue_from(e));
      }
      for (const auto& i : issues) out << i.to_string() << "\n";
      if (!issues.empty()) return kExitFailure;
      out << "OK\n";
      return kExitOk;
    }

    if (*derive_cmd) {
      auto model_text = read_or_usage(model_path);
      auto props_text = read_or_usage(properties_path);
      if (!model_text || !props_text) return kExitUsage;
      auto kb = load_kb_arg();
      if (!kb) return kExitUsage;
      if (risk_catastrophic) config.base_risk_target[Severity::kCatastrophic] = *risk_catastrophic;
      if (risk_reduced) config.base_risk_target[Severity::kReducedCapability] = *risk_reduced;
      if (risk_annoyance) config.base_risk_target[Severity::kAnnoyance] = *risk_annoyance;
      for (const auto& item : importance) {
        auto eq = item.find('=');
        double w = 0.0;
        const char* begin = item.data() + (eq == std::string::npos ? 0 : eq + 1);
        auto [ptr, ec] = std::from_chars(begin, item.data() + item.size(), w);
        if (eq == std::string::npos || ec != std::errc() || ptr != item.data() + item.size()) {
          err << "usage error: --importance expects component=weight, got '" << item << "'\n";
          return kExitUsage;
        }
        config.importance[item.substr(0, eq)] = w;
      }
      Inputs in = load_inputs(*model_text, model_path, *props_text, properties_path, root);
      DerivationReport report = run_pipeline(in, *kb, config);
      std::string text = dump_report(report);
      if (out_path == "-") {
        out << text;
        detail::print_summary(err, report);
      } else {
        std::ofstream file(out_path, std::ios::binary);
        file << text;
        if (!file) {
          err << "error: cannot write " << out_path << "\n";
          return kExitFailure;
        }
        detail::print_summary(out, report);
      }
      return kExitOk;
    }

    if (*explain_cmd) {
      auto text = read_or_usage(report_path);
      if (!text) return kExitUsage;
      out << explain(parse_report(*text), req_id);
      return kExitOk;
    }

    if (*serve_cmd) {
      auto kb = load_kb_arg();
      if (!kb) return kExitUsage;
      int chosen = 8080;
      if (port) {
        chosen = *port;
      } else if (const char* env = std::getenv("DCRYPPS_PORT")) {
        std::string s(env);
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), chosen);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
          err << "usage error: DCRYPPS_PORT must be a port number\n";
          return kExitUsage;
        }
      }
      return serve(host, chosen, data_dir, std::move(*kb), out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace dcrypps
