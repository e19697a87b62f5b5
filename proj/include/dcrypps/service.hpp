#pragma once

// HTTP/JSON service over the pipeline.
//
//   POST /api/models                 {model, properties, root?, assumptions?}
//   GET  /api/models/{id}
//   POST /api/models/{id}/derive     config overrides
//   POST /api/models/{id}/whatif     {config?, baseline?}   (nothing stored)
//   GET  /api/reports/{id}
//   GET  /api/attack-kb
//
// Records live in an append-only directory store: one JSON document per
// record, written once under a token made of a content-hash prefix and a
// sequence number.

#include <atomic>
#include <chrono>
#include <csignal>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <optional>
#include <ostream>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <thread>

#include "httplib.h"
#include "json.hpp"

#include "dcrypps/attack_kb.hpp"
#include "dcrypps/canonical.hpp"
#include "dcrypps/error.hpp"
#include "dcrypps/pipeline.hpp"
#include "dcrypps/report_json.hpp"

namespace dcrypps {

namespace fs = std::filesystem;

class RecordStore {
 public:
  explicit RecordStore(fs::path dir) : dir_(std::move(dir)) {
    for (const char* kind : {"models", "reports"}) {
      fs::create_directories(dir_ / kind);
      for (const auto& entry : fs::directory_iterator(dir_ / kind)) {
        if (entry.path().extension() != ".json") continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream buf;
        buf << in.rdbuf();
        records_[kind][entry.path().stem().string()] = buf.str();
        ++counter_;
      }
    }
  }

  // Stores `record` (with its token under `id_field`) and returns the token.
  std::string append(const std::string& kind, ojson record, const std::string& id_field) {
    std::unique_lock lock(mutex_);
    std::string token = sha256_hex(record.dump()).substr(0, 12) + "-" + std::to_string(++counter_);
    ojson stored = ojson::object();
    stored[id_field] = token;
    for (auto& [k, v] : record.items()) stored[k] = v;
    std::string text = stored.dump(2) + "\n";
    fs::path final_path = dir_ / kind / (token + ".json");
    fs::path tmp = final_path;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary);
      out << text;
      if (!out) throw Error(ErrorCode::kInvalidArgument, "cannot write " + tmp.string());
    }
    fs::rename(tmp, final_path);
    records_[kind][token] = std::move(text);
    return token;
  }

  std::optional<ojson> get(const std::string& kind, const std::string& token) const {
    std::shared_lock lock(mutex_);
    auto k = records_.find(kind);
    if (k == records_.end()) return std::nullopt;
    auto it = k->second.find(token);
    if (it == k->second.end()) return std::nullopt;
    return ojson::parse(it->second);
  }

 private:
  fs::path dir_;
  mutable std::shared_mutex mutex_;
  std::map<std::string, std::map<std::string, std::string>> records_;
  std::size_t counter_ = 0;
};

inline std::string utc_timestamp() {
  std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline ThreatAssumptions assumptions_from_json(const ojson& j, ThreatAssumptions base) {
  if (!j.is_object()) throw Error(ErrorCode::kInvalidArgument, "assumptions must be an object");
  for (const auto& [k, v] : j.items()) {
    if (k == "remote_channels") {
      if (!v.is_array()) throw Error(ErrorCode::kInvalidArgument, "assumptions.remote_channels must be an array");
      base.remote_channels.clear();
      for (const auto& c : v) {
        auto rc = c.is_string() ? parse_remote_channel(c.get<std::string>()) : std::nullopt;
        if (!rc) throw Error(ErrorCode::kInvalidArgument, "assumptions.remote_channels: unknown channel");
        base.remote_channels.insert(*rc);
      }
      continue;
    }
    bool* field = k == "physical_access"          ? &base.physical_access
                  : k == "supply_chain_tampering" ? &base.supply_chain_tampering
                  : k == "full_design_knowledge"  ? &base.full_design_knowledge
                                                  : nullptr;
    if (!field) throw Error(ErrorCode::kInvalidArgument, "assumptions." + k + ": unknown field");
    if (!v.is_boolean()) throw Error(ErrorCode::kInvalidArgument, "assumptions." + k + ": expected a boolean");
    *field = v.get<bool>();
  }
  base.validate();
  return base;
}

inline ojson issue_json(const Issue& i) {
  ojson j{{"code", i.code}, {"message", i.message}};
  if (i.span) j["span"] = ojson{{"file", i.span->file}, {"line", i.span->line}, {"column", i.span->column}};
  return j;
}

class Service {
 public:
  Service(fs::path data_dir, AttackKb kb) : store_(std::move(data_dir)), kb_(std::move(kb)) {}

  void install(httplib::Server& server) {
    server.Post("/api/models", [this](const auto& req, auto& res) { guarded(res, [&] { upload(req, res); }); });
    server.Get(R"(/api/models/([^/]+))", [this](const auto& req, auto& res) {
      guarded(res, [&] { fetch(res, "models", req.matches[1]); });
    });
    server.Post(R"(/api/models/([^/]+)/derive)", [this](const auto& req, auto& res) {
      guarded(res, [&] { derive_route(req, res, req.matches[1]); });
    });
    server.Post(R"(/api/models/([^/]+)/whatif)", [this](const auto& req, auto& res) {
      guarded(res, [&] { whatif(req, res, req.matches[1]); });
    });
    server.Get(R"(/api/reports/([^/]+))", [this](const auto& req, auto& res) {
      guarded(res, [&] { fetch(res, "reports", req.matches[1]); });
    });
    server.Get("/api/attack-kb", [this](const auto&, auto& res) { reply(res, 200, kb_to_json(kb_)); });
  }

 private:
  RecordStore store_;
  AttackKb kb_;

  static void reply(httplib::Response& res, int status, const ojson& body) {
    res.status = status;
    res.set_content(body.dump(2) + "\n", "application/json");
  }

  static void error(httplib::Response& res, int status, const std::string& code, const std::string& detail,
                    ojson extra = ojson::object()) {
    ojson body{{"code", code}, {"detail", detail}};
    for (auto& [k, v] : extra.items()) body[k] = v;
    reply(res, status, body);
  }

  template <typename Fn>
  static void guarded(httplib::Response& res, Fn&& fn) {
    try {
      fn();
    } catch (const Error& e) {
      int status = e.code() == ErrorCode::kNotFound ? 404 : e.code() == ErrorCode::kConflict ? 409 : 422;
      error(res, status, to_string(e.code()), e.detail());
    } catch (const std::exception& e) {
      error(res, 500, "internal_error", e.what());
    }
  }

  static std::optional<ojson> parse_body(const httplib::Request& req, httplib::Response& res, bool allow_empty) {
    if (allow_empty && req.body.find_first_not_of(" \t\r\n") == std::string::npos) return ojson::object();
    try {
      ojson body = ojson::parse(req.body);
      if (!body.is_object()) {
        error(res, 400, "malformed_body", "request body must be a JSON object");
        return std::nullopt;
      }
      return body;
    } catch (const ojson::parse_error& e) {
      error(res, 400, "malformed_body", e.what());
      return std::nullopt;
    }
  }

  ojson model_record(const std::string& id) const {
    auto rec = store_.get("models", id);
    if (!rec) throw Error(ErrorCode::kNotFound, "unknown model " + id);
    return *rec;
  }

  Inputs inputs_of(const ojson& rec) const {
    Inputs in;
    in.model = parse_canonical(rec.at("canonical").get<std::string>());
    in.properties = parse_properties(rec.at("properties").get<std::string>(), "properties");
    if (!rec.at("assumptions").is_null()) {
      in.properties.assumptions = assumptions_from_json(rec.at("assumptions"), in.properties.assumptions);
    }
    auto issues = bind_properties(in);
    if (!issues.empty()) throw Error(ErrorCode::kReference, issues.front().message);
    return in;
  }

  void upload(const httplib::Request& req, httplib::Response& res) {
    auto body = parse_body(req, res, false);
    if (!body) return;
    for (const char* field : {"model", "properties"}) {
      if (!body->contains(field) || !(*body)[field].is_string()) {
        return error(res, 400, "malformed_body", std::string("field '") + field + "' must be a string");
      }
    }
    std::optional<std::string> root;
    if (body->contains("root")) {
      if (!(*body)["root"].is_string()) return error(res, 400, "malformed_body", "field 'root' must be a string");
      root = (*body)["root"].get<std::string>();
    }
    ojson assumptions = body->value("assumptions", ojson(nullptr));
    std::vector<Issue> issues;
    Inputs in;
    try {
      in.model = pamela::load_model((*body)["model"].get<std::string>(), "model", root);
      in.properties = parse_properties((*body)["properties"].get<std::string>(), "properties");
      if (!assumptions.is_null()) assumptions_from_json(assumptions, in.properties.assumptions);
      issues = bind_properties(in);
    } catch (const Error& e) {
      issues.push_back(issue_from(e));
    }
    if (!issues.empty()) {
      ojson list = ojson::array();
      for (const auto& i : issues) list.push_back(issue_json(i));
      return error(res, 422, "invalid_model", issues.front().to_string(), ojson{{"issues", list}});
    }
    ojson record{{"created_at", utc_timestamp()},
                 {"digest", model_digest(in.model)},
                 {"canonical", to_canonical(in.model)},
                 {"properties", (*body)["properties"]},
                 {"assumptions", assumptions}};
    std::string id = store_.append("models", record, "model_id");
    reply(res, 201, ojson{{"model_id", id}, {"digest", record["digest"]}, {"issues", ojson::array()}});
  }

  void fetch(httplib::Response& res, const std::string& kind, const std::string& id) {
    auto rec = store_.get(kind, id);
    if (!rec) return error(res, 404, "not_found", "unknown " + kind.substr(0, kind.size() - 1) + " " + id);
    reply(res, 200, *rec);
  }

  void derive_route(const httplib::Request& req, httplib::Response& res, const std::string& id) {
    ojson rec = model_record(id);
    auto body = parse_body(req, res, true);
    if (!body) return;
    DerivationConfig config = config_from_json(*body);
    DerivationReport report = run_pipeline(inputs_of(rec), kb_, config);
    ojson record{{"model_id", id}, {"config", to_json(config)}, {"report", to_json(report)}};
    std::string report_id = store_.append("reports", record, "report_id");
    ojson out{{"report_id", report_id}};
    for (auto& [k, v] : record.items()) out[k] = v;
    reply(res, 200, out);
  }

  void whatif(const httplib::Request& req, httplib::Response& res, const std::string& id) {
    ojson rec = model_record(id);
    auto body = parse_body(req, res, true);
    if (!body) return;
    DerivationConfig base;
    std::optional<DerivationReport> baseline;
    if (body->contains("baseline") && !(*body)["baseline"].is_null()) {
      if (!(*body)["baseline"].is_string()) {
        return error(res, 400, "malformed_body", "field 'baseline' must be a report id");
      }
      std::string bid = (*body)["baseline"].get<std::string>();
      auto brec = store_.get("reports", bid);
      if (!brec) return error(res, 404, "not_found", "unknown report " + bid);
      if (brec->at("model_id") != id) {
        return error(res, 409, "conflict", "baseline " + bid + " belongs to another model");
      }
      baseline = report_from_json(brec->at("report"));
      base = baseline->config;
    }
    DerivationConfig config = config_from_json(body->value("config", ojson::object()), base);
    DerivationReport report = run_pipeline(inputs_of(rec), kb_, config);
    ojson out{{"model_id", id},
              {"config", to_json(config)},
              {"report", to_json(report)},
              {"diff", baseline ? to_json(diff_reports(*baseline, report)) : ojson(nullptr)}};
    reply(res, 200, out);
  }
};

namespace detail {
inline std::atomic<bool> g_stop{false};
inline void on_signal(int) { g_stop = true; }
}  // namespace detail

// Blocks until SIGINT/SIGTERM. Returns a process exit status.
inline int serve(const std::string& host, int port, const fs::path& data_dir, AttackKb kb, std::ostream& log,
                 std::ostream& err) {
  std::unique_ptr<Service> service;
  try {
    service = std::make_unique<Service>(data_dir, std::move(kb));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  httplib::Server server;
  server.set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  service->install(server);
  if (!server.bind_to_port(host, port)) {
    err << "error: cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  detail::g_stop = false;
  std::signal(SIGINT, detail::on_signal);
  std::signal(SIGTERM, detail::on_signal);
  log << "dcrypps listening on " << host << ":" << port << " (data in " << data_dir.string() << ")\n";
  log.flush();
  std::thread worker([&] { server.listen_after_bind(); });
  server.wait_until_ready();
  while (!detail::g_stop && server.is_running()) std::this_thread::sleep_for(std::chrono::milliseconds(100));
  server.stop();
  worker.join();
  log << "dcrypps stopped\n";
  return 0;
}

}  // namespace dcrypps
