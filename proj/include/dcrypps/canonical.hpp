#pragma once

// Canonical model text: one record per line, components sorted by id, edges
// by (src, kind, dst), observables by name. Optional attributes are written
// only when present, so the text is a fixed point of parse + serialize.
//
//   dcrypps-model 1
//   component id=gps class=GPS kind=sensor display=GPS mtbf-hours=20000 ...
//   edge gps communicates-over localnet
//   observable GPS.pos anchor=controller.program inputs=gps

#include <openssl/evp.h>

#include <charconv>
#include <cstdio>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "dcrypps/error.hpp"
#include "dcrypps/model.hpp"

namespace dcrypps {

inline constexpr std::string_view kCanonicalHeader = "dcrypps-model 1";

// Shortest text that reads back to the same double.
inline std::string format_number(double v) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) return std::to_string(v);
  return std::string(buf, ptr);
}

namespace detail {

inline bool needs_quotes(std::string_view s) {
  if (s.empty()) return true;
  for (char c : s) {
    if (c == ' ' || c == '"' || c == '=' || c == '\\' || c == ',' || c == '\t' || c == '\n') {
      return true;
    }
  }
  return false;
}

inline std::string quote(std::string_view s) {
  if (!needs_quotes(s)) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out.push_back('\\');
    if (c == '\n') {
      out += "\\n";
      continue;
    }
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

template <typename Range, typename Fn>
std::string join(const Range& r, Fn&& fn) {
  std::string out;
  for (const auto& x : r) {
    if (!out.empty()) out.push_back(',');
    out += fn(x);
  }
  return out;
}

// Splits a record line into whitespace-separated words, honouring quotes.
// Words of the form key=value keep the '=' so callers can split them.
inline std::vector<std::string> split_words(std::string_view line, int lineno) {
  std::vector<std::string> words;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && line[i] == ' ') ++i;
    if (i >= line.size()) break;
    std::string word;
    while (i < line.size() && line[i] != ' ') {
      if (line[i] == '"') {
        ++i;
        bool closed = false;
        while (i < line.size()) {
          char c = line[i++];
          if (c == '\\' && i < line.size()) {
            char e = line[i++];
            word.push_back(e == 'n' ? '\n' : e);
          } else if (c == '"') {
            closed = true;
            break;
          } else {
            word.push_back(c);
          }
        }
        if (!closed) {
          throw Error(ErrorCode::kParse, "unterminated quoted value",
                      SourceSpan{"", lineno, static_cast<int>(i) + 1});
        }
      } else {
        word.push_back(line[i++]);
      }
    }
    words.push_back(std::move(word));
  }
  return words;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  if (!s.empty()) out.push_back(cur);
  return out;
}

inline double parse_double(const std::string& s, int lineno) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw Error(ErrorCode::kParse, "malformed number '" + s + "'", SourceSpan{"", lineno, 1});
  }
  return v;
}

}  // namespace detail

inline std::string to_canonical(const SystemModel& model) {
  std::ostringstream out;
  out << kCanonicalHeader << '\n';
  for (const auto& [id, c] : model.components) {
    out << "component id=" << detail::quote(id) << " class=" << detail::quote(c.class_name)
        << " kind=" << to_string(c.kind);
    if (!c.display.empty()) out << " display=" << detail::quote(c.display);
    if (c.mtbf_hours) out << " mtbf-hours=" << format_number(*c.mtbf_hours);
    if (c.defect_rate) out << " defect-rate=" << format_number(*c.defect_rate);
    if (!c.exposure.empty()) {
      out << " exposure="
          << detail::join(c.exposure, [](Exposure e) { return std::string(to_string(e)); });
    }
    out << " importance=" << format_number(c.importance);
    if (c.deadline_ms) out << " deadline-ms=" << format_number(*c.deadline_ms);
    if (!c.roles.empty()) {
      out << " roles=" << detail::quote(detail::join(c.roles, [](const std::string& r) { return r; }));
    }
    out << '\n';
  }
  for (const auto& e : model.edges) {
    out << "edge " << detail::quote(e.src) << ' ' << to_string(e.kind) << ' '
        << detail::quote(e.dst) << '\n';
  }
  for (const auto& [name, o] : model.observables) {
    out << "observable " << detail::quote(name) << " anchor=" << detail::quote(o.anchor);
    if (!o.inputs.empty()) {
      out << " inputs=" << detail::quote(detail::join(o.inputs, [](const std::string& s) { return s; }));
    }
    if (o.deadline) out << " deadline=true";
    out << '\n';
  }
  return out.str();
}

inline SystemModel parse_canonical(std::string_view text) {
  SystemModel model;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!saw_header) {
      if (line != kCanonicalHeader) {
        throw Error(ErrorCode::kParse, "missing canonical model header",
                    SourceSpan{"", lineno, 1});
      }
      saw_header = true;
      continue;
    }
    auto words = detail::split_words(line, lineno);
    const std::string& tag = words.front();
    auto fail = [&](const std::string& msg) {
      throw Error(ErrorCode::kParse, msg, SourceSpan{"", lineno, 1});
    };
    auto key_values = [&](std::size_t from) {
      std::vector<std::pair<std::string, std::string>> kv;
      for (std::size_t i = from; i < words.size(); ++i) {
        auto eq = words[i].find('=');
        if (eq == std::string::npos) fail("expected key=value, got '" + words[i] + "'");
        kv.emplace_back(words[i].substr(0, eq), words[i].substr(eq + 1));
      }
      return kv;
    };
    if (tag == "component") {
      ComponentInstance c;
      bool kind_seen = false;
      for (auto& [k, v] : key_values(1)) {
        if (k == "id") {
          c.id = v;
        } else if (k == "class") {
          c.class_name = v;
        } else if (k == "kind") {
          auto kind = parse_component_kind(v);
          if (!kind) fail("unknown component kind '" + v + "'");
          c.kind = *kind;
          kind_seen = true;
        } else if (k == "display") {
          c.display = v;
        } else if (k == "mtbf-hours") {
          c.mtbf_hours = detail::parse_double(v, lineno);
        } else if (k == "defect-rate") {
          c.defect_rate = detail::parse_double(v, lineno);
        } else if (k == "exposure") {
          for (const auto& t : detail::split_list(v)) {
            auto e = parse_exposure(t);
            if (!e) fail("unknown exposure tag '" + t + "'");
            c.exposure.insert(*e);
          }
        } else if (k == "importance") {
          c.importance = detail::parse_double(v, lineno);
        } else if (k == "deadline-ms") {
          c.deadline_ms = detail::parse_double(v, lineno);
        } else if (k == "roles") {
          for (const auto& r : detail::split_list(v)) c.roles.insert(r);
        } else {
          fail("unknown component attribute '" + k + "'");
        }
      }
      if (c.id.empty() || !kind_seen) fail("component record needs id and kind");
      if (model.components.count(c.id)) fail("duplicate component id '" + c.id + "'");
      std::string id = c.id;
      model.components.emplace(std::move(id), std::move(c));
    } else if (tag == "edge") {
      if (words.size() != 4) fail("edge record needs: edge <src> <kind> <dst>");
      auto kind = parse_edge_kind(words[2]);
      if (!kind) fail("unknown edge kind '" + words[2] + "'");
      model.edges.insert(DependencyEdge{words[1], *kind, words[3]});
    } else if (tag == "observable") {
      if (words.size() < 2) fail("observable record needs a name");
      Observable o;
      o.name = words[1];
      for (auto& [k, v] : key_values(2)) {
        if (k == "anchor") {
          o.anchor = v;
        } else if (k == "inputs") {
          for (const auto& s : detail::split_list(v)) o.inputs.insert(s);
        } else if (k == "deadline") {
          o.deadline = (v == "true");
        } else {
          fail("unknown observable attribute '" + k + "'");
        }
      }
      std::string name = o.name;
      model.observables.emplace(std::move(name), std::move(o));
    } else {
      fail("unknown record '" + tag + "'");
    }
  }
  if (!saw_header) throw Error(ErrorCode::kParse, "empty canonical model document");
  model.validate();
  return model;
}

inline std::string sha256_hex(std::string_view data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kInvalidArgument, "sha256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xf]);
  }
  return out;
}

inline std::string model_digest(const SystemModel& model) {
  return "sha256:" + sha256_hex(to_canonical(model));
}

}  // namespace dcrypps
