// Copyright 2026 The kav Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Trace files are UTF-8 JSON lines, one operation per line:
//
//   {"key":"k","id":"op1","kind":"write","value":"a","start":0,"finish":2}
//
// Unknown fields are ignored. Writes of weighted traces carry an integer
// "weight". Witness files are a JSON array of {"slot": id} and
// {"container": [ids]} entries, front to back.

#pragma once

#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>

#include "json.hpp"
#include "kav/types.hpp"
#include "kav/verdict.hpp"
#include "kav/weighted.hpp"

namespace kav {

inline TraceRecord ParseTraceLine(const std::string& line, std::size_t line_no) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error& e) {
    throw SyntaxError(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) throw SyntaxError(line_no, "record is not a JSON object");

  auto string_field = [&](const char* name) {
    auto it = j.find(name);
    if (it == j.end() || !it->is_string()) {
      throw SyntaxError(line_no, std::string("missing string field '") + name + "'");
    }
    return it->get<std::string>();
  };
  auto int_field = [&](const char* name) {
    auto it = j.find(name);
    if (it == j.end() || !it->is_number_integer()) {
      throw SyntaxError(line_no, std::string("missing integer field '") + name + "'");
    }
    return it->get<std::int64_t>();
  };

  TraceRecord r;
  r.key = string_field("key");
  r.op.id = string_field("id");
  const std::string kind = string_field("kind");
  if (kind == "read") {
    r.op.kind = OpKind::kRead;
  } else if (kind == "write") {
    r.op.kind = OpKind::kWrite;
  } else {
    throw SyntaxError(line_no, "kind must be \"read\" or \"write\"");
  }
  r.op.value = string_field("value");
  r.op.start = int_field("start");
  r.op.finish = int_field("finish");
  if (j.contains("weight")) r.weight = int_field("weight");
  return r;
}

// Parses every line; blank lines are skipped. Throws SyntaxError naming the
// first malformed line.
inline Trace ParseTrace(std::istream& in) {
  Trace t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    t.records.push_back(ParseTraceLine(line, line_no));
  }
  return t;
}

inline std::string FormatTraceLine(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["key"] = r.key;
  j["id"] = r.op.id;
  j["kind"] = std::string(ToString(r.op.kind));
  j["value"] = r.op.value;
  j["start"] = r.op.start;
  j["finish"] = r.op.finish;
  if (r.weight) j["weight"] = *r.weight;
  return j.dump();
}

inline void WriteTrace(std::ostream& out, const Trace& t) {
  for (const TraceRecord& r : t.records) out << FormatTraceLine(r) << '\n';
}

inline Trace ToTrace(const History& h) {
  Trace t;
  for (const Operation& op : h.ops) t.records.push_back({h.key, op, std::nullopt});
  return t;
}

inline Trace ToTrace(const WeightedHistory& wh) {
  Trace t;
  for (const Operation& op : wh.base.ops) {
    TraceRecord r{wh.base.key, op, std::nullopt};
    if (op.is_write()) r.weight = wh.WeightOf(op);
    t.records.push_back(std::move(r));
  }
  return t;
}

// Weights of the writes in `records` that carry one, keyed by value.
inline std::map<std::string, std::int64_t> WeightsOf(const Trace& t, const std::string& key) {
  std::map<std::string, std::int64_t> w;
  for (const TraceRecord& r : t.records) {
    if (r.key == key && r.op.is_write() && r.weight) w[r.op.value] = *r.weight;
  }
  return w;
}

inline nlohmann::json WitnessToJson(const History& h, const WitnessOrder& w) {
  nlohmann::json arr = nlohmann::json::array();
  for (const WitnessEntry& e : w.entries) {
    if (e.kind == WitnessEntry::Kind::kSlot) {
      arr.push_back({{"slot", h.ops[e.ops.at(0)].id}});
    } else {
      nlohmann::json ids = nlohmann::json::array();
      for (OpIndex x : e.ops) ids.push_back(h.ops[x].id);
      arr.push_back({{"container", ids}});
    }
  }
  return arr;
}

// Resolves ids against `h`. Returns nullopt on malformed input, unknown
// ids, or ids that are not unique within `h`.
inline std::optional<WitnessOrder> WitnessFromJson(const History& h, const nlohmann::json& j) {
  std::unordered_map<std::string, OpIndex> by_id;
  for (OpIndex i = 0; i < h.ops.size(); ++i) {
    if (!by_id.emplace(h.ops[i].id, i).second) return std::nullopt;
  }
  if (!j.is_array()) return std::nullopt;
  auto resolve = [&](const nlohmann::json& id) -> std::optional<OpIndex> {
    if (!id.is_string()) return std::nullopt;
    auto it = by_id.find(id.get<std::string>());
    if (it == by_id.end()) return std::nullopt;
    return it->second;
  };
  WitnessOrder w;
  for (const auto& e : j) {
    if (!e.is_object()) return std::nullopt;
    if (e.contains("slot")) {
      auto x = resolve(e["slot"]);
      if (!x) return std::nullopt;
      w.entries.push_back(WitnessEntry::Slot(*x));
    } else if (e.contains("container") && e["container"].is_array()) {
      std::vector<OpIndex> reads;
      for (const auto& id : e["container"]) {
        auto x = resolve(id);
        if (!x) return std::nullopt;
        reads.push_back(*x);
      }
      w.entries.push_back(WitnessEntry::Container(std::move(reads)));
    } else {
      return std::nullopt;
    }
  }
  return w;
}

}  // namespace kav
