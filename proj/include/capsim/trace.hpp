/*
 * Copyright 2026 The capsim Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef CAPSIM_TRACE_HPP_
#define CAPSIM_TRACE_HPP_

#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "capsim/types.hpp"

namespace capsim {

enum class TraceKind { kInvoke, kRespond, kSend, kDeliver, kDrop, kTimer, kUnanswered };

inline const char* to_string(TraceKind k) {
  switch (k) {
    case TraceKind::kInvoke: return "invoke";
    case TraceKind::kRespond: return "respond";
    case TraceKind::kSend: return "send";
    case TraceKind::kDeliver: return "deliver";
    case TraceKind::kDrop: return "drop";
    case TraceKind::kTimer: return "timer";
    case TraceKind::kUnanswered: return "unanswered";
  }
  return "?";
}

/**
 * One line of a trace. Which fields are meaningful depends on kind:
 *
 *   invoke      op node op_kind key val
 *   respond     op val
 *   send/deliver/drop  src dst msg
 *   timer       node timer
 *   unanswered  op
 */
struct TraceEvent {
  Tick t;
  std::uint64_t seq = 0;
  TraceKind kind = TraceKind::kInvoke;

  OpId op = 0;
  NodeId node;
  OpKind op_kind = OpKind::kRead;
  std::string key;
  ReadValue val;

  NodeId src;
  NodeId dst;
  std::uint64_t msg = 0;

  std::uint64_t timer = 0;

  friend bool operator==(const TraceEvent&, const TraceEvent&) = default;
};

using Trace = std::vector<TraceEvent>;

namespace detail {

inline nlohmann::ordered_json value_json(const ReadValue& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace detail

/// Serializes one event. Field order is fixed so traces compare byte-for-byte.
inline std::string to_json_line(const TraceEvent& e) {
  nlohmann::ordered_json j;
  j["t"] = e.t.value;
  j["seq"] = e.seq;
  j["ev"] = to_string(e.kind);
  switch (e.kind) {
    case TraceKind::kInvoke:
      j["op"] = e.op;
      j["node"] = e.node.value;
      j["kind"] = to_string(e.op_kind);
      j["key"] = e.key;
      j["val"] = detail::value_json(e.val);
      break;
    case TraceKind::kRespond:
      j["op"] = e.op;
      j["val"] = detail::value_json(e.val);
      break;
    case TraceKind::kSend:
    case TraceKind::kDeliver:
    case TraceKind::kDrop:
      j["src"] = e.src.value;
      j["dst"] = e.dst.value;
      j["msg"] = e.msg;
      break;
    case TraceKind::kTimer:
      j["node"] = e.node.value;
      j["timer"] = e.timer;
      break;
    case TraceKind::kUnanswered:
      j["op"] = e.op;
      break;
  }
  return j.dump();
}

inline void write_jsonl(std::ostream& os, const Trace& trace) {
  for (const auto& e : trace) os << to_json_line(e) << '\n';
}

inline std::string to_jsonl(const Trace& trace) {
  std::ostringstream os;
  write_jsonl(os, trace);
  return os.str();
}

namespace detail {

inline TraceKind parse_kind(std::string_view s) {
  if (s == "invoke") return TraceKind::kInvoke;
  if (s == "respond") return TraceKind::kRespond;
  if (s == "send") return TraceKind::kSend;
  if (s == "deliver") return TraceKind::kDeliver;
  if (s == "drop") return TraceKind::kDrop;
  if (s == "timer") return TraceKind::kTimer;
  if (s == "unanswered") return TraceKind::kUnanswered;
  throw std::invalid_argument("unknown event kind '" + std::string(s) + "'");
}

inline ReadValue parse_value(const nlohmann::json& j) {
  if (j.is_null()) return std::nullopt;
  if (!j.is_number_integer()) throw std::invalid_argument("val must be an integer or null");
  return j.get<Value>();
}

}  // namespace detail

inline TraceEvent parse_trace_line(std::string_view line) {
  const auto j = nlohmann::json::parse(line);
  if (!j.is_object()) throw std::invalid_argument("expected a JSON object");

  TraceEvent e;
  e.t = Tick{j.at("t").get<std::uint64_t>()};
  e.seq = j.at("seq").get<std::uint64_t>();
  e.kind = detail::parse_kind(j.at("ev").get<std::string>());
  switch (e.kind) {
    case TraceKind::kInvoke: {
      e.op = j.at("op").get<OpId>();
      e.node = NodeId{j.at("node").get<std::uint32_t>()};
      const auto kind = j.at("kind").get<std::string>();
      if (kind == "read") {
        e.op_kind = OpKind::kRead;
      } else if (kind == "write") {
        e.op_kind = OpKind::kWrite;
      } else {
        throw std::invalid_argument("unknown op kind '" + kind + "'");
      }
      e.key = j.at("key").get<std::string>();
      e.val = detail::parse_value(j.at("val"));
      break;
    }
    case TraceKind::kRespond:
      e.op = j.at("op").get<OpId>();
      e.val = detail::parse_value(j.at("val"));
      break;
    case TraceKind::kSend:
    case TraceKind::kDeliver:
    case TraceKind::kDrop:
      e.src = NodeId{j.at("src").get<std::uint32_t>()};
      e.dst = NodeId{j.at("dst").get<std::uint32_t>()};
      e.msg = j.at("msg").get<std::uint64_t>();
      break;
    case TraceKind::kTimer:
      e.node = NodeId{j.at("node").get<std::uint32_t>()};
      e.timer = j.at("timer").get<std::uint64_t>();
      break;
    case TraceKind::kUnanswered:
      e.op = j.at("op").get<OpId>();
      break;
  }
  return e;
}

/// Reads a JSON-lines trace. Blank lines are skipped; errors carry the 1-based line number.
inline Trace read_jsonl(std::istream& is) {
  Trace trace;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      trace.push_back(parse_trace_line(line));
    } catch (const std::exception& ex) {
      throw TraceParseError(lineno, ex.what());
    }
  }
  return trace;
}

inline Trace parse_jsonl(std::string_view text) {
  std::istringstream is{std::string(text)};
  return read_jsonl(is);
}

}  // namespace capsim

#endif  // CAPSIM_TRACE_HPP_
