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

#ifndef CAPSIM_CHECKER_HPP_
#define CAPSIM_CHECKER_HPP_

#include <algorithm>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "capsim/strategies.hpp"
#include "capsim/trace.hpp"
#include "capsim/types.hpp"

namespace capsim {

/**
 * Reference time of a read's staleness window.
 *
 * kResponse: writes invoked at or before (response - tc) must be reflected.
 * kInvoke: writes invoked at or before (invoke - tc) must be reflected.
 *
 * In both modes any write invoked up to the response tick may be reflected.
 */
enum class Anchor { kResponse, kInvoke };

struct OperationRecord {
  OpId op = 0;
  OpKind kind = OpKind::kRead;
  std::string key;
  ReadValue written;
  ReadValue returned;
  NodeId node;
  Tick invoke;
  std::optional<Tick> response;

  bool answered() const { return response.has_value(); }
  bool is_read() const { return kind == OpKind::kRead; }
};

/// Operations of one run plus a per-key total order of writes.
class History {
 public:
  static std::tuple<Tick, NodeId, OpId> write_key(const OperationRecord& r) {
    return {r.invoke, r.node, r.op};
  }

  void add(OperationRecord r) {
    if (r.response && *r.response < r.invoke) {
      throw IntegrityError("op " + std::to_string(r.op) + " responds before it was invoked");
    }
    if (!index_.emplace(r.op, records_.size()).second) {
      throw IntegrityError("duplicate op id " + std::to_string(r.op));
    }
    if (r.kind == OpKind::kWrite) {
      if (!r.written) throw IntegrityError("write " + std::to_string(r.op) + " has no value");
      auto& order = write_order_[r.key];
      const auto key = write_key(r);
      auto at = std::find_if(order.begin(), order.end(),
                             [&](std::size_t i) { return key < write_key(records_[i]); });
      order.insert(at, records_.size());
    }
    records_.push_back(std::move(r));
  }

  const std::vector<OperationRecord>& records() const { return records_; }

  OperationRecord& at(OpId op) { return records_.at(index_.at(op)); }
  const OperationRecord& at(OpId op) const { return records_.at(index_.at(op)); }
  const OperationRecord* find(OpId op) const {
    auto it = index_.find(op);
    return it == index_.end() ? nullptr : &records_[it->second];
  }

  /// Writes to `key` ordered by (invoke tick, writer, op id).
  std::vector<const OperationRecord*> writes(const std::string& key) const {
    std::vector<const OperationRecord*> out;
    auto it = write_order_.find(key);
    if (it == write_order_.end()) return out;
    out.reserve(it->second.size());
    for (std::size_t i : it->second) out.push_back(&records_[i]);
    return out;
  }

 private:
  std::vector<OperationRecord> records_;
  std::map<OpId, std::size_t> index_;
  std::map<std::string, std::vector<std::size_t>> write_order_;
};

/// Builds the history of client operations recorded in a trace.
inline History extract_history(const Trace& trace) {
  History h;
  for (const auto& e : trace) {
    switch (e.kind) {
      case TraceKind::kInvoke: {
        OperationRecord r;
        r.op = e.op;
        r.kind = e.op_kind;
        r.key = e.key;
        r.node = e.node;
        r.invoke = e.t;
        if (e.op_kind == OpKind::kWrite) r.written = e.val;
        h.add(std::move(r));
        break;
      }
      case TraceKind::kRespond: {
        if (h.find(e.op) == nullptr) {
          throw IntegrityError("response to op " + std::to_string(e.op) + " without an invoke");
        }
        auto& r = h.at(e.op);
        if (r.response) throw IntegrityError("op " + std::to_string(e.op) + " answered twice");
        if (e.t < r.invoke) {
          throw IntegrityError("op " + std::to_string(e.op) + " responds before it was invoked");
        }
        r.response = e.t;
        if (r.is_read()) r.returned = e.val;
        break;
      }
      case TraceKind::kUnanswered: {
        if (h.find(e.op) == nullptr) {
          throw IntegrityError("unanswered marker for unknown op " + std::to_string(e.op));
        }
        if (h.at(e.op).response) {
          throw IntegrityError("op " + std::to_string(e.op) + " both answered and unanswered");
        }
        break;
      }
      default:
        break;
    }
  }
  return h;
}

namespace detail {

/// Values a read may return given the key's ordered writes.
inline std::set<ReadValue> valid_values(const std::vector<const OperationRecord*>& writes,
                                        Tick mandatory_ref, Tick upper, Tick tc) {
  const auto cut = static_cast<std::int64_t>(mandatory_ref.value) - static_cast<std::int64_t>(tc.value);
  std::optional<std::size_t> baseline;
  for (std::size_t i = 0; i < writes.size(); ++i) {
    if (static_cast<std::int64_t>(writes[i]->invoke.value) <= cut) baseline = i;
  }
  std::set<ReadValue> out;
  if (baseline) {
    out.insert(writes[*baseline]->written);
  } else {
    out.insert(std::nullopt);
  }
  const std::size_t first_optional = baseline ? *baseline + 1 : 0;
  for (std::size_t i = first_optional; i < writes.size(); ++i) {
    if (writes[i]->invoke <= upper) out.insert(writes[i]->written);
  }
  return out;
}

inline Tick mandatory_ref(const OperationRecord& r, Anchor anchor) {
  return anchor == Anchor::kResponse ? *r.response : r.invoke;
}

}  // namespace detail

/**
 * Values a read on `key` answered at tick T may legally return under
 * consistency bound tc: the latest write invoked at or before T - tc (or
 * the initial absent value when there is none), plus every write invoked
 * in (T - tc, T].
 */
inline std::set<ReadValue> valid_read_values(const History& history, const std::string& key,
                                             Tick response, Tick tc) {
  return detail::valid_values(history.writes(key), response, response, tc);
}

/**
 * Smallest tc under which this answered read is valid, or nullopt when no
 * tc admits it (the value was never written at or before the response).
 */
inline std::optional<Tick> read_min_tc(const History& history, const OperationRecord& read,
                                       Anchor anchor = Anchor::kResponse) {
  const Tick upper = *read.response;
  const auto ref = static_cast<std::int64_t>(detail::mandatory_ref(read, anchor).value);
  std::vector<const OperationRecord*> visible;
  for (const auto* w : history.writes(read.key)) {
    if (w->invoke <= upper) visible.push_back(w);
  }

  // The read is valid iff the baseline write sits at or before the last
  // visible write carrying the returned value. The baseline stays there as
  // long as the next write is newer than ref - tc.
  std::optional<std::size_t> next;
  if (!read.returned) {
    if (visible.empty()) return Tick{0};
    next = 0;
  } else {
    std::optional<std::size_t> last;
    for (std::size_t i = 0; i < visible.size(); ++i) {
      if (visible[i]->written == read.returned) last = i;
    }
    if (!last) return std::nullopt;
    if (*last + 1 == visible.size()) return Tick{0};
    next = *last + 1;
  }
  const std::int64_t need = ref - static_cast<std::int64_t>(visible[*next]->invoke.value) + 1;
  return Tick{static_cast<std::uint64_t>(std::max<std::int64_t>(need, 0))};
}

/// Least tc for which every answered read is valid. Throws if some read has none.
inline Tick min_tc(const History& history, Anchor anchor = Anchor::kResponse) {
  Tick worst{0};
  for (const auto& r : history.records()) {
    if (!r.is_read() || !r.answered()) continue;
    auto tc = read_min_tc(history, r, anchor);
    if (!tc) {
      throw IntegrityError("read " + std::to_string(r.op) +
                           " returned a value no tc can justify; history is not integrity-clean");
    }
    worst = std::max(worst, *tc);
  }
  return worst;
}

enum class ViolationKind { kAvailability, kConsistency, kIntegrity };

inline const char* to_string(ViolationKind k) {
  switch (k) {
    case ViolationKind::kAvailability: return "availability";
    case ViolationKind::kConsistency: return "consistency";
    case ViolationKind::kIntegrity: return "integrity";
  }
  return "?";
}

struct Violation {
  OpId op = 0;
  ViolationKind kind = ViolationKind::kConsistency;
  std::string detail;
};

struct CheckReport {
  std::optional<Tick> empirical_ta;  // nullopt: some op never answered
  Tick empirical_tc_min;
  std::vector<Violation> violations;

  bool clean() const { return violations.empty(); }
  std::size_t count(ViolationKind k) const {
    return std::count_if(violations.begin(), violations.end(),
                         [k](const Violation& v) { return v.kind == k; });
  }
};

struct CheckOptions {
  Anchor anchor = Anchor::kResponse;
};

namespace detail {

inline std::string show(const ReadValue& v) { return v ? std::to_string(*v) : "initial"; }

inline std::string show(const std::set<ReadValue>& values) {
  std::string out = "{";
  for (const auto& v : values) {
    if (out.size() > 1) out += ",";
    out += show(v);
  }
  return out + "}";
}

}  // namespace detail

/// Checks a history against declared consistency and availability bounds.
inline CheckReport check(const History& history, Tick declared_tc, Tick declared_ta,
                         CheckOptions options = {}) {
  CheckReport report;
  Tick ta{0};
  bool unanswered = false;
  Tick tc_min{0};

  for (const auto& r : history.records()) {
    if (!r.answered()) {
      unanswered = true;
      report.violations.push_back(
          {r.op, ViolationKind::kAvailability,
           "no response by the horizon (invoked at t=" + std::to_string(r.invoke.value) + ")"});
      continue;
    }
    const Tick latency = *r.response - r.invoke;
    ta = std::max(ta, latency);
    if (latency > declared_ta) {
      report.violations.push_back({r.op, ViolationKind::kAvailability,
                                   "latency " + std::to_string(latency.value) + " exceeds ta=" +
                                       std::to_string(declared_ta.value)});
    }
    if (!r.is_read()) continue;

    const auto needed = read_min_tc(history, r, options.anchor);
    if (!needed) {
      report.violations.push_back({r.op, ViolationKind::kIntegrity,
                                   "returned " + detail::show(r.returned) + " on key '" + r.key +
                                       "', never written there by t=" +
                                       std::to_string(r.response->value)});
      continue;
    }
    tc_min = std::max(tc_min, *needed);
    const auto valid = detail::valid_values(history.writes(r.key),
                                            detail::mandatory_ref(r, options.anchor), *r.response,
                                            declared_tc);
    if (!valid.contains(r.returned)) {
      report.violations.push_back(
          {r.op, ViolationKind::kConsistency,
           "returned " + detail::show(r.returned) + " at t=" + std::to_string(r.response->value) +
               "; valid under tc=" + std::to_string(declared_tc.value) + ": " + detail::show(valid)});
    }
  }
  if (!unanswered) report.empirical_ta = ta;
  report.empirical_tc_min = tc_min;
  return report;
}

inline std::string to_json(const CheckReport& report) {
  nlohmann::ordered_json j;
  if (report.empirical_ta) {
    j["empirical_ta"] = report.empirical_ta->value;
  } else {
    j["empirical_ta"] = "inf";
  }
  j["empirical_tc_min"] = report.empirical_tc_min.value;
  j["violations"] = nlohmann::ordered_json::array();
  for (const auto& v : report.violations) {
    nlohmann::ordered_json item;
    item["op"] = v.op;
    item["kind"] = to_string(v.kind);
    item["detail"] = v.detail;
    j["violations"].push_back(std::move(item));
  }
  return j.dump();
}

/// Allowance for tick granularity and, for gossip strategies, the anti-entropy period.
inline Tick bound_slack(Tick latency, const StrategyParams& strategy) {
  Tick slack = 2 * latency;
  if (strategy.kind == StrategyKind::kLocalFirst) slack += strategy.gossip_period;
  return slack;
}

struct BoundCheck {
  bool holds = false;
  bool unavailable = false;  // empirical ta was infinite, so the bound holds trivially

  explicit operator bool() const { return holds; }
};

/// tc + ta >= tp - slack on measured values.
inline BoundCheck check_bound(const CheckReport& report, Tick tp, Tick slack) {
  if (!report.empirical_ta) return {true, true};
  return {report.empirical_tc_min + *report.empirical_ta >= tp - slack, false};
}

}  // namespace capsim

#endif  // CAPSIM_CHECKER_HPP_
