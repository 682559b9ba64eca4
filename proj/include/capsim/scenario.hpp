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

#ifndef CAPSIM_SCENARIO_HPP_
#define CAPSIM_SCENARIO_HPP_

#include <algorithm>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include <json.hpp>

#include "capsim/kernel.hpp"
#include "capsim/partition.hpp"
#include "capsim/strategies.hpp"
#include "capsim/trace.hpp"

namespace capsim {

struct WorkloadOp {
  Tick t;
  NodeId node;
  OpKind kind = OpKind::kRead;
  std::string key;
  ReadValue val;
};

/// Seeded background operations mixed into the scripted workload. Off when ops == 0.
struct NoiseParams {
  std::size_t ops = 0;
  double read_fraction = 0.5;
};

struct ScenarioConfig {
  std::size_t nodes = 0;
  Tick latency{1};
  Tick horizon;
  std::uint64_t seed = 0;
  PartitionSchedule partitions;
  Reachability reachability = Reachability::kPath;
  StrategyParams strategy;
  std::vector<WorkloadOp> workload;
  NoiseParams noise;

  void validate() const {
    if (nodes == 0) throw ConfigError("scenario needs at least one node");
    if (latency == Tick{0}) throw ConfigError("latency must be at least 1 tick");
    if (partitions.node_count() != nodes) {
      throw ConfigError("partition schedule node count does not match 'nodes'");
    }
    strategy.validate();
    for (const auto& op : workload) {
      if (op.node.index() >= nodes) {
        throw ConfigError("workload op at t=" + std::to_string(op.t.value) +
                          " names unknown node " + std::to_string(op.node.value));
      }
      if (!(op.t < horizon)) {
        throw ConfigError("workload op at t=" + std::to_string(op.t.value) +
                          " is not before the horizon " + std::to_string(horizon.value));
      }
      if (op.kind == OpKind::kWrite && !op.val) {
        throw ConfigError("write at t=" + std::to_string(op.t.value) + " has no value");
      }
    }
  }
};

namespace detail {

inline Tick tick_field(const nlohmann::json& j, const char* name) {
  const auto& v = j.at(name);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0)) {
    throw ConfigError(std::string("'") + name + "' must be a non-negative integer");
  }
  return Tick{v.get<std::uint64_t>()};
}

inline Tick tick_field_or(const nlohmann::json& j, const char* name, Tick fallback) {
  return j.contains(name) ? tick_field(j, name) : fallback;
}

inline NodeId node_field(const nlohmann::json& j, const char* name) {
  return NodeId{static_cast<std::uint32_t>(tick_field(j, name).value)};
}

}  // namespace detail

/// Parses {"kind":"HybridDeadline","D":8,"R":2} and friends.
inline StrategyParams strategy_from_json(const nlohmann::json& j) {
  StrategyParams p;
  const auto kind = j.at("kind").get<std::string>();
  if (kind == "LocalFirst") {
    p.kind = StrategyKind::kLocalFirst;
  } else if (kind == "SyncAll") {
    p.kind = StrategyKind::kSyncAll;
  } else if (kind == "HybridDeadline") {
    p.kind = StrategyKind::kHybridDeadline;
  } else {
    throw ConfigError("unknown strategy kind '" + kind + "'");
  }
  p.gossip_period = detail::tick_field_or(j, "G", p.gossip_period);
  p.retransmit_period = detail::tick_field_or(j, "R", p.retransmit_period);
  p.deadline = detail::tick_field_or(j, "D", p.deadline);
  p.validate();
  return p;
}

inline nlohmann::ordered_json strategy_to_json(const StrategyParams& p) {
  nlohmann::ordered_json j;
  j["kind"] = to_string(p.kind);
  switch (p.kind) {
    case StrategyKind::kLocalFirst:
      j["G"] = p.gossip_period.value;
      break;
    case StrategyKind::kSyncAll:
      j["R"] = p.retransmit_period.value;
      break;
    case StrategyKind::kHybridDeadline:
      j["D"] = p.deadline.value;
      j["R"] = p.retransmit_period.value;
      break;
  }
  return j;
}

inline ScenarioConfig scenario_from_json(const nlohmann::json& j) {
  try {
    ScenarioConfig c;
    c.nodes = detail::tick_field(j, "nodes").value;
    c.latency = detail::tick_field_or(j, "latency", Tick{1});
    c.horizon = detail::tick_field(j, "horizon");
    c.seed = j.value("seed", std::uint64_t{0});
    c.partitions = PartitionSchedule(c.nodes);
    if (j.contains("partitions")) {
      for (const auto& p : j.at("partitions")) {
        try {
          c.partitions.add({detail::node_field(p, "a"), detail::node_field(p, "b"),
                            detail::tick_field(p, "start"), detail::tick_field(p, "end")});
        } catch (const std::invalid_argument& ex) {
          throw ConfigError(std::string("bad partition entry: ") + ex.what());
        }
      }
    }
    if (j.contains("reachability")) {
      const auto mode = j.at("reachability").get<std::string>();
      if (mode == "path") {
        c.reachability = Reachability::kPath;
      } else if (mode == "direct") {
        c.reachability = Reachability::kDirect;
      } else {
        throw ConfigError("reachability must be 'path' or 'direct'");
      }
    }
    c.strategy = strategy_from_json(j.at("strategy"));
    if (j.contains("workload")) {
      for (const auto& w : j.at("workload")) {
        WorkloadOp op;
        op.t = detail::tick_field(w, "t");
        op.node = detail::node_field(w, "node");
        const auto kind = w.at("kind").get<std::string>();
        if (kind == "read") {
          op.kind = OpKind::kRead;
        } else if (kind == "write") {
          op.kind = OpKind::kWrite;
        } else {
          throw ConfigError("workload kind must be 'read' or 'write'");
        }
        op.key = w.value("key", std::string("A"));
        if (w.contains("val") && !w.at("val").is_null()) op.val = w.at("val").get<Value>();
        c.workload.push_back(std::move(op));
      }
    }
    if (j.contains("noise")) {
      c.noise.ops = j.at("noise").value("ops", std::size_t{0});
      c.noise.read_fraction = j.at("noise").value("read_fraction", 0.5);
    }
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
}

inline ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError("config '" + path + "': " + ex.what());
  }
  return scenario_from_json(j);
}

/**
 * Client operations for a scenario, ids assigned in (tick, script order).
 * Noise ops are drawn from the scenario seed and use keys distinct from the
 * scripted ones.
 */
inline std::vector<ClientOp> client_ops(const ScenarioConfig& c) {
  std::vector<WorkloadOp> all = c.workload;
  if (c.noise.ops > 0 && c.horizon > Tick{0}) {
    std::mt19937_64 rng(c.seed);
    std::uniform_int_distribution<std::uint64_t> tick(0, c.horizon.value - 1);
    std::uniform_int_distribution<std::uint32_t> node(0, static_cast<std::uint32_t>(c.nodes - 1));
    std::uniform_int_distribution<int> key(0, 1);
    std::bernoulli_distribution is_read(c.noise.read_fraction);
    for (std::size_t i = 0; i < c.noise.ops; ++i) {
      WorkloadOp op;
      op.t = Tick{tick(rng)};
      op.node = NodeId{node(rng)};
      op.kind = is_read(rng) ? OpKind::kRead : OpKind::kWrite;
      op.key = "noise" + std::to_string(key(rng));
      if (op.kind == OpKind::kWrite) op.val = static_cast<Value>(1000000 + i);
      all.push_back(std::move(op));
    }
  }
  std::stable_sort(all.begin(), all.end(),
                   [](const WorkloadOp& a, const WorkloadOp& b) { return a.t < b.t; });
  std::vector<ClientOp> ops;
  ops.reserve(all.size());
  for (std::size_t i = 0; i < all.size(); ++i) {
    const auto& w = all[i];
    ops.push_back(ClientOp{i, w.t, w.node, w.kind, w.key,
                           w.kind == OpKind::kWrite ? w.val : std::nullopt});
  }
  return ops;
}

inline KernelConfig kernel_config(const ScenarioConfig& c) {
  return KernelConfig{c.nodes, c.latency, c.horizon, c.partitions, c.reachability};
}

/// Calls f(simulator) with a simulator instantiated for the configured strategy.
template <class F>
decltype(auto) with_simulator(const ScenarioConfig& c, F&& f) {
  c.validate();
  const auto& s = c.strategy;
  if (s.kind == StrategyKind::kLocalFirst) {
    Simulator<LocalFirst> sim(kernel_config(c), client_ops(c), [&](NodeId id, std::size_t n) {
      return LocalFirst(id, n, s.gossip_period);
    });
    return f(sim);
  }
  std::optional<Tick> deadline;
  if (s.kind == StrategyKind::kHybridDeadline) deadline = s.deadline;
  Simulator<RoundReplica> sim(kernel_config(c), client_ops(c), [&](NodeId id, std::size_t n) {
    return RoundReplica(id, n, s.retransmit_period, deadline);
  });
  return f(sim);
}

/// Runs a scenario to its horizon. Same config, same trace, byte for byte.
inline Trace run(const ScenarioConfig& c) {
  return with_simulator(c, [](auto& sim) { return sim.run(); });
}

}  // namespace capsim

#endif  // CAPSIM_SCENARIO_HPP_
