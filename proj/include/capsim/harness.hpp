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

#ifndef CAPSIM_HARNESS_HPP_
#define CAPSIM_HARNESS_HPP_

#include <algorithm>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "capsim/checker.hpp"
#include "capsim/partition.hpp"
#include "capsim/scenario.hpp"
#include "capsim/strategies.hpp"

namespace capsim {

// ---------------------------------------------------------------------------
// Proof replay

/**
 * Adversarial scenario for a claimed (tc, ta) pair under a partition of
 * length tp between n_a and n_b. Claims must satisfy tc + ta < tp.
 */
struct ProofReplaySpec {
  StrategyParams strategy;
  Tick tp;
  Tick t_start{10};
  Tick claimed_tc;
  Tick claimed_ta;
  NodeId n_a{0};
  NodeId n_b{1};
  std::size_t nodes = 2;
  Tick latency{1};
  std::optional<Tick> horizon;

  Tick effective_horizon() const {
    if (horizon) return *horizon;
    return t_start + tp + claimed_ta + 4 * (latency + strategy.retransmit_period + strategy.gossip_period) +
           Tick{10};
  }

  void validate() const {
    strategy.validate();
    if (nodes < 2) throw ConfigError("proof replay needs at least two nodes");
    if (latency == Tick{0}) throw ConfigError("latency must be at least 1 tick");
    if (n_a == n_b) throw ConfigError("n_a and n_b must differ");
    if (n_a.index() >= nodes || n_b.index() >= nodes) throw ConfigError("n_a/n_b out of range");
    if (!(claimed_tc + claimed_ta < tp)) {
      throw ConfigError("claimed_tc + claimed_ta must be below tp (" +
                        std::to_string(claimed_tc.value) + " + " + std::to_string(claimed_ta.value) +
                        " >= " + std::to_string(tp.value) + ")");
    }
    if (t_start + tp > effective_horizon()) throw ConfigError("t_start + tp exceeds the horizon");
  }
};

inline constexpr Value kProofSeedValue = 1;
inline constexpr Value kProofR1Value = 2;

/**
 * Scenario for a proof replay. {n_a} is cut from every other node over
 * [t_start, t_start + tp). A seed write lands before the cut; R1 writes at
 * n_a at t = t_start and R2 reads the same key at n_b at t + claimed_tc, so
 * [t, t + tc + ta] lies inside the cut.
 */
inline ScenarioConfig proof_scenario(const ProofReplaySpec& spec) {
  spec.validate();
  ScenarioConfig c;
  c.nodes = spec.nodes;
  c.latency = spec.latency;
  c.horizon = spec.effective_horizon();
  c.strategy = spec.strategy;
  c.partitions = PartitionSchedule(spec.nodes);
  std::vector<NodeId> side_a{spec.n_a};
  std::vector<NodeId> side_b;
  for (std::uint32_t n = 0; n < spec.nodes; ++n) {
    if (NodeId{n} != spec.n_a) side_b.push_back(NodeId{n});
  }
  c.partitions.bipartition(side_a, side_b, spec.t_start, spec.t_start + spec.tp);

  const Tick t = spec.t_start;
  c.workload.push_back({Tick{0}, spec.n_a, OpKind::kWrite, "A", kProofSeedValue});
  c.workload.push_back({t, spec.n_a, OpKind::kWrite, "A", kProofR1Value});
  c.workload.push_back({t + spec.claimed_tc, spec.n_b, OpKind::kRead, "A", std::nullopt});
  c.validate();
  return c;
}

struct ProofOutcome {
  ScenarioConfig scenario;
  Trace trace;
  CheckReport report;

  /// The claim was refuted: some response broke the declared bounds.
  bool contradiction_found() const {
    return report.count(ViolationKind::kAvailability) + report.count(ViolationKind::kConsistency) > 0;
  }
};

inline ProofOutcome proof_replay_run(const ProofReplaySpec& spec) {
  ProofOutcome out;
  out.scenario = proof_scenario(spec);
  out.trace = run(out.scenario);
  out.report = check(extract_history(out.trace), spec.claimed_tc, spec.claimed_ta);
  return out;
}

inline CheckReport proof_replay(const ProofReplaySpec& spec) { return proof_replay_run(spec).report; }

inline ProofReplaySpec proof_spec_from_json(const nlohmann::json& j) {
  try {
    ProofReplaySpec s;
    s.strategy = strategy_from_json(j.at("strategy"));
    s.tp = detail::tick_field(j, "tp");
    s.t_start = detail::tick_field_or(j, "t_start", s.t_start);
    s.claimed_tc = detail::tick_field(j, "claimed_tc");
    s.claimed_ta = detail::tick_field(j, "claimed_ta");
    if (j.contains("n_a")) s.n_a = detail::node_field(j, "n_a");
    if (j.contains("n_b")) s.n_b = detail::node_field(j, "n_b");
    if (j.contains("nodes")) s.nodes = detail::tick_field(j, "nodes").value;
    s.latency = detail::tick_field_or(j, "latency", s.latency);
    if (j.contains("horizon")) s.horizon = detail::tick_field(j, "horizon");
    s.validate();
    return s;
  } catch (const nlohmann::json::exception& ex) {
    throw ConfigError(std::string("proof spec: ") + ex.what());
  }
}

// ---------------------------------------------------------------------------
// Cross-cut workload and frontier sweep

struct CrossCutShape {
  Tick lead{10};  // healthy ticks before the cut
  Tick tail;      // healthy ticks of traffic after the heal
  Tick drain;     // extra ticks after the last op so blocked requests can finish
};

/**
 * Node 0 is cut from everyone else for tp ticks. Every tick, node 0 writes
 * a fresh value to key "A" and nodes 0 and 1 both read it, from `lead`
 * ticks before the cut until `tail` ticks after the heal.
 */
inline ScenarioConfig cross_cut_scenario(const ScenarioConfig& base, const StrategyParams& strategy,
                                         Tick tp, const CrossCutShape& shape) {
  ScenarioConfig c;
  c.nodes = std::max<std::size_t>(base.nodes, 2);
  c.latency = base.latency;
  c.seed = base.seed;
  c.noise = base.noise;
  c.reachability = base.reachability;
  c.strategy = strategy;
  c.partitions = PartitionSchedule(c.nodes);

  const Tick start = shape.lead;
  const Tick heal = start + tp;
  if (tp > Tick{0}) {
    std::vector<NodeId> side_a{NodeId{0}};
    std::vector<NodeId> side_b;
    for (std::uint32_t n = 1; n < c.nodes; ++n) side_b.push_back(NodeId{n});
    c.partitions.bipartition(side_a, side_b, start, heal);
  }
  const Tick ops_end = heal + shape.tail;
  Value next = 1;
  for (Tick t{0}; t < ops_end; t += Tick{1}) {
    c.workload.push_back({t, NodeId{0}, OpKind::kWrite, "A", next++});
    c.workload.push_back({t, NodeId{1}, OpKind::kRead, "A", std::nullopt});
    c.workload.push_back({t, NodeId{0}, OpKind::kRead, "A", std::nullopt});
  }
  c.horizon = ops_end + shape.drain;
  c.validate();
  return c;
}

inline CrossCutShape default_shape(const ScenarioConfig& base, Tick tp, Tick max_deadline) {
  const auto& s = base.strategy;
  CrossCutShape shape;
  shape.tail = s.gossip_period + s.retransmit_period + 4 * base.latency + Tick{4};
  shape.drain = tp + max_deadline + s.gossip_period + 4 * (s.retransmit_period + base.latency) + Tick{10};
  return shape;
}

struct FrontierRow {
  StrategyParams strategy;
  Tick tc;                  // empirical tc under the sweep's anchor
  Tick tc_response;         // empirical tc with the response tick as reference
  std::optional<Tick> ta;   // nullopt: some request never answered
  Tick tp;
  Tick slack;
  bool bound_satisfied = false;

  /// D column: the deadline, "local" for LocalFirst, "inf" for SyncAll.
  std::string label() const {
    switch (strategy.kind) {
      case StrategyKind::kLocalFirst: return "local";
      case StrategyKind::kSyncAll: return "inf";
      case StrategyKind::kHybridDeadline: return std::to_string(strategy.deadline.value);
    }
    return "?";
  }
};

struct FrontierOptions {
  Anchor anchor = Anchor::kInvoke;
  bool parallel = true;
};

/// Runs one cross-cut scenario per strategy and measures it.
inline FrontierRow measure_row(const ScenarioConfig& base, const StrategyParams& strategy, Tick tp,
                               const CrossCutShape& shape, Anchor anchor) {
  const auto scenario = cross_cut_scenario(base, strategy, tp, shape);
  const auto history = extract_history(run(scenario));
  FrontierRow row;
  row.strategy = strategy;
  row.tp = compute_tp(scenario.partitions, scenario.horizon, scenario.reachability);
  const auto report = check(history, Tick{0}, Tick{0}, {anchor});
  row.tc = report.empirical_tc_min;
  row.tc_response = min_tc(history, Anchor::kResponse);
  row.ta = report.empirical_ta;
  row.slack = bound_slack(scenario.latency, strategy);
  row.bound_satisfied = check_bound(report, row.tp, row.slack).holds;
  return row;
}

/**
 * One HybridDeadline(D) row per deadline, then LocalFirst and SyncAll.
 * G and R come from the base config's strategy block. Rows are returned in
 * that order regardless of how they were scheduled.
 */
inline std::vector<FrontierRow> frontier_sweep(Tick tp, const std::vector<Tick>& deadlines,
                                               const ScenarioConfig& base, FrontierOptions options = {}) {
  const auto& s = base.strategy;
  std::vector<StrategyParams> strategies;
  for (Tick d : deadlines) {
    strategies.push_back(StrategyParams::hybrid_deadline(d, s.retransmit_period));
  }
  strategies.push_back(StrategyParams::local_first(s.gossip_period));
  strategies.push_back(StrategyParams::sync_all(s.retransmit_period));
  for (auto& st : strategies) {
    st.gossip_period = s.gossip_period;
    st.retransmit_period = s.retransmit_period;
  }

  const Tick max_deadline = deadlines.empty() ? Tick{0} : *std::max_element(deadlines.begin(), deadlines.end());
  const auto shape = default_shape(base, tp, max_deadline);

  std::vector<FrontierRow> rows;
  rows.reserve(strategies.size());
  if (options.parallel) {
    std::vector<std::future<FrontierRow>> futures;
    for (const auto& st : strategies) {
      futures.push_back(std::async(std::launch::async, [&base, st, tp, &shape, &options] {
        return measure_row(base, st, tp, shape, options.anchor);
      }));
    }
    for (auto& f : futures) rows.push_back(f.get());
  } else {
    for (const auto& st : strategies) rows.push_back(measure_row(base, st, tp, shape, options.anchor));
  }
  return rows;
}

inline void write_frontier_csv(std::ostream& os, const std::vector<FrontierRow>& rows) {
  os << "D,tc,ta,tp,bound_ok\n";
  for (const auto& r : rows) {
    os << r.label() << ',' << r.tc.value << ',' << (r.ta ? std::to_string(r.ta->value) : "inf") << ','
       << r.tp.value << ',' << (r.bound_satisfied ? "true" : "false") << '\n';
  }
}

inline std::string frontier_csv(const std::vector<FrontierRow>& rows) {
  std::ostringstream os;
  write_frontier_csv(os, rows);
  return os.str();
}

}  // namespace capsim

#endif  // CAPSIM_HARNESS_HPP_
