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

// Acceptance gate. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails. Tolerances are exact unless stated.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "capsim/checker.hpp"
#include "capsim/harness.hpp"
#include "capsim/partition.hpp"
#include "capsim/scenario.hpp"
#include "oracles.hpp"

using namespace capsim;

namespace {

using Clock = std::chrono::steady_clock;

struct Result {
  bool pass = true;
  std::string summary;
  std::vector<std::string> failures;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    pass = false;
    if (failures.size() < 5) failures.push_back(what);
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::vector<StrategyParams> proof_strategies() {
  return {StrategyParams::local_first(Tick{2}),
          StrategyParams::local_first(Tick{4}),
          StrategyParams::sync_all(Tick{2}),
          StrategyParams::hybrid_deadline(Tick{0}, Tick{2}),
          StrategyParams::hybrid_deadline(Tick{4}, Tick{2}),
          StrategyParams::hybrid_deadline(Tick{8}, Tick{2}),
          StrategyParams::hybrid_deadline(Tick{12}, Tick{2})};
}

ScenarioConfig frontier_base(std::uint64_t latency) {
  ScenarioConfig c;
  c.nodes = 3;
  c.latency = Tick{latency};
  c.partitions = PartitionSchedule(3);
  c.strategy = StrategyParams::hybrid_deadline(Tick{0}, Tick{1});
  c.strategy.gossip_period = Tick{4};
  return c;
}

// 1. Every claim with tc + ta <= tp - slack - 1 is refuted by the replay.
Result proof_grid() {
  Result r;
  const auto start = Clock::now();
  std::size_t runs = 0, refuted = 0;
  for (const auto& s : proof_strategies()) {
    const std::uint64_t slack = bound_slack(Tick{1}, s).value;
    for (std::uint64_t tp : {10u, 20u, 40u}) {
      if (tp < slack + 1) continue;
      for (std::uint64_t tc = 0; tc + slack + 1 <= tp; ++tc) {
        for (std::uint64_t ta = 0; tc + ta + slack + 1 <= tp; ++ta) {
          ProofReplaySpec spec;
          spec.strategy = s;
          spec.tp = Tick{tp};
          spec.claimed_tc = Tick{tc};
          spec.claimed_ta = Tick{ta};
          const auto out = proof_replay_run(spec);
          ++runs;
          refuted += out.contradiction_found();
          std::ostringstream what;
          what << s.describe() << " tp=" << tp << " claim (" << tc << "," << ta << ") not refuted";
          r.require(out.contradiction_found(), what.str());
        }
      }
    }
  }
  const double secs = seconds_since(start);
  r.require(secs < 10.0, "runtime " + std::to_string(secs) + " s >= 10 s");
  std::ostringstream os;
  os << refuted << "/" << runs << " claims refuted in " << secs << " s (limit 10 s)";
  r.summary = os.str();
  return r;
}

// 2. Writes 2@0, 5@3, 4@6 and reads at 8.
Result write_sequence_vectors() {
  Result r;
  auto record = [](OpId op, OpKind kind, std::uint64_t t, ReadValue v) {
    OperationRecord rec;
    rec.op = op;
    rec.kind = kind;
    rec.key = "A";
    rec.node = NodeId{kind == OpKind::kWrite ? 0u : 1u};
    rec.invoke = Tick{t};
    rec.response = Tick{t};
    (kind == OpKind::kWrite ? rec.written : rec.returned) = v;
    return rec;
  };
  History h;
  h.add(record(0, OpKind::kWrite, 0, 2));
  h.add(record(1, OpKind::kWrite, 3, 5));
  h.add(record(2, OpKind::kWrite, 6, 4));

  const std::set<ReadValue> all{2, 5, 4}, latest{4};
  r.require(valid_read_values(h, "A", Tick{8}, Tick{8}) == all, "tc=8 set is not exactly {2,5,4}");
  r.require(valid_read_values(h, "A", Tick{8}, Tick{0}) == latest, "tc=0 set is not exactly {4}");

  OpId id = 10;
  for (Value v : {2, 5, 2, 2, 4, 5, 4, 4, 4}) h.add(record(id++, OpKind::kRead, 8, v));
  const auto report = check(h, Tick{8}, Tick{0});
  r.require(report.clean(), "repeated reads 2,5,2,2,4,5,4,4,4 not clean under tc=8: " + to_json(report));
  r.summary = "tc=8 -> {2,5,4}, tc=0 -> {4}, 9 repeated reads clean under tc=8 (exact)";
  return r;
}

// 3. Lower bound on every row under both anchors; tightness for deadline rows.
Result frontier_bound() {
  Result r;
  std::size_t rows = 0;
  std::int64_t worst_gap_invoke = INT64_MIN;   // max of (tc + ta) - (tp + slack) over deadline rows
  std::int64_t worst_low = INT64_MAX;          // min of (tc + ta) - (tp - slack) over all rows, both anchors
  std::int64_t worst_gap_response = INT64_MIN;
  for (std::uint64_t latency : {1u, 2u}) {
    for (std::uint64_t tp : {10u, 20u, 40u}) {
      const auto base = frontier_base(latency);
      const std::uint64_t max_d = tp + 2 * latency;
      std::vector<Tick> deadlines;
      for (std::uint64_t d = 0; d <= max_d; d += 2) deadlines.push_back(Tick{d});
      for (const auto& row : frontier_sweep(Tick{tp}, deadlines, base)) {
        ++rows;
        std::ostringstream where;
        where << "L=" << latency << " tp=" << tp << " D=" << row.label();
        r.require(row.tp == Tick{tp}, where.str() + ": measured tp " + std::to_string(row.tp.value));
        r.require(row.bound_satisfied, where.str() + ": bound_ok false");
        if (!row.ta) {
          r.require(false, where.str() + ": unanswered requests");
          continue;
        }
        const auto lo = static_cast<std::int64_t>((Tick{tp} - row.slack).value);
        const auto hi = static_cast<std::int64_t>((Tick{tp} + row.slack).value);
        const auto sum_invoke = static_cast<std::int64_t>((row.tc + *row.ta).value);
        const auto sum_response = static_cast<std::int64_t>((row.tc_response + *row.ta).value);
        r.require(sum_invoke >= lo, where.str() + ": tc+ta below tp-slack (invoke anchor)");
        r.require(sum_response >= lo, where.str() + ": tc+ta below tp-slack (response anchor)");
        worst_low = std::min({worst_low, sum_invoke - lo, sum_response - lo});
        if (row.strategy.kind == StrategyKind::kHybridDeadline) {
          r.require(sum_invoke <= hi, where.str() + ": tc+ta=" + std::to_string(sum_invoke) +
                                          " above tp+slack=" + std::to_string(hi));
          worst_gap_invoke = std::max(worst_gap_invoke, sum_invoke - hi);
          worst_gap_response = std::max(worst_gap_response, sum_response - hi);
        }
      }
    }
  }
  std::ostringstream os;
  os << rows << " rows; min (tc+ta)-(tp-slack) = " << worst_low
     << "; max deadline-row (tc+ta)-(tp+slack) = " << worst_gap_invoke
     << " (response-anchored, informational: " << worst_gap_response << ")";
  r.summary = os.str();
  return r;
}

// 4. Healthy network gives LocalFirst near-perfect; any real partition denies perfection to all.
Result corner_cases() {
  Result r;
  for (std::uint64_t latency : {1u, 2u, 3u}) {
    for (std::uint64_t g : {1u, 2u, 4u, 8u}) {
      auto base = frontier_base(latency);
      base.noise = {40, 0.5};
      const auto lf = StrategyParams::local_first(Tick{g});
      const auto scenario = cross_cut_scenario(base, lf, Tick{0}, default_shape(base, Tick{0}, Tick{0}));
      r.require(compute_tp(scenario.partitions, scenario.horizon) == Tick{0}, "schedule not empty");
      const auto report = check(extract_history(run(scenario)), Tick{0}, Tick{0});
      std::ostringstream where;
      where << "healthy LocalFirst(G=" << g << ") L=" << latency;
      r.require(report.empirical_ta == Tick{0}, where.str() + ": ta != 0");
      r.require(report.empirical_tc_min <= Tick{2 * latency + g},
                where.str() + ": tc_min " + std::to_string(report.empirical_tc_min.value) + " > 2L+G");
    }
  }
  std::size_t partitioned = 0;
  for (std::uint64_t tp : {10u, 20u, 40u}) {
    std::vector<Tick> deadlines;
    for (std::uint64_t d = 0; d <= tp + 2; d += 2) deadlines.push_back(Tick{d});
    for (const auto& row : frontier_sweep(Tick{tp}, deadlines, frontier_base(1))) {
      if (!(row.tp > row.slack)) continue;
      ++partitioned;
      const bool perfect_invoke = row.tc == Tick{0} && row.ta == Tick{0};
      const bool perfect_response = row.tc_response == Tick{0} && row.ta == Tick{0};
      r.require(!perfect_invoke && !perfect_response,
                "tp=" + std::to_string(tp) + " D=" + row.label() + " attained tc=0 and ta=0");
    }
  }
  for (const auto& s : proof_strategies()) {
    ProofReplaySpec spec;
    spec.strategy = s;
    spec.tp = Tick{20};
    const auto report = proof_replay(spec);
    r.require(!(report.empirical_tc_min == Tick{0} && report.empirical_ta == Tick{0}),
              s.describe() + " attained tc=0 and ta=0 in the proof replay");
  }
  r.summary = "12 healthy LocalFirst runs with ta=0, tc<=2L+G; " + std::to_string(partitioned) +
              " partitioned rows plus 7 proof replays, none with tc=0 and ta=0";
  return r;
}

// 5. min_tc against the exhaustive scan, and exactness of the threshold.
Result checker_oracle() {
  Result r;
  const auto start = Clock::now();
  std::mt19937_64 rng(20260501);
  const int histories = 600;
  int thresholds = 0;
  for (int i = 0; i < histories; ++i) {
    const auto h = oracle::random_history(rng);
    for (auto anchor : {Anchor::kResponse, Anchor::kInvoke}) {
      const auto expected = oracle::scan_min_tc(h, anchor);
      const Tick got = min_tc(h, anchor);
      r.require(expected && got.value == *expected,
                "history " + std::to_string(i) + ": min_tc " + std::to_string(got.value) + " vs scan " +
                    (expected ? std::to_string(*expected) : "none"));
      CheckOptions options{anchor};
      r.require(check(h, got, Tick{1000}, options).count(ViolationKind::kConsistency) == 0,
                "history " + std::to_string(i) + ": check fails at min_tc");
      if (got > Tick{0}) {
        ++thresholds;
        r.require(check(h, got - Tick{1}, Tick{1000}, options).count(ViolationKind::kConsistency) > 0,
                  "history " + std::to_string(i) + ": check passes at min_tc - 1");
      }
    }
  }
  const double secs = seconds_since(start);
  r.require(secs < 30.0, "runtime " + std::to_string(secs) + " s >= 30 s");
  std::ostringstream os;
  os << histories << " histories x 2 anchors match the scan; " << thresholds
     << " nonzero thresholds exact; " << secs << " s (limit 30 s)";
  r.summary = os.str();
  return r;
}

// 6. compute_tp against the per-tick BFS brute force.
Result tp_oracle() {
  Result r;
  std::mt19937_64 rng(20260502);
  const int schedules = 300;
  std::uniform_int_distribution<std::uint64_t> horizon_d(2, 200);
  for (int i = 0; i < schedules; ++i) {
    const std::uint64_t horizon = horizon_d(rng);
    const auto s = oracle::random_schedule(rng, 4, horizon);
    r.require(compute_tp(s, Tick{horizon}).value == oracle::brute_tp(s, horizon),
              "schedule " + std::to_string(i) + " (path reachability)");
    r.require(compute_tp(s, Tick{horizon}, Reachability::kDirect).value == oracle::brute_tp(s, horizon, true),
              "schedule " + std::to_string(i) + " (direct links)");
  }
  r.summary = std::to_string(schedules) + " schedules, path and direct reachability, exact";
  return r;
}

// 7. Repeated runs give identical bytes.
Result determinism() {
  Result r;
  std::vector<ScenarioConfig> scenarios;
  std::mt19937_64 rng(20260503);
  const StrategyParams kinds[] = {StrategyParams::local_first(Tick{3}), StrategyParams::sync_all(Tick{2}),
                                  StrategyParams::hybrid_deadline(Tick{5}, Tick{2})};
  for (int i = 0; i < 45; ++i) {
    ScenarioConfig c;
    c.nodes = 2 + rng() % 4;
    c.latency = Tick{1 + rng() % 3};
    c.horizon = Tick{120};
    c.seed = rng();
    c.strategy = kinds[i % 3];
    c.partitions = oracle::random_schedule(rng, c.nodes, 100);
    if (c.partitions.node_count() != c.nodes) c.nodes = c.partitions.node_count();
    c.noise = {60, 0.5};
    scenarios.push_back(std::move(c));
  }
  for (const auto& s : proof_strategies()) {
    ProofReplaySpec spec;
    spec.strategy = s;
    spec.tp = Tick{20};
    spec.claimed_tc = Tick{6};
    spec.claimed_ta = Tick{3};
    scenarios.push_back(proof_scenario(spec));
  }
  for (const auto& c : scenarios) {
    const auto a = to_jsonl(run(c));
    const auto b = to_jsonl(run(c));
    r.require(a == b, "trace differs for " + c.strategy.describe());
    const auto ra = to_json(check(extract_history(parse_jsonl(a)), Tick{3}, Tick{3}));
    const auto rb = to_json(check(extract_history(parse_jsonl(b)), Tick{3}, Tick{3}));
    r.require(ra == rb, "report differs for " + c.strategy.describe());
  }
  const std::vector<Tick> deadlines{Tick{0}, Tick{5}, Tick{10}, Tick{15}};
  auto base = frontier_base(1);
  base.noise = {30, 0.5};
  const auto csv1 = frontier_csv(frontier_sweep(Tick{15}, deadlines, base));
  const auto csv2 = frontier_csv(frontier_sweep(Tick{15}, deadlines, base));
  const auto csv3 = frontier_csv(frontier_sweep(Tick{15}, deadlines, base, {Anchor::kInvoke, false}));
  r.require(csv1 == csv2 && csv1 == csv3, "frontier CSV differs between runs");
  r.summary = std::to_string(scenarios.size()) +
              " scenarios run twice with identical traces and reports; frontier CSV identical (parallel and serial)";
  return r;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Result()>>> criteria = {
      {"impossibility replay", proof_grid},  {"2/5/4 vectors", write_sequence_vectors},
      {"bound over frontier", frontier_bound}, {"corner cases", corner_cases},
      {"checker oracle", checker_oracle},      {"partition-length oracle", tp_oracle},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Result r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& ex) {
      r.pass = false;
      r.summary = std::string("exception: ") + ex.what();
    }
    std::printf("%s criterion %zu (%s): %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
                r.summary.c_str());
    for (const auto& f : r.failures) std::printf("    %s\n", f.c_str());
    failed += !r.pass;
  }
  std::fflush(stdout);
  return failed == 0 ? 0 : 1;
}
