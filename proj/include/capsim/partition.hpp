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

#ifndef CAPSIM_PARTITION_HPP_
#define CAPSIM_PARTITION_HPP_

#include <algorithm>
#include <cstddef>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "capsim/types.hpp"

namespace capsim {

/**
 * How "able to communicate" is decided.
 *
 * kPath: a and b communicate when some chain of live links joins them.
 * kDirect: only the a-b link itself counts. Kept for comparison runs.
 */
enum class Reachability { kPath, kDirect };

/// Symmetric outage of the link {a, b} over the half-open interval [start, end).
struct LinkOutage {
  NodeId a;
  NodeId b;
  Tick start;
  Tick end;

  bool covers(Tick t) const { return start <= t && t < end; }
  bool on_link(NodeId x, NodeId y) const { return (a == x && b == y) || (a == y && b == x); }
};

/**
 * Set of link outages for an N-node service. Overlapping outages on the
 * same link union. Node crashes are expressed with isolate(), which takes
 * every link of the node down.
 */
class PartitionSchedule {
 public:
  PartitionSchedule() = default;
  explicit PartitionSchedule(std::size_t node_count) : node_count_(node_count) {}

  std::size_t node_count() const { return node_count_; }
  const std::vector<LinkOutage>& outages() const { return outages_; }
  bool empty() const { return outages_.empty(); }

  void add(const LinkOutage& o) {
    check_node(o.a);
    check_node(o.b);
    if (o.a == o.b) throw std::invalid_argument("outage endpoints must differ");
    if (!(o.start < o.end)) {
      throw std::invalid_argument("outage interval must satisfy start < end");
    }
    outages_.push_back(o);
  }

  void isolate(NodeId n, Tick start, Tick end) {
    for (std::uint32_t other = 0; other < node_count_; ++other) {
      if (other != n.value) add({n, NodeId{other}, start, end});
    }
  }

  /// Cuts every link between the two sides over [start, end).
  void bipartition(std::span<const NodeId> side_a, std::span<const NodeId> side_b, Tick start,
                   Tick end) {
    for (NodeId a : side_a) {
      for (NodeId b : side_b) add({a, b, start, end});
    }
  }

  /// Latest outage end, or 0 for an empty schedule.
  Tick latest_end() const {
    Tick t{0};
    for (const auto& o : outages_) t = std::max(t, o.end);
    return t;
  }

  bool link_up(Tick t, NodeId a, NodeId b) const {
    check_pair(a, b);
    return link_up_unchecked(t, a, b);
  }

  bool reachable(Tick t, NodeId a, NodeId b, Reachability mode = Reachability::kPath) const {
    check_pair(a, b);
    if (mode == Reachability::kDirect) return link_up_unchecked(t, a, b);

    // BFS over the live graph at tick t.
    std::vector<char> seen(node_count_, 0);
    std::vector<std::uint32_t> frontier{a.value};
    seen[a.index()] = 1;
    while (!frontier.empty()) {
      std::uint32_t cur = frontier.back();
      frontier.pop_back();
      for (std::uint32_t next = 0; next < node_count_; ++next) {
        if (seen[next] || next == cur) continue;
        if (!link_up_unchecked(t, NodeId{cur}, NodeId{next})) continue;
        if (next == b.value) return true;
        seen[next] = 1;
        frontier.push_back(next);
      }
    }
    return false;
  }

 private:
  bool link_up_unchecked(Tick t, NodeId a, NodeId b) const {
    return std::none_of(outages_.begin(), outages_.end(),
                        [&](const LinkOutage& o) { return o.on_link(a, b) && o.covers(t); });
  }

  void check_node(NodeId n) const {
    if (n.index() >= node_count_) {
      throw std::invalid_argument("node id " + std::to_string(n.value) + " out of range");
    }
  }

  void check_pair(NodeId a, NodeId b) const {
    check_node(a);
    check_node(b);
    if (a == b) throw std::invalid_argument("reachability is undefined for a node and itself");
  }

  std::size_t node_count_ = 0;
  std::vector<LinkOutage> outages_;
};

namespace detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) { parent_[find(a)] = find(b); }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace detail

/**
 * Longest run of consecutive ticks in [0, horizon) during which some node
 * pair cannot communicate. Runs are tracked per pair; two different pairs'
 * outages never add up.
 *
 * The live graph only changes at outage boundaries, so the sweep visits each
 * constant segment once instead of every tick.
 */
inline Tick compute_tp(const PartitionSchedule& schedule, Tick horizon,
                       Reachability mode = Reachability::kPath) {
  const std::size_t n = schedule.node_count();
  if (n < 2 || schedule.empty() || horizon == Tick{0}) return Tick{0};

  std::vector<Tick> cuts{Tick{0}, horizon};
  for (const auto& o : schedule.outages()) {
    if (o.start < horizon) cuts.push_back(o.start);
    if (o.end < horizon) cuts.push_back(o.end);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  std::vector<std::uint64_t> run(n * n, 0);
  std::uint64_t best = 0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    const Tick at = cuts[i];
    const std::uint64_t len = (cuts[i + 1] - at).value;

    // Connectivity is constant on [cuts[i], cuts[i+1]).
    detail::DisjointSets sets(n);
    std::vector<char> direct(n * n, 1);
    for (const auto& o : schedule.outages()) {
      if (o.covers(at)) {
        direct[o.a.index() * n + o.b.index()] = 0;
        direct[o.b.index() * n + o.a.index()] = 0;
      }
    }
    if (mode == Reachability::kPath) {
      for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
          if (direct[a * n + b]) sets.unite(a, b);
        }
      }
    }

    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = a + 1; b < n; ++b) {
        const bool connected =
            mode == Reachability::kPath ? sets.find(a) == sets.find(b) : direct[a * n + b] != 0;
        auto& r = run[a * n + b];
        r = connected ? 0 : r + len;
        best = std::max(best, r);
      }
    }
  }
  return Tick{best};
}

}  // namespace capsim

#endif  // CAPSIM_PARTITION_HPP_
