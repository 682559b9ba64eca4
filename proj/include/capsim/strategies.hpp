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

#ifndef CAPSIM_STRATEGIES_HPP_
#define CAPSIM_STRATEGIES_HPP_

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "capsim/kernel.hpp"
#include "capsim/register.hpp"
#include "capsim/types.hpp"

namespace capsim {

// Wire messages shared by the register strategies.

/// One-shot propagation of a local write (LocalFirst).
struct UpdateMsg {
  std::string key;
  Versioned entry;
};

/// Full register state (LocalFirst anti-entropy).
struct DigestMsg {
  RegisterState state;
};

/// Round request from the coordinating node; carries the write for write rounds.
struct RoundRequest {
  OpId round = 0;
  std::string key;
  std::optional<Versioned> write;
};

/// Acknowledgement carrying the replier's entry for the key.
struct RoundReply {
  OpId round = 0;
  std::string key;
  std::optional<Versioned> entry;
};

using RegisterMessage = std::variant<UpdateMsg, DigestMsg, RoundRequest, RoundReply>;

enum class StrategyKind { kLocalFirst, kSyncAll, kHybridDeadline };

inline const char* to_string(StrategyKind k) {
  switch (k) {
    case StrategyKind::kLocalFirst: return "LocalFirst";
    case StrategyKind::kSyncAll: return "SyncAll";
    case StrategyKind::kHybridDeadline: return "HybridDeadline";
  }
  return "?";
}

struct StrategyParams {
  StrategyKind kind = StrategyKind::kLocalFirst;
  Tick gossip_period{4};      // G, LocalFirst
  Tick retransmit_period{2};  // R, SyncAll and HybridDeadline
  Tick deadline{0};           // D, HybridDeadline

  void validate() const {
    if (kind == StrategyKind::kLocalFirst && gossip_period == Tick{0}) {
      throw ConfigError("anti-entropy period G must be at least 1");
    }
    if (kind != StrategyKind::kLocalFirst && retransmit_period == Tick{0}) {
      throw ConfigError("retransmit period R must be at least 1");
    }
  }

  std::string describe() const {
    switch (kind) {
      case StrategyKind::kLocalFirst:
        return "LocalFirst(G=" + std::to_string(gossip_period.value) + ")";
      case StrategyKind::kSyncAll:
        return "SyncAll(R=" + std::to_string(retransmit_period.value) + ")";
      case StrategyKind::kHybridDeadline:
        return "HybridDeadline(D=" + std::to_string(deadline.value) +
               ",R=" + std::to_string(retransmit_period.value) + ")";
    }
    return "?";
  }

  static StrategyParams local_first(Tick g) { return {StrategyKind::kLocalFirst, g, Tick{2}, Tick{0}}; }
  static StrategyParams sync_all(Tick r) { return {StrategyKind::kSyncAll, Tick{4}, r, Tick{0}}; }
  static StrategyParams hybrid_deadline(Tick d, Tick r) {
    return {StrategyKind::kHybridDeadline, Tick{4}, r, d};
  }
};

/**
 * Available-first replica. Reads and writes are answered from local state
 * in the tick they arrive; writes are broadcast once and a full digest is
 * pushed to every peer each G ticks so replicas reconverge after drops.
 */
class LocalFirst {
 public:
  using Payload = RegisterMessage;
  using Fx = Effects<Payload>;
  static constexpr TimerId kGossipTimer = 0;

  LocalFirst(NodeId self, std::size_t node_count, Tick gossip_period)
      : self_(self), node_count_(node_count), period_(gossip_period) {}

  const RegisterState& state() const { return state_; }

  void on_start(Fx& fx) {
    if (node_count_ > 1) fx.set_timer(period_, kGossipTimer);
  }

  void on_invoke(Fx& fx, const ClientOp& op) {
    if (op.kind == OpKind::kRead) {
      fx.respond(op.id, state_.read(op.key));
      return;
    }
    Versioned entry{Version{fx.now(), self_, next_seq_++}, *op.value};
    state_.merge(op.key, entry);
    fx.respond(op.id);
    fx.broadcast(UpdateMsg{op.key, entry});
  }

  void on_message(Fx&, const Message<Payload>& msg) {
    if (const auto* u = std::get_if<UpdateMsg>(&msg.payload)) {
      state_.merge(u->key, u->entry);
    } else if (const auto* d = std::get_if<DigestMsg>(&msg.payload)) {
      state_.merge(d->state);
    } else {
      throw std::invalid_argument("LocalFirst cannot handle round messages");
    }
  }

  void on_timer(Fx& fx, TimerId id) {
    if (id != kGossipTimer) throw std::invalid_argument("unknown timer");
    fx.broadcast(DigestMsg{state_});
    fx.set_timer(period_, kGossipTimer);
  }

 private:
  NodeId self_;
  std::size_t node_count_;
  Tick period_;
  RegisterState state_;
  std::uint64_t next_seq_ = 0;
};

/**
 * Round-based replica. Every read and write runs a round against all peers:
 * writes are applied by each peer before it acknowledges, reads collect
 * every peer's entry and return the newest. Unacknowledged requests are
 * resent every R ticks.
 *
 * Without a deadline this is SyncAll: a request answers only once the
 * round is complete, however long a partition lasts. With deadline D it is
 * HybridDeadline: an incomplete round answers at invoke + D with the newest
 * entry seen so far. Write rounds keep retransmitting after such an early
 * answer until every peer has the write.
 */
class RoundReplica {
 public:
  using Payload = RegisterMessage;
  using Fx = Effects<Payload>;
  static constexpr TimerId kRetransmitTimer = 0;

  RoundReplica(NodeId self, std::size_t node_count, Tick retransmit_period,
               std::optional<Tick> deadline)
      : self_(self),
        node_count_(node_count),
        retransmit_(retransmit_period),
        deadline_(deadline) {}

  static TimerId deadline_timer(OpId op) { return op + 1; }

  const RegisterState& state() const { return state_; }
  std::size_t open_rounds() const { return rounds_.size(); }

  void on_start(Fx&) {}

  void on_invoke(Fx& fx, const ClientOp& op) {
    Round round;
    round.op = op.id;
    round.kind = op.kind;
    round.key = op.key;
    round.acked.assign(node_count_, 0);
    round.acked[self_.index()] = 1;
    round.acks = 1;

    if (op.kind == OpKind::kWrite) {
      Versioned entry{Version{fx.now(), self_, next_seq_++}, *op.value};
      state_.merge(op.key, entry);
      round.write = entry;
    }
    round.best = state_.get(op.key);

    if (node_count_ == 1) {
      respond(fx, round);
      return;
    }

    fx.broadcast(request_for(round));
    if (deadline_ && *deadline_ == Tick{0}) {
      respond(fx, round);
      round.responded = true;
      if (round.kind == OpKind::kRead) return;
    } else if (deadline_) {
      fx.set_timer(*deadline_, deadline_timer(op.id));
    }
    rounds_.emplace(op.id, std::move(round));
    arm_retransmit(fx);
  }

  void on_message(Fx& fx, const Message<Payload>& msg) {
    if (const auto* req = std::get_if<RoundRequest>(&msg.payload)) {
      if (req->write) state_.merge(req->key, *req->write);
      fx.send(msg.src, RoundReply{req->round, req->key, state_.get(req->key)});
      return;
    }
    const auto* reply = std::get_if<RoundReply>(&msg.payload);
    if (reply == nullptr) throw std::invalid_argument("round replica cannot handle gossip messages");

    if (reply->entry) state_.merge(reply->key, *reply->entry);
    auto it = rounds_.find(reply->round);
    if (it == rounds_.end()) return;  // duplicate reply to a finished round
    Round& round = it->second;
    round.best = newer(round.best, reply->entry);
    if (!round.acked[msg.src.index()]) {
      round.acked[msg.src.index()] = 1;
      ++round.acks;
    }
    if (round.acks == node_count_) {
      if (!round.responded) respond(fx, round);
      rounds_.erase(it);
    }
  }

  void on_timer(Fx& fx, TimerId id) {
    if (id == kRetransmitTimer) {
      retransmit_armed_ = false;
      if (rounds_.empty()) return;
      for (const auto& [op, round] : rounds_) {
        const auto request = request_for(round);
        for (std::uint32_t n = 0; n < node_count_; ++n) {
          if (!round.acked[n]) fx.send(NodeId{n}, request);
        }
      }
      arm_retransmit(fx);
      return;
    }

    auto it = rounds_.find(id - 1);
    if (it == rounds_.end() || it->second.responded) return;
    Round& round = it->second;
    round.best = newer(round.best, state_.get(round.key));
    respond(fx, round);
    round.responded = true;
    if (round.kind == OpKind::kRead) rounds_.erase(it);
  }

 private:
  struct Round {
    OpId op = 0;
    OpKind kind = OpKind::kRead;
    std::string key;
    std::optional<Versioned> write;
    std::optional<Versioned> best;
    std::vector<char> acked;
    std::size_t acks = 0;
    bool responded = false;
  };

  static RoundRequest request_for(const Round& round) {
    return RoundRequest{round.op, round.key, round.write};
  }

  static void respond(Fx& fx, const Round& round) {
    if (round.kind == OpKind::kWrite) {
      fx.respond(round.op);
    } else {
      fx.respond(round.op, round.best ? ReadValue{round.best->value} : std::nullopt);
    }
  }

  void arm_retransmit(Fx& fx) {
    if (retransmit_armed_) return;
    fx.set_timer(retransmit_, kRetransmitTimer);
    retransmit_armed_ = true;
  }

  NodeId self_;
  std::size_t node_count_;
  Tick retransmit_;
  std::optional<Tick> deadline_;
  RegisterState state_;
  std::map<OpId, Round> rounds_;
  std::uint64_t next_seq_ = 0;
  bool retransmit_armed_ = false;
};

}  // namespace capsim

#endif  // CAPSIM_STRATEGIES_HPP_
