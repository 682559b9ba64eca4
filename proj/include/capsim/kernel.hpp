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

#ifndef CAPSIM_KERNEL_HPP_
#define CAPSIM_KERNEL_HPP_

#include <algorithm>
#include <concepts>
#include <functional>
#include <map>
#include <queue>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "capsim/partition.hpp"
#include "capsim/trace.hpp"
#include "capsim/types.hpp"

namespace capsim {

/// A client request addressed to one node at one tick.
struct ClientOp {
  OpId id = 0;
  Tick time;
  NodeId node;
  OpKind kind = OpKind::kRead;
  std::string key;
  ReadValue value;  // payload of writes
};

template <class Payload>
struct Message {
  NodeId src;
  NodeId dst;
  Tick send_time;
  std::uint64_t seq = 0;
  Payload payload;
};

using TimerId = std::uint64_t;

/**
 * Action list produced by one handler invocation. Handlers never touch the
 * event queue directly; the kernel applies the actions in order once the
 * handler returns.
 */
template <class Payload>
class Effects {
 public:
  struct Respond {
    OpId op;
    ReadValue value;
  };
  struct Send {
    NodeId dst;
    Payload payload;
  };
  struct SetTimer {
    Tick delay;
    TimerId id;
  };
  using Action = std::variant<Respond, Send, SetTimer>;

  Effects(NodeId self, Tick now, std::size_t node_count)
      : self_(self), now_(now), node_count_(node_count) {}

  NodeId self() const { return self_; }
  Tick now() const { return now_; }
  std::size_t node_count() const { return node_count_; }

  void respond(OpId op, ReadValue value = std::nullopt) {
    actions_.emplace_back(Respond{op, value});
  }

  void send(NodeId dst, Payload payload) {
    if (dst == self_) throw std::invalid_argument("a node cannot send to itself");
    if (dst.index() >= node_count_) throw std::invalid_argument("send to unknown node");
    actions_.emplace_back(Send{dst, std::move(payload)});
  }

  void broadcast(const Payload& payload) {
    for (std::uint32_t n = 0; n < node_count_; ++n) {
      if (n != self_.value) send(NodeId{n}, payload);
    }
  }

  /// Delay 0 is rejected: it would allow unbounded same-tick cascades.
  void set_timer(Tick delay, TimerId id) {
    if (delay == Tick{0}) throw std::invalid_argument("timer delay must be at least 1 tick");
    actions_.emplace_back(SetTimer{delay, id});
  }

  const std::vector<Action>& actions() const { return actions_; }

 private:
  NodeId self_;
  Tick now_;
  std::size_t node_count_;
  std::vector<Action> actions_;
};

/// A per-node state machine driven by the kernel.
template <class P>
concept NodeProtocol =
    requires { typename P::Payload; } &&
    requires(P& p, Effects<typename P::Payload>& fx, const ClientOp& op,
             const Message<typename P::Payload>& msg, TimerId id) {
      p.on_start(fx);
      p.on_invoke(fx, op);
      p.on_message(fx, msg);
      p.on_timer(fx, id);
    };

struct KernelConfig {
  std::size_t node_count = 0;
  Tick latency{1};
  Tick horizon;
  PartitionSchedule schedule;
  Reachability reachability = Reachability::kPath;
};

/**
 * Deterministic discrete-event loop.
 *
 * Events pop in (time, seq) order. seq is assigned at enqueue time, so
 * ties resolve in registration order. Client operations due at tick t are
 * enqueued when the clock reaches t, after every delivery and timer already
 * due at t; with latency and timer delays of at least one tick nothing else
 * can be added for t afterwards. A request is therefore processed after
 * all messages that arrive in the same tick.
 *
 * The partition check happens once, at send time.
 */
template <NodeProtocol P>
class Simulator {
 public:
  using Payload = typename P::Payload;
  using Factory = std::function<P(NodeId, std::size_t)>;

  Simulator(KernelConfig config, std::vector<ClientOp> ops, const Factory& make)
      : config_(std::move(config)), ops_(std::move(ops)) {
    validate();
    std::stable_sort(ops_.begin(), ops_.end(),
                     [](const ClientOp& a, const ClientOp& b) { return a.time < b.time; });
    nodes_.reserve(config_.node_count);
    for (std::uint32_t n = 0; n < config_.node_count; ++n) {
      nodes_.push_back(make(NodeId{n}, config_.node_count));
    }
    for (std::uint32_t n = 0; n < config_.node_count; ++n) {
      Effects<Payload> fx(NodeId{n}, Tick{0}, config_.node_count);
      guarded("start of node " + std::to_string(n), [&] { nodes_[n].on_start(fx); });
      apply(NodeId{n}, fx);
    }
  }

  Tick now() const { return now_; }
  const KernelConfig& config() const { return config_; }
  const Trace& trace() const { return trace_; }
  const P& node(NodeId n) const { return nodes_.at(n.index()); }
  bool finished() const { return finished_; }
  std::size_t pending_count() const { return pending_.size(); }

  /// Processes every event strictly before `limit` (capped at the horizon).
  void run_until(Tick limit) {
    limit = std::min(limit, config_.horizon);
    while (true) {
      std::optional<Tick> next;
      if (!queue_.empty()) next = queue_.top().time;
      if (next_op_ < ops_.size() && (!next || ops_[next_op_].time < *next)) {
        next = ops_[next_op_].time;
      }
      if (!next || *next >= limit) break;

      while (next_op_ < ops_.size() && ops_[next_op_].time == *next) {
        push(*next, InvokeEvent{next_op_++});
      }
      Event ev = queue_.top();
      queue_.pop();
      now_ = ev.time;
      dispatch(ev);
    }
  }

  /// Runs to the horizon and closes the trace. Idempotent.
  const Trace& finish() {
    if (finished_) return trace_;
    run_until(config_.horizon);
    now_ = config_.horizon;
    while (!queue_.empty()) {
      Event ev = queue_.top();
      queue_.pop();
      if (const auto* d = std::get_if<DeliverEvent>(&ev.body)) {
        record_message(TraceKind::kDrop, d->msg);
      }
    }
    for (const auto& [op, owner] : pending_) {
      TraceEvent e;
      e.t = now_;
      e.kind = TraceKind::kUnanswered;
      e.op = op;
      record(std::move(e));
    }
    pending_.clear();
    finished_ = true;
    return trace_;
  }

  Trace run() { return finish(); }

 private:
  struct InvokeEvent {
    std::size_t index;
  };
  struct DeliverEvent {
    Message<Payload> msg;
  };
  struct TimerEvent {
    NodeId node;
    TimerId id;
  };
  struct Event {
    Tick time;
    std::uint64_t seq;
    std::variant<InvokeEvent, DeliverEvent, TimerEvent> body;
  };
  struct Later {
    bool operator()(const Event& a, const Event& b) const {
      return std::tie(a.time, a.seq) > std::tie(b.time, b.seq);
    }
  };

  void validate() const {
    if (config_.node_count == 0) throw ConfigError("scenario needs at least one node");
    if (config_.latency == Tick{0}) throw ConfigError("message latency must be at least 1 tick");
    if (config_.schedule.node_count() != config_.node_count) {
      throw ConfigError("partition schedule node count does not match the scenario");
    }
    std::map<OpId, bool> seen;
    for (const auto& op : ops_) {
      if (op.node.index() >= config_.node_count) {
        throw ConfigError("op " + std::to_string(op.id) + " addressed to unknown node " +
                          std::to_string(op.node.value));
      }
      if (!(op.time < config_.horizon)) {
        throw ConfigError("op " + std::to_string(op.id) + " at tick " +
                          std::to_string(op.time.value) + " is not before the horizon");
      }
      if (!seen.emplace(op.id, true).second) {
        throw ConfigError("duplicate op id " + std::to_string(op.id));
      }
      if (op.kind == OpKind::kWrite && !op.value) {
        throw ConfigError("write op " + std::to_string(op.id) + " has no value");
      }
    }
  }

  template <class Body>
  void push(Tick time, Body body) {
    queue_.push(Event{time, next_event_seq_++, std::move(body)});
  }

  void record(TraceEvent e) {
    e.seq = trace_.size();
    trace_.push_back(std::move(e));
  }

  void record_message(TraceKind kind, const Message<Payload>& m) {
    TraceEvent e;
    e.t = now_;
    e.kind = kind;
    e.src = m.src;
    e.dst = m.dst;
    e.msg = m.seq;
    record(std::move(e));
  }

  template <class F>
  void guarded(const std::string& what, F&& f) {
    try {
      f();
    } catch (const std::exception& ex) {
      std::ostringstream os;
      os << "t=" << now_ << ": " << what << ": " << ex.what();
      throw SimulationError(os.str());
    }
  }

  void dispatch(const Event& ev) {
    if (const auto* inv = std::get_if<InvokeEvent>(&ev.body)) {
      const ClientOp& op = ops_[inv->index];
      TraceEvent e;
      e.t = now_;
      e.kind = TraceKind::kInvoke;
      e.op = op.id;
      e.node = op.node;
      e.op_kind = op.kind;
      e.key = op.key;
      e.val = op.kind == OpKind::kWrite ? op.value : std::nullopt;
      record(std::move(e));
      pending_.emplace(op.id, op.node);

      Effects<Payload> fx(op.node, now_, config_.node_count);
      guarded("invoke of op " + std::to_string(op.id) + " at node " + std::to_string(op.node.value),
              [&] { nodes_[op.node.index()].on_invoke(fx, op); });
      apply(op.node, fx);
    } else if (const auto* del = std::get_if<DeliverEvent>(&ev.body)) {
      record_message(TraceKind::kDeliver, del->msg);
      Effects<Payload> fx(del->msg.dst, now_, config_.node_count);
      guarded("delivery of msg " + std::to_string(del->msg.seq) + " to node " +
                  std::to_string(del->msg.dst.value),
              [&] { nodes_[del->msg.dst.index()].on_message(fx, del->msg); });
      apply(del->msg.dst, fx);
    } else {
      const auto& tm = std::get<TimerEvent>(ev.body);
      TraceEvent e;
      e.t = now_;
      e.kind = TraceKind::kTimer;
      e.node = tm.node;
      e.timer = tm.id;
      record(std::move(e));
      Effects<Payload> fx(tm.node, now_, config_.node_count);
      guarded("timer " + std::to_string(tm.id) + " at node " + std::to_string(tm.node.value),
              [&] { nodes_[tm.node.index()].on_timer(fx, tm.id); });
      apply(tm.node, fx);
    }
  }

  void apply(NodeId self, Effects<Payload>& fx) {
    for (const auto& action : fx.actions()) {
      if (const auto* r = std::get_if<typename Effects<Payload>::Respond>(&action)) {
        auto it = pending_.find(r->op);
        if (it == pending_.end() || it->second != self) {
          std::ostringstream os;
          os << "t=" << now_ << ": node " << self.value << " responded to op " << r->op
             << " which it does not have pending";
          throw SimulationError(os.str());
        }
        pending_.erase(it);
        TraceEvent e;
        e.t = now_;
        e.kind = TraceKind::kRespond;
        e.op = r->op;
        e.val = r->value;
        record(std::move(e));
      } else if (const auto* s = std::get_if<typename Effects<Payload>::Send>(&action)) {
        send(self, s->dst, s->payload);
      } else {
        const auto& t = std::get<typename Effects<Payload>::SetTimer>(action);
        push(now_ + t.delay, TimerEvent{self, t.id});
      }
    }
  }

  void send(NodeId src, NodeId dst, const Payload& payload) {
    Message<Payload> m{src, dst, now_, next_msg_seq_++, payload};
    record_message(TraceKind::kSend, m);
    if (config_.schedule.reachable(now_, src, dst, config_.reachability)) {
      push(now_ + config_.latency, DeliverEvent{std::move(m)});
    } else {
      record_message(TraceKind::kDrop, m);
    }
  }

  KernelConfig config_;
  std::vector<ClientOp> ops_;
  std::vector<P> nodes_;
  std::priority_queue<Event, std::vector<Event>, Later> queue_;
  std::map<OpId, NodeId> pending_;
  Trace trace_;
  Tick now_{0};
  std::size_t next_op_ = 0;
  std::uint64_t next_event_seq_ = 0;
  std::uint64_t next_msg_seq_ = 0;
  bool finished_ = false;
};

}  // namespace capsim

#endif  // CAPSIM_KERNEL_HPP_
