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

#ifndef CAPSIM_TYPES_HPP_
#define CAPSIM_TYPES_HPP_

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>

namespace capsim {

/**
 * Discrete virtual time. Every bound the library measures (consistency,
 * availability and partition lengths) is a count of ticks.
 *
 * Subtraction saturates at zero so that "how long ago" computations never
 * wrap around.
 */
struct Tick {
  std::uint64_t value = 0;

  constexpr Tick() = default;
  constexpr explicit Tick(std::uint64_t v) : value(v) {}

  friend constexpr auto operator<=>(Tick, Tick) = default;

  friend constexpr Tick operator+(Tick a, Tick b) { return Tick{a.value + b.value}; }
  friend constexpr Tick operator-(Tick a, Tick b) {
    return Tick{a.value > b.value ? a.value - b.value : 0};
  }
  friend constexpr Tick operator*(std::uint64_t k, Tick t) { return Tick{k * t.value}; }
  constexpr Tick& operator+=(Tick o) {
    value += o.value;
    return *this;
  }

  friend std::ostream& operator<<(std::ostream& os, Tick t) { return os << t.value; }
};

/// Dense index of a node in a scenario, 0..N-1.
struct NodeId {
  std::uint32_t value = 0;

  constexpr NodeId() = default;
  constexpr explicit NodeId(std::uint32_t v) : value(v) {}

  constexpr std::size_t index() const { return value; }

  friend constexpr auto operator<=>(NodeId, NodeId) = default;
  friend std::ostream& operator<<(std::ostream& os, NodeId n) { return os << 'n' << n.value; }
};

using OpId = std::uint64_t;
using Value = std::int64_t;

/// A register read result: nullopt is the initial (never written) state.
using ReadValue = std::optional<Value>;

enum class OpKind { kRead, kWrite };

inline const char* to_string(OpKind k) { return k == OpKind::kRead ? "read" : "write"; }

/// Invalid scenario, spec file or command line input.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A node handler failed while the simulation was running.
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A trace line could not be parsed.
class TraceParseError : public std::runtime_error {
 public:
  TraceParseError(std::size_t line, const std::string& what)
      : std::runtime_error("trace line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// A trace or history breaks a structural rule (duplicate op, orphan response).
class IntegrityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace capsim

#endif  // CAPSIM_TYPES_HPP_
