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

#ifndef CAPSIM_REGISTER_HPP_
#define CAPSIM_REGISTER_HPP_

#include <map>
#include <optional>
#include <string>

#include "capsim/types.hpp"

namespace capsim {

/// Write identity. Lexicographic order; the larger version wins a merge.
struct Version {
  Tick write_tick;
  NodeId writer;
  std::uint64_t seq = 0;

  friend auto operator<=>(const Version&, const Version&) = default;
};

struct Versioned {
  Version version;
  Value value = 0;

  friend bool operator==(const Versioned&, const Versioned&) = default;
};

/// Keeps the larger of two optional entries (absent loses to anything).
inline std::optional<Versioned> newer(const std::optional<Versioned>& a,
                                      const std::optional<Versioned>& b) {
  if (!a) return b;
  if (!b) return a;
  return a->version < b->version ? b : a;
}

/// Keyed last-writer-wins register. A key's version never decreases.
class RegisterState {
 public:
  /// Returns true when the entry replaced the current one.
  bool merge(const std::string& key, const Versioned& incoming) {
    auto [it, inserted] = entries_.try_emplace(key, incoming);
    if (inserted) return true;
    if (it->second.version < incoming.version) {
      it->second = incoming;
      return true;
    }
    return false;
  }

  void merge(const RegisterState& other) {
    for (const auto& [key, entry] : other.entries_) merge(key, entry);
  }

  std::optional<Versioned> get(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return std::nullopt;
    return it->second;
  }

  ReadValue read(const std::string& key) const {
    auto e = get(key);
    return e ? ReadValue{e->value} : std::nullopt;
  }

  const std::map<std::string, Versioned>& entries() const { return entries_; }

  friend bool operator==(const RegisterState&, const RegisterState&) = default;

 private:
  std::map<std::string, Versioned> entries_;
};

}  // namespace capsim

#endif  // CAPSIM_REGISTER_HPP_
