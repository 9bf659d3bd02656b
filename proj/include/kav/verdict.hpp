// Copyright 2026 The kav Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "kav/types.hpp"

namespace kav {

enum class Answer { kYes, kNo };

inline std::string_view ToString(Answer a) {
  return a == Answer::kYes ? "YES" : "NO";
}

// One position of a witness: either a write slot holding exactly one write,
// or a read container holding zero or more reads.
struct WitnessEntry {
  enum class Kind { kSlot, kContainer };
  Kind kind = Kind::kSlot;
  std::vector<OpIndex> ops;

  static WitnessEntry Slot(OpIndex w) { return {Kind::kSlot, {w}}; }
  static WitnessEntry Container(std::vector<OpIndex> reads) {
    return {Kind::kContainer, std::move(reads)};
  }

  friend bool operator==(const WitnessEntry&, const WitnessEntry&) = default;
};

// Entries are stored front-to-back: flattening them in order yields the
// witness total order.
struct WitnessOrder {
  std::vector<WitnessEntry> entries;

  std::vector<OpIndex> Flatten() const {
    std::vector<OpIndex> out;
    for (const auto& e : entries) out.insert(out.end(), e.ops.begin(), e.ops.end());
    return out;
  }

  friend bool operator==(const WitnessOrder&, const WitnessOrder&) = default;
};

// Machine-checkable reason for a NO answer. `ops` names the operations the
// reason is about (writes for zone and chunk reasons).
struct Certificate {
  enum class Kind {
    // Two forward zones overlap; ops = {write of first, write of second}.
    kOverlappingForwardZones,
    // A backward zone lies inside a forward zone; ops = {forward, backward}.
    kBackwardZoneInsideForward,
    // No candidate write order of a chunk is viable; ops = chunk writes.
    kChunkNotViable,
    // A chunk has three or more backward clusters; ops = chunk writes.
    kTooManyBackwardClusters,
    // Every epoch candidate failed; ops = the candidate writes.
    kEpochCandidatesExhausted,
    // The exhaustive search found no order.
    kExhaustiveSearch,
  };
  Kind kind;
  std::vector<OpIndex> ops;
};

inline std::string_view ToString(Certificate::Kind k) {
  switch (k) {
    case Certificate::Kind::kOverlappingForwardZones:
      return "OverlappingForwardZones";
    case Certificate::Kind::kBackwardZoneInsideForward:
      return "BackwardZoneInsideForward";
    case Certificate::Kind::kChunkNotViable:
      return "ChunkNotViable";
    case Certificate::Kind::kTooManyBackwardClusters:
      return "TooManyBackwardClusters";
    case Certificate::Kind::kEpochCandidatesExhausted:
      return "EpochCandidatesExhausted";
    case Certificate::Kind::kExhaustiveSearch:
      return "ExhaustiveSearch";
  }
  return "Unknown";
}

// Instrumentation. `steps` is the algorithm's deterministic work counter.
struct Stats {
  std::uint64_t steps = 0;
  std::uint64_t removals = 0;
  std::uint64_t undo_replays = 0;
  std::uint64_t nodes = 0;
};

struct Verdict {
  Answer answer = Answer::kNo;
  std::optional<WitnessOrder> witness;
  std::optional<Certificate> certificate;
  Stats stats;

  bool yes() const { return answer == Answer::kYes; }
};

}  // namespace kav
