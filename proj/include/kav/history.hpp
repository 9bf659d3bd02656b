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

// Partitioning, anomaly detection and normalization of histories.
//
// Verifiers in this library assume a normalized history: every endpoint is
// distinct, every write value is distinct, every read has a dictating write
// that it does not precede, and every write finishes before each of its
// dictated reads finishes. Normalize() establishes the last property (plus
// an even-integer time scale) for any history that Validate() accepts.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <utility>
#include <vector>

#include "kav/types.hpp"

namespace kav {

enum class AnomalyKind {
  kReadWithoutDictatingWrite,
  kReadPrecedesDictatingWrite,
  kDuplicateWriteValue,
  kDuplicateTimestamp,
  kInvertedInterval,
};

inline std::string_view ToString(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::kReadWithoutDictatingWrite:
      return "ReadWithoutDictatingWrite";
    case AnomalyKind::kReadPrecedesDictatingWrite:
      return "ReadPrecedesDictatingWrite";
    case AnomalyKind::kDuplicateWriteValue:
      return "DuplicateWriteValue";
    case AnomalyKind::kDuplicateTimestamp:
      return "DuplicateTimestamp";
    case AnomalyKind::kInvertedInterval:
      return "InvertedInterval";
  }
  return "Unknown";
}

struct Anomaly {
  AnomalyKind kind;
  std::vector<std::string> op_ids;

  friend bool operator==(const Anomaly&, const Anomaly&) = default;
};

// Groups trace records by register key. Keys iterate in sorted order.
inline std::map<std::string, History> PartitionByKey(const Trace& trace) {
  std::map<std::string, History> groups;
  for (const TraceRecord& record : trace.records) {
    History& h = groups[record.key];
    h.key = record.key;
    h.ops.push_back(record.op);
  }
  return groups;
}

// Reports every violation of the history invariants (except the
// write-ends-before-its-reads property, which Normalize() establishes).
// Anomalies are ordered by kind, then by first appearance.
inline std::vector<Anomaly> Validate(const History& h) {
  std::vector<Anomaly> out;
  const auto& ops = h.ops;

  for (const Operation& op : ops) {
    if (op.finish <= op.start) {
      out.push_back({AnomalyKind::kInvertedInterval, {op.id}});
    }
  }

  // Endpoint collisions between distinct operations, one anomaly per tick.
  {
    std::vector<std::pair<Time, OpIndex>> endpoints;
    endpoints.reserve(2 * ops.size());
    for (OpIndex i = 0; i < ops.size(); ++i) {
      endpoints.emplace_back(ops[i].start, i);
      endpoints.emplace_back(ops[i].finish, i);
    }
    std::sort(endpoints.begin(), endpoints.end());
    for (std::size_t lo = 0; lo < endpoints.size();) {
      std::size_t hi = lo;
      while (hi < endpoints.size() && endpoints[hi].first == endpoints[lo].first) {
        ++hi;
      }
      std::vector<OpIndex> involved;
      for (std::size_t j = lo; j < hi; ++j) {
        if (involved.empty() || involved.back() != endpoints[j].second) {
          involved.push_back(endpoints[j].second);
        }
      }
      if (involved.size() > 1) {
        Anomaly a{AnomalyKind::kDuplicateTimestamp, {}};
        for (OpIndex i : involved) a.op_ids.push_back(ops[i].id);
        out.push_back(std::move(a));
      }
      lo = hi;
    }
  }

  std::map<std::string_view, std::vector<OpIndex>> writes_by_value;
  for (OpIndex i = 0; i < ops.size(); ++i) {
    if (ops[i].is_write()) writes_by_value[ops[i].value].push_back(i);
  }
  for (const auto& [value, writers] : writes_by_value) {
    if (writers.size() > 1) {
      Anomaly a{AnomalyKind::kDuplicateWriteValue, {}};
      for (OpIndex i : writers) a.op_ids.push_back(ops[i].id);
      out.push_back(std::move(a));
    }
  }

  std::vector<Anomaly> precedes_dictating;
  for (const Operation& op : ops) {
    if (!op.is_read()) continue;
    auto it = writes_by_value.find(op.value);
    if (it == writes_by_value.end()) {
      out.push_back({AnomalyKind::kReadWithoutDictatingWrite, {op.id}});
      continue;
    }
    // Ambiguous dictating write: already reported as a duplicate value.
    if (it->second.size() != 1) continue;
    const Operation& w = ops[it->second.front()];
    if (Precedes(op, w)) {
      precedes_dictating.push_back(
          {AnomalyKind::kReadPrecedesDictatingWrite, {op.id, w.id}});
    }
  }
  out.insert(out.end(), precedes_dictating.begin(), precedes_dictating.end());

  std::stable_sort(out.begin(), out.end(), [](const Anomaly& a, const Anomaly& b) {
    return static_cast<int>(a.kind) < static_cast<int>(b.kind);
  });
  return out;
}

// Removes reads whose dictating write is missing or preceded by the read.
// Returns the ids of the dropped reads.
inline std::vector<std::string> DropAnomalousReads(History& h) {
  std::unordered_map<std::string, std::vector<OpIndex>> writes_by_value;
  for (OpIndex i = 0; i < h.ops.size(); ++i) {
    if (h.ops[i].is_write()) writes_by_value[h.ops[i].value].push_back(i);
  }
  std::vector<std::string> dropped;
  std::vector<Operation> kept;
  kept.reserve(h.ops.size());
  for (const Operation& op : h.ops) {
    bool drop = false;
    if (op.is_read()) {
      auto it = writes_by_value.find(op.value);
      if (it == writes_by_value.end()) {
        drop = true;
      } else if (it->second.size() == 1 &&
                 Precedes(op, h.ops[it->second.front()])) {
        drop = true;
      }
    }
    if (drop) {
      dropped.push_back(op.id);
    } else {
      kept.push_back(op);
    }
  }
  h.ops = std::move(kept);
  return dropped;
}

// Order-preserving remap that breaks endpoint ties deterministically by
// (op id, start-before-finish). Returns a history with distinct endpoints on
// the scale 0, 2, 4, ...; strictly ordered endpoints keep their order.
inline History PerturbDuplicateTimestamps(const History& h) {
  struct Endpoint {
    Time time;
    std::string_view id;
    int is_finish;
    OpIndex op;
  };
  std::vector<Endpoint> endpoints;
  endpoints.reserve(2 * h.ops.size());
  for (OpIndex i = 0; i < h.ops.size(); ++i) {
    endpoints.push_back({h.ops[i].start, h.ops[i].id, 0, i});
    endpoints.push_back({h.ops[i].finish, h.ops[i].id, 1, i});
  }
  std::sort(endpoints.begin(), endpoints.end(),
            [](const Endpoint& a, const Endpoint& b) {
              return std::tie(a.time, a.id, a.is_finish, a.op) <
                     std::tie(b.time, b.id, b.is_finish, b.op);
            });
  History out = h;
  for (std::size_t rank = 0; rank < endpoints.size(); ++rank) {
    Operation& op = out.ops[endpoints[rank].op];
    const Time t = static_cast<Time>(2 * rank);
    if (endpoints[rank].is_finish) {
      op.finish = t;
    } else {
      op.start = t;
    }
  }
  return out;
}

// Requires Validate(h) to be empty. Remaps all endpoints order-preservingly
// onto 0, 2, 4, ... and then shortens every write so it finishes one tick
// before the earliest finish among its dictated reads (when that is earlier
// than its own finish). The odd result cannot collide with any endpoint.
inline History Normalize(const History& h) {
  if (!Validate(h).empty()) {
    throw std::invalid_argument("Normalize: history '" + h.key +
                                "' has anomalies");
  }
  std::vector<Time> times;
  times.reserve(2 * h.ops.size());
  for (const Operation& op : h.ops) {
    times.push_back(op.start);
    times.push_back(op.finish);
  }
  std::sort(times.begin(), times.end());
  auto remap = [&](Time t) {
    auto it = std::lower_bound(times.begin(), times.end(), t);
    return static_cast<Time>(2 * (it - times.begin()));
  };

  History out = h;
  for (Operation& op : out.ops) {
    op.start = remap(op.start);
    op.finish = remap(op.finish);
  }

  std::unordered_map<std::string, Time> min_read_finish;
  for (const Operation& op : out.ops) {
    if (!op.is_read()) continue;
    auto [it, inserted] = min_read_finish.emplace(op.value, op.finish);
    if (!inserted) it->second = std::min(it->second, op.finish);
  }
  for (Operation& op : out.ops) {
    if (!op.is_write()) continue;
    auto it = min_read_finish.find(op.value);
    if (it != min_read_finish.end()) {
      op.finish = std::min(op.finish, it->second - 1);
    }
  }
  return out;
}

// True iff every write finishes before each of its dictated reads finishes.
// Together with an empty Validate() this is the verifier precondition.
inline bool WritesEndBeforeTheirReads(const History& h) {
  std::unordered_map<std::string, Time> write_finish;
  for (const Operation& op : h.ops) {
    if (op.is_write()) write_finish[op.value] = op.finish;
  }
  for (const Operation& op : h.ops) {
    if (!op.is_read()) continue;
    auto it = write_finish.find(op.value);
    if (it == write_finish.end() || !(it->second < op.finish)) return false;
  }
  return true;
}

inline bool IsNormalized(const History& h) {
  return Validate(h).empty() && WritesEndBeforeTheirReads(h);
}

// The relative order of all endpoints, as (op, is_finish) pairs sorted by
// time. Two histories with equal signatures differ only by a monotone remap
// of the time axis.
inline std::vector<std::pair<OpIndex, bool>> EndpointOrder(const History& h) {
  std::vector<std::tuple<Time, OpIndex, bool>> e;
  e.reserve(2 * h.ops.size());
  for (OpIndex i = 0; i < h.ops.size(); ++i) {
    e.emplace_back(h.ops[i].start, i, false);
    e.emplace_back(h.ops[i].finish, i, true);
  }
  std::sort(e.begin(), e.end());
  std::vector<std::pair<OpIndex, bool>> out;
  out.reserve(e.size());
  for (const auto& [t, i, f] : e) out.emplace_back(i, f);
  return out;
}

// Write/read cross references for an anomaly-free history.
struct HistoryIndex {
  std::vector<OpIndex> writes;
  std::vector<OpIndex> reads;
  // For reads: index of the dictating write. Writes map to themselves.
  std::vector<OpIndex> dictating;
  // For writes: indices of dictated reads, in input order. Empty for reads.
  std::vector<std::vector<OpIndex>> dictated;

  explicit HistoryIndex(const History& h) {
    const auto n = h.ops.size();
    dictating.assign(n, 0);
    dictated.assign(n, {});
    std::unordered_map<std::string_view, OpIndex> writer;
    writer.reserve(n);
    for (OpIndex i = 0; i < n; ++i) {
      if (!h.ops[i].is_write()) continue;
      if (!writer.emplace(h.ops[i].value, i).second) {
        throw std::invalid_argument("duplicate write value '" + h.ops[i].value +
                                    "'");
      }
      writes.push_back(i);
      dictating[i] = i;
    }
    for (OpIndex i = 0; i < n; ++i) {
      if (!h.ops[i].is_read()) continue;
      auto it = writer.find(h.ops[i].value);
      if (it == writer.end()) {
        throw std::invalid_argument("read '" + h.ops[i].id +
                                    "' has no dictating write");
      }
      reads.push_back(i);
      dictating[i] = it->second;
      dictated[it->second].push_back(i);
    }
  }
};

// Maximum number of writes whose intervals share a common instant.
inline std::size_t MaxConcurrentWrites(const History& h) {
  std::vector<std::pair<Time, int>> events;
  for (const Operation& op : h.ops) {
    if (!op.is_write()) continue;
    events.emplace_back(op.start, +1);
    events.emplace_back(op.finish, -1);
  }
  // Closed intervals: at equal times, count arrivals before departures.
  std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first < b.first : a.second > b.second;
  });
  int live = 0;
  int best = 0;
  for (const auto& [t, delta] : events) {
    live += delta;
    best = std::max(best, live);
  }
  return static_cast<std::size_t>(best);
}

}  // namespace kav
