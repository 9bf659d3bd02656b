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

// 2-atomicity in O(n log n): forward zones first.
//
// Stage 1 merges overlapping forward zones into maximal chunks and attaches
// every backward zone that lies inside a chunk's interval; the remaining
// backward clusters dangle. Stage 2 decides each chunk on its own by testing
// at most four candidate write orders for viability: the forward writes by
// increasing zone low endpoint (T_F), the same with the first two swapped
// (T_F'), and at most one backward write prepended and one appended. A chunk
// with three or more backward clusters is never 2-atomic. The history is
// 2-atomic iff every chunk is.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <vector>

#include "kav/history.hpp"
#include "kav/verdict.hpp"
#include "kav/zones.hpp"

namespace kav {

struct Chunk {
  // Union of the member forward zones.
  Time low = 0;
  Time high = 0;
  // Writes of forward clusters, by increasing zone low endpoint.
  std::vector<OpIndex> forward_writes;
  // Writes of backward clusters, by increasing zone low endpoint.
  std::vector<OpIndex> backward_writes;
};

struct ChunkSet {
  std::vector<Chunk> chunks;
  // Writes of dangling (backward) clusters, by increasing zone low endpoint.
  std::vector<OpIndex> dangling;
  // Zone of every cluster, keyed by the cluster's write.
  std::vector<std::optional<Zone>> zone_of;
};

// Requires a normalized history.
inline ChunkSet ComputeChunkSet(const History& h, Stats* stats = nullptr) {
  ChunkSet cs;
  cs.zone_of.assign(h.ops.size(), std::nullopt);
  std::vector<Zone> forward;
  std::vector<Zone> backward;
  for (Zone& z : Zones(h)) {
    cs.zone_of[z.write] = z;
    (z.forward() ? forward : backward).push_back(std::move(z));
  }
  auto by_low = [stats](const Zone& a, const Zone& b) {
    if (stats) ++stats->steps;
    return a.low < b.low;
  };
  std::sort(forward.begin(), forward.end(), by_low);
  std::sort(backward.begin(), backward.end(), by_low);

  for (const Zone& z : forward) {
    if (stats) ++stats->steps;
    // Endpoints are distinct, so touching is impossible and overlap is strict.
    if (cs.chunks.empty() || z.low > cs.chunks.back().high) {
      cs.chunks.push_back(Chunk{z.low, z.high, {z.write}, {}});
    } else {
      Chunk& c = cs.chunks.back();
      c.high = std::max(c.high, z.high);
      c.forward_writes.push_back(z.write);
    }
  }

  for (const Zone& b : backward) {
    auto it = std::upper_bound(cs.chunks.begin(), cs.chunks.end(), b.low,
                               [stats](Time t, const Chunk& c) {
                                 if (stats) ++stats->steps;
                                 return t < c.low;
                               });
    if (it != cs.chunks.begin()) {
      Chunk& c = *std::prev(it);
      if (c.low <= b.low && b.high <= c.high) {
        c.backward_writes.push_back(b.write);
        continue;
      }
    }
    cs.dangling.push_back(b.write);
  }
  return cs;
}

// Candidate write orders for a chunk, duplicates removed, generation order
// kept. Empty when the chunk has three or more backward clusters.
inline std::vector<std::vector<OpIndex>> CandidateOrders(const Chunk& chunk) {
  std::vector<OpIndex> tf = chunk.forward_writes;
  std::vector<OpIndex> tf_swapped = tf;
  if (tf_swapped.size() >= 2) std::swap(tf_swapped[0], tf_swapped[1]);

  auto wrap = [](std::optional<OpIndex> front, const std::vector<OpIndex>& mid,
                 std::optional<OpIndex> back) {
    std::vector<OpIndex> out;
    out.reserve(mid.size() + 2);
    if (front) out.push_back(*front);
    out.insert(out.end(), mid.begin(), mid.end());
    if (back) out.push_back(*back);
    return out;
  };

  std::vector<std::vector<OpIndex>> orders;
  const auto& bw = chunk.backward_writes;
  switch (bw.size()) {
    case 0:
      orders = {tf, tf_swapped};
      break;
    case 1:
      orders = {wrap(bw[0], tf, std::nullopt), wrap(std::nullopt, tf, bw[0]),
                wrap(bw[0], tf_swapped, std::nullopt),
                wrap(std::nullopt, tf_swapped, bw[0])};
      break;
    case 2:
      orders = {wrap(bw[0], tf, bw[1]), wrap(bw[1], tf, bw[0]),
                wrap(bw[0], tf_swapped, bw[1]), wrap(bw[1], tf_swapped, bw[0])};
      break;
    default:
      return {};
  }
  std::vector<std::vector<OpIndex>> unique;
  for (auto& o : orders) {
    if (std::find(unique.begin(), unique.end(), o) == unique.end()) {
      unique.push_back(std::move(o));
    }
  }
  return unique;
}

namespace fzf_internal {

// Decides whether `order` (covering exactly the writes among `sub`) extends
// to a valid 2-atomic total order over `sub`. Writes are processed from the
// back; each one claims the remaining operations that start after it
// finishes, which must be reads dictated by it or by its predecessor in
// `order`, plus its own remaining reads. `removed` is scratch space indexed
// by operation and is left cleared.
inline bool CheckViable(const History& h, const HistoryIndex& index,
                        std::span<const OpIndex> sub, std::span<const OpIndex> order,
                        std::vector<char>& removed, std::vector<WitnessEntry>* entries,
                        Stats* stats) {
  const auto& ops = h.ops;
  auto step = [stats] {
    if (stats) ++stats->steps;
  };

  // The order must not contradict the precedes relation among writes.
  Time max_start = std::numeric_limits<Time>::min();
  for (OpIndex w : order) {
    step();
    if (!(max_start < ops[w].finish)) return false;
    max_start = std::max(max_start, ops[w].start);
  }

  std::vector<OpIndex> sorted(sub.begin(), sub.end());
  std::sort(sorted.begin(), sorted.end(), [&](OpIndex a, OpIndex b) {
    step();
    return ops[a].start < ops[b].start;
  });

  std::vector<OpIndex> touched;
  touched.reserve(sorted.size());
  auto take = [&](OpIndex x) {
    removed[x] = 1;
    touched.push_back(x);
    step();
  };
  auto cleanup = [&] {
    for (OpIndex x : touched) removed[x] = 0;
  };

  std::vector<WitnessEntry> local;
  std::ptrdiff_t ptr = static_cast<std::ptrdiff_t>(sorted.size()) - 1;
  for (std::ptrdiff_t j = static_cast<std::ptrdiff_t>(order.size()) - 1; j >= 0; --j) {
    const OpIndex w = order[j];
    const std::optional<OpIndex> pred =
        j > 0 ? std::optional<OpIndex>(order[j - 1]) : std::nullopt;
    std::vector<OpIndex> container;
    for (; ptr >= 0; --ptr) {
      step();
      const OpIndex x = sorted[ptr];
      if (removed[x]) continue;
      if (ops[x].start <= ops[w].finish) break;
      const OpIndex d = index.dictating[x];
      if (ops[x].is_write() || (d != w && d != pred)) {
        cleanup();
        return false;
      }
      take(x);
      container.push_back(x);
    }
    for (OpIndex r : index.dictated[w]) {
      step();
      if (!removed[r]) {
        take(r);
        container.push_back(r);
      }
    }
    take(w);
    if (entries) {
      std::sort(container.begin(), container.end(), [&](OpIndex a, OpIndex b) {
        return ops[a].start < ops[b].start;
      });
      local.push_back(WitnessEntry::Container(std::move(container)));
      local.push_back(WitnessEntry::Slot(w));
    }
  }
  const bool all_consumed = touched.size() == sub.size();
  cleanup();
  if (!all_consumed) return false;
  if (entries) entries->insert(entries->end(), local.rbegin(), local.rend());
  return true;
}

inline std::vector<OpIndex> ClusterOps(const HistoryIndex& index,
                                       std::span<const OpIndex> writes) {
  std::vector<OpIndex> out;
  for (OpIndex w : writes) {
    out.push_back(w);
    out.insert(out.end(), index.dictated[w].begin(), index.dictated[w].end());
  }
  return out;
}

}  // namespace fzf_internal

// Requires a normalized history `sub` (typically the projection of a history
// onto one chunk) and an order covering exactly its writes. On success and
// when `witness` is given, stores a valid 2-atomic order over `sub`.
inline bool IsViable(const History& sub, const std::vector<OpIndex>& order,
                     WitnessOrder* witness = nullptr, Stats* stats = nullptr) {
  HistoryIndex index(sub);
  std::vector<OpIndex> sorted_order = order;
  std::sort(sorted_order.begin(), sorted_order.end());
  if (sorted_order != index.writes ||
      std::adjacent_find(sorted_order.begin(), sorted_order.end()) != sorted_order.end()) {
    return false;
  }
  std::vector<OpIndex> all(sub.ops.size());
  for (OpIndex i = 0; i < all.size(); ++i) all[i] = i;
  std::vector<char> removed(sub.ops.size(), 0);
  std::vector<WitnessEntry> entries;
  const bool ok = fzf_internal::CheckViable(sub, index, all, order, removed,
                                            witness ? &entries : nullptr, stats);
  if (ok && witness) witness->entries = std::move(entries);
  return ok;
}

// The sub-history of `h` made of the clusters of the given writes. Returns
// the indices in `h` of the projected operations through `origin`.
inline History Project(const History& h, std::span<const OpIndex> writes,
                       std::vector<OpIndex>* origin = nullptr) {
  HistoryIndex index(h);
  History out;
  out.key = h.key;
  std::vector<OpIndex> ops = fzf_internal::ClusterOps(index, writes);
  std::sort(ops.begin(), ops.end());
  for (OpIndex i : ops) out.ops.push_back(h.ops[i]);
  if (origin) *origin = std::move(ops);
  return out;
}

// Per-chunk record of a run, for diagnostics.
struct ChunkReport {
  Chunk chunk;
  std::vector<std::vector<OpIndex>> orders;
  std::vector<bool> viable;
};

// Requires a normalized history. On NO the certificate lists the writes of
// the failing chunk. On YES the witness concatenates per-chunk witnesses and
// dangling clusters by increasing interval low endpoint.
inline Verdict Check2AtomicFzf(const History& h,
                               std::vector<ChunkReport>* explain = nullptr) {
  Verdict v;
  const HistoryIndex index(h);
  const ChunkSet cs = ComputeChunkSet(h, &v.stats);
  std::vector<char> removed(h.ops.size(), 0);

  struct Piece {
    Time low;
    std::vector<WitnessEntry> entries;
  };
  std::vector<Piece> pieces;

  for (const Chunk& chunk : cs.chunks) {
    std::vector<OpIndex> writes = chunk.forward_writes;
    writes.insert(writes.end(), chunk.backward_writes.begin(),
                  chunk.backward_writes.end());
    const auto orders = CandidateOrders(chunk);
    ChunkReport report{chunk, {}, {}};
    if (orders.empty()) {
      if (explain) explain->push_back(std::move(report));
      v.answer = Answer::kNo;
      v.certificate = Certificate{Certificate::Kind::kTooManyBackwardClusters, writes};
      return v;
    }
    const std::vector<OpIndex> sub = fzf_internal::ClusterOps(index, writes);
    std::vector<WitnessEntry> entries;
    bool found = false;
    for (const auto& order : orders) {
      found = fzf_internal::CheckViable(h, index, sub, order, removed, &entries,
                                        &v.stats);
      report.orders.push_back(order);
      report.viable.push_back(found);
      if (found) break;
    }
    if (explain) explain->push_back(std::move(report));
    if (!found) {
      v.answer = Answer::kNo;
      v.certificate = Certificate{Certificate::Kind::kChunkNotViable, writes};
      return v;
    }
    pieces.push_back({chunk.low, std::move(entries)});
  }

  for (OpIndex w : cs.dangling) {
    std::vector<OpIndex> reads = index.dictated[w];
    std::sort(reads.begin(), reads.end(), [&](OpIndex a, OpIndex b) {
      return h.ops[a].start < h.ops[b].start;
    });
    pieces.push_back({cs.zone_of[w]->low,
                      {WitnessEntry::Slot(w), WitnessEntry::Container(std::move(reads))}});
  }
  std::sort(pieces.begin(), pieces.end(), [&v](const Piece& a, const Piece& b) {
    ++v.stats.steps;
    return a.low < b.low;
  });

  v.answer = Answer::kYes;
  WitnessOrder witness;
  for (auto& p : pieces) {
    witness.entries.insert(witness.entries.end(), p.entries.begin(), p.entries.end());
  }
  v.witness = std::move(witness);
  return v;
}

}  // namespace kav
