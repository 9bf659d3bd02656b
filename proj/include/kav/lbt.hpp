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

// 2-atomicity by limited backtracking.
//
// The checker builds a witness from back to front as an alternating sequence
// of write slots and read containers. It runs in epochs: an epoch starts by
// tentatively placing a candidate write (one that precedes no other
// remaining write) in the latest free slot. Every remaining operation that
// starts after that write finishes must go into the container behind it;
// those reads may be dictated by at most one other write, which is then
// forced into the next slot, and so on until a container forces nothing.
// Only the first write of an epoch is a choice, so backtracking is limited
// to epoch starts. Candidates are raced by iterative deepening, doubling the
// removal budget each round, and a failed attempt is undone from a log.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "kav/history.hpp"
#include "kav/verdict.hpp"

namespace kav {

namespace lbt_internal {

// Doubly linked lists over node ids [0, nodes) with one sentinel per list at
// id nodes + list. Removal leaves the removed node's own links intact, so
// nodes restored in reverse removal order put every list back exactly.
class LinkArena {
 public:
  LinkArena(std::size_t nodes, std::size_t lists)
      : nodes_(nodes), prev_(nodes + lists), next_(nodes + lists) {
    for (std::size_t l = 0; l < lists; ++l) {
      const std::size_t s = nodes + l;
      prev_[s] = next_[s] = s;
    }
  }

  void Build(std::size_t list, const std::vector<std::size_t>& sequence) {
    std::size_t tail = Sentinel(list);
    for (std::size_t x : sequence) {
      next_[tail] = x;
      prev_[x] = tail;
      tail = x;
    }
    next_[tail] = Sentinel(list);
    prev_[Sentinel(list)] = tail;
  }

  std::size_t Sentinel(std::size_t list) const { return nodes_ + list; }
  std::size_t First(std::size_t list) const { return next_[Sentinel(list)]; }
  std::size_t Last(std::size_t list) const { return prev_[Sentinel(list)]; }
  std::size_t Next(std::size_t x) const { return next_[x]; }
  std::size_t Prev(std::size_t x) const { return prev_[x]; }
  bool IsSentinel(std::size_t x) const { return x >= nodes_; }

  void Remove(std::size_t x) {
    next_[prev_[x]] = next_[x];
    prev_[next_[x]] = prev_[x];
  }

  void Restore(std::size_t x) {
    next_[prev_[x]] = x;
    prev_[next_[x]] = x;
  }

 private:
  std::size_t nodes_;
  std::vector<std::size_t> prev_;
  std::vector<std::size_t> next_;
};

}  // namespace lbt_internal

// The mutable remaining history H and remaining writes W, with an undo log.
// H is kept sorted by start time, W both by finish and by start time, and
// each write keeps a list of its remaining dictated reads.
class EpochState {
 public:
  // Requires a normalized history.
  explicit EpochState(const History& h)
      : h_(h),
        index_(h),
        ops_(h.ops.size(), 1),
        writes_by_finish_(h.ops.size(), 1),
        writes_by_start_(h.ops.size(), 1),
        reads_of_(h.ops.size(), h.ops.size()) {
    const std::size_t n = h.ops.size();
    std::vector<OpIndex> all(n);
    for (OpIndex i = 0; i < n; ++i) all[i] = i;
    auto by_start = [&](OpIndex a, OpIndex b) {
      return h.ops[a].start < h.ops[b].start;
    };
    auto by_finish = [&](OpIndex a, OpIndex b) {
      return h.ops[a].finish < h.ops[b].finish;
    };
    std::sort(all.begin(), all.end(), by_start);
    ops_.Build(0, all);
    std::vector<OpIndex> writes = index_.writes;
    std::sort(writes.begin(), writes.end(), by_finish);
    writes_by_finish_.Build(0, writes);
    std::sort(writes.begin(), writes.end(), by_start);
    writes_by_start_.Build(0, writes);
    for (OpIndex w : index_.writes) reads_of_.Build(w, index_.dictated[w]);
    remaining_ = n;
  }

  const History& history() const { return h_; }
  const HistoryIndex& index() const { return index_; }
  bool empty() const { return remaining_ == 0; }
  std::size_t remaining() const { return remaining_; }

  // Undo log position; pass to Revert() to roll back to it.
  std::size_t mark() const { return log_.size(); }

  void Revert(std::size_t mark, Stats* stats = nullptr) {
    while (log_.size() > mark) {
      const auto [list, x] = log_.back();
      log_.pop_back();
      Arena(list).Restore(x);
      if (list == kOps) ++remaining_;
      if (stats) {
        ++stats->undo_replays;
        ++stats->steps;
      }
    }
  }

  // Remaining operations in start order.
  std::vector<OpIndex> RemainingOps() const {
    std::vector<OpIndex> out;
    for (auto x = ops_.First(0); !ops_.IsSentinel(x); x = ops_.Next(x)) out.push_back(x);
    return out;
  }

  // Remaining writes in finish order.
  std::vector<OpIndex> RemainingWrites() const {
    std::vector<OpIndex> out;
    for (auto x = writes_by_finish_.First(0); !writes_by_finish_.IsSentinel(x);
         x = writes_by_finish_.Next(x)) {
      out.push_back(x);
    }
    return out;
  }

 private:
  friend std::vector<OpIndex> CandidateFrontier(const EpochState&, Stats*);
  friend class EpochRunner;

  enum ListId : int { kOps, kWritesByFinish, kWritesByStart, kReadsOf };

  lbt_internal::LinkArena& Arena(int list) {
    switch (list) {
      case kOps:
        return ops_;
      case kWritesByFinish:
        return writes_by_finish_;
      case kWritesByStart:
        return writes_by_start_;
      default:
        return reads_of_;
    }
  }

  void RemoveOp(OpIndex x) {
    ops_.Remove(x);
    log_.emplace_back(kOps, x);
    --remaining_;
    if (h_.ops[x].is_read()) {
      reads_of_.Remove(x);
      log_.emplace_back(kReadsOf, x);
    } else {
      writes_by_finish_.Remove(x);
      log_.emplace_back(kWritesByFinish, x);
      writes_by_start_.Remove(x);
      log_.emplace_back(kWritesByStart, x);
    }
  }

  const History& h_;
  HistoryIndex index_;
  lbt_internal::LinkArena ops_;
  lbt_internal::LinkArena writes_by_finish_;
  lbt_internal::LinkArena writes_by_start_;
  lbt_internal::LinkArena reads_of_;
  std::vector<std::pair<int, OpIndex>> log_;
  std::size_t remaining_ = 0;
};

// Remaining writes that precede no other remaining write, latest finish
// first. They form a suffix of W in finish order.
inline std::vector<OpIndex> CandidateFrontier(const EpochState& st,
                                              Stats* stats = nullptr) {
  const auto& ops = st.h_.ops;
  const auto& by_start = st.writes_by_start_;
  const auto& by_finish = st.writes_by_finish_;
  std::vector<OpIndex> out;
  const auto latest_start = by_start.Last(0);
  for (auto w = by_finish.Last(0); !by_finish.IsSentinel(w); w = by_finish.Prev(w)) {
    if (stats) ++stats->steps;
    auto other = latest_start == w ? by_start.Prev(w) : latest_start;
    if (!by_start.IsSentinel(other) && !(ops[other].start < ops[w].finish)) break;
    out.push_back(w);
  }
  return out;
}

enum class EpochOutcome { kSuccess, kFailure, kBudgetExhausted };

class EpochRunner {
 public:
  // Runs one epoch starting at `w`, removing at most `budget` operations.
  // On success, appends the epoch's containers and slots to `entries` in
  // back-to-front order. Does not revert on failure.
  static EpochOutcome Run(EpochState& st, OpIndex w, std::uint64_t budget,
                          std::vector<WitnessEntry>* entries, Stats* stats) {
    const auto& ops = st.h_.ops;
    const auto& dictating = st.index_.dictating;
    constexpr OpIndex kNone = std::numeric_limits<OpIndex>::max();
    std::uint64_t removed = 0;
    std::vector<WitnessEntry> local;
    auto take = [&](OpIndex x) {
      st.RemoveOp(x);
      ++removed;
      if (stats) {
        ++stats->removals;
        ++stats->steps;
      }
    };

    while (true) {
      OpIndex next = kNone;
      std::vector<OpIndex> container;
      // Operations starting after w finishes form a suffix of H.
      for (auto x = st.ops_.Last(0);
           !st.ops_.IsSentinel(x) && ops[x].start > ops[w].finish;) {
        const auto before = st.ops_.Prev(x);
        if (ops[x].is_write()) return EpochOutcome::kFailure;
        const OpIndex d = dictating[x];
        if (d != w && d != next) {
          if (next != kNone) return EpochOutcome::kFailure;
          next = d;
        }
        take(x);
        container.push_back(x);
        if (removed > budget) return EpochOutcome::kBudgetExhausted;
        x = before;
      }
      for (auto r = st.reads_of_.First(w); !st.reads_of_.IsSentinel(r);) {
        const auto after = st.reads_of_.Next(r);
        take(r);
        container.push_back(r);
        r = after;
      }
      take(w);
      if (removed > budget) return EpochOutcome::kBudgetExhausted;

      std::sort(container.begin(), container.end(), [&](OpIndex a, OpIndex b) {
        return ops[a].start < ops[b].start;
      });
      local.push_back(WitnessEntry::Container(std::move(container)));
      local.push_back(WitnessEntry::Slot(w));
      if (next == kNone) break;
      w = next;
    }
    if (entries) entries->insert(entries->end(), local.begin(), local.end());
    return EpochOutcome::kSuccess;
  }
};

// Unbounded epoch. Returns whether it succeeded; the caller reverts on false.
inline bool RunEpoch(EpochState& st, OpIndex w,
                     std::vector<WitnessEntry>* entries = nullptr,
                     Stats* stats = nullptr) {
  return EpochRunner::Run(st, w, std::numeric_limits<std::uint64_t>::max(),
                          entries, stats) == EpochOutcome::kSuccess;
}

// Requires a normalized history. YES comes with a witness; NO names the
// candidates of the epoch that could not be started.
inline Verdict Check2AtomicLbt(const History& h) {
  Verdict v;
  EpochState st(h);
  std::vector<WitnessEntry> back_to_front;
  v.stats.steps += h.ops.size();

  while (!st.empty()) {
    std::vector<OpIndex> alive = CandidateFrontier(st, &v.stats);
    const std::vector<OpIndex> candidates = alive;
    bool success = false;
    for (std::uint64_t budget = 1; !alive.empty() && !success; budget *= 2) {
      const bool unbounded = alive.size() == 1 || budget >= st.remaining();
      std::vector<OpIndex> survivors;
      // Latest finish first, so the first success in a round is the latest
      // successful candidate of that round.
      for (OpIndex w : alive) {
        const std::size_t mark = st.mark();
        const auto outcome = EpochRunner::Run(
            st, w, unbounded ? std::numeric_limits<std::uint64_t>::max() : budget,
            &back_to_front, &v.stats);
        if (outcome == EpochOutcome::kSuccess) {
          success = true;
          break;
        }
        st.Revert(mark, &v.stats);
        if (outcome == EpochOutcome::kBudgetExhausted) survivors.push_back(w);
      }
      alive = std::move(survivors);
    }
    if (!success) {
      v.answer = Answer::kNo;
      v.certificate =
          Certificate{Certificate::Kind::kEpochCandidatesExhausted, candidates};
      return v;
    }
  }
  v.answer = Answer::kYes;
  WitnessOrder witness;
  witness.entries.assign(back_to_front.rbegin(), back_to_front.rend());
  v.witness = std::move(witness);
  return v;
}

}  // namespace kav
