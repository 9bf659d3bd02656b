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

// Ground truth for small histories: exhaustive search over valid total
// orders, an independent witness checker, and the smallest k.

#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kav/fzf.hpp"
#include "kav/history.hpp"
#include "kav/verdict.hpp"
#include "kav/zones.hpp"

namespace kav {

inline constexpr std::size_t kDefaultBruteCap = 12;

struct BruteForceOptions {
  std::size_t cap = kDefaultBruteCap;
  // When set, minimal operations are tried in a seeded random order instead
  // of index order.
  std::optional<std::uint64_t> shuffle_seed;
  // When set, writes may only be placed in exactly this order.
  std::optional<std::vector<OpIndex>> write_order;
};

namespace oracle_internal {

// Depth-first search that only ever appends an operation all of whose
// predecessors are already placed, so every complete sequence is a valid
// total order. A write may not be placed while some placed write with
// unplaced reads already has k-1 writes after it; a read may not be placed
// before its dictating write. Failed states are memoized on the placed set
// plus the last k placed writes, which is all that constrains the future.
class Search {
 public:
  Search(const History& h, std::size_t k, const BruteForceOptions& opts)
      : h_(h), k_(k), n_(h.ops.size()) {
    if (n_ > opts.cap || n_ > 63) throw CapExceeded(n_, std::min<std::size_t>(opts.cap, 63));
    if (opts.shuffle_seed) rng_.emplace(*opts.shuffle_seed);
    if (opts.write_order) write_order_ = *opts.write_order;

    std::unordered_map<std::string, OpIndex> writer;
    for (OpIndex i = 0; i < n_; ++i) {
      if (h.ops[i].is_write()) writer.emplace(h.ops[i].value, i);
    }
    preds_.assign(n_, 0);
    dictating_.assign(n_, 0);
    reads_of_.assign(n_, 0);
    for (OpIndex i = 0; i < n_; ++i) {
      for (OpIndex j = 0; j < n_; ++j) {
        if (i != j && Precedes(h.ops[j], h.ops[i])) preds_[i] |= Bit(j);
      }
      if (h.ops[i].is_read()) {
        auto it = writer.find(h.ops[i].value);
        if (it == writer.end()) {
          throw std::invalid_argument("read '" + h.ops[i].id +
                                      "' has no dictating write");
        }
        dictating_[i] = it->second;
        reads_of_[it->second] |= Bit(i);
      }
    }
  }

  Verdict Run() {
    Verdict v;
    const bool found = Dfs(0);
    v.stats.nodes = nodes_;
    v.stats.steps = nodes_;
    if (!found) {
      v.answer = Answer::kNo;
      v.certificate = Certificate{Certificate::Kind::kExhaustiveSearch, {}};
      return v;
    }
    v.answer = Answer::kYes;
    WitnessOrder w;
    for (OpIndex x : sequence_) {
      if (h_.ops[x].is_write()) {
        w.entries.push_back(WitnessEntry::Slot(x));
      } else if (!w.entries.empty() &&
                 w.entries.back().kind == WitnessEntry::Kind::kContainer) {
        w.entries.back().ops.push_back(x);
      } else {
        w.entries.push_back(WitnessEntry::Container({x}));
      }
    }
    v.witness = std::move(w);
    return v;
  }

 private:
  static std::uint64_t Bit(OpIndex i) { return std::uint64_t{1} << i; }

  bool Pending(OpIndex w, std::uint64_t placed) const {
    return (reads_of_[w] & ~placed) != 0;
  }

  bool CanPlaceWrite(std::uint64_t placed) const {
    // Placing one more write adds one to every placed write's count.
    const std::size_t m = writes_.size();
    for (std::size_t p = 0; p < m; ++p) {
      const std::size_t after = m - 1 - p;
      if (after + 1 > k_ - 1 && Pending(writes_[p], placed)) return false;
    }
    return true;
  }

  std::string Key(std::uint64_t placed) const {
    std::string key(reinterpret_cast<const char*>(&placed), sizeof(placed));
    const std::size_t m = writes_.size();
    const std::size_t from = m > k_ ? m - k_ : 0;
    for (std::size_t p = from; p < m; ++p) key.push_back(static_cast<char>(writes_[p]));
    return key;
  }

  bool Dfs(std::uint64_t placed) {
    ++nodes_;
    if (sequence_.size() == n_) return true;
    std::string key = Key(placed);
    if (failed_.contains(key)) return false;

    std::vector<OpIndex> choices;
    for (OpIndex i = 0; i < n_; ++i) {
      if (placed & Bit(i)) continue;
      if ((placed & preds_[i]) != preds_[i]) continue;
      if (h_.ops[i].is_read()) {
        if (!(placed & Bit(dictating_[i]))) continue;
      } else {
        if (write_order_ && (writes_.size() >= write_order_->size() ||
                             (*write_order_)[writes_.size()] != i)) {
          continue;
        }
        if (!CanPlaceWrite(placed)) continue;
      }
      choices.push_back(i);
    }
    if (rng_) std::shuffle(choices.begin(), choices.end(), *rng_);

    for (OpIndex i : choices) {
      const bool is_write = h_.ops[i].is_write();
      sequence_.push_back(i);
      if (is_write) writes_.push_back(i);
      const bool ok = Dfs(placed | Bit(i));
      if (ok) return true;
      sequence_.pop_back();
      if (is_write) writes_.pop_back();
    }
    failed_.insert(std::move(key));
    return false;
  }

  const History& h_;
  std::size_t k_;
  std::size_t n_;
  std::optional<std::mt19937_64> rng_;
  std::optional<std::vector<OpIndex>> write_order_;
  std::vector<std::uint64_t> preds_;
  std::vector<OpIndex> dictating_;
  std::vector<std::uint64_t> reads_of_;
  std::vector<OpIndex> sequence_;
  std::vector<OpIndex> writes_;
  std::unordered_set<std::string> failed_;
  std::uint64_t nodes_ = 0;
};

}  // namespace oracle_internal

// Exhaustive k-atomicity decision. Accepts any anomaly-free history, not
// only normalized ones. Throws CapExceeded above `opts.cap` operations.
inline Verdict BruteForceKAtomic(const History& h, std::size_t k,
                                 const BruteForceOptions& opts = {}) {
  if (k == 0) throw std::invalid_argument("k must be positive");
  return oracle_internal::Search(h, k, opts).Run();
}

// Independent check of a witness: it must cover every operation exactly
// once, slots must hold one write and containers only reads, the flattened
// order must respect precedes, and every read must follow its dictating
// write with at most k-1 writes in between.
inline bool CheckWitness(const History& h, const WitnessOrder& witness, std::size_t k) {
  const auto n = h.ops.size();
  std::vector<OpIndex> order;
  for (const WitnessEntry& e : witness.entries) {
    if (e.kind == WitnessEntry::Kind::kSlot) {
      if (e.ops.size() != 1 || e.ops[0] >= n || !h.ops[e.ops[0]].is_write()) return false;
    } else {
      for (OpIndex x : e.ops) {
        if (x >= n || !h.ops[x].is_read()) return false;
      }
    }
    order.insert(order.end(), e.ops.begin(), e.ops.end());
  }
  if (order.size() != n) return false;
  std::vector<bool> seen(n, false);
  for (OpIndex x : order) {
    if (seen[x]) return false;
    seen[x] = true;
  }

  // No later operation may finish before an earlier one starts.
  Time max_start = std::numeric_limits<Time>::min();
  for (OpIndex x : order) {
    if (h.ops[x].finish < max_start) return false;
    max_start = std::max(max_start, h.ops[x].start);
  }

  // Position of each write in the sequence of writes seen so far.
  std::unordered_map<std::string, std::size_t> write_rank;
  std::size_t writes_seen = 0;
  for (OpIndex x : order) {
    const Operation& op = h.ops[x];
    if (op.is_write()) {
      write_rank[op.value] = writes_seen++;
      continue;
    }
    auto it = write_rank.find(op.value);
    if (it == write_rank.end()) return false;
    const std::size_t between = writes_seen - 1 - it->second;
    if (between + 1 > k) return false;
  }
  return true;
}

struct MinKResult {
  // Unset when the history is too large for the exhaustive search.
  std::optional<std::size_t> k;
  std::size_t lower_bound = 1;
};

// Requires a normalized history. Uses the exact 1- and 2-atomicity
// checkers, then scans k upward with the exhaustive search when the history
// has at most `cap` operations.
inline MinKResult MinK(const History& h, std::size_t cap = kDefaultBruteCap) {
  if (Check1Atomic(h).yes()) return {1, 1};
  if (Check2AtomicFzf(h).yes()) return {2, 2};
  if (h.ops.size() > cap) return {std::nullopt, 3};
  std::size_t writes = 0;
  for (const Operation& op : h.ops) writes += op.is_write() ? 1 : 0;
  BruteForceOptions opts;
  opts.cap = cap;
  // Some valid order puts every read after its dictating write, and no read
  // can then be separated by more than writes-1 writes, so k = writes is
  // always enough.
  for (std::size_t k = 3; k <= writes; ++k) {
    if (BruteForceKAtomic(h, k, opts).yes()) return {k, k};
  }
  return {std::nullopt, writes + 1};
}

}  // namespace kav
