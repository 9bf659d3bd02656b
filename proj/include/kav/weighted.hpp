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

// Weighted k-atomicity: every write carries a positive weight, and the
// dictating write of each read plus all writes between them may weigh at
// most k in total. Unit weights give plain k-atomicity. The weighted problem
// is NP-complete (by reduction from bin packing), so only an exhaustive
// decision procedure is provided, together with the reduction itself as an
// instance generator.

#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "kav/history.hpp"
#include "kav/oracle.hpp"
#include "kav/verdict.hpp"

namespace kav {

struct WeightedHistory {
  History base;
  // Keyed by write value. Writes without an entry weigh 1.
  std::map<std::string, std::int64_t> weight;

  std::int64_t WeightOf(const Operation& write) const {
    auto it = weight.find(write.value);
    return it == weight.end() ? 1 : it->second;
  }
};

struct BinPackingInstance {
  std::vector<std::int64_t> sizes;
  std::int64_t bins = 1;
  std::int64_t capacity = 1;
};

inline void ValidateInstance(const BinPackingInstance& inst) {
  if (inst.bins < 1) throw std::invalid_argument("bin count must be at least 1");
  if (inst.capacity < 1) throw std::invalid_argument("capacity must be at least 1");
  for (std::int64_t s : inst.sizes) {
    if (s < 1) throw std::invalid_argument("item sizes must be at least 1");
  }
}

namespace weighted_internal {

class Search {
 public:
  Search(const WeightedHistory& wh, std::int64_t k, std::size_t cap)
      : h_(wh.base), k_(k), n_(wh.base.ops.size()) {
    if (n_ > cap || n_ > 63) throw CapExceeded(n_, std::min<std::size_t>(cap, 63));
    weight_.assign(n_, 0);
    preds_.assign(n_, 0);
    dictating_.assign(n_, 0);
    reads_of_.assign(n_, 0);
    std::unordered_map<std::string, OpIndex> writer;
    for (OpIndex i = 0; i < n_; ++i) {
      if (!h_.ops[i].is_write()) continue;
      writer.emplace(h_.ops[i].value, i);
      weight_[i] = wh.WeightOf(h_.ops[i]);
      if (weight_[i] < 1) throw std::invalid_argument("write weights must be positive");
    }
    for (OpIndex i = 0; i < n_; ++i) {
      for (OpIndex j = 0; j < n_; ++j) {
        if (i != j && h_.ops[j].finish < h_.ops[i].start) preds_[i] |= std::uint64_t{1} << j;
      }
      if (h_.ops[i].is_read()) {
        auto it = writer.find(h_.ops[i].value);
        if (it == writer.end()) {
          throw std::invalid_argument("read '" + h_.ops[i].id + "' has no dictating write");
        }
        dictating_[i] = it->second;
        reads_of_[it->second] |= std::uint64_t{1} << i;
      }
    }
  }

  Verdict Run() {
    Verdict v;
    const bool found = Dfs(0);
    v.stats.nodes = v.stats.steps = nodes_;
    v.answer = found ? Answer::kYes : Answer::kNo;
    if (!found) {
      v.certificate = Certificate{Certificate::Kind::kExhaustiveSearch, {}};
      return v;
    }
    WitnessOrder w;
    for (OpIndex x : sequence_) {
      if (h_.ops[x].is_write()) {
        w.entries.push_back(WitnessEntry::Slot(x));
      } else if (!w.entries.empty() && w.entries.back().kind == WitnessEntry::Kind::kContainer) {
        w.entries.back().ops.push_back(x);
      } else {
        w.entries.push_back(WitnessEntry::Container({x}));
      }
    }
    v.witness = std::move(w);
    return v;
  }

 private:
  // Placing `x` puts it between every placed write and that write's
  // still-unplaced reads.
  bool CanPlaceWrite(OpIndex x, std::uint64_t placed) const {
    std::int64_t suffix = weight_[x];
    for (auto it = writes_.rbegin(); it != writes_.rend(); ++it) {
      suffix += weight_[*it];
      if (suffix > k_ && (reads_of_[*it] & ~placed) != 0) return false;
    }
    return true;
  }

  std::string Key(std::uint64_t placed) const {
    std::string key(reinterpret_cast<const char*>(&placed), sizeof(placed));
    std::int64_t suffix = 0;
    for (auto it = writes_.rbegin(); it != writes_.rend(); ++it) {
      suffix += weight_[*it];
      if (suffix > k_) break;
      key.push_back(static_cast<char>(*it));
    }
    return key;
  }

  bool Dfs(std::uint64_t placed) {
    ++nodes_;
    if (sequence_.size() == n_) return true;
    std::string key = Key(placed);
    if (failed_.contains(key)) return false;
    for (OpIndex i = 0; i < n_; ++i) {
      const std::uint64_t bit = std::uint64_t{1} << i;
      if ((placed & bit) || (placed & preds_[i]) != preds_[i]) continue;
      const bool is_write = h_.ops[i].is_write();
      if (is_write) {
        if (weight_[i] > k_ && reads_of_[i] != 0) continue;
        if (!CanPlaceWrite(i, placed)) continue;
      } else if (!(placed & (std::uint64_t{1} << dictating_[i]))) {
        continue;
      }
      sequence_.push_back(i);
      if (is_write) writes_.push_back(i);
      if (Dfs(placed | bit)) return true;
      sequence_.pop_back();
      if (is_write) writes_.pop_back();
    }
    failed_.insert(std::move(key));
    return false;
  }

  const History& h_;
  std::int64_t k_;
  std::size_t n_;
  std::vector<std::int64_t> weight_;
  std::vector<std::uint64_t> preds_;
  std::vector<OpIndex> dictating_;
  std::vector<std::uint64_t> reads_of_;
  std::vector<OpIndex> sequence_;
  std::vector<OpIndex> writes_;
  std::unordered_set<std::string> failed_;
  std::uint64_t nodes_ = 0;
};

}  // namespace weighted_internal

// Exhaustive weighted decision over valid total orders. Throws CapExceeded
// above `cap` operations.
inline Verdict BruteForceWeighted(const WeightedHistory& wh, std::int64_t k,
                                  std::size_t cap = kDefaultBruteCap) {
  if (k < 1) throw std::invalid_argument("k must be positive");
  return weighted_internal::Search(wh, k, cap).Run();
}

// Witness check under weights: coverage, precedes, and for every read the
// weight of its dictating write plus the writes in between is at most k.
inline bool CheckWeightedWitness(const WeightedHistory& wh, const WitnessOrder& witness,
                                 std::int64_t k) {
  const History& h = wh.base;
  // Weighted acceptance implies unit acceptance with the same order for
  // every k at least as large as the number of writes; reuse the structural
  // checks with an unbounded k.
  if (!CheckWitness(h, witness, h.ops.size() + 1)) return false;
  std::unordered_map<std::string, std::int64_t> weight_before;  // prefix sum
  std::int64_t total = 0;
  for (OpIndex x : witness.Flatten()) {
    const Operation& op = h.ops[x];
    if (op.is_write()) {
      weight_before[op.value] = total;
      total += wh.WeightOf(op);
      continue;
    }
    if (total - weight_before.at(op.value) > k) return false;
  }
  return true;
}

// Exhaustive bin packing: assigns items largest first, never trying two
// bins with equal load for the same item. Throws CapExceeded above 10 items.
inline bool BruteForceBinPacking(const BinPackingInstance& inst) {
  ValidateInstance(inst);
  constexpr std::size_t kMaxItems = 10;
  if (inst.sizes.size() > kMaxItems) throw CapExceeded(inst.sizes.size(), kMaxItems);
  std::vector<std::int64_t> items = inst.sizes;
  std::sort(items.rbegin(), items.rend());
  const std::size_t bins = static_cast<std::size_t>(
      std::min<std::int64_t>(inst.bins, static_cast<std::int64_t>(items.size()) + 1));
  std::vector<std::int64_t> load(bins, 0);

  std::function<bool(std::size_t)> place = [&](std::size_t i) {
    if (i == items.size()) return true;
    std::vector<std::int64_t> tried;
    for (std::size_t b = 0; b < bins; ++b) {
      if (load[b] + items[i] > inst.capacity) continue;
      if (std::find(tried.begin(), tried.end(), load[b]) != tried.end()) continue;
      tried.push_back(load[b]);
      load[b] += items[i];
      if (place(i + 1)) return true;
      load[b] -= items[i];
    }
    return false;
  };
  return place(0);
}

struct ReducedInstance {
  WeightedHistory history;
  std::int64_t k = 0;
};

// Builds the weighted history whose (B+2)-atomicity is equivalent to the
// packability of `inst`. Short unit-weight writes w(1..m+1) and reads
// r(1..m), r(i) dictated by w(i), sit on disjoint point-like intervals in
// the forced order w(1) w(2) r(1) w(3) r(2) ... w(m+1) r(m). Each item
// becomes a read-less long write weighing its size, concurrent with every
// short operation strictly between w(1) and w(m+1).
inline ReducedInstance BinPackingToKwav(const BinPackingInstance& inst) {
  ValidateInstance(inst);
  const auto m = inst.bins;
  const auto n = static_cast<std::int64_t>(inst.sizes.size());
  // Wide enough that n long-write endpoints fit between adjacent short ops.
  const std::int64_t spacing = std::max<std::int64_t>(10, 2 * n + 2);

  ReducedInstance out;
  History& h = out.history.base;
  h.key = "binpack";
  auto short_op = [&](std::int64_t position, OpKind kind, std::int64_t i) {
    const std::string tag = std::to_string(i);
    Operation op;
    op.kind = kind;
    op.id = (kind == OpKind::kWrite ? "w" : "r") + tag;
    op.value = "s" + tag;
    op.start = spacing * position;
    op.finish = spacing * position + 1;
    h.ops.push_back(op);
  };
  short_op(1, OpKind::kWrite, 1);
  for (std::int64_t i = 1; i <= m; ++i) {
    short_op(2 * i, OpKind::kWrite, i + 1);
    short_op(2 * i + 1, OpKind::kRead, i);
  }
  for (std::int64_t i = 1; i <= m + 1; ++i) out.history.weight["s" + std::to_string(i)] = 1;

  const std::int64_t first_finish = spacing + 1;   // w(1)
  const std::int64_t last_start = spacing * 2 * m;  // w(m+1)
  for (std::int64_t j = 1; j <= n; ++j) {
    Operation op;
    op.kind = OpKind::kWrite;
    op.id = "L" + std::to_string(j);
    op.value = "l" + std::to_string(j);
    op.start = first_finish + j;
    op.finish = last_start - j;
    out.history.weight[op.value] = inst.sizes[static_cast<std::size_t>(j - 1)];
    h.ops.push_back(op);
  }
  out.k = inst.capacity + 2;
  return out;
}

}  // namespace kav
