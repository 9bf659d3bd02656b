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

#include <gtest/gtest.h>

#include "test_support.hpp"

namespace kav {
namespace {

using testing::HB;
using testing::HC;
using testing::Make;
using testing::R;
using testing::W;

TEST(BruteForceWeighted, DictatingWriteCounts) {
  WeightedHistory wh{Make({W("w", "a", 0, 2), R("r", "a", 4, 6)}), {{"a", 5}}};
  EXPECT_TRUE(BruteForceWeighted(wh, 5).yes());
  EXPECT_FALSE(BruteForceWeighted(wh, 4).yes());
}

TEST(BruteForceWeighted, UnitWeightsOnHB) {
  WeightedHistory wh{HB(), {}};
  EXPECT_TRUE(BruteForceWeighted(wh, 2).yes());
  EXPECT_EQ(BruteForceWeighted(wh, 2).yes(), BruteForceKAtomic(HB(), 2).yes());
}

TEST(BruteForceWeighted, HeavyMiddleWrite) {
  WeightedHistory wh{HC(), {{"b", 3}}};
  // The only valid order is w1 w2 w3 r1; r1 sees 1 + 3 + 1.
  EXPECT_FALSE(BruteForceWeighted(wh, 3).yes());
  EXPECT_FALSE(BruteForceWeighted(wh, 4).yes());
  Verdict v = BruteForceWeighted(wh, 5);
  ASSERT_TRUE(v.yes());
  EXPECT_TRUE(CheckWeightedWitness(wh, *v.witness, 5));
  EXPECT_FALSE(CheckWeightedWitness(wh, *v.witness, 4));
}

TEST(BruteForceWeighted, CapExceeded) {
  EXPECT_THROW(BruteForceWeighted(WeightedHistory{HC(), {}}, 2, 3), CapExceeded);
}

TEST(BruteForceWeighted, UnitWeightsDegenerate) {
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const History h = testing::CorpusHistory(i);
    const WeightedHistory wh{h, {}};
    for (std::size_t k = 1; k <= 3; ++k) {
      const Verdict w = BruteForceWeighted(wh, static_cast<std::int64_t>(k));
      ASSERT_EQ(w.yes(), BruteForceKAtomic(h, k).yes()) << "corpus " << i << " k=" << k;
      if (w.yes()) EXPECT_TRUE(CheckWitness(h, *w.witness, k));
    }
  }
}

TEST(BruteForceBinPacking, Examples) {
  EXPECT_TRUE(BruteForceBinPacking({{2, 3}, 2, 3}));
  EXPECT_FALSE(BruteForceBinPacking({{3, 3}, 1, 3}));
  EXPECT_TRUE(BruteForceBinPacking({{}, 1, 1}));
  EXPECT_THROW(BruteForceBinPacking({{1, 1, 1, 1, 1, 1, 1, 1, 1, 1, 1}, 1, 20}), CapExceeded);
  EXPECT_THROW(BruteForceBinPacking({{0}, 1, 1}), std::invalid_argument);
}

TEST(BruteForceBinPacking, MatchesReference) {
  for (std::int64_t mask = 0; mask < 4 * 4 * 4 * 4 * 4; ++mask) {
    std::vector<std::int64_t> sizes;
    for (std::int64_t m = mask, i = 0; i < 5; ++i, m /= 4) sizes.push_back(1 + m % 4);
    for (std::int64_t bins = 1; bins <= 3; ++bins) {
      for (std::int64_t cap = 1; cap <= 6; ++cap) {
        EXPECT_EQ(BruteForceBinPacking({sizes, bins, cap}),
                  testing::ReferenceBinPacking(sizes, bins, cap));
      }
    }
  }
}

TEST(BinPackingToKwav, Examples) {
  ReducedInstance a = BinPackingToKwav({{2, 3}, 2, 3});
  EXPECT_EQ(a.k, 5);
  EXPECT_TRUE(BruteForceWeighted(a.history, a.k).yes());

  ReducedInstance b = BinPackingToKwav({{3, 3}, 1, 3});
  EXPECT_EQ(b.k, 5);
  EXPECT_FALSE(BruteForceWeighted(b.history, b.k).yes());

  ReducedInstance c = BinPackingToKwav({{1}, 1, 1});
  EXPECT_EQ(c.k, 3);
  EXPECT_TRUE(BruteForceWeighted(c.history, c.k).yes());
}

TEST(BinPackingToKwav, Shape) {
  for (std::int64_t m = 1; m <= 3; ++m) {
    for (std::size_t n = 0; n <= 10; ++n) {
      std::vector<std::int64_t> sizes(n, 2);
      const ReducedInstance r = BinPackingToKwav({sizes, m, 4});
      const History& h = r.history.base;
      EXPECT_TRUE(Validate(h).empty());
      EXPECT_EQ(h.ops.size(), static_cast<std::size_t>(2 * m + 1) + n);
      const Operation& first = *std::find_if(h.ops.begin(), h.ops.end(),
                                             [](const Operation& o) { return o.id == "w1"; });
      const std::string last_id = "w" + std::to_string(m + 1);
      const Operation& last = *std::find_if(h.ops.begin(), h.ops.end(),
                                            [&](const Operation& o) { return o.id == last_id; });
      for (const Operation& op : h.ops) {
        if (op.id[0] != 'L') {
          if (op.is_write()) EXPECT_EQ(r.history.WeightOf(op), 1);
          continue;
        }
        EXPECT_TRUE(Precedes(first, op));
        EXPECT_TRUE(Precedes(op, last));
        // Every long write overlaps every short op strictly between.
        for (const Operation& s : h.ops) {
          if (s.id[0] == 'L' || s.id == "w1" || s.id == last_id) continue;
          if (s.id == "r" + std::to_string(m)) continue;
          EXPECT_FALSE(Precedes(op, s) || Precedes(s, op)) << op.id << " vs " << s.id;
        }
        for (const Operation& o : h.ops) {
          if (o.id[0] == 'L') EXPECT_FALSE(Precedes(op, o));
        }
      }
    }
  }
}

// Counts the linear extensions of precedes over the short operations.
std::size_t CountOrders(const std::vector<Operation>& ops, std::vector<char>& used) {
  std::size_t placed = 0;
  for (char u : used) placed += u;
  if (placed == ops.size()) return 1;
  std::size_t total = 0;
  for (std::size_t x = 0; x < ops.size(); ++x) {
    if (used[x]) continue;
    bool ready = true;
    for (std::size_t y = 0; y < ops.size(); ++y) {
      if (!used[y] && y != x && Precedes(ops[y], ops[x])) ready = false;
    }
    if (!ready) continue;
    used[x] = 1;
    total += CountOrders(ops, used);
    used[x] = 0;
  }
  return total;
}

TEST(BinPackingToKwav, SkeletonHasOneOrder) {
  for (std::int64_t m = 1; m <= 4; ++m) {
    const ReducedInstance r = BinPackingToKwav({{1, 2, 3}, m, 3});
    std::vector<Operation> shorts;
    for (const Operation& op : r.history.base.ops) {
      if (op.id[0] != 'L') shorts.push_back(op);
    }
    std::vector<char> used(shorts.size(), 0);
    EXPECT_EQ(CountOrders(shorts, used), 1u) << "m=" << m;
  }
}

TEST(BinPackingToKwav, EquivalentOnSmallSweep) {
  for (std::int64_t bins = 1; bins <= 2; ++bins) {
    for (std::int64_t cap = 1; cap <= 4; ++cap) {
      for (std::int64_t a = 1; a <= 3; ++a) {
        for (std::int64_t b = 1; b <= 3; ++b) {
          const BinPackingInstance inst{{a, b}, bins, cap};
          const ReducedInstance r = BinPackingToKwav(inst);
          const Verdict v = BruteForceWeighted(r.history, r.k);
          EXPECT_EQ(v.yes(), testing::ReferenceBinPacking(inst.sizes, bins, cap));
          if (v.yes()) EXPECT_TRUE(CheckWeightedWitness(r.history, *v.witness, r.k));
        }
      }
    }
  }
}

}  // namespace
}  // namespace kav
