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

#include <sstream>

#include "test_support.hpp"

namespace kav {
namespace {

std::string Dump(const Trace& t) {
  std::ostringstream out;
  WriteTrace(out, t);
  return out.str();
}

TEST(GenWitnessed, OneAtomicByConstruction) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.ops = 1 + seed % 12;
    cfg.staleness_k = 1;
    const History h = GenWitnessed(cfg);
    ASSERT_TRUE(Validate(h).empty());
    EXPECT_TRUE(testing::ReferenceKAtomic(h, 1)) << seed;
  }
}

TEST(GenWitnessed, TwoAtomicOutputsPassFzf) {
  for (std::uint64_t seed = 1; seed <= 1000; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.ops = 20 + seed % 200;
    cfg.staleness_k = 2;
    cfg.max_back = 1 + static_cast<std::int64_t>(seed % 4);
    cfg.max_forward = 1 + static_cast<std::int64_t>(seed % 3);
    EXPECT_TRUE(Check2AtomicFzf(Normalize(GenWitnessed(cfg))).yes()) << seed;
  }
}

TEST(GenWitnessed, StalenessBoundsMinK) {
  for (std::uint64_t seed = 1; seed <= 300; ++seed) {
    GenConfig cfg;
    cfg.seed = seed;
    cfg.ops = 1 + seed % 12;
    cfg.staleness_k = 1 + seed % 4;
    const History h = Normalize(GenWitnessed(cfg));
    const MinKResult r = MinK(h);
    ASSERT_TRUE(r.k);
    EXPECT_LE(*r.k, cfg.staleness_k) << seed;
  }
}

TEST(GenWitnessed, EmptyAndDeterministic) {
  GenConfig cfg;
  cfg.ops = 0;
  EXPECT_TRUE(GenWitnessed(cfg).ops.empty());
  cfg.ops = 500;
  cfg.seed = 99;
  EXPECT_EQ(Dump(ToTrace(GenWitnessed(cfg))), Dump(ToTrace(GenWitnessed(cfg))));
  GenConfig other = cfg;
  other.seed = 100;
  EXPECT_NE(Dump(ToTrace(GenWitnessed(cfg))), Dump(ToTrace(GenWitnessed(other))));
}

TEST(GenRandomSmall, DeterministicAndValid) {
  EXPECT_EQ(GenRandomSmall(7, 9), GenRandomSmall(7, 9));
  const History one = GenRandomSmall(3, 1);
  ASSERT_EQ(one.ops.size(), 1u);
  EXPECT_TRUE(one.ops[0].is_write());
  EXPECT_TRUE(BruteForceKAtomic(one, 1).yes());
  for (std::uint64_t i = 0; i < 10000; ++i) {
    const History h = testing::CorpusHistory(i);
    ASSERT_TRUE(Validate(h).empty()) << i;
    ASSERT_TRUE(Validate(Normalize(h)).empty()) << i;
  }
  EXPECT_THROW(GenRandomSmall(1, 13), std::invalid_argument);
}

// The corpus must contain every verdict at k = 1, 2, 3.
TEST(GenRandomSmall, CorpusMixesVerdicts) {
  std::size_t counts[4] = {0, 0, 0, 0};
  for (std::uint64_t i = 0; i < 2000; ++i) {
    const MinKResult r = MinK(Normalize(testing::CorpusHistory(i)));
    ASSERT_TRUE(r.k);
    ++counts[std::min<std::size_t>(*r.k, 4) - 1];
  }
  for (std::size_t c : counts) EXPECT_GE(c, 10u);
}

TEST(SimulateQuorum, SingleReplicaIsAtomic) {
  for (std::uint64_t seed = 1; seed <= 500; ++seed) {
    QuorumConfig cfg;
    cfg.seed = seed;
    cfg.replicas = 1;
    cfg.write_quorum = 1;
    cfg.read_quorum = 1;
    cfg.clients = 1 + seed % 4;
    cfg.ops = 1 + seed % 11;
    const auto groups = PartitionByKey(SimulateQuorum(cfg));
    ASSERT_EQ(groups.size(), 1u);
    const History& h = groups.begin()->second;
    ASSERT_TRUE(Validate(h).empty()) << seed;
    ASSERT_LE(h.ops.size(), 12u);
    EXPECT_TRUE(BruteForceKAtomic(h, 1).yes()) << seed;
    EXPECT_TRUE(Check1Atomic(Normalize(h)).yes()) << seed;
  }
}

TEST(SimulateQuorum, SloppyQuorumsGoStale) {
  std::optional<std::uint64_t> found;
  for (std::uint64_t seed = 1; seed <= 2000 && !found; ++seed) {
    QuorumConfig cfg;
    cfg.seed = seed;
    cfg.replicas = 3;
    cfg.write_quorum = 1;
    cfg.read_quorum = 1;
    cfg.ops = 11;
    const History h = PartitionByKey(SimulateQuorum(cfg)).begin()->second;
    ASSERT_TRUE(Validate(h).empty()) << seed;
    const MinKResult r = MinK(Normalize(h));
    if (!r.k || *r.k >= 2) found = seed;
  }
  ASSERT_TRUE(found);
  std::cout << "first stale seed: " << *found << "\n";
}

TEST(SimulateQuorum, EmptyDeterministicAndValid) {
  QuorumConfig cfg;
  cfg.ops = 0;
  EXPECT_TRUE(SimulateQuorum(cfg).records.empty());
  cfg.ops = 2000;
  cfg.replicas = 5;
  cfg.write_quorum = 2;
  cfg.read_quorum = 2;
  cfg.seed = 11;
  const Trace t = SimulateQuorum(cfg);
  EXPECT_EQ(Dump(t), Dump(SimulateQuorum(cfg)));
  const History h = PartitionByKey(t).begin()->second;
  EXPECT_TRUE(Validate(h).empty());
  EXPECT_TRUE(Validate(Normalize(h)).empty());
  EXPECT_THROW(SimulateQuorum({.replicas = 2, .write_quorum = 3}), std::invalid_argument);
}

}  // namespace
}  // namespace kav
