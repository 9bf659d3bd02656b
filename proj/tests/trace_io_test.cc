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

TEST(TraceIo, RoundTripsGeneratedTraces) {
  for (std::uint64_t i = 0; i < 200; ++i) {
    const History h = testing::CorpusHistory(i);
    std::stringstream io;
    WriteTrace(io, ToTrace(h));
    const Trace back = ParseTrace(io);
    ASSERT_EQ(back.records.size(), h.ops.size());
    for (std::size_t j = 0; j < h.ops.size(); ++j) {
      EXPECT_EQ(back.records[j].op, h.ops[j]);
      EXPECT_EQ(back.records[j].key, h.key);
    }
  }
}

TEST(TraceIo, WeightsRoundTrip) {
  const ReducedInstance r = BinPackingToKwav({{2, 3}, 2, 3});
  std::stringstream io;
  WriteTrace(io, ToTrace(r.history));
  const Trace back = ParseTrace(io);
  EXPECT_EQ(WeightsOf(back, "binpack"), r.history.weight);
  for (const auto& rec : back.records) EXPECT_EQ(rec.weight.has_value(), rec.op.is_write());
}

TEST(TraceIo, RejectsBadFields) {
  for (const char* line : {
           R"({"key":"k","id":"w","kind":"write","value":"a","start":0})",
           R"({"key":"k","id":"w","kind":"write","value":"a","start":"0","finish":1})",
           R"({"key":1,"id":"w","kind":"write","value":"a","start":0,"finish":1})",
           R"([1,2,3])",
           R"({"key":"k","id":"w","kind":"write","value":"a","start":0,"finish":1,"weight":1.5})",
       }) {
    EXPECT_THROW(ParseTraceLine(line, 1), SyntaxError) << line;
  }
}

TEST(WitnessJson, RoundTrip) {
  const History h = testing::HB();
  const Verdict v = Check2AtomicLbt(h);
  ASSERT_TRUE(v.witness);
  const nlohmann::json j = WitnessToJson(h, *v.witness);
  auto back = WitnessFromJson(h, nlohmann::json::parse(j.dump()));
  ASSERT_TRUE(back);
  EXPECT_EQ(back->Flatten(), v.witness->Flatten());
  EXPECT_TRUE(CheckWitness(h, *back, 2));
}

TEST(WitnessJson, RejectsUnknownAndAmbiguousIds) {
  const History h = testing::HA();
  EXPECT_FALSE(WitnessFromJson(h, nlohmann::json::parse(R"([{"slot":"nope"}])")));
  EXPECT_FALSE(WitnessFromJson(h, nlohmann::json::parse(R"({"slot":"w"})")));
  EXPECT_FALSE(WitnessFromJson(h, nlohmann::json::parse(R"([{"other":"w"}])")));
  History dup = h;
  dup.ops[1].id = "w";
  EXPECT_FALSE(WitnessFromJson(dup, nlohmann::json::parse(R"([{"slot":"w"}])")));
}

}  // namespace
}  // namespace kav
