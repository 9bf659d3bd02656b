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

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "test_support.hpp"

namespace kav {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct Result {
  int status;
  std::string out;
  std::string err;
};

Result Kav(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int status = cli::Run(std::move(args), out, err);
  return {status, out.str(), err.str()};
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("kav_cli_test_" + std::string(::testing::UnitTest::GetInstance()
                                              ->current_test_info()
                                              ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string Path(const std::string& name) const { return (dir_ / name).string(); }

  std::string Save(const std::string& name, const History& h) {
    std::ofstream f(Path(name));
    WriteTrace(f, ToTrace(h));
    return Path(name);
  }

  std::string SaveText(const std::string& name, const std::string& text) {
    std::ofstream f(Path(name));
    f << text;
    return Path(name);
  }

  fs::path dir_;
};

TEST_F(CliTest, CheckOneAtomic) {
  Result r = Kav({"check", "--k", "1", Save("ha.trace", testing::HA())});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_NE(r.out.find("verdict=YES"), std::string::npos);
  EXPECT_NE(r.out.find("algo=gk"), std::string::npos);
}

TEST_F(CliTest, CheckTwoAtomicNo) {
  Result r = Kav({"check", "--k", "2", Save("hc.trace", testing::HC())});
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.out.find("verdict=NO"), std::string::npos);
  EXPECT_NE(r.out.find("algo=fzf"), std::string::npos);
}

TEST_F(CliTest, EmitWitnessPassesChecker) {
  const History h = testing::HB();
  Result r = Kav({"check", "--k", "2", "--algo", "lbt", "--emit-witness", Path("w.json"),
                  Save("hb.trace", h)});
  EXPECT_EQ(r.status, 0) << r.err;
  std::ifstream f(Path("w.json"));
  const auto w = WitnessFromJson(h, json::parse(f));
  ASSERT_TRUE(w);
  EXPECT_TRUE(CheckWitness(h, *w, 2));
}

TEST_F(CliTest, BruteForceAnyK) {
  const std::string hc = Save("hc.trace", testing::HC());
  EXPECT_EQ(Kav({"check", "--k", "3", "--algo", "brute", hc}).status, 0);
  EXPECT_EQ(Kav({"check", "--k", "2", "--algo", "brute", hc}).status, 1);
  Result capped = Kav({"--brute-cap", "3", "check", "--k", "3", "--algo", "brute", hc});
  EXPECT_EQ(capped.status, 2);
  EXPECT_NE(capped.out.find("verdict=UNKNOWN"), std::string::npos);
}

TEST_F(CliTest, AlgoMustMatchK) {
  const std::string hb = Save("hb.trace", testing::HB());
  EXPECT_EQ(Kav({"check", "--k", "2", "--algo", "gk", hb}).status, 2);
  EXPECT_EQ(Kav({"check", "--k", "3", hb}).status, 2);
  EXPECT_EQ(Kav({"check", "--k", "1", "--algo", "fzf", hb}).status, 2);
  EXPECT_EQ(Kav({"check", "--k", "1", "--algo", "nope", hb}).status, 2);
}

TEST_F(CliTest, MinK) {
  Result b = Kav({"min-k", Save("hb.trace", testing::HB())});
  EXPECT_EQ(b.status, 0);
  EXPECT_NE(b.out.find("min_k=2"), std::string::npos);
  Result a = Kav({"min-k", Save("ha.trace", testing::HA())});
  EXPECT_NE(a.out.find("min_k=1"), std::string::npos);
  Result c = Kav({"--brute-cap", "3", "min-k", Save("hc.trace", testing::HC())});
  EXPECT_EQ(c.status, 0);
  EXPECT_NE(c.out.find("min_k=unknown(>=3)"), std::string::npos);
  Result cj = Kav({"--json", "--brute-cap", "3", "min-k", Path("hc.trace")});
  const json report = json::parse(cj.out);
  EXPECT_EQ(report["entries"][0]["verdict"], "UNKNOWN");
  EXPECT_EQ(report["entries"][0]["lower_bound"], 3);
}

TEST_F(CliTest, ErrorsAndAnomalies) {
  EXPECT_EQ(Kav({"check", "--k", "1", Path("missing.trace")}).status, 2);
  EXPECT_EQ(Kav({"check", "--k", "1", SaveText("bad.trace", "not json\n")}).status, 2);
  EXPECT_EQ(Kav({}).status, 2);

  const std::string stray = SaveText(
      "stray.trace",
      "{\"key\":\"k\",\"id\":\"w\",\"kind\":\"write\",\"value\":\"a\",\"start\":0,\"finish\":2}\n"
      "{\"key\":\"k\",\"id\":\"r\",\"kind\":\"read\",\"value\":\"zz\",\"start\":4,\"finish\":6}\n");
  Result strict = Kav({"check", "--k", "1", stray});
  EXPECT_EQ(strict.status, 3);
  EXPECT_NE(strict.out.find("ReadWithoutDictatingWrite"), std::string::npos);
  Result lenient = Kav({"check", "--k", "1", "--lenient", stray});
  EXPECT_EQ(lenient.status, 0);
  EXPECT_NE(lenient.out.find("dropped r"), std::string::npos);

  const std::string ties = SaveText(
      "ties.trace",
      "{\"key\":\"k\",\"id\":\"w\",\"kind\":\"write\",\"value\":\"a\",\"start\":0,\"finish\":2}\n"
      "{\"key\":\"k\",\"id\":\"r\",\"kind\":\"read\",\"value\":\"a\",\"start\":2,\"finish\":6}\n");
  EXPECT_EQ(Kav({"check", "--k", "1", ties}).status, 3);
  EXPECT_EQ(Kav({"check", "--k", "1", "--perturb-ties", ties}).status, 0);
}

TEST_F(CliTest, JsonReportDeterminesExitStatus) {
  // Keys a (YES at k=2), b (NO at k=2), written in reverse key order.
  History a = testing::HB();
  a.key = "a";
  History b = testing::HC();
  b.key = "b";
  std::ofstream f(Path("multi.trace"));
  WriteTrace(f, ToTrace(b));
  WriteTrace(f, ToTrace(a));
  f.close();
  for (const char* jobs : {"1", "4"}) {
    Result r = Kav({"--json", "check", "--k", "2", "--jobs", jobs, "--emit-witness",
                    Path("wit.json"), Path("multi.trace")});
    const json report = json::parse(r.out);
    EXPECT_EQ(report["command"], "check");
    ASSERT_EQ(report["entries"].size(), 2u);
    EXPECT_EQ(report["entries"][0]["key"], "a");
    EXPECT_EQ(report["entries"][1]["key"], "b");
    EXPECT_EQ(report["entries"][0]["witness"], Path("wit.json") + ".a");
    EXPECT_EQ(cli::ExitStatus(report), r.status);
    EXPECT_EQ(report["exit_status"], r.status);
    EXPECT_EQ(r.status, 1);
  }
  EXPECT_TRUE(fs::exists(Path("wit.json.a")));
  EXPECT_FALSE(fs::exists(Path("wit.json.b")));
}

TEST_F(CliTest, ExplainListsChunks) {
  Result r = Kav({"check", "--k", "2", "--explain", Save("fig3.trace", testing::Fig3Fixture())});
  EXPECT_NE(r.out.find("chunk ["), std::string::npos);
  EXPECT_NE(r.out.find("dangling [\"BW2\",\"BW5\",\"BW7\"]"), std::string::npos) << r.out;
  EXPECT_EQ(Kav({"check", "--k", "1", "--explain", Path("fig3.trace")}).status, 2);
}

TEST_F(CliTest, GenIsDeterministic) {
  Result a = Kav({"--seed", "4", "gen", "witnessed", "--k", "2", "--ops", "300"});
  Result b = Kav({"--seed", "4", "gen", "witnessed", "--k", "2", "--ops", "300"});
  EXPECT_EQ(a.status, 0);
  EXPECT_EQ(a.out, b.out);
  std::istringstream in(a.out);
  EXPECT_EQ(ParseTrace(in).records.size(), 300u);
  EXPECT_EQ(Kav({"--seed", "4", "gen", "witnessed", "--k", "2", "--ops", "300", "--out",
                 Path("g.trace")})
                .status,
            0);
  EXPECT_EQ(Kav({"check", "--k", "2", Path("g.trace")}).status, 0);

  Result q = Kav({"--seed", "2", "gen", "quorum", "--replicas", "5", "--write-quorum", "2",
                  "--read-quorum", "2", "--ops", "50"});
  EXPECT_EQ(q.status, 0);
  EXPECT_EQ(q.out, Kav({"--seed", "2", "gen", "quorum", "--replicas", "5", "--write-quorum",
                        "2", "--read-quorum", "2", "--ops", "50"})
                       .out);
  EXPECT_EQ(Kav({"gen", "quorum", "--replicas", "2", "--write-quorum", "3"}).status, 2);
}

TEST_F(CliTest, ReduceBinpack) {
  Result r = Kav({"reduce", "binpack", "--sizes", "2,3", "--bins", "2", "--capacity", "3",
                  "--out", Path("bp.trace")});
  EXPECT_EQ(r.status, 0) << r.err;
  EXPECT_EQ(r.out, "k=5\n");
  Result yes = Kav({"check", "--k", "5", "--algo", "brute", Path("bp.trace")});
  EXPECT_EQ(yes.status, 0) << yes.out;
  Result no = Kav({"check", "--k", "4", "--algo", "brute", Path("bp.trace")});
  EXPECT_EQ(no.status, 1);
  EXPECT_EQ(Kav({"reduce", "binpack", "--sizes", "0", "--bins", "1", "--capacity", "1"}).status,
            2);
}

TEST_F(CliTest, Bench) {
  Result r = Kav({"bench", "--algo", "fzf", "--from", "10", "--to", "17"});
  EXPECT_EQ(r.status, 0) << r.err;
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "n,algo,elapsed_ms,steps,max_concurrent_writes");
  std::size_t rows = 0;
  while (std::getline(in, line)) ++rows;
  EXPECT_EQ(rows, 8u);
  EXPECT_EQ(Kav({"bench", "--from", "5", "--to", "3"}).status, 2);
}

}  // namespace
}  // namespace kav
