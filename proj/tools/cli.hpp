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

// The `kav` command line: check, min-k, gen, reduce, bench.
//
// Exit status of `check`: 0 when every key is YES, 1 when some key is NO,
// 2 on I/O, parse or usage errors and when a key exceeds the search cap,
// 3 when some key has anomalies in strict mode. `min-k` exits 0 unless a key
// has anomalies (3) or an error occurs (2).

#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kav/kav.hpp"

namespace kav::cli {

using nlohmann::json;

inline constexpr int kExitOk = 0;
inline constexpr int kExitNo = 1;
inline constexpr int kExitError = 2;
inline constexpr int kExitAnomalies = 3;

// Exit status as a function of a report object alone. An UNKNOWN verdict
// fails `check` but is an ordinary answer for `min-k`.
inline int ExitStatus(const json& report) {
  const bool is_check = report.at("command") == "check";
  bool anomalous = false;
  bool no = false;
  bool undecided = false;
  for (const auto& e : report.at("entries")) {
    const std::string v = e.at("verdict").get<std::string>();
    anomalous |= v == "ANOMALOUS";
    no |= v == "NO";
    undecided |= v == "UNKNOWN" && is_check;
  }
  if (anomalous) return kExitAnomalies;
  if (undecided) return kExitError;
  if (no) return kExitNo;
  return kExitOk;
}

namespace internal {

struct Options {
  bool json_output = false;
  std::uint64_t seed = 1;
  std::size_t brute_cap = kDefaultBruteCap;
  std::size_t jobs = 0;

  // check / min-k
  std::string trace_path;
  std::size_t k = 1;
  std::string algo;
  std::string witness_path;
  bool explain = false;
  bool lenient = false;
  bool perturb_ties = false;

  // gen
  GenConfig gen;
  QuorumConfig quorum;
  std::string out_path;

  // reduce
  std::vector<std::int64_t> sizes;
  std::int64_t bins = 1;
  std::int64_t capacity = 1;

  // bench
  std::string bench_algo = "fzf";
  int from_exp = 10;
  int to_exp = 17;
  std::size_t bench_k = 2;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline json AnomaliesJson(const std::vector<Anomaly>& anomalies) {
  json arr = json::array();
  for (const Anomaly& a : anomalies) {
    arr.push_back({{"kind", std::string(ToString(a.kind))}, {"ops", a.op_ids}});
  }
  return arr;
}

inline json IdsJson(const History& h, const std::vector<OpIndex>& ops) {
  json arr = json::array();
  for (OpIndex x : ops) arr.push_back(h.ops[x].id);
  return arr;
}

inline json ExplainJson(const History& h, const std::vector<ChunkReport>& chunks,
                        const ChunkSet& cs) {
  json out;
  out["chunks"] = json::array();
  for (const ChunkReport& r : chunks) {
    json c;
    c["interval"] = {r.chunk.low, r.chunk.high};
    c["forward"] = IdsJson(h, r.chunk.forward_writes);
    c["backward"] = IdsJson(h, r.chunk.backward_writes);
    c["tried"] = json::array();
    for (std::size_t i = 0; i < r.orders.size(); ++i) {
      c["tried"].push_back({{"order", IdsJson(h, r.orders[i])}, {"viable", bool(r.viable[i])}});
    }
    out["chunks"].push_back(std::move(c));
  }
  out["dangling"] = IdsJson(h, cs.dangling);
  return out;
}

inline std::string WitnessFileFor(const std::string& base, const std::string& key,
                                  std::size_t keys) {
  return keys == 1 ? base : base + "." + key;
}

// Runs `fn(i)` for i in [0, count) on up to `jobs` threads.
template <typename Fn>
void ParallelFor(std::size_t count, std::size_t jobs, Fn fn) {
  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min(jobs, count);
  if (jobs <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> workers;
  for (std::size_t t = 0; t < jobs; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

inline Trace ReadTraceFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open trace '" + path + "'");
  return ParseTrace(in);
}

// Applies the ingestion flags and validates. Returns the anomalies left.
inline std::vector<Anomaly> Prepare(const Options& opt, History& h, json& entry) {
  if (opt.perturb_ties) h = PerturbDuplicateTimestamps(h);
  auto anomalies = Validate(h);
  if (!anomalies.empty() && opt.lenient) {
    entry["dropped_reads"] = DropAnomalousReads(h);
    anomalies = Validate(h);
  }
  entry["anomalies"] = AnomaliesJson(anomalies);
  return anomalies;
}

inline json CertificateJson(const History& h, const Certificate& c) {
  return {{"kind", std::string(ToString(c.kind))}, {"ops", IdsJson(h, c.ops)}};
}

inline json CheckKey(const Options& opt, History h, const Trace& trace, std::size_t keys) {
  json entry;
  entry["key"] = h.key;
  entry["k"] = opt.k;
  entry["algorithm"] = opt.algo;
  entry["witness"] = nullptr;
  if (!Prepare(opt, h, entry).empty()) {
    entry["verdict"] = "ANOMALOUS";
    return entry;
  }

  const auto t0 = std::chrono::steady_clock::now();
  Verdict v;
  History checked = h;
  std::vector<ChunkReport> chunk_reports;
  try {
    if (opt.algo == "brute") {
      auto weights = WeightsOf(trace, h.key);
      if (weights.empty()) {
        BruteForceOptions bo;
        bo.cap = opt.brute_cap;
        v = BruteForceKAtomic(checked, opt.k, bo);
      } else {
        WeightedHistory wh{checked, std::move(weights)};
        v = BruteForceWeighted(wh, static_cast<std::int64_t>(opt.k), opt.brute_cap);
        entry["weighted"] = true;
      }
    } else {
      checked = Normalize(h);
      if (opt.algo == "gk") {
        v = Check1Atomic(checked);
      } else if (opt.algo == "lbt") {
        v = Check2AtomicLbt(checked);
      } else {
        v = Check2AtomicFzf(checked, opt.explain ? &chunk_reports : nullptr);
        if (opt.explain) {
          entry["explain"] = ExplainJson(checked, chunk_reports, ComputeChunkSet(checked));
        }
      }
    }
  } catch (const CapExceeded& e) {
    entry["verdict"] = "UNKNOWN";
    entry["error"] = e.what();
    return entry;
  }
  const auto t1 = std::chrono::steady_clock::now();

  entry["verdict"] = std::string(ToString(v.answer));
  entry["elapsed_us"] = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();
  entry["counters"] = {{"steps", v.stats.steps},
                       {"removals", v.stats.removals},
                       {"undo_replays", v.stats.undo_replays},
                       {"nodes", v.stats.nodes}};
  if (v.certificate) entry["certificate"] = CertificateJson(checked, *v.certificate);
  if (v.witness && !opt.witness_path.empty()) {
    const std::string path = WitnessFileFor(opt.witness_path, h.key, keys);
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write witness '" + path + "'");
    f << WitnessToJson(checked, *v.witness).dump() << '\n';
    entry["witness"] = path;
  }
  return entry;
}

inline json MinKKey(const Options& opt, History h) {
  json entry;
  entry["key"] = h.key;
  entry["algorithm"] = "min-k";
  if (!Prepare(opt, h, entry).empty()) {
    entry["verdict"] = "ANOMALOUS";
    return entry;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const MinKResult r = MinK(Normalize(h), opt.brute_cap);
  const auto t1 = std::chrono::steady_clock::now();
  entry["verdict"] = r.k ? "OK" : "UNKNOWN";
  entry["min_k"] = r.k ? json(*r.k) : json(nullptr);
  entry["lower_bound"] = r.lower_bound;
  entry["elapsed_us"] = std::chrono::duration_cast<std::chrono::microseconds>(t1 - t0).count();
  return entry;
}

inline void PrintEntry(std::ostream& out, const json& e) {
  out << "key=" << e["key"].get<std::string>() << " verdict=" << e["verdict"].get<std::string>();
  if (e.contains("min_k")) {
    if (e["min_k"].is_null()) {
      out << " min_k=unknown(>=" << e["lower_bound"].get<std::size_t>() << ")";
    } else {
      out << " min_k=" << e["min_k"].get<std::size_t>();
    }
  } else {
    out << " k=" << e["k"].get<std::size_t>() << " algo=" << e["algorithm"].get<std::string>();
  }
  if (e.contains("counters")) out << " steps=" << e["counters"]["steps"].get<std::uint64_t>();
  if (e.contains("elapsed_us")) out << " time_us=" << e["elapsed_us"].get<std::int64_t>();
  if (e.contains("certificate")) {
    out << " reason=" << e["certificate"]["kind"].get<std::string>() << "[";
    bool first = true;
    for (const auto& id : e["certificate"]["ops"]) {
      out << (first ? "" : ",") << id.get<std::string>();
      first = false;
    }
    out << "]";
  }
  if (!e["witness"].is_null() && e.contains("witness")) {
    out << " witness=" << e["witness"].get<std::string>();
  }
  if (e.contains("error")) out << " error=\"" << e["error"].get<std::string>() << "\"";
  out << '\n';
  for (const auto& a : e["anomalies"]) {
    out << "  anomaly " << a["kind"].get<std::string>() << ":";
    for (const auto& id : a["ops"]) out << " " << id.get<std::string>();
    out << '\n';
  }
  if (e.contains("dropped_reads")) {
    for (const auto& id : e["dropped_reads"]) out << "  dropped " << id.get<std::string>() << '\n';
  }
  if (e.contains("explain")) {
    const auto& x = e["explain"];
    for (const auto& c : x["chunks"]) {
      out << "  chunk [" << c["interval"][0] << "," << c["interval"][1] << "] forward="
          << c["forward"].dump() << " backward=" << c["backward"].dump() << '\n';
      for (const auto& t : c["tried"]) {
        out << "    order " << t["order"].dump() << (t["viable"].get<bool>() ? " viable" : " not viable")
            << '\n';
      }
    }
    out << "  dangling " << x["dangling"].dump() << '\n';
  }
}

inline int RunPerKey(const Options& opt, const std::string& command, std::ostream& out) {
  const Trace trace = ReadTraceFile(opt.trace_path);
  const auto groups = PartitionByKey(trace);
  std::vector<History> histories;
  for (const auto& [key, h] : groups) histories.push_back(h);

  std::vector<json> entries(histories.size());
  std::vector<std::string> failures(histories.size());
  ParallelFor(histories.size(), opt.jobs, [&](std::size_t i) {
    try {
      entries[i] = command == "check" ? CheckKey(opt, histories[i], trace, histories.size())
                                      : MinKKey(opt, histories[i]);
    } catch (const std::exception& e) {
      failures[i] = e.what();
    }
  });
  for (const auto& f : failures) {
    if (!f.empty()) throw std::runtime_error(f);
  }

  json report;
  report["command"] = command;
  report["entries"] = entries;
  const int status = ExitStatus(report);
  report["exit_status"] = status;
  if (opt.json_output) {
    out << report.dump(2) << '\n';
  } else {
    for (const auto& e : entries) PrintEntry(out, e);
  }
  return status;
}

inline void WriteTraceTo(const std::string& path, const Trace& t, std::ostream& out) {
  if (path.empty()) {
    WriteTrace(out, t);
    return;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write '" + path + "'");
  WriteTrace(f, t);
}

inline int RunBench(const Options& opt, std::ostream& out) {
  if (opt.from_exp < 0 || opt.to_exp < opt.from_exp || opt.to_exp > 30) {
    throw UsageError("bench: need 0 <= --from <= --to <= 30");
  }
  if (opt.bench_algo != "fzf" && opt.bench_algo != "lbt" && opt.bench_algo != "gk") {
    throw UsageError("bench: --algo must be fzf, lbt or gk");
  }
  out << "n,algo,elapsed_ms,steps,max_concurrent_writes\n";
  for (int e = opt.from_exp; e <= opt.to_exp; ++e) {
    GenConfig cfg = opt.gen;
    cfg.ops = std::size_t{1} << e;
    cfg.staleness_k = opt.bench_k;
    cfg.seed = opt.seed;
    const History h = Normalize(GenWitnessed(cfg));
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v = opt.bench_algo == "fzf"   ? Check2AtomicFzf(h)
                : opt.bench_algo == "lbt" ? Check2AtomicLbt(h)
                                          : Check1Atomic(h);
    const auto t1 = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(t1 - t0).count();
    out << cfg.ops << ',' << opt.bench_algo << ',' << ms << ',' << v.stats.steps << ','
        << MaxConcurrentWrites(h) << '\n';
  }
  return kExitOk;
}

}  // namespace internal

// Runs the command line `args` (without the program name).
inline int Run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  using internal::Options;
  Options opt;
  CLI::App app{"k-atomicity verification toolkit", "kav"};
  app.require_subcommand(1);
  app.add_flag("--json", opt.json_output, "Machine-readable report");
  app.add_option("--seed", opt.seed, "Seed for gen and bench");
  app.add_option("--brute-cap", opt.brute_cap, "Largest history for exhaustive search")
      ->check(CLI::Range(1, 63));

  auto* check = app.add_subcommand("check", "Decide k-atomicity per key");
  check->fallthrough();
  check->add_option("trace", opt.trace_path, "Trace file")->required();
  check->add_option("--k", opt.k, "Staleness bound")->required()->check(CLI::PositiveNumber);
  check->add_option("--algo", opt.algo, "gk, lbt, fzf or brute")
      ->check(CLI::IsMember({"gk", "lbt", "fzf", "brute"}));
  check->add_option("--emit-witness", opt.witness_path, "Write YES witnesses here");
  check->add_flag("--explain", opt.explain, "Print the chunk decomposition (fzf)");
  check->add_flag("--lenient", opt.lenient, "Drop anomalous reads instead of failing");
  check->add_flag("--perturb-ties", opt.perturb_ties, "Break duplicate timestamps by op id");
  check->add_option("--jobs", opt.jobs, "Keys verified concurrently (0 = all cores)");

  auto* mink = app.add_subcommand("min-k", "Smallest k per key");
  mink->fallthrough();
  mink->add_option("trace", opt.trace_path, "Trace file")->required();
  mink->add_flag("--lenient", opt.lenient, "Drop anomalous reads instead of failing");
  mink->add_flag("--perturb-ties", opt.perturb_ties, "Break duplicate timestamps by op id");
  mink->add_option("--jobs", opt.jobs, "Keys processed concurrently (0 = all cores)");

  auto* gen = app.add_subcommand("gen", "Generate traces");
  gen->fallthrough();
  gen->require_subcommand(1);
  auto* witnessed = gen->add_subcommand("witnessed", "Histories k-atomic by construction");
  witnessed->fallthrough();
  witnessed->add_option("--k", opt.gen.staleness_k, "Staleness bound")->check(CLI::PositiveNumber);
  witnessed->add_option("--ops", opt.gen.ops, "Operation count");
  witnessed->add_option("--writes-fraction", opt.gen.writes_fraction)->check(CLI::Range(0.0, 1.0));
  witnessed->add_option("--max-back", opt.gen.max_back)->check(CLI::PositiveNumber);
  witnessed->add_option("--max-forward", opt.gen.max_forward)->check(CLI::PositiveNumber);
  witnessed->add_option("--key", opt.gen.key);
  witnessed->add_option("--out", opt.out_path, "Output trace (default stdout)");
  auto* quorum = gen->add_subcommand("quorum", "Sloppy-quorum register simulation");
  quorum->fallthrough();
  quorum->add_option("--replicas", opt.quorum.replicas)->check(CLI::PositiveNumber);
  quorum->add_option("--write-quorum", opt.quorum.write_quorum)->check(CLI::PositiveNumber);
  quorum->add_option("--read-quorum", opt.quorum.read_quorum)->check(CLI::PositiveNumber);
  quorum->add_option("--clients", opt.quorum.clients)->check(CLI::PositiveNumber);
  quorum->add_option("--ops", opt.quorum.ops);
  quorum->add_option("--writes-fraction", opt.quorum.writes_fraction)->check(CLI::Range(0.0, 1.0));
  quorum->add_option("--latency-min", opt.quorum.latency_min)->check(CLI::PositiveNumber);
  quorum->add_option("--latency-max", opt.quorum.latency_max)->check(CLI::PositiveNumber);
  quorum->add_option("--key", opt.quorum.key);
  quorum->add_option("--out", opt.out_path, "Output trace (default stdout)");

  auto* reduce = app.add_subcommand("reduce", "Reduction instance generators");
  reduce->fallthrough();
  reduce->require_subcommand(1);
  auto* binpack = reduce->add_subcommand("binpack", "Bin packing to weighted k-atomicity");
  binpack->fallthrough();
  binpack->add_option("--sizes", opt.sizes, "Item sizes, comma separated")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  binpack->add_option("--bins", opt.bins)->required()->check(CLI::PositiveNumber);
  binpack->add_option("--capacity", opt.capacity)->required()->check(CLI::PositiveNumber);
  binpack->add_option("--out", opt.out_path, "Output trace (default stdout)");

  auto* bench = app.add_subcommand("bench", "Time a checker on doubling witnessed traces");
  bench->fallthrough();
  bench->add_option("--algo", opt.bench_algo, "fzf, lbt or gk");
  bench->add_option("--from", opt.from_exp, "Smallest n as a power of two");
  bench->add_option("--to", opt.to_exp, "Largest n as a power of two");
  bench->add_option("--k", opt.bench_k, "Staleness of the generated traces")
      ->check(CLI::PositiveNumber);
  bench->add_option("--writes-fraction", opt.gen.writes_fraction)->check(CLI::Range(0.0, 1.0));
  bench->add_option("--max-back", opt.gen.max_back)->check(CLI::PositiveNumber);
  bench->add_option("--max-forward", opt.gen.max_forward)->check(CLI::PositiveNumber);

  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitError;
  }

  try {
    if (check->parsed()) {
      if (opt.algo.empty()) opt.algo = opt.k == 1 ? "gk" : "fzf";
      if ((opt.algo == "gk" && opt.k != 1) ||
          ((opt.algo == "lbt" || opt.algo == "fzf") && opt.k != 2)) {
        throw internal::UsageError("--algo " + opt.algo + " decides only k=" +
                                   (opt.algo == "gk" ? "1" : "2") + "; use --algo brute");
      }
      if (opt.explain && opt.algo != "fzf") {
        throw internal::UsageError("--explain requires --algo fzf");
      }
      return internal::RunPerKey(opt, "check", out);
    }
    if (mink->parsed()) return internal::RunPerKey(opt, "min-k", out);
    if (witnessed->parsed()) {
      opt.gen.seed = opt.seed;
      internal::WriteTraceTo(opt.out_path, ToTrace(GenWitnessed(opt.gen)), out);
      return kExitOk;
    }
    if (quorum->parsed()) {
      opt.quorum.seed = opt.seed;
      internal::WriteTraceTo(opt.out_path, SimulateQuorum(opt.quorum), out);
      return kExitOk;
    }
    if (binpack->parsed()) {
      const ReducedInstance r = BinPackingToKwav({opt.sizes, opt.bins, opt.capacity});
      internal::WriteTraceTo(opt.out_path, ToTrace(r.history), out);
      std::ostream& k_out = opt.out_path.empty() ? err : out;
      if (opt.json_output) {
        k_out << json{{"k", r.k}, {"trace", opt.out_path}}.dump() << '\n';
      } else {
        k_out << "k=" << r.k << '\n';
      }
      return kExitOk;
    }
    if (bench->parsed()) return internal::RunBench(opt, out);
  } catch (const SyntaxError& e) {
    err << "kav: parse error: " << e.what() << '\n';
    return kExitError;
  } catch (const std::exception& e) {
    err << "kav: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}

}  // namespace kav::cli
