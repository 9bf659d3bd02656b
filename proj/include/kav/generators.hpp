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

// History generators for tests and benchmarks. All of them are
// deterministic per seed on every platform: they draw raw 64-bit words from
// std::mt19937_64 and never use the implementation-defined distributions.

#pragma once

#include <algorithm>
#include <cstdint>
#include <queue>
#include <random>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "kav/history.hpp"
#include "kav/types.hpp"

namespace kav {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // Uniform in [lo, hi], by rejection.
  std::int64_t Uniform(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % span;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return lo + static_cast<std::int64_t>(x % span);
  }

  // Uniform in [0, 1).
  double Unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  bool Chance(double p) { return Unit() < p; }

  template <typename T>
  void Shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::swap(v[i - 1], v[static_cast<std::size_t>(Uniform(0, static_cast<std::int64_t>(i) - 1))]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

struct GenConfig {
  std::uint64_t seed = 1;
  std::size_t ops = 100;
  double writes_fraction = 0.5;
  std::size_t staleness_k = 1;
  // How far an interval may stretch before and after its commit point,
  // measured in commit slots.
  std::int64_t max_back = 2;
  std::int64_t max_forward = 2;
  std::string key = "x";
};

namespace generators_internal {

// Replaces every endpoint by its rank times two. Equal endpoints are ordered
// by (op, start before finish).
inline void RankEndpoints(History& h) {
  std::vector<std::tuple<Time, OpIndex, int>> e;
  e.reserve(2 * h.ops.size());
  for (OpIndex i = 0; i < h.ops.size(); ++i) {
    e.emplace_back(h.ops[i].start, i, 0);
    e.emplace_back(h.ops[i].finish, i, 1);
  }
  std::sort(e.begin(), e.end());
  for (std::size_t r = 0; r < e.size(); ++r) {
    auto& [t, i, is_finish] = e[r];
    (is_finish ? h.ops[i].finish : h.ops[i].start) = static_cast<Time>(2 * r);
  }
}

}  // namespace generators_internal

// Lays commit points on odd ticks 1, 3, 5, ... and draws every interval
// around its commit point with even endpoints, so no endpoint equals a
// commit point and tie-breaking among equal endpoints cannot reorder an
// endpoint past a commit point. Each read is dictated by one of the last
// `staleness_k` writes before it, so the commit order is a witness that the
// output is staleness_k-atomic.
inline History GenWitnessed(const GenConfig& cfg) {
  if (cfg.staleness_k == 0) throw std::invalid_argument("staleness_k must be positive");
  if (cfg.max_back < 1 || cfg.max_forward < 1) {
    throw std::invalid_argument("interval stretch must be at least 1");
  }
  Rng rng(cfg.seed);
  History h;
  h.key = cfg.key;
  h.ops.reserve(cfg.ops);
  std::vector<OpIndex> writes;
  for (std::size_t i = 0; i < cfg.ops; ++i) {
    const Time commit = 2 * static_cast<Time>(i) + 1;
    Operation op;
    op.id = "op" + std::to_string(i);
    if (writes.empty() || rng.Chance(cfg.writes_fraction)) {
      op.kind = OpKind::kWrite;
      op.value = "v" + std::to_string(writes.size());
      writes.push_back(i);
    } else {
      op.kind = OpKind::kRead;
      const auto window = static_cast<std::int64_t>(std::min(cfg.staleness_k, writes.size()));
      const auto back = rng.Uniform(1, window);
      op.value = h.ops[writes[writes.size() - static_cast<std::size_t>(back)]].value;
    }
    op.start = commit - (2 * rng.Uniform(1, cfg.max_back) - 1);
    op.finish = commit + (2 * rng.Uniform(1, cfg.max_forward) - 1);
    h.ops.push_back(std::move(op));
  }
  generators_internal::RankEndpoints(h);
  return h;
}

// Random anomaly-free history with at most 12 operations, for differential
// testing. Mixes three shapes so that verdicts at k = 1, 2, 3 all occur
// often: commit-point histories of random staleness, intervals from a
// random pairing of endpoints (long, heavily overlapping), and short
// intervals scattered over a line (sparse, so stale reads show).
inline History GenRandomSmall(std::uint64_t seed, std::size_t n) {
  if (n > 12) throw std::invalid_argument("GenRandomSmall supports n <= 12");
  Rng rng(seed * 0x9E3779B97F4A7C15ULL + 0x632BE59BD9B4E019ULL);
  const auto shape = rng.Uniform(0, 2);
  if (shape == 0) {
    GenConfig cfg;
    cfg.seed = rng.Uniform(0, std::numeric_limits<std::int64_t>::max());
    cfg.ops = n;
    cfg.writes_fraction = 0.3 + 0.4 * rng.Unit();
    cfg.staleness_k = static_cast<std::size_t>(rng.Uniform(1, 4));
    cfg.max_back = rng.Uniform(1, 3);
    cfg.max_forward = rng.Uniform(1, 3);
    return GenWitnessed(cfg);
  }

  History h;
  h.key = "x";
  h.ops.resize(n);
  if (shape == 1) {
    std::vector<Time> endpoints(2 * n);
    for (std::size_t i = 0; i < endpoints.size(); ++i) endpoints[i] = static_cast<Time>(2 * i);
    rng.Shuffle(endpoints);
    for (std::size_t i = 0; i < n; ++i) {
      h.ops[i].start = std::min(endpoints[2 * i], endpoints[2 * i + 1]);
      h.ops[i].finish = std::max(endpoints[2 * i], endpoints[2 * i + 1]);
    }
  } else {
    const auto span = static_cast<std::int64_t>(3 * n);
    for (Operation& op : h.ops) {
      op.start = rng.Uniform(0, span);
      op.finish = op.start + rng.Uniform(1, 3);
    }
    generators_internal::RankEndpoints(h);
  }
  const double write_p = 0.3 + 0.4 * rng.Unit();
  for (std::size_t i = 0; i < n; ++i) {
    Operation& op = h.ops[i];
    op.id = "op" + std::to_string(i);
    op.kind = (i == 0 || rng.Chance(write_p)) ? OpKind::kWrite : OpKind::kRead;
  }
  std::size_t written = 0;
  for (Operation& op : h.ops) {
    if (op.is_write()) op.value = "v" + std::to_string(written++);
  }
  for (Operation& op : h.ops) {
    if (!op.is_read()) continue;
    std::vector<const Operation*> eligible;
    for (const Operation& w : h.ops) {
      if (w.is_write() && w.start < op.finish) eligible.push_back(&w);
    }
    if (eligible.empty()) {
      op.kind = OpKind::kWrite;
      op.value = "v" + std::to_string(written++);
      continue;
    }
    op.value = eligible[static_cast<std::size_t>(
                            rng.Uniform(0, static_cast<std::int64_t>(eligible.size()) - 1))]
                   ->value;
  }
  return h;
}

struct QuorumConfig {
  std::uint64_t seed = 1;
  std::size_t replicas = 3;
  std::size_t write_quorum = 2;
  std::size_t read_quorum = 2;
  std::size_t clients = 4;
  std::size_t ops = 100;
  double writes_fraction = 0.5;
  // One-way message latency, uniform over [latency_min, latency_max] ticks.
  std::int64_t latency_min = 1;
  std::int64_t latency_max = 10;
  std::string key = "q";
};

// Discrete-event simulation of a replicated register with non-intersecting
// quorums allowed. A write takes a fresh version, is sent to every replica,
// and completes at the write_quorum-th acknowledgement; replicas keep the
// highest version seen. A read asks every replica and returns the highest
// version among the first read_quorum replies. The initial value comes from
// a synthetic write that finishes before any client starts. Timestamps are
// tick * 2^20 + order of the event within its tick, which keeps them
// distinct and consistent with the simulation's event order.
inline Trace SimulateQuorum(const QuorumConfig& cfg) {
  if (cfg.replicas < 1 || cfg.write_quorum < 1 || cfg.read_quorum < 1 ||
      cfg.write_quorum > cfg.replicas || cfg.read_quorum > cfg.replicas || cfg.clients < 1) {
    throw std::invalid_argument("quorum sizes must satisfy 1 <= W, R <= N");
  }
  if (cfg.latency_min < 1 || cfg.latency_max < cfg.latency_min) {
    throw std::invalid_argument("latency range must satisfy 1 <= min <= max");
  }
  Trace trace;
  if (cfg.ops == 0) return trace;

  Rng rng(cfg.seed);
  constexpr Time kTickScale = Time{1} << 20;

  enum class Ev { kIssue, kReplicaWrite, kWriteAck, kReplicaRead, kReadReply };
  struct Event {
    Time tick;
    std::uint64_t seq;
    Ev type;
    std::size_t target;   // client or replica
    std::size_t op;       // index into pending ops
    std::uint64_t version;
    bool operator>(const Event& o) const { return std::tie(tick, seq) > std::tie(o.tick, o.seq); }
  };
  struct PendingOp {
    std::size_t client;
    bool write;
    std::uint64_t version = 0;
    std::size_t replies = 0;
    Time start = 0;
    bool done = false;
  };

  std::priority_queue<Event, std::vector<Event>, std::greater<>> queue;
  std::uint64_t seq = 0;
  auto schedule = [&](Time tick, Ev type, std::size_t target, std::size_t op,
                      std::uint64_t version) {
    queue.push(Event{tick, seq++, type, target, op, version});
  };
  auto latency = [&] { return rng.Uniform(cfg.latency_min, cfg.latency_max); };

  Time last_tick = -1;
  Time in_tick = 0;
  auto stamp = [&](Time tick) {
    if (tick != last_tick) {
      last_tick = tick;
      in_tick = 0;
    }
    return tick * kTickScale + in_tick++;
  };

  auto record = [&](std::string id, OpKind kind, std::uint64_t version, Time start,
                    Time finish) {
    TraceRecord r;
    r.key = cfg.key;
    r.op.id = std::move(id);
    r.op.kind = kind;
    r.op.value = "v" + std::to_string(version);
    r.op.start = start;
    r.op.finish = finish;
    trace.records.push_back(std::move(r));
  };
  record("init", OpKind::kWrite, 0, 0, 1);

  std::vector<std::uint64_t> stored(cfg.replicas, 0);
  std::vector<PendingOp> pending;
  std::uint64_t next_version = 1;
  std::size_t issued = 0;
  for (std::size_t c = 0; c < cfg.clients; ++c) {
    schedule(1 + rng.Uniform(0, cfg.latency_max), Ev::kIssue, c, 0, 0);
  }

  while (!queue.empty()) {
    const Event e = queue.top();
    queue.pop();
    switch (e.type) {
      case Ev::kIssue: {
        if (issued == cfg.ops) break;
        ++issued;
        PendingOp p;
        p.client = e.target;
        p.write = rng.Chance(cfg.writes_fraction);
        p.start = stamp(e.tick);
        if (p.write) p.version = next_version++;
        pending.push_back(p);
        const std::size_t op = pending.size() - 1;
        for (std::size_t r = 0; r < cfg.replicas; ++r) {
          schedule(e.tick + latency(), p.write ? Ev::kReplicaWrite : Ev::kReplicaRead, r, op,
                   p.version);
        }
        break;
      }
      case Ev::kReplicaWrite:
        stored[e.target] = std::max(stored[e.target], e.version);
        schedule(e.tick + latency(), Ev::kWriteAck, pending[e.op].client, e.op, e.version);
        break;
      case Ev::kReplicaRead:
        schedule(e.tick + latency(), Ev::kReadReply, pending[e.op].client, e.op,
                 stored[e.target]);
        break;
      case Ev::kWriteAck:
      case Ev::kReadReply: {
        PendingOp& p = pending[e.op];
        if (p.done) break;
        const bool is_write = e.type == Ev::kWriteAck;
        if (!is_write) p.version = std::max(p.version, e.version);
        if (++p.replies < (is_write ? cfg.write_quorum : cfg.read_quorum)) break;
        p.done = true;
        record("op" + std::to_string(e.op), is_write ? OpKind::kWrite : OpKind::kRead,
               p.version, p.start, stamp(e.tick));
        schedule(e.tick + rng.Uniform(0, cfg.latency_max), Ev::kIssue, p.client, 0, 0);
        break;
      }
    }
  }
  return trace;
}

}  // namespace kav
