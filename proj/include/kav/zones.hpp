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

// Clusters, zones, and the zone-based 1-atomicity test.
//
// A cluster is a write together with its dictated reads. Its zone spans from
// the minimum finish time of any member (min_finish) to the maximum start
// time of any member (max_start). The zone is forward when
// min_finish < max_start and backward otherwise. A normalized history is
// 1-atomic iff no two forward zones overlap and no backward zone lies inside
// a forward zone.

#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "kav/history.hpp"
#include "kav/verdict.hpp"

namespace kav {

struct Cluster {
  OpIndex write = 0;
  std::vector<OpIndex> reads;
};

struct Zone {
  enum class Kind { kForward, kBackward };

  std::string cluster_value;
  OpIndex write = 0;
  Time min_finish = 0;
  Time max_start = 0;
  Kind kind = Kind::kBackward;
  Time low = 0;
  Time high = 0;

  bool forward() const { return kind == Kind::kForward; }
};

// One cluster per write, in history order.
inline std::vector<Cluster> Clusters(const History& h) {
  HistoryIndex index(h);
  std::vector<Cluster> out;
  out.reserve(index.writes.size());
  for (OpIndex w : index.writes) out.push_back({w, index.dictated[w]});
  return out;
}

inline Zone MakeZone(const History& h, const Cluster& c) {
  const Operation& w = h.ops[c.write];
  Zone z;
  z.cluster_value = w.value;
  z.write = c.write;
  z.min_finish = w.finish;
  z.max_start = w.start;
  for (OpIndex r : c.reads) {
    z.min_finish = std::min(z.min_finish, h.ops[r].finish);
    z.max_start = std::max(z.max_start, h.ops[r].start);
  }
  z.kind = z.min_finish < z.max_start ? Zone::Kind::kForward : Zone::Kind::kBackward;
  z.low = std::min(z.min_finish, z.max_start);
  z.high = std::max(z.min_finish, z.max_start);
  return z;
}

inline std::vector<Zone> Zones(const History& h) {
  std::vector<Zone> out;
  for (const Cluster& c : Clusters(h)) out.push_back(MakeZone(h, c));
  return out;
}

// Closed-interval overlap.
inline bool ZonesOverlap(const Zone& a, const Zone& b) {
  return a.low <= b.high && b.low <= a.high;
}

inline bool ZoneContains(const Zone& outer, const Zone& inner) {
  return outer.low < inner.low && inner.high < outer.high;
}

// Requires a normalized history. Sorts forward zones by low endpoint and
// sweeps once; on NO the certificate names the writes of the violating pair.
inline Verdict Check1Atomic(const History& h) {
  Verdict v;
  std::vector<Zone> forward;
  std::vector<Zone> backward;
  for (Zone& z : Zones(h)) {
    (z.forward() ? forward : backward).push_back(std::move(z));
  }
  auto by_low = [&v](const Zone& a, const Zone& b) {
    ++v.stats.steps;
    return a.low < b.low;
  };
  std::sort(forward.begin(), forward.end(), by_low);

  // Any overlap among intervals sorted by low shows up against the interval
  // with the largest high seen so far.
  std::size_t reach = 0;
  for (std::size_t i = 1; i < forward.size(); ++i) {
    ++v.stats.steps;
    if (forward[i].low <= forward[reach].high) {
      v.answer = Answer::kNo;
      v.certificate = Certificate{Certificate::Kind::kOverlappingForwardZones,
                                  {forward[reach].write, forward[i].write}};
      return v;
    }
    if (forward[i].high > forward[reach].high) reach = i;
  }

  // Forward zones are now pairwise disjoint, so the only candidate container
  // of a backward zone is the last forward zone starting before it.
  for (const Zone& b : backward) {
    auto it = std::upper_bound(forward.begin(), forward.end(), b.low,
                               [&v](Time t, const Zone& z) {
                                 ++v.stats.steps;
                                 return t < z.low;
                               });
    if (it == forward.begin()) continue;
    const Zone& f = *std::prev(it);
    if (ZoneContains(f, b)) {
      v.answer = Answer::kNo;
      v.certificate = Certificate{Certificate::Kind::kBackwardZoneInsideForward,
                                  {f.write, b.write}};
      return v;
    }
  }
  v.answer = Answer::kYes;
  return v;
}

}  // namespace kav
