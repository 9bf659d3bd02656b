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

// Core data model: timed read/write operations on a single register.

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace kav {

// Abstract clock ticks. Ingestion maps raw timestamps onto this scale.
using Time = std::int64_t;

// Index of an operation inside History::ops. Algorithms refer to operations
// by index; the opaque string id is only used at I/O boundaries.
using OpIndex = std::size_t;

enum class OpKind { kRead, kWrite };

inline std::string_view ToString(OpKind kind) {
  return kind == OpKind::kRead ? "read" : "write";
}

struct Operation {
  std::string id;
  OpKind kind = OpKind::kWrite;
  std::string value;
  Time start = 0;
  Time finish = 0;

  bool is_read() const { return kind == OpKind::kRead; }
  bool is_write() const { return kind == OpKind::kWrite; }

  friend bool operator==(const Operation&, const Operation&) = default;
};

// `a` precedes `b` iff `a` finishes before `b` starts. Concurrent otherwise.
inline bool Precedes(const Operation& a, const Operation& b) {
  return a.finish < b.start;
}

// All operations on one register.
struct History {
  std::string key;
  std::vector<Operation> ops;

  std::size_t size() const { return ops.size(); }
  bool empty() const { return ops.empty(); }

  friend bool operator==(const History&, const History&) = default;
};

struct TraceRecord {
  std::string key;
  Operation op;
  // Only meaningful on writes of weighted traces.
  std::optional<std::int64_t> weight;

  friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

struct Trace {
  std::vector<TraceRecord> records;
};

// Thrown by the line parser. `line` is 1-based.
class SyntaxError : public std::runtime_error {
 public:
  SyntaxError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Thrown by exhaustive procedures when the instance exceeds the size cap.
class CapExceeded : public std::runtime_error {
 public:
  CapExceeded(std::size_t size, std::size_t cap)
      : std::runtime_error("instance of size " + std::to_string(size) +
                           " exceeds cap " + std::to_string(cap)),
        size_(size),
        cap_(cap) {}

  std::size_t size() const { return size_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t size_;
  std::size_t cap_;
};

}  // namespace kav
