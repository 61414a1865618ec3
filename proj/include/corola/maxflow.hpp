// Copyright 2026 the corola authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <deque>
#include <vector>

namespace corola {

/// s-t max-flow via augmenting paths with source/sink search trees reused
/// across augmentations. Capacities are snapped to a fixed 1e-6 grid so the
/// flow is exact integer arithmetic and termination is unconditional.
class Maxflow {
 public:
  explicit Maxflow(int node_count);

  /// Accumulates terminal capacities for a node.
  void add_terminal(int node, double source_cap, double sink_cap);
  /// Adds a pair of directed residual arcs between a and b.
  void add_edge(int a, int b, double cap_ab, double cap_ba);

  /// Runs the flow and returns its value in original (unscaled) units,
  /// including the constant absorbed when opposing terminal capacities are
  /// merged. Call once.
  double solve();

  /// After solve(): true when the node sits on the source side of the
  /// minimum cut. Nodes unreachable from either terminal report false.
  bool source_side(int node) const;

 private:
  static constexpr double kResolution = 1e-6;
  static constexpr int kNone = -1;
  static constexpr int kTerminal = -2;
  enum class Tree : std::uint8_t { kFree = 0, kSource = 1, kSink = 2 };

  struct Arc {
    int head;
    int next;
    int sister;
    long long rcap;
  };

  static long long snap(double cap);
  bool origin_is_terminal(int node) const;
  void push_active(int node);
  void augment(int connect_arc);
  void adopt();

  int node_count_;
  std::vector<long long> cap_source_;
  std::vector<long long> cap_sink_;
  std::vector<long long> trcap_;
  std::vector<int> first_arc_;
  std::vector<int> parent_arc_;
  std::vector<int> dist_;
  std::vector<Tree> tree_;
  std::vector<std::uint8_t> in_active_;
  std::vector<Arc> arcs_;
  std::deque<int> active_;
  std::deque<int> orphans_;
  long long flow_ = 0;
  long long constant_ = 0;
  bool solved_ = false;
};

}  // namespace corola
