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

#include "corola/maxflow.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace corola {

Maxflow::Maxflow(int node_count)
    : node_count_(node_count),
      cap_source_(static_cast<std::size_t>(node_count), 0),
      cap_sink_(static_cast<std::size_t>(node_count), 0),
      trcap_(static_cast<std::size_t>(node_count), 0),
      first_arc_(static_cast<std::size_t>(node_count), kNone),
      parent_arc_(static_cast<std::size_t>(node_count), kNone),
      dist_(static_cast<std::size_t>(node_count), 0),
      tree_(static_cast<std::size_t>(node_count), Tree::kFree),
      in_active_(static_cast<std::size_t>(node_count), 0) {}

long long Maxflow::snap(double cap) {
  if (!(cap >= 0.0) || !std::isfinite(cap))
    throw std::invalid_argument("maxflow capacities must be finite and nonnegative");
  return std::llround(cap / kResolution);
}

void Maxflow::add_terminal(int node, double source_cap, double sink_cap) {
  cap_source_[static_cast<std::size_t>(node)] += snap(source_cap);
  cap_sink_[static_cast<std::size_t>(node)] += snap(sink_cap);
}

void Maxflow::add_edge(int a, int b, double cap_ab, double cap_ba) {
  const long long ab = snap(cap_ab);
  const long long ba = snap(cap_ba);
  if (ab == 0 && ba == 0) return;
  const int e1 = static_cast<int>(arcs_.size());
  const int e2 = e1 + 1;
  arcs_.push_back({b, first_arc_[static_cast<std::size_t>(a)], e2, ab});
  arcs_.push_back({a, first_arc_[static_cast<std::size_t>(b)], e1, ba});
  first_arc_[static_cast<std::size_t>(a)] = e1;
  first_arc_[static_cast<std::size_t>(b)] = e2;
}

void Maxflow::push_active(int node) {
  if (in_active_[static_cast<std::size_t>(node)]) return;
  in_active_[static_cast<std::size_t>(node)] = 1;
  active_.push_back(node);
}

bool Maxflow::origin_is_terminal(int node) const {
  // Walks the parent chain; orphans and free nodes have no terminal origin.
  int u = node;
  while (true) {
    const int pa = parent_arc_[static_cast<std::size_t>(u)];
    if (pa == kTerminal) return true;
    if (pa == kNone) return false;
    u = arcs_[static_cast<std::size_t>(pa)].head;
  }
}

double Maxflow::solve() {
  if (solved_) throw std::logic_error("maxflow solved twice");
  solved_ = true;

  // Merge opposing terminal capacities; the overlap flows unconditionally.
  for (int i = 0; i < node_count_; ++i) {
    const std::size_t s = static_cast<std::size_t>(i);
    constant_ += std::min(cap_source_[s], cap_sink_[s]);
    trcap_[s] = cap_source_[s] - cap_sink_[s];
    if (trcap_[s] > 0) {
      tree_[s] = Tree::kSource;
      parent_arc_[s] = kTerminal;
      dist_[s] = 1;
      push_active(i);
    } else if (trcap_[s] < 0) {
      tree_[s] = Tree::kSink;
      parent_arc_[s] = kTerminal;
      dist_[s] = 1;
      push_active(i);
    }
  }

  while (!active_.empty()) {
    const int i = active_.front();
    active_.pop_front();
    in_active_[static_cast<std::size_t>(i)] = 0;
    const Tree t = tree_[static_cast<std::size_t>(i)];
    if (t == Tree::kFree) continue;

    bool augmented = false;
    for (int a = first_arc_[static_cast<std::size_t>(i)]; a != kNone;
         a = arcs_[static_cast<std::size_t>(a)].next) {
      const Arc& arc = arcs_[static_cast<std::size_t>(a)];
      // Residual must allow flow away from the source tree or toward the
      // sink tree.
      const long long residual =
          t == Tree::kSource ? arc.rcap : arcs_[static_cast<std::size_t>(arc.sister)].rcap;
      if (residual <= 0) continue;
      const int j = arc.head;
      const Tree tj = tree_[static_cast<std::size_t>(j)];
      if (tj == Tree::kFree) {
        tree_[static_cast<std::size_t>(j)] = t;
        parent_arc_[static_cast<std::size_t>(j)] = arc.sister;
        dist_[static_cast<std::size_t>(j)] = dist_[static_cast<std::size_t>(i)] + 1;
        push_active(j);
      } else if (tj != t) {
        // Trees meet: the connecting arc runs from the source side to the
        // sink side.
        const int connect = t == Tree::kSource ? a : arc.sister;
        augment(connect);
        adopt();
        augmented = true;
        break;
      }
    }
    if (augmented && tree_[static_cast<std::size_t>(i)] != Tree::kFree) push_active(i);
  }
  return static_cast<double>(constant_ + flow_) * kResolution;
}

void Maxflow::augment(int connect_arc) {
  Arc& connect = arcs_[static_cast<std::size_t>(connect_arc)];
  long long bottleneck = connect.rcap;

  // Source-side walk from the tail of the connecting arc to its root.
  int u = arcs_[static_cast<std::size_t>(connect.sister)].head;
  while (parent_arc_[static_cast<std::size_t>(u)] != kTerminal) {
    const int pa = parent_arc_[static_cast<std::size_t>(u)];
    bottleneck = std::min(bottleneck,
                          arcs_[static_cast<std::size_t>(arcs_[static_cast<std::size_t>(pa)].sister)].rcap);
    u = arcs_[static_cast<std::size_t>(pa)].head;
  }
  bottleneck = std::min(bottleneck, trcap_[static_cast<std::size_t>(u)]);

  // Sink-side walk from the head of the connecting arc to its root.
  int v = connect.head;
  while (parent_arc_[static_cast<std::size_t>(v)] != kTerminal) {
    const int pa = parent_arc_[static_cast<std::size_t>(v)];
    bottleneck = std::min(bottleneck, arcs_[static_cast<std::size_t>(pa)].rcap);
    v = arcs_[static_cast<std::size_t>(pa)].head;
  }
  bottleneck = std::min(bottleneck, -trcap_[static_cast<std::size_t>(v)]);

  connect.rcap -= bottleneck;
  arcs_[static_cast<std::size_t>(connect.sister)].rcap += bottleneck;

  u = arcs_[static_cast<std::size_t>(connect.sister)].head;
  while (parent_arc_[static_cast<std::size_t>(u)] != kTerminal) {
    const int pa = parent_arc_[static_cast<std::size_t>(u)];
    Arc& toward_parent = arcs_[static_cast<std::size_t>(pa)];
    Arc& from_parent = arcs_[static_cast<std::size_t>(toward_parent.sister)];
    from_parent.rcap -= bottleneck;
    toward_parent.rcap += bottleneck;
    const int next = toward_parent.head;
    if (from_parent.rcap == 0) {
      parent_arc_[static_cast<std::size_t>(u)] = kNone;
      orphans_.push_back(u);
    }
    u = next;
  }
  trcap_[static_cast<std::size_t>(u)] -= bottleneck;
  if (trcap_[static_cast<std::size_t>(u)] == 0) {
    parent_arc_[static_cast<std::size_t>(u)] = kNone;
    orphans_.push_back(u);
  }

  v = connect.head;
  while (parent_arc_[static_cast<std::size_t>(v)] != kTerminal) {
    const int pa = parent_arc_[static_cast<std::size_t>(v)];
    Arc& toward_parent = arcs_[static_cast<std::size_t>(pa)];
    Arc& from_parent = arcs_[static_cast<std::size_t>(toward_parent.sister)];
    toward_parent.rcap -= bottleneck;
    from_parent.rcap += bottleneck;
    const int next = toward_parent.head;
    if (toward_parent.rcap == 0) {
      parent_arc_[static_cast<std::size_t>(v)] = kNone;
      orphans_.push_back(v);
    }
    v = next;
  }
  trcap_[static_cast<std::size_t>(v)] += bottleneck;
  if (trcap_[static_cast<std::size_t>(v)] == 0) {
    parent_arc_[static_cast<std::size_t>(v)] = kNone;
    orphans_.push_back(v);
  }

  flow_ += bottleneck;
}

void Maxflow::adopt() {
  while (!orphans_.empty()) {
    const int o = orphans_.front();
    orphans_.pop_front();
    const Tree t = tree_[static_cast<std::size_t>(o)];

    // Look for a new parent in the same tree with residual toward the
    // orphan and a chain that still reaches a terminal.
    int best_arc = kNone;
    int best_dist = 0;
    for (int a = first_arc_[static_cast<std::size_t>(o)]; a != kNone;
         a = arcs_[static_cast<std::size_t>(a)].next) {
      const Arc& arc = arcs_[static_cast<std::size_t>(a)];
      const int j = arc.head;
      if (tree_[static_cast<std::size_t>(j)] != t) continue;
      const long long residual =
          t == Tree::kSource ? arcs_[static_cast<std::size_t>(arc.sister)].rcap : arc.rcap;
      if (residual <= 0) continue;
      if (!origin_is_terminal(j)) continue;
      const int candidate_dist = dist_[static_cast<std::size_t>(j)] + 1;
      if (best_arc == kNone || candidate_dist < best_dist) {
        best_arc = a;
        best_dist = candidate_dist;
      }
    }

    if (best_arc != kNone) {
      parent_arc_[static_cast<std::size_t>(o)] = best_arc;
      dist_[static_cast<std::size_t>(o)] = best_dist;
      continue;
    }

    // No parent: the orphan leaves its tree. Neighbors that pointed at it
    // become orphans; neighbors that could grow toward it become active.
    for (int a = first_arc_[static_cast<std::size_t>(o)]; a != kNone;
         a = arcs_[static_cast<std::size_t>(a)].next) {
      const Arc& arc = arcs_[static_cast<std::size_t>(a)];
      const int j = arc.head;
      if (tree_[static_cast<std::size_t>(j)] != t) continue;
      const long long residual =
          t == Tree::kSource ? arcs_[static_cast<std::size_t>(arc.sister)].rcap : arc.rcap;
      if (residual > 0) push_active(j);
      if (parent_arc_[static_cast<std::size_t>(j)] == arc.sister) {
        parent_arc_[static_cast<std::size_t>(j)] = kNone;
        orphans_.push_back(j);
      }
    }
    tree_[static_cast<std::size_t>(o)] = Tree::kFree;
  }
}

bool Maxflow::source_side(int node) const {
  return tree_[static_cast<std::size_t>(node)] == Tree::kSource;
}

}  // namespace corola
