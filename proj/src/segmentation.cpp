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

#include "corola/segmentation.hpp"

#include <cmath>

#include "corola/maxflow.hpp"

namespace corola::segmentation {
namespace {

void validate(const MrfProblem& p) {
  const int m = p.pixel_count();
  if (p.width < 1 || p.height < 1) throw DimensionError("mrf grid dimensions must be positive");
  if (p.unary_background.size() != m || p.unary_foreground.size() != m)
    throw DimensionError("mrf unary cost length does not match grid");
  if (p.connectivity != 4 && p.connectivity != 8)
    throw DimensionError("mrf connectivity must be 4 or 8");
  if (!std::isfinite(p.gamma) || p.gamma < 0.0) throw NumericalError("mrf gamma must be finite and >= 0");
  for (int i = 0; i < m; ++i) {
    const double bg = p.unary_background[i];
    const double fg = p.unary_foreground[i];
    if (!std::isfinite(bg) || !std::isfinite(fg) || bg < 0.0 || fg < 0.0)
      throw NumericalError("mrf unary costs must be finite and >= 0");
  }
}

}  // namespace

std::vector<std::pair<int, int>> grid_edges(int width, int height, int connectivity) {
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(width) * height * (connectivity == 8 ? 4 : 2));
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      const int i = y * width + x;
      if (x + 1 < width) edges.emplace_back(i, i + 1);
      if (y + 1 < height) edges.emplace_back(i, i + width);
      if (connectivity == 8) {
        if (x + 1 < width && y + 1 < height) edges.emplace_back(i, i + width + 1);
        if (x > 0 && y + 1 < height) edges.emplace_back(i, i + width - 1);
      }
    }
  }
  return edges;
}

ForegroundMask segment(const MrfProblem& problem, SegmentStats* stats) {
  validate(problem);
  const int m = problem.pixel_count();

  // Cutting the source link assigns label 0 and pays the background unary;
  // cutting the sink link assigns label 1 and pays the foreground unary.
  Maxflow flow(m);
  for (int i = 0; i < m; ++i)
    flow.add_terminal(i, problem.unary_background[i], problem.unary_foreground[i]);
  if (problem.gamma > 0.0)
    for (const auto& [a, b] : grid_edges(problem.width, problem.height, problem.connectivity))
      flow.add_edge(a, b, problem.gamma, problem.gamma);

  const double value = flow.solve();
  if (stats) stats->flow = value;

  ForegroundMask mask;
  mask.bits.resize(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) mask.bits[static_cast<std::size_t>(i)] = flow.source_side(i) ? 1 : 0;
  return mask;
}

double energy(const ForegroundMask& mask, const MrfProblem& problem) {
  const int m = problem.pixel_count();
  if (mask.size() != m) throw DimensionError("mask length does not match mrf grid");
  double total = 0.0;
  for (int i = 0; i < m; ++i)
    total += mask.bits[static_cast<std::size_t>(i)] ? problem.unary_foreground[i]
                                                    : problem.unary_background[i];
  if (problem.gamma > 0.0) {
    long disagreements = 0;
    for (const auto& [a, b] : grid_edges(problem.width, problem.height, problem.connectivity))
      disagreements += mask.bits[static_cast<std::size_t>(a)] != mask.bits[static_cast<std::size_t>(b)];
    total += problem.gamma * static_cast<double>(disagreements);
  }
  return total;
}

ForegroundMask brute_force_segment(const MrfProblem& problem) {
  validate(problem);
  const int m = problem.pixel_count();
  if (m > 20) throw DimensionError("brute-force segmentation capped at 20 pixels");
  const auto edges = grid_edges(problem.width, problem.height, problem.connectivity);

  ForegroundMask best;
  best.bits.assign(static_cast<std::size_t>(m), 0);
  double best_energy = energy(best, problem);

  ForegroundMask candidate;
  candidate.bits.resize(static_cast<std::size_t>(m));
  // Enumerate with pixel 0 as the most significant bit so increasing codes
  // follow lexicographic mask order; keeping strict improvements then yields
  // the lexicographically smallest minimizer.
  const std::uint32_t total = 1u << m;
  for (std::uint32_t code = 1; code < total; ++code) {
    for (int i = 0; i < m; ++i)
      candidate.bits[static_cast<std::size_t>(i)] = (code >> (m - 1 - i)) & 1u;
    double value = 0.0;
    for (int i = 0; i < m; ++i)
      value += candidate.bits[static_cast<std::size_t>(i)] ? problem.unary_foreground[i]
                                                           : problem.unary_background[i];
    for (const auto& [a, b] : edges)
      if (candidate.bits[static_cast<std::size_t>(a)] != candidate.bits[static_cast<std::size_t>(b)])
        value += problem.gamma;
    if (value < best_energy) {
      best_energy = value;
      best = candidate;
    }
  }
  return best;
}

}  // namespace corola::segmentation
