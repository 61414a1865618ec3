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

#include <Eigen/Core>
#include <utility>
#include <vector>

#include "corola/types.hpp"

namespace corola::segmentation {

/// First-order binary MRF on the pixel grid. Label 0 pays unary_background,
/// label 1 pays unary_foreground, and each disagreeing neighbor pair pays
/// gamma.
struct MrfProblem {
  Eigen::VectorXd unary_background;
  Eigen::VectorXd unary_foreground;
  double gamma = 0.0;
  int width = 0;
  int height = 0;
  int connectivity = 4;  // 4 or 8

  int pixel_count() const { return width * height; }
};

struct SegmentStats {
  double flow = 0.0;  // max-flow value; equals the returned labeling's energy
};

/// Exact global minimizer via s-t min-cut; ties resolve toward label 0.
ForegroundMask segment(const MrfProblem& problem, SegmentStats* stats = nullptr);

/// Exact energy of a labeling under the problem.
double energy(const ForegroundMask& mask, const MrfProblem& problem);

/// Exhaustive minimizer for tiny grids (pixel count <= 20); returns the
/// lexicographically smallest minimizer with label 0 preferred.
ForegroundMask brute_force_segment(const MrfProblem& problem);

/// Neighbor pairs (i < k) for the given grid and connectivity.
std::vector<std::pair<int, int>> grid_edges(int width, int height, int connectivity);

}  // namespace corola::segmentation
