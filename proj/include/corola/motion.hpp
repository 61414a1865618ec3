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
#include <string>
#include <vector>

#include "corola/pipeline.hpp"
#include "corola/types.hpp"

namespace corola::motion {

/// 2x3 affine map from previous-frame coordinates to current-frame
/// coordinates: (x', y') = (a11 x + a12 y + tx, a21 x + a22 y + ty).
struct AffineTransform {
  double a11 = 1.0, a12 = 0.0, tx = 0.0;
  double a21 = 0.0, a22 = 1.0, ty = 0.0;

  static AffineTransform identity() { return {}; }
  double det() const { return a11 * a22 - a12 * a21; }
  bool valid() const;
  AffineTransform inverse() const;
  /// Composition this ∘ inner (apply inner first).
  AffineTransform compose(const AffineTransform& inner) const;
  void apply(double x, double y, double& out_x, double& out_y) const;
  bool operator==(const AffineTransform&) const = default;
};

/// Warp bookkeeping: which destination pixels had no source, overall
/// fraction, and the per-image-column missing counts.
struct WarpReport {
  double missing_fraction = 0.0;
  std::vector<std::uint8_t> missing;
  std::vector<int> missing_per_column;
};

/// Least-squares affine registration of prev onto cur: 3-level pyramid,
/// inverse-compositional Gauss-Newton, at most 50 iterations per level.
/// Returns identity when the fit does not improve on it; throws
/// EstimationError when the SSD rises five iterations in a row.
AffineTransform estimate_affine(const Frame& prev, const Frame& cur);

/// Warps one flattened image column by tau (bilinear); optionally flags
/// destination pixels whose source falls outside the grid.
Eigen::VectorXd warp_bilinear(const Eigen::VectorXd& values, int width, int height,
                              const AffineTransform& tau, std::vector<std::uint8_t>* missing = nullptr);

/// Moves the model under camera motion: basis and statistics columns are
/// warped bilinearly, per-pixel mixtures move by nearest neighbor, the
/// coefficient statistics A and the coefficients stay put.
WarpReport warp_model(pipeline::ModelState& state, const AffineTransform& tau);

/// Replaces out-of-view basis entries with the rank-one estimate from the
/// current frame and the carried coefficients, and out-of-view statistics
/// entries with the corresponding reconstruction; fills are rescaled into
/// the surviving entries' range. Missing mixtures restart at zero.
void fill_missing(pipeline::ModelState& state, const Frame& frame,
                  const std::vector<std::uint8_t>& missing);

/// Warp + fill + the static per-frame step.
pipeline::FrameResult process_frame_moving(pipeline::ModelState& state, const Frame& frame,
                                           const AffineTransform& tau,
                                           WarpReport* report = nullptr);

/// Sidecar transform file: one line per frame, six whitespace-separated
/// values (a11 a12 tx a21 a22 ty), row-major.
std::vector<AffineTransform> read_transform_file(const std::string& path);
void write_transform_file(const std::string& path, const std::vector<AffineTransform>& transforms);

}  // namespace corola::motion
