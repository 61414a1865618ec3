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
#include <vector>

#include "corola/types.hpp"

namespace corola::residual {

/// Signed difference frame - background, with the unclamped reconstruction.
Eigen::VectorXd compute_residual(const Frame& frame, const Eigen::VectorXd& background);

struct GmmParams {
  int components = 3;
  double learning_rate = 0.01;
  double match_sigma = 2.5;       // match gate in sigma units
  double background_weight = 0.7; // cumulative weight marking the background set
  double initial_variance = 0.0225;
  double variance_floor = 1e-4;
  double replacement_weight = 0.05;
};

/// One adaptive Gaussian mixture per pixel over residual values, flattened
/// as [pixel * components + k]. Fresh pixels carry a single full-weight
/// component centered at zero.
struct GmmState {
  GmmParams params;
  int pixel_count = 0;
  std::vector<double> weight;
  std::vector<double> mean;
  std::vector<double> variance;

  GmmState() = default;
  GmmState(int pixels, GmmParams p = {});

  /// Reset one pixel to a single component centered at zero.
  void reset_pixel(int pixel);
};

/// Updates every pixel's mixture with its residual sample and returns the
/// outlier evidence: |e_i| where the sample matched no background-set
/// component, 0 elsewhere. Input is expected pre-normalized to roughly
/// unit scale (|e| <= 1).
Eigen::VectorXd gmm_observe(GmmState& state, const Eigen::VectorXd& e);

/// Evidence only, without learning: the same match test against the frozen
/// mixtures. gmm_observe(state, e) returns exactly gmm_evidence(state, e)
/// evaluated before the update.
Eigen::VectorXd gmm_evidence(const GmmState& state, const Eigen::VectorXd& e);

/// ehat_i = |alpha * e_i + (1 - alpha) * evidence_i|.
Eigen::VectorXd blend(const Eigen::VectorXd& e, const Eigen::VectorXd& evidence, double alpha);

/// Running scale for residual normalization: exponential moving average of
/// the per-frame 99th percentile of |e|, clamped below at 0.1.
class ResidualScale {
 public:
  /// Absorbs one frame's residual and returns the scale to divide by.
  double update(const Eigen::VectorXd& e);
  double current() const { return ema_ < kFloor ? kFloor : ema_; }

 private:
  static constexpr double kFloor = 0.1;
  static constexpr double kSmoothing = 0.05;
  double ema_ = -1.0;
};

}  // namespace corola::residual
