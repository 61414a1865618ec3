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
#include <cstdint>
#include <tuple>
#include <vector>

#include "corola/types.hpp"

namespace corola::lowrank {

/// Background basis, one column per mode (m x r).
struct Basis {
  Eigen::MatrixXd columns;
  int rank() const { return static_cast<int>(columns.cols()); }
  int pixel_count() const { return static_cast<int>(columns.rows()); }
};

struct Coefficients {
  Eigen::VectorXd values;
};

/// Cumulative second-order statistics over past (coefficients, frame) pairs.
/// A collects v v^T for every absorbed frame; rows of B collect x_i v^T only
/// while pixel i is labeled background.
struct Accumulators {
  Eigen::MatrixXd a;  // r x r
  Eigen::MatrixXd b;  // m x r
  long frames_absorbed = 0;

  static Accumulators zero(int pixel_count, int rank);
};

struct InitOptions {
  int oversampling = 8;
  int power_iterations = 3;
  int max_frames = 25;
  std::uint64_t seed = 0;
};

/// Batch initialization from a short clip: the basis is the top-r left
/// singular subspace of the stacked frames (randomized subspace iteration),
/// after which every clip frame is absorbed into the statistics with an
/// all-background mask. Returns the basis, the statistics, and the last
/// frame's coefficients.
std::tuple<Basis, Accumulators, Coefficients> initialize_basis(
    const std::vector<Frame>& frames, int rank, double beta1, const InitOptions& options = {});

/// Ridge least squares restricted to background-labeled pixels (bits == 0):
/// argmin_v 0.5 * ||X_bg - U_bg v||^2 + beta1 * ||v||^2. Falls back to the
/// pseudoinverse solution when beta1 == 0 and the Gram matrix is singular.
Coefficients solve_coefficients(const Basis& basis, const Frame& frame, const ForegroundMask& mask,
                                double beta1);

/// A += v v^T (all pixels); B rows += x_i v^T for background-labeled i only.
/// frames_absorbed advances only when count_frame is set.
void update_accumulators(Accumulators& acc, const Coefficients& v, const Frame& frame,
                         const ForegroundMask& mask, bool count_frame);

/// One block-coordinate pass over basis columns against the accumulated
/// statistics; rows currently labeled foreground stay fixed. Each column step
/// exactly minimizes the surrogate over that column's free entries, so the
/// surrogate never increases.
void update_basis(Basis& basis, const Accumulators& acc, const ForegroundMask& mask, double beta1);

/// The quadratic surrogate the basis pass descends on, restricted to
/// background-labeled rows: 0.5 tr(U (A + beta1 I) U^T) - tr(U^T B).
double basis_surrogate(const Basis& basis, const Accumulators& acc, const ForegroundMask& mask,
                       double beta1);

/// Raw reconstruction U v, unclamped (used for residuals).
Eigen::VectorXd reconstruct(const Basis& basis, const Coefficients& v);

/// Reconstruction clamped to [0, 1] for emission as an image.
Frame reconstruct_background(const Basis& basis, const Coefficients& v, int width, int height);

}  // namespace corola::lowrank
