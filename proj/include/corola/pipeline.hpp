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
#include <vector>

#include "corola/lowrank.hpp"
#include "corola/residual.hpp"
#include "corola/types.hpp"

namespace corola::pipeline {

struct PipelineParams {
  int rank = 5;
  double beta1 = 0.01;
  double beta2 = -1.0;   // < 0: adaptive per frame from the residual spread
  double gamma = -1.0;   // < 0: follows beta2
  double alpha = 0.1;    // residual/evidence blend
  int connectivity = 4;
  int max_iterations = 0;  // 0: use rank
  double tolerance = 1e-4;
  int init_frames = 0;  // 0: max(rank, 10)
  std::uint64_t seed = 0;

  int resolved_max_iterations() const { return max_iterations > 0 ? max_iterations : rank; }
  int resolved_init_frames() const {
    return init_frames > 0 ? init_frames : (rank > 10 ? rank : 10);
  }
};

/// Per-frame iteration record. The energy is the model objective with the
/// residual charged on background-labeled pixels:
///   0.5 ||X_bg - (Uv)_bg||^2 + beta1 ||v||^2 + beta2 |s| + gamma * cut(s).
struct EnergyTrace {
  std::vector<double> energies;
  int iterations = 0;
  bool converged = false;           // relative-decrease criterion fired
  bool fallback = false;            // all-foreground frame, threshold mask returned
  int monotonicity_violations = 0;  // steps rising by more than 1e-9
  double beta2 = 0.0;
  double gamma = 0.0;
};

struct FrameResult {
  ForegroundMask mask;
  Frame background;
  EnergyTrace trace;
};

/// Online model: committed basis/coefficients/statistics, the first-iteration
/// snapshot of the latest frame, and the per-pixel residual mixtures.
struct ModelState {
  PipelineParams params;
  int width = 0;
  int height = 0;
  long frame_index = 0;

  lowrank::Basis basis;
  lowrank::Coefficients coeffs;
  lowrank::Accumulators acc;

  lowrank::Basis snap_basis;
  lowrank::Coefficients snap_coeffs;
  lowrank::Accumulators snap_acc;

  residual::GmmState gmm;
  residual::ResidualScale scale;
};

/// Builds the model from a short stationary clip: basis initialization plus
/// one residual observation per clip frame to warm the mixtures.
ModelState initialize_model(const std::vector<Frame>& init_frames, const PipelineParams& params);

/// Runs the alternating loop on one frame: coefficient solve, statistics
/// update, basis pass, residual/evidence blend, graph-cut segmentation;
/// repeats until the relative energy decrease falls under tolerance or the
/// iteration cap is hit. Commits the first-iteration snapshot as the carried
/// model and returns the final mask, the committed background, and the trace.
FrameResult process_frame(ModelState& state, const Frame& frame);

/// Stores the given working set as the state's first-iteration snapshot.
void snapshot_store(ModelState& state, const lowrank::Basis& basis,
                    const lowrank::Coefficients& coeffs, const lowrank::Accumulators& acc);

/// Copies the snapshot into the live model.
void snapshot_commit(ModelState& state);

/// Adaptive sparsity weight: 4.5 * sigma_hat^2 with sigma_hat the scaled
/// median absolute deviation of the raw residual (floored at 1e-3), so the
/// decoupled threshold sits at three sigma.
double adaptive_beta2(const Eigen::VectorXd& raw_residual);

/// Decoupled threshold labeling: foreground where 0.5 * blended^2 > beta2.
ForegroundMask threshold_mask(const Eigen::VectorXd& blended, double beta2);

/// The traced objective; exposed for tests.
double frame_energy(const Frame& frame, const lowrank::Basis& basis,
                    const lowrank::Coefficients& coeffs, const ForegroundMask& mask, double beta1,
                    double beta2, double gamma, int width, int height, int connectivity);

}  // namespace corola::pipeline
