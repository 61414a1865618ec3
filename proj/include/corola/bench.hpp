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
#include <iosfwd>
#include <optional>
#include <vector>

#include "corola/pipeline.hpp"
#include "corola/types.hpp"

namespace corola::bench {

/// Synthetic scene: a rank-r random background with a bouncing rectangle
/// superimposed, plus white noise at the requested signal-to-noise ratio
/// sqrt(var(background) / var(noise)). Frames are affinely mapped to [0, 1]
/// (one global map) and by default quantized onto the 8-bit grid so exported
/// images reproduce the sequence exactly.
struct SyntheticSpec {
  int width = 100;
  int height = 30;
  int frames = 200;
  int rank = 5;
  int object_width = 10;   // 0 disables the object
  int object_height = 6;
  double snr = 10.0;       // infinity disables noise
  std::uint64_t seed = 0;
  bool quantize = true;
};

struct SyntheticSequence {
  std::vector<Frame> frames;
  std::vector<ForegroundMask> truth;
  Eigen::MatrixXd clean_background;  // scaled, m x n
  double offset = 0.0;               // scaled = gain * raw + offset
  double gain = 1.0;
  double empirical_snr = 0.0;        // from the actually sampled noise
};

SyntheticSequence generate(const SyntheticSpec& spec);

/// Left edge of the object on the bounce trajectory (one pixel per frame,
/// reversing at the borders).
int object_column(int frame_index, int image_width, int object_width);

struct ConfusionCounts {
  long tp = 0, fp = 0, tn = 0, fn = 0;
};

ConfusionCounts confusion(const ForegroundMask& predicted, const ForegroundMask& truth);

/// Restricted to pixels where valid != 0.
ConfusionCounts confusion_masked(const ForegroundMask& predicted, const ForegroundMask& truth,
                                 const std::vector<std::uint8_t>& invalid);

/// Empty optionals mark the undefined 0/0 case; both-empty inputs score 1.
struct PrecisionRecall {
  std::optional<double> precision;
  std::optional<double> recall;
};

PrecisionRecall precision_recall(const ConfusionCounts& c);
std::optional<double> f_measure(std::optional<double> precision, std::optional<double> recall);

/// Per-pixel running-median baseline: foreground where
/// |x - median| > k_sigma * sigma_hat.
std::vector<ForegroundMask> threshold_baseline(const std::vector<Frame>& frames,
                                               double k_sigma = 3.0);

struct RunScore {
  double mean_f = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_iterations = 0.0;
  double ms_per_frame = 0.0;
  double converged_within_rank_fraction = 0.0;  // over streamed frames
  double monotone_fraction = 0.0;               // frames without energy rises
  std::vector<double> per_frame_ms;             // one entry per streamed frame
  std::vector<pipeline::EnergyTrace> traces;
  std::vector<ForegroundMask> masks;            // aligned with streamed frames
};

/// Initializes on the first init-count frames, streams the rest, scores
/// pixel F-measure against ground truth for sequence indices >= burn_in.
RunScore score_sequence(const SyntheticSequence& sequence, const pipeline::PipelineParams& params,
                        int burn_in = 25);

/// Baseline F-measure over the same scored range.
double baseline_mean_f(const SyntheticSequence& sequence, int burn_in = 25, double k_sigma = 3.0);

enum class SweepAxis { kSnr, kRank, kObjectSize };

struct SweepPoint {
  double axis_value = 0.0;
  double mean_f = 0.0;
  double mean_precision = 0.0;
  double mean_recall = 0.0;
  double mean_iterations = 0.0;
  double ms_per_frame = 0.0;
  double baseline_mean_f = 0.0;
};

/// One generated sequence and one pipeline run per value; per-point seeds are
/// seed + index. The rank axis varies the assumed rank against the base
/// spec's data; the other axes keep assumed rank equal to the spec rank.
std::vector<SweepPoint> sweep(SweepAxis axis, const std::vector<double>& values,
                              const SyntheticSpec& base, const pipeline::PipelineParams& params,
                              int burn_in = 25);

/// CSV with the fixed header
/// axis_value,mean_f,mean_precision,mean_recall,mean_iters,ms_per_frame.
void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points);

}  // namespace corola::bench
