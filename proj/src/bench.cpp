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

#include "corola/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "corola/pgm.hpp"

namespace corola::bench {
namespace {

double population_variance(const Eigen::MatrixXd& m) {
  const double mean = m.mean();
  return (m.array() - mean).square().sum() / static_cast<double>(m.size());
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  return v[mid];
}

}  // namespace

int object_column(int frame_index, int image_width, int object_width) {
  const int span = image_width - object_width;
  if (span <= 0) return 0;
  const int period = 2 * span;
  const int phase = frame_index % period;
  return phase <= span ? phase : period - phase;
}

SyntheticSequence generate(const SyntheticSpec& spec) {
  if (spec.width < 1 || spec.height < 1 || spec.frames < 1)
    throw DimensionError("synthetic dimensions must be positive");
  if (spec.rank < 1) throw DimensionError("synthetic rank must be positive");
  if (!(spec.snr > 0.0)) throw NumericalError("snr must be positive");
  const bool with_object = spec.object_width > 0 && spec.object_height > 0;
  if (with_object && (spec.object_width > spec.width || spec.object_height > spec.height))
    throw DimensionError("object does not fit inside the image");

  const int m = spec.width * spec.height;
  const int n = spec.frames;
  Rng rng(spec.seed);

  Eigen::MatrixXd u(m, spec.rank);
  for (Eigen::Index j = 0; j < u.cols(); ++j)
    for (Eigen::Index i = 0; i < u.rows(); ++i) u(i, j) = rng.normal();
  Eigen::MatrixXd v(spec.rank, n);
  for (Eigen::Index j = 0; j < v.cols(); ++j)
    for (Eigen::Index i = 0; i < v.rows(); ++i) v(i, j) = rng.normal();
  const Eigen::MatrixXd background = u * v;

  const double var_b = population_variance(background);
  // Object intensities land in the background's bulk range so contrast is
  // nontrivial but not extreme.
  std::vector<double> flat(background.data(), background.data() + background.size());
  std::vector<double> tmp = flat;
  std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(tmp.size() / 20), tmp.end());
  const double p5 = tmp[tmp.size() / 20];
  tmp = flat;
  const std::size_t i95 = tmp.size() - 1 - tmp.size() / 20;
  std::nth_element(tmp.begin(), tmp.begin() + static_cast<std::ptrdiff_t>(i95), tmp.end());
  const double p95 = tmp[i95];

  Eigen::MatrixXd data = background;
  std::vector<ForegroundMask> truth(static_cast<std::size_t>(n));
  const int object_row = with_object ? (spec.height - spec.object_height) / 2 : 0;
  for (int j = 0; j < n; ++j) {
    auto& mask = truth[static_cast<std::size_t>(j)];
    mask.bits.assign(static_cast<std::size_t>(m), 0);
    if (!with_object) continue;
    const int col = object_column(j, spec.width, spec.object_width);
    for (int dy = 0; dy < spec.object_height; ++dy) {
      for (int dx = 0; dx < spec.object_width; ++dx) {
        const int p = (object_row + dy) * spec.width + col + dx;
        data(p, j) = p5 + rng.uniform() * (p95 - p5);
        mask.bits[static_cast<std::size_t>(p)] = 1;
      }
    }
  }

  double empirical_snr = std::numeric_limits<double>::infinity();
  if (std::isfinite(spec.snr)) {
    const double noise_sigma = std::sqrt(var_b) / spec.snr;
    double noise_sq = 0.0, noise_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      for (int i = 0; i < m; ++i) {
        const double e = noise_sigma * rng.normal();
        data(i, j) += e;
        noise_sq += e * e;
        noise_sum += e;
      }
    }
    const double count = static_cast<double>(m) * n;
    const double noise_var = noise_sq / count - (noise_sum / count) * (noise_sum / count);
    empirical_snr = std::sqrt(var_b / noise_var);
  }

  const double lo = data.minCoeff();
  const double hi = data.maxCoeff();
  if (!(hi > lo)) throw DegenerateInputError("synthetic data is constant");
  const double gain = 1.0 / (hi - lo);
  const double offset = -lo * gain;

  SyntheticSequence seq;
  seq.gain = gain;
  seq.offset = offset;
  seq.empirical_snr = empirical_snr;
  seq.clean_background = (gain * background).array() + offset;
  seq.truth = std::move(truth);
  seq.frames.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    Frame f;
    f.width = spec.width;
    f.height = spec.height;
    f.pixels = (gain * data.col(j)).array() + offset;
    if (spec.quantize) f = quantize_frame(f);
    seq.frames.push_back(std::move(f));
  }
  return seq;
}

ConfusionCounts confusion(const ForegroundMask& predicted, const ForegroundMask& truth) {
  if (predicted.size() != truth.size()) throw DimensionError("mask sizes differ");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.bits.size(); ++i) {
    const bool p = predicted.bits[i] != 0;
    const bool t = truth.bits[i] != 0;
    if (p && t)
      ++c.tp;
    else if (p && !t)
      ++c.fp;
    else if (!p && t)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

ConfusionCounts confusion_masked(const ForegroundMask& predicted, const ForegroundMask& truth,
                                 const std::vector<std::uint8_t>& invalid) {
  if (predicted.size() != truth.size() || predicted.bits.size() != invalid.size())
    throw DimensionError("mask sizes differ");
  ConfusionCounts c;
  for (std::size_t i = 0; i < predicted.bits.size(); ++i) {
    if (invalid[i]) continue;
    const bool p = predicted.bits[i] != 0;
    const bool t = truth.bits[i] != 0;
    if (p && t)
      ++c.tp;
    else if (p && !t)
      ++c.fp;
    else if (!p && t)
      ++c.fn;
    else
      ++c.tn;
  }
  return c;
}

PrecisionRecall precision_recall(const ConfusionCounts& c) {
  PrecisionRecall pr;
  if (c.tp + c.fp > 0)
    pr.precision = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
  else if (c.fn == 0)
    pr.precision = 1.0;  // nothing to find, nothing predicted
  if (c.tp + c.fn > 0)
    pr.recall = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  else if (c.fp == 0)
    pr.recall = 1.0;
  return pr;
}

std::optional<double> f_measure(std::optional<double> precision, std::optional<double> recall) {
  if (!precision.has_value() || !recall.has_value()) return std::nullopt;
  const double p = *precision;
  const double r = *recall;
  if (p + r <= 0.0) return 0.0;
  return 2.0 * p * r / (p + r);
}

std::vector<ForegroundMask> threshold_baseline(const std::vector<Frame>& frames, double k_sigma) {
  std::vector<ForegroundMask> masks;
  if (frames.empty()) return masks;
  const int m = frames[0].count();
  Eigen::VectorXd median = frames[0].pixels;
  const double step = 1.0 / 255.0;
  masks.reserve(frames.size());
  for (const Frame& f : frames) {
    if (f.count() != m) throw DimensionError("baseline frames have mixed sizes");
    const Eigen::VectorXd residual = f.pixels - median;
    std::vector<double> mags(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) mags[static_cast<std::size_t>(i)] = std::abs(residual[i]);
    double sigma = 1.4826 * median_of(mags);
    if (sigma < 1e-3) sigma = 1e-3;
    ForegroundMask mask;
    mask.bits.resize(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      mask.bits[static_cast<std::size_t>(i)] = std::abs(residual[i]) > k_sigma * sigma ? 1 : 0;
    masks.push_back(std::move(mask));
    // Sign-step median tracker.
    for (int i = 0; i < m; ++i) {
      if (residual[i] > 0)
        median[i] += step;
      else if (residual[i] < 0)
        median[i] -= step;
    }
  }
  return masks;
}

RunScore score_sequence(const SyntheticSequence& sequence, const pipeline::PipelineParams& params,
                        int burn_in) {
  const int n = static_cast<int>(sequence.frames.size());
  const int init_count = std::min(params.resolved_init_frames(), n - 1);
  std::vector<Frame> init(sequence.frames.begin(), sequence.frames.begin() + init_count);
  pipeline::ModelState state = pipeline::initialize_model(init, params);

  RunScore score;
  std::vector<double> fs, ps, rs, iters;
  long converged_within = 0, monotone = 0, streamed = 0;
  for (int j = init_count; j < n; ++j) {
    const auto start = std::chrono::steady_clock::now();
    pipeline::FrameResult result = pipeline::process_frame(state, sequence.frames[static_cast<std::size_t>(j)]);
    const auto stop = std::chrono::steady_clock::now();
    score.per_frame_ms.push_back(std::chrono::duration<double, std::milli>(stop - start).count());
    ++streamed;
    if (result.trace.converged && result.trace.iterations <= params.rank) ++converged_within;
    if (result.trace.monotonicity_violations == 0) ++monotone;
    score.traces.push_back(result.trace);
    score.masks.push_back(result.mask);

    if (j < burn_in) continue;
    const auto pr = precision_recall(confusion(result.mask, sequence.truth[static_cast<std::size_t>(j)]));
    const auto f = f_measure(pr.precision, pr.recall);
    if (f.has_value()) fs.push_back(*f);
    if (pr.precision.has_value()) ps.push_back(*pr.precision);
    if (pr.recall.has_value()) rs.push_back(*pr.recall);
    iters.push_back(static_cast<double>(result.trace.iterations));
  }
  score.mean_f = mean_of(fs);
  score.mean_precision = mean_of(ps);
  score.mean_recall = mean_of(rs);
  score.mean_iterations = mean_of(iters);
  score.ms_per_frame = mean_of(score.per_frame_ms);
  score.converged_within_rank_fraction =
      streamed > 0 ? static_cast<double>(converged_within) / static_cast<double>(streamed) : 0.0;
  score.monotone_fraction =
      streamed > 0 ? static_cast<double>(monotone) / static_cast<double>(streamed) : 0.0;
  return score;
}

double baseline_mean_f(const SyntheticSequence& sequence, int burn_in, double k_sigma) {
  const auto masks = threshold_baseline(sequence.frames, k_sigma);
  std::vector<double> fs;
  for (std::size_t j = static_cast<std::size_t>(burn_in); j < masks.size(); ++j) {
    const auto pr = precision_recall(confusion(masks[j], sequence.truth[j]));
    const auto f = f_measure(pr.precision, pr.recall);
    if (f.has_value()) fs.push_back(*f);
  }
  return mean_of(fs);
}

std::vector<SweepPoint> sweep(SweepAxis axis, const std::vector<double>& values,
                              const SyntheticSpec& base, const pipeline::PipelineParams& params,
                              int burn_in) {
  if (values.empty()) throw ConfigError("sweep needs at least one value");
  std::vector<SweepPoint> points;
  points.reserve(values.size());
  for (std::size_t k = 0; k < values.size(); ++k) {
    SyntheticSpec spec = base;
    pipeline::PipelineParams run = params;
    spec.seed = base.seed + k;
    const double value = values[k];
    switch (axis) {
      case SweepAxis::kSnr:
        spec.snr = value;
        break;
      case SweepAxis::kRank:
        run.rank = static_cast<int>(value);
        break;
      case SweepAxis::kObjectSize:
        spec.object_width = static_cast<int>(value);
        spec.object_height = std::min(spec.height, static_cast<int>(value));
        break;
    }
    const SyntheticSequence seq = generate(spec);
    const RunScore score = score_sequence(seq, run, burn_in);
    SweepPoint p;
    p.axis_value = value;
    p.mean_f = score.mean_f;
    p.mean_precision = score.mean_precision;
    p.mean_recall = score.mean_recall;
    p.mean_iterations = score.mean_iterations;
    p.ms_per_frame = score.ms_per_frame;
    p.baseline_mean_f = baseline_mean_f(seq, burn_in);
    points.push_back(p);
  }
  return points;
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepPoint>& points) {
  out << "axis_value,mean_f,mean_precision,mean_recall,mean_iters,ms_per_frame\n";
  char line[256];
  for (const auto& p : points) {
    std::snprintf(line, sizeof line, "%.6g,%.9g,%.9g,%.9g,%.9g,%.3f\n", p.axis_value, p.mean_f,
                  p.mean_precision, p.mean_recall, p.mean_iterations, p.ms_per_frame);
    out << line;
  }
}

}  // namespace corola::bench
