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

#include "corola/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "corola/segmentation.hpp"

namespace corola::pipeline {
namespace {

constexpr double kMonotoneSlack = 1e-9;
constexpr double kZeroEnergy = 1e-12;

double median_inplace(std::vector<double>& values) {
  if (values.empty()) return 0.0;
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  double hi = values[mid];
  if (values.size() % 2 == 0) {
    const double lo = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lo + hi);
  }
  return hi;
}

segmentation::MrfProblem build_problem(const Eigen::VectorXd& blended, double beta2, double gamma,
                                       int width, int height, int connectivity) {
  segmentation::MrfProblem p;
  p.width = width;
  p.height = height;
  p.connectivity = connectivity;
  p.gamma = gamma;
  p.unary_background = 0.5 * blended.array().square();
  p.unary_foreground = Eigen::VectorXd::Constant(blended.size(), beta2);
  return p;
}

}  // namespace

double adaptive_beta2(const Eigen::VectorXd& raw_residual) {
  std::vector<double> buf(static_cast<std::size_t>(raw_residual.size()));
  for (Eigen::Index i = 0; i < raw_residual.size(); ++i) buf[static_cast<std::size_t>(i)] = raw_residual[i];
  const double med = median_inplace(buf);
  for (Eigen::Index i = 0; i < raw_residual.size(); ++i)
    buf[static_cast<std::size_t>(i)] = std::abs(raw_residual[i] - med);
  double sigma = 1.4826 * median_inplace(buf);
  if (sigma < 1e-3) sigma = 1e-3;
  return 4.5 * sigma * sigma;
}

ForegroundMask threshold_mask(const Eigen::VectorXd& blended, double beta2) {
  ForegroundMask m;
  m.bits.resize(static_cast<std::size_t>(blended.size()));
  for (Eigen::Index i = 0; i < blended.size(); ++i)
    m.bits[static_cast<std::size_t>(i)] = 0.5 * blended[i] * blended[i] > beta2 ? 1 : 0;
  return m;
}

double frame_energy(const Frame& frame, const lowrank::Basis& basis,
                    const lowrank::Coefficients& coeffs, const ForegroundMask& mask, double beta1,
                    double beta2, double gamma, int width, int height, int connectivity) {
  const Eigen::VectorXd recon = lowrank::reconstruct(basis, coeffs);
  double data = 0.0;
  for (Eigen::Index i = 0; i < recon.size(); ++i) {
    if (mask.bits[static_cast<std::size_t>(i)] != 0) continue;
    const double d = frame.pixels[i] - recon[i];
    data += d * d;
  }
  double pairwise = 0.0;
  if (gamma > 0.0) {
    long cut = 0;
    for (const auto& [a, b] : segmentation::grid_edges(width, height, connectivity))
      cut += mask.bits[static_cast<std::size_t>(a)] != mask.bits[static_cast<std::size_t>(b)];
    pairwise = gamma * static_cast<double>(cut);
  }
  return 0.5 * data + beta1 * coeffs.values.squaredNorm() +
         beta2 * static_cast<double>(mask.foreground_count()) + pairwise;
}

ModelState initialize_model(const std::vector<Frame>& init_frames, const PipelineParams& params) {
  if (init_frames.empty()) throw InitializationError("no initialization frames");
  ModelState st;
  st.params = params;
  st.width = init_frames[0].width;
  st.height = init_frames[0].height;

  lowrank::InitOptions opts;
  opts.seed = params.seed;
  auto [basis, acc, coeffs] = lowrank::initialize_basis(init_frames, params.rank, params.beta1, opts);
  st.basis = std::move(basis);
  st.acc = std::move(acc);
  st.coeffs = std::move(coeffs);

  st.gmm = residual::GmmState(st.width * st.height);
  const ForegroundMask none = ForegroundMask::all_background(st.width * st.height);
  for (const Frame& f : init_frames) {
    // Warm the mixtures and the normalization scale on the clip residuals.
    const auto v = lowrank::solve_coefficients(st.basis, f, none, params.beta1);
    const Eigen::VectorXd e = residual::compute_residual(f, lowrank::reconstruct(st.basis, v));
    const double scale = st.scale.update(e);
    const Eigen::VectorXd e_norm = (e / scale).cwiseMax(-1.0).cwiseMin(1.0);
    residual::gmm_observe(st.gmm, e_norm);
  }

  st.snap_basis = st.basis;
  st.snap_coeffs = st.coeffs;
  st.snap_acc = st.acc;
  st.frame_index = static_cast<long>(init_frames.size());
  return st;
}

void snapshot_store(ModelState& state, const lowrank::Basis& basis,
                    const lowrank::Coefficients& coeffs, const lowrank::Accumulators& acc) {
  state.snap_basis = basis;
  state.snap_coeffs = coeffs;
  state.snap_acc = acc;
}

void snapshot_commit(ModelState& state) {
  state.basis = state.snap_basis;
  state.coeffs = state.snap_coeffs;
  state.acc = state.snap_acc;
}

FrameResult process_frame(ModelState& state, const Frame& frame) {
  if (frame.width != state.width || frame.height != state.height)
    throw DimensionError("frame dimensions do not match model");
  const PipelineParams& P = state.params;
  const int m = state.width * state.height;
  const int max_iters = P.resolved_max_iterations();

  // Entry copies so a degenerate frame can leave the model untouched.
  const residual::GmmState gmm_entry = state.gmm;
  const residual::ResidualScale scale_entry = state.scale;

  lowrank::Basis basis = state.basis;  // working basis, restored from the commit
  lowrank::Coefficients coeffs;
  lowrank::Accumulators acc;
  ForegroundMask mask = ForegroundMask::all_background(m);  // every pixel fits at t=1

  EnergyTrace trace;
  Eigen::VectorXd blended;
  double scale = state.scale.current();
  double beta2 = P.beta2;
  double gamma = P.gamma;
  bool degenerate = false;

  for (int t = 1; t <= max_iters; ++t) {
    coeffs = lowrank::solve_coefficients(basis, frame, mask, P.beta1);

    // Working statistics are the committed ones plus this iteration's term;
    // only the first iteration's version is ever committed.
    acc = state.acc;
    lowrank::update_accumulators(acc, coeffs, frame, mask, t == 1);
    lowrank::update_basis(basis, acc, mask, P.beta1);

    const Eigen::VectorXd e = residual::compute_residual(frame, lowrank::reconstruct(basis, coeffs));
    if (t == 1) scale = state.scale.update(e);
    const Eigen::VectorXd e_norm = (e / scale).cwiseMax(-1.0).cwiseMin(1.0);
    // Mixtures learn once per frame; later iterations only re-evaluate the
    // evidence against the frozen state.
    const Eigen::VectorXd evidence =
        (t == 1 ? residual::gmm_observe(state.gmm, e_norm) : residual::gmm_evidence(state.gmm, e_norm)) *
        scale;
    blended = residual::blend(e, evidence, P.alpha);

    if (t == 1) {
      beta2 = P.beta2 >= 0.0 ? P.beta2 : adaptive_beta2(e);
      gamma = P.gamma >= 0.0 ? P.gamma : beta2;
      trace.beta2 = beta2;
      trace.gamma = gamma;
    }

    const segmentation::MrfProblem problem =
        build_problem(blended, beta2, gamma, state.width, state.height, P.connectivity);
    const ForegroundMask labeled = segmentation::segment(problem);

    const double energy = frame_energy(frame, basis, coeffs, labeled, P.beta1, beta2, gamma,
                                       state.width, state.height, P.connectivity);
    trace.energies.push_back(energy);
    trace.iterations = t;

    if (t == 1) snapshot_store(state, basis, coeffs, acc);
    mask = labeled;

    if (mask.all_foreground()) {
      degenerate = true;
      break;
    }
    if (energy < kZeroEnergy) {
      trace.converged = true;
      break;
    }
    if (t > 1) {
      const double prev = trace.energies[static_cast<std::size_t>(t) - 2];
      if ((prev - energy) / energy < P.tolerance) {
        trace.converged = true;
        break;
      }
    }
  }

  for (std::size_t k = 1; k < trace.energies.size(); ++k)
    if (trace.energies[k] > trace.energies[k - 1] + kMonotoneSlack) ++trace.monotonicity_violations;

  FrameResult result;
  if (degenerate) {
    // All-foreground labeling leaves the coefficient solve without support.
    // Fall back to the decoupled threshold and keep the previous commit.
    state.gmm = gmm_entry;
    state.scale = scale_entry;
    snapshot_store(state, state.basis, state.coeffs, state.acc);
    trace.fallback = true;
    result.mask = threshold_mask(blended, beta2);
  } else {
    snapshot_commit(state);
    result.mask = mask;
  }
  ++state.frame_index;
  result.background = lowrank::reconstruct_background(state.basis, state.coeffs, state.width, state.height);
  result.trace = trace;
  return result;
}

}  // namespace corola::pipeline
