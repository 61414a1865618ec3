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

#include <doctest.h>

#include "corola/bench.hpp"
#include "corola/pipeline.hpp"

using namespace corola;
using namespace corola::pipeline;

namespace {

std::vector<Frame> constant_clip(int width, int height, double value, int count) {
  return std::vector<Frame>(static_cast<std::size_t>(count), make_frame(width, height, value));
}

}  // namespace

TEST_CASE("static scenes stay empty and the background converges to the scene") {
  PipelineParams params;
  params.rank = 1;
  const Frame scene = make_frame(100, 30, 0.5);
  ModelState state = initialize_model(constant_clip(100, 30, 0.5, 10), params);

  Frame background;
  for (int j = 0; j < 10; ++j) {
    const FrameResult result = process_frame(state, scene);
    CHECK(result.mask.empty_foreground());
    background = result.background;
  }
  CHECK((background.pixels.array() - 0.5).abs().maxCoeff() < 1e-6);
}

TEST_CASE("snapshot store and commit round-trip") {
  PipelineParams params;
  params.rank = 2;
  bench::SyntheticSpec spec;
  spec.frames = 14;
  spec.rank = 2;
  spec.seed = 5;
  const auto seq = bench::generate(spec);
  std::vector<Frame> init(seq.frames.begin(), seq.frames.begin() + 10);
  ModelState state = initialize_model(init, params);

  const auto basis = state.basis;
  const auto coeffs = state.coeffs;
  const auto acc = state.acc;
  snapshot_store(state, basis, coeffs, acc);
  snapshot_commit(state);
  CHECK((state.basis.columns - basis.columns).norm() == 0.0);
  CHECK((state.coeffs.values - coeffs.values).norm() == 0.0);
  CHECK((state.acc.a - acc.a).norm() == 0.0);
  CHECK((state.acc.b - acc.b).norm() == 0.0);
  CHECK(state.acc.frames_absorbed == acc.frames_absorbed);
}

TEST_CASE("processing is deterministic from identical states") {
  PipelineParams params;
  params.rank = 3;
  bench::SyntheticSpec spec;
  spec.frames = 16;
  spec.rank = 3;
  spec.seed = 9;
  const auto seq = bench::generate(spec);
  std::vector<Frame> init(seq.frames.begin(), seq.frames.begin() + 10);

  ModelState a = initialize_model(init, params);
  ModelState b = initialize_model(init, params);
  for (int j = 10; j < 16; ++j) {
    const FrameResult ra = process_frame(a, seq.frames[static_cast<std::size_t>(j)]);
    const FrameResult rb = process_frame(b, seq.frames[static_cast<std::size_t>(j)]);
    CHECK(ra.mask.bits == rb.mask.bits);
    CHECK((ra.background.pixels - rb.background.pixels).norm() == 0.0);
    CHECK(ra.trace.energies == rb.trace.energies);
  }
  CHECK((a.basis.columns - b.basis.columns).norm() == 0.0);
  CHECK((a.acc.b - b.acc.b).norm() == 0.0);
  CHECK(a.gmm.weight == b.gmm.weight);
}

TEST_CASE("the committed model is exactly the first-iteration working set") {
  PipelineParams params;
  params.rank = 4;  // several inner iterations available
  bench::SyntheticSpec spec;
  spec.frames = 20;
  spec.rank = 4;
  spec.seed = 21;
  const auto seq = bench::generate(spec);
  std::vector<Frame> init(seq.frames.begin(), seq.frames.begin() + 10);
  ModelState state = initialize_model(init, params);

  for (int j = 10; j < 20; ++j) {
    const Frame& x = seq.frames[static_cast<std::size_t>(j)];
    // Recompute the first-iteration working set from the committed state.
    const ForegroundMask all_fit = ForegroundMask::all_background(x.count());
    const auto v1 = lowrank::solve_coefficients(state.basis, x, all_fit, params.beta1);
    lowrank::Accumulators acc1 = state.acc;
    lowrank::update_accumulators(acc1, v1, x, all_fit, true);
    lowrank::Basis basis1 = state.basis;
    lowrank::update_basis(basis1, acc1, all_fit, params.beta1);

    const FrameResult result = process_frame(state, x);
    if (result.trace.fallback) continue;
    CHECK((state.basis.columns - basis1.columns).norm() == 0.0);
    CHECK((state.coeffs.values - v1.values).norm() == 0.0);
    CHECK((state.acc.a - acc1.a).norm() == 0.0);
    CHECK((state.acc.b - acc1.b).norm() == 0.0);
    // Later iterations ran but the committed set is the first iterate.
    CHECK(result.trace.iterations >= 1);
  }
}

TEST_CASE("all-foreground frames fall back to the threshold rule and keep the model") {
  PipelineParams params;
  params.rank = 1;
  params.beta2 = 1e-9;  // everything with any residual goes foreground
  params.gamma = 0.0;
  ModelState state = initialize_model(constant_clip(20, 10, 0.5, 10), params);

  const auto basis_before = state.basis.columns;
  const auto b_before = state.acc.b;
  const auto frames_before = state.acc.frames_absorbed;
  const auto gmm_before = state.gmm.weight;

  // A stripe frame sits outside the constant background span, so every
  // pixel keeps a large residual.
  Frame stripe = make_frame(20, 10, 0.0);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) stripe.at(x, y) = 1.0;
  const FrameResult result = process_frame(state, stripe);
  CHECK(result.trace.fallback);
  CHECK(result.mask.all_foreground());
  CHECK((state.basis.columns - basis_before).norm() == 0.0);
  CHECK((state.acc.b - b_before).norm() == 0.0);
  CHECK(state.acc.frames_absorbed == frames_before);
  CHECK(state.gmm.weight == gmm_before);

  // A clean frame afterwards processes normally.
  const FrameResult ok = process_frame(state, make_frame(20, 10, 0.5));
  CHECK_FALSE(ok.trace.fallback);
}

TEST_CASE("high-snr synthetic sequences are detected nearly perfectly") {
  bench::SyntheticSpec spec;
  spec.rank = 3;
  spec.snr = 10.0;
  spec.seed = 111;
  PipelineParams params;
  params.rank = 3;
  params.seed = 111;
  const auto seq = bench::generate(spec);
  const auto score = bench::score_sequence(seq, params, 50);
  CHECK(score.mean_f >= 0.95);
}

TEST_CASE("energy traces carry per-iteration values and the convergence flag") {
  bench::SyntheticSpec spec;
  spec.frames = 60;
  spec.rank = 5;
  spec.seed = 33;
  PipelineParams params;
  params.rank = 5;
  const auto seq = bench::generate(spec);
  std::vector<Frame> init(seq.frames.begin(), seq.frames.begin() + 10);
  ModelState state = initialize_model(init, params);

  int converged = 0;
  for (int j = 10; j < 60; ++j) {
    const FrameResult r = process_frame(state, seq.frames[static_cast<std::size_t>(j)]);
    REQUIRE(!r.trace.energies.empty());
    CHECK(r.trace.iterations == static_cast<int>(r.trace.energies.size()));
    CHECK(r.trace.iterations <= params.resolved_max_iterations());
    CHECK(r.trace.beta2 > 0.0);
    for (double e : r.trace.energies) CHECK(std::isfinite(e));
    converged += r.trace.converged ? 1 : 0;
  }
  CHECK(converged > 25);  // most frames settle within the cap
}
