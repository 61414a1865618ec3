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
#include <limits>
#include <sstream>

#include "corola/bench.hpp"

using namespace corola;
using namespace corola::bench;

TEST_CASE("noiseless generation reproduces the scaled background off the object") {
  SyntheticSpec spec;
  spec.frames = 40;
  spec.rank = 3;
  spec.snr = std::numeric_limits<double>::infinity();
  spec.quantize = false;
  spec.seed = 3;
  const SyntheticSequence seq = generate(spec);
  for (int j = 0; j < spec.frames; ++j) {
    const auto& mask = seq.truth[static_cast<std::size_t>(j)].bits;
    for (int i = 0; i < spec.width * spec.height; ++i) {
      if (mask[static_cast<std::size_t>(i)]) continue;
      CHECK(seq.frames[static_cast<std::size_t>(j)].pixels[i] ==
            doctest::Approx(seq.clean_background(i, j)).epsilon(1e-12));
    }
  }
}

TEST_CASE("the object bounces between the borders") {
  // Width 100, object 10: positions walk 0..90 and reverse.
  CHECK(object_column(0, 100, 10) == 0);
  CHECK(object_column(45, 100, 10) == 45);
  CHECK(object_column(90, 100, 10) == 90);
  CHECK(object_column(91, 100, 10) == 89);
  CHECK(object_column(180, 100, 10) == 0);
  CHECK(object_column(181, 100, 10) == 1);

  SyntheticSpec spec;
  spec.frames = 199;
  spec.seed = 11;
  const SyntheticSequence seq = generate(spec);
  for (int j = 0; j < spec.frames; ++j) {
    const auto& bits = seq.truth[static_cast<std::size_t>(j)].bits;
    CHECK(seq.truth[static_cast<std::size_t>(j)].foreground_count() ==
          spec.object_width * spec.object_height);
    const int col = object_column(j, spec.width, spec.object_width);
    const int row = (spec.height - spec.object_height) / 2;
    CHECK(bits[static_cast<std::size_t>(row) * spec.width + col] == 1);
    if (col > 0) CHECK(bits[static_cast<std::size_t>(row) * spec.width + col - 1] == 0);
  }
}

TEST_CASE("sampled noise hits the requested signal-to-noise ratio") {
  SyntheticSpec spec;
  spec.frames = 200;
  spec.seed = 17;
  spec.snr = 4.0;
  const SyntheticSequence seq = generate(spec);
  CHECK(seq.empirical_snr == doctest::Approx(4.0).epsilon(0.05));
}

TEST_CASE("generation is reproducible") {
  SyntheticSpec spec;
  spec.frames = 30;
  spec.seed = 23;
  const SyntheticSequence a = generate(spec);
  const SyntheticSequence b = generate(spec);
  for (int j = 0; j < spec.frames; ++j) {
    CHECK((a.frames[static_cast<std::size_t>(j)].pixels - b.frames[static_cast<std::size_t>(j)].pixels)
              .norm() == 0.0);
    CHECK(a.truth[static_cast<std::size_t>(j)].bits == b.truth[static_cast<std::size_t>(j)].bits);
  }
}

TEST_CASE("confusion counts match a per-pixel recount") {
  ForegroundMask pred, gt;
  pred.bits = {1, 1, 0, 0, 1};
  gt.bits = {1, 0, 0, 1, 1};
  const ConfusionCounts c = confusion(pred, gt);
  CHECK(c.tp == 2);
  CHECK(c.fp == 1);
  CHECK(c.fn == 1);
  CHECK(c.tn == 1);

  Rng rng(29);
  for (int trial = 0; trial < 100; ++trial) {
    ForegroundMask p, t;
    p.bits.resize(50);
    t.bits.resize(50);
    for (int i = 0; i < 50; ++i) {
      p.bits[static_cast<std::size_t>(i)] = rng.uniform() < 0.4 ? 1 : 0;
      t.bits[static_cast<std::size_t>(i)] = rng.uniform() < 0.4 ? 1 : 0;
    }
    const ConfusionCounts got = confusion(p, t);
    long tp = 0, fp = 0, tn = 0, fn = 0;
    for (int i = 0; i < 50; ++i) {
      if (p.bits[static_cast<std::size_t>(i)] && t.bits[static_cast<std::size_t>(i)]) ++tp;
      if (p.bits[static_cast<std::size_t>(i)] && !t.bits[static_cast<std::size_t>(i)]) ++fp;
      if (!p.bits[static_cast<std::size_t>(i)] && t.bits[static_cast<std::size_t>(i)]) ++fn;
      if (!p.bits[static_cast<std::size_t>(i)] && !t.bits[static_cast<std::size_t>(i)]) ++tn;
    }
    CHECK(got.tp == tp);
    CHECK(got.fp == fp);
    CHECK(got.tn == tn);
    CHECK(got.fn == fn);
    CHECK(got.tp + got.fp + got.tn + got.fn == 50);
  }

  CHECK_THROWS_AS(confusion(pred, ForegroundMask::all_background(3)), DimensionError);

  // Perfect nonempty prediction.
  const ConfusionCounts perfect = confusion(gt, gt);
  CHECK(perfect.fp == 0);
  CHECK(perfect.fn == 0);

  ForegroundMask ones, zeros;
  ones.bits.assign(6, 1);
  zeros.bits.assign(6, 0);
  const ConfusionCounts inverted = confusion(ones, zeros);
  CHECK(inverted.fp == 6);
  CHECK(inverted.tp == 0);
}

TEST_CASE("precision, recall, and F-measure hand cases") {
  {
    const auto pr = precision_recall({.tp = 50, .fp = 50, .tn = 0, .fn = 0});
    CHECK(*pr.precision == doctest::Approx(0.5));
    CHECK(*pr.recall == doctest::Approx(1.0));
    CHECK(*f_measure(pr.precision, pr.recall) == doctest::Approx(2.0 / 3.0));
  }
  {
    const auto pr = precision_recall({.tp = 0, .fp = 0, .tn = 5, .fn = 10});
    CHECK_FALSE(pr.precision.has_value());
    CHECK(*pr.recall == doctest::Approx(0.0));
    CHECK_FALSE(f_measure(pr.precision, pr.recall).has_value());
  }
  {
    const auto pr = precision_recall({.tp = 80, .fp = 20, .tn = 0, .fn = 20});
    CHECK(*pr.precision == doctest::Approx(0.8));
    CHECK(*pr.recall == doctest::Approx(0.8));
  }
  {
    // Both empty: perfect by convention.
    const auto pr = precision_recall({.tp = 0, .fp = 0, .tn = 9, .fn = 0});
    CHECK(*pr.precision == doctest::Approx(1.0));
    CHECK(*pr.recall == doctest::Approx(1.0));
    CHECK(*f_measure(pr.precision, pr.recall) == doctest::Approx(1.0));
  }
  CHECK(*f_measure(1.0, 1.0) == doctest::Approx(1.0));
  CHECK(*f_measure(0.5, 1.0) == doctest::Approx(2.0 / 3.0));
  CHECK(*f_measure(0.0, 0.0) == doctest::Approx(0.0));
}

TEST_CASE("F-measure is symmetric and bounded") {
  Rng rng(31);
  for (int trial = 0; trial < 200; ++trial) {
    const double p = rng.uniform();
    const double r = rng.uniform();
    const double f = *f_measure(p, r);
    CHECK(f == doctest::Approx(*f_measure(r, p)));
    CHECK(f >= 0.0);
    CHECK(f <= 1.0);
    CHECK(f <= 2.0 * std::min(p, r) + 1e-12);
  }
}

TEST_CASE("threshold baseline stays quiet on static data and sees strong objects") {
  std::vector<Frame> still(30, make_frame(20, 10, 0.4));
  for (const auto& mask : threshold_baseline(still)) CHECK(mask.empty_foreground());

  // A bright block on a flat scene.
  std::vector<Frame> frames;
  for (int j = 0; j < 40; ++j) {
    Frame f = make_frame(20, 10, 0.4);
    if (j >= 20) {
      for (int y = 3; y < 7; ++y)
        for (int x = 8; x < 12; ++x) f.at(x, y) = 0.95;
    }
    frames.push_back(std::move(f));
  }
  const auto masks = threshold_baseline(frames);
  const auto& late = masks[35];
  int hits = 0;
  for (int y = 3; y < 7; ++y)
    for (int x = 8; x < 12; ++x) hits += late.bits[static_cast<std::size_t>(y) * 20 + x];
  CHECK(hits == 16);

  const auto again = threshold_baseline(frames);
  for (std::size_t j = 0; j < masks.size(); ++j) CHECK(masks[j].bits == again[j].bits);
}

TEST_CASE("sweep emits the fixed csv schema") {
  SyntheticSpec spec;
  spec.frames = 45;
  spec.rank = 2;
  spec.seed = 37;
  pipeline::PipelineParams params;
  params.rank = 2;
  const auto points = sweep(SweepAxis::kSnr, {10.0}, spec, params, 20);
  REQUIRE(points.size() == 1);
  CHECK(points[0].axis_value == 10.0);
  CHECK(points[0].mean_f >= 0.0);
  CHECK(points[0].mean_f <= 1.0);

  std::ostringstream out;
  write_sweep_csv(out, points);
  const std::string text = out.str();
  CHECK(text.rfind("axis_value,mean_f,mean_precision,mean_recall,mean_iters,ms_per_frame\n", 0) ==
        0);
  CHECK(std::count(text.begin(), text.end(), '\n') == 2);
}
