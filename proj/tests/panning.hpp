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

// Synthetic panning sequence shared by the motion tests and the acceptance
// suite: a camera window slides over a smooth separable (rank-one) scene
// while a bright square bounces inside the view. Integer shifts keep the
// warps exact.

#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "corola/bench.hpp"
#include "corola/motion.hpp"
#include "corola/types.hpp"

namespace panning {

struct PanningSequence {
  std::vector<corola::Frame> frames;
  std::vector<corola::ForegroundMask> truth;
  std::vector<corola::motion::AffineTransform> transforms;  // maps j-1 -> j
  int width = 0;
  int height = 0;
};

inline double scene_value(int scene_x, int y) {
  const double row = 0.45 + 0.35 * std::exp(-std::pow((y - 14.0) / 9.0, 2.0));
  const double col = 0.45 + 0.35 * std::sin(scene_x / 13.0);
  return row * col;
}

struct PanningSpec {
  int width = 100;
  int height = 30;
  int frames = 90;
  int stationary_prefix = 10;  // no camera motion while the model initializes
  int shift_per_frame = 1;
  int object_size = 8;
  double object_intensity = 0.95;
};

inline PanningSequence make_panning(const PanningSpec& spec = {}) {
  PanningSequence seq;
  seq.width = spec.width;
  seq.height = spec.height;
  const int m = spec.width * spec.height;
  const int object_row = (spec.height - spec.object_size) / 2;

  int window_x = 0;
  for (int j = 0; j < spec.frames; ++j) {
    const int prev_window = window_x;
    if (j >= spec.stationary_prefix) window_x = prev_window + spec.shift_per_frame;

    corola::motion::AffineTransform tau;  // content moves opposite the window
    tau.tx = -static_cast<double>(window_x - prev_window);
    seq.transforms.push_back(tau);

    corola::Frame f;
    f.width = spec.width;
    f.height = spec.height;
    f.pixels.resize(m);
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x)
        f.at(x, y) = corola::clamp01(scene_value(window_x + x, y));

    corola::ForegroundMask mask;
    mask.bits.assign(static_cast<std::size_t>(m), 0);
    const int object_col = corola::bench::object_column(j, spec.width, spec.object_size);
    for (int dy = 0; dy < spec.object_size; ++dy) {
      for (int dx = 0; dx < spec.object_size; ++dx) {
        f.at(object_col + dx, object_row + dy) = spec.object_intensity;
        mask.bits[static_cast<std::size_t>(object_row + dy) * spec.width + object_col + dx] = 1;
      }
    }
    seq.frames.push_back(std::move(f));
    seq.truth.push_back(std::move(mask));
  }
  return seq;
}

}  // namespace panning
