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

#include "corola/types.hpp"

#include <cmath>
#include <numbers>

namespace corola {

int ForegroundMask::foreground_count() const {
  int n = 0;
  for (std::uint8_t b : bits) n += (b != 0);
  return n;
}

bool ForegroundMask::all_foreground() const {
  if (bits.empty()) return false;
  for (std::uint8_t b : bits)
    if (b == 0) return false;
  return true;
}

bool ForegroundMask::empty_foreground() const {
  for (std::uint8_t b : bits)
    if (b != 0) return false;
  return true;
}

ForegroundMask ForegroundMask::all_background(int pixel_count) {
  ForegroundMask m;
  m.bits.assign(static_cast<std::size_t>(pixel_count), 0);
  return m;
}

Frame make_frame(int width, int height, double fill) {
  Frame f;
  f.width = width;
  f.height = height;
  f.pixels = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(width) * height, fill);
  return f;
}

void validate_frame(const Frame& frame) {
  if (frame.width < 1 || frame.height < 1)
    throw DimensionError("frame dimensions must be positive");
  if (frame.pixels.size() != static_cast<Eigen::Index>(frame.width) * frame.height)
    throw DimensionError("frame pixel count does not match width*height");
  for (Eigen::Index i = 0; i < frame.pixels.size(); ++i) {
    const double v = frame.pixels[i];
    if (!std::isfinite(v) || v < 0.0 || v > 1.0)
      throw NumericalError("frame intensity outside [0,1] at pixel " + std::to_string(i));
  }
}

double Rng::uniform() {
  // 53 random mantissa bits.
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

}  // namespace corola
