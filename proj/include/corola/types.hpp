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
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace corola {

/// Grayscale image stored as a flat row-major vector with intensities in [0, 1].
struct Frame {
  int width = 0;
  int height = 0;
  Eigen::VectorXd pixels;

  int count() const { return width * height; }
  double& at(int x, int y) { return pixels[static_cast<Eigen::Index>(y) * width + x]; }
  double at(int x, int y) const { return pixels[static_cast<Eigen::Index>(y) * width + x]; }
};

/// Per-pixel binary labels; 1 marks foreground.
struct ForegroundMask {
  std::vector<std::uint8_t> bits;

  int size() const { return static_cast<int>(bits.size()); }
  int foreground_count() const;
  bool all_foreground() const;
  bool empty_foreground() const;
  static ForegroundMask all_background(int pixel_count);
};

struct DimensionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct InitializationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateInputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NoSupportError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DegenerateColumnError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct EstimationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct FillError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

Frame make_frame(int width, int height, double fill = 0.0);

/// Throws if the frame is empty, has inconsistent dimensions, or carries
/// values outside [0, 1].
void validate_frame(const Frame& frame);

inline double clamp01(double v) { return v < 0.0 ? 0.0 : (v > 1.0 ? 1.0 : v); }

/// Deterministic RNG: mt19937_64 (bit-exact per the standard) plus explicitly
/// coded uniform and normal transforms so streams do not depend on the
/// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform double in [0, 1).
  double uniform();
  /// Standard normal via Box-Muller, one spare cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace corola
