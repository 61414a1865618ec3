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

#include "corola/segmentation.hpp"
#include "corola/types.hpp"

using namespace corola;
using namespace corola::segmentation;

namespace {

MrfProblem random_problem(Rng& rng, int width, int height, int connectivity) {
  static const double kCosts[] = {0.0, 0.5, 1.0, 2.0};
  static const double kGammas[] = {0.0, 0.3, 1.0};
  MrfProblem p;
  p.width = width;
  p.height = height;
  p.connectivity = connectivity;
  p.gamma = kGammas[static_cast<int>(rng.uniform() * 3)];
  const int m = width * height;
  p.unary_background.resize(m);
  p.unary_foreground.resize(m);
  for (int i = 0; i < m; ++i) {
    p.unary_background[i] = kCosts[static_cast<int>(rng.uniform() * 4)];
    p.unary_foreground[i] = kCosts[static_cast<int>(rng.uniform() * 4)];
  }
  return p;
}

}  // namespace

TEST_CASE("zero smoothness decouples into a strict threshold") {
  MrfProblem p;
  p.width = 5;
  p.height = 1;
  p.gamma = 0.0;
  p.unary_background.resize(5);
  p.unary_foreground.resize(5);
  p.unary_background << 0.1, 0.5, 0.2, 0.9, 0.2;
  p.unary_foreground << 0.2, 0.2, 0.2, 0.2, 0.2;
  const ForegroundMask mask = segment(p);
  CHECK(mask.bits == std::vector<std::uint8_t>{0, 1, 0, 1, 0});  // ties to background
}

TEST_CASE("zero background cost keeps everything background") {
  MrfProblem p;
  p.width = 4;
  p.height = 3;
  p.gamma = 0.7;
  p.unary_background = Eigen::VectorXd::Zero(12);
  p.unary_foreground = Eigen::VectorXd::Constant(12, 0.4);
  CHECK(segment(p).empty_foreground());
}

TEST_CASE("energy hand cases") {
  MrfProblem p;
  p.width = 10;
  p.height = 1;
  p.gamma = 3.0;
  p.unary_background = Eigen::VectorXd::Constant(10, 0.1);
  p.unary_foreground = Eigen::VectorXd::Constant(10, 0.2);
  ForegroundMask zeros;
  zeros.bits.assign(10, 0);
  CHECK(energy(zeros, p) == doctest::Approx(1.0));

  ForegroundMask ones;
  ones.bits.assign(10, 1);
  CHECK(energy(ones, p) == doctest::Approx(2.0));

  MrfProblem board;
  board.width = 2;
  board.height = 2;
  board.gamma = 1.0;
  board.connectivity = 4;
  board.unary_background = Eigen::VectorXd::Zero(4);
  board.unary_foreground = Eigen::VectorXd::Zero(4);
  ForegroundMask checker;
  checker.bits = {1, 0, 0, 1};
  CHECK(energy(checker, board) == doctest::Approx(4.0));
}

TEST_CASE("exhaustive minimizer on tiny grids") {
  MrfProblem p;
  p.width = 1;
  p.height = 1;
  p.unary_background = Eigen::VectorXd::Constant(1, 1.0);
  p.unary_foreground = Eigen::VectorXd::Constant(1, 0.0);
  CHECK(brute_force_segment(p).bits == std::vector<std::uint8_t>{1});

  MrfProblem q;
  q.width = 2;
  q.height = 1;
  q.gamma = 10.0;
  q.unary_background.resize(2);
  q.unary_foreground.resize(2);
  q.unary_background << 0.0, 1.0;   // pixel 1 prefers foreground
  q.unary_foreground << 1.0, 0.0;   // pixel 0 prefers background
  // The huge coupling forces a uniform labeling; all-background costs 1,
  // all-foreground costs 1, split costs 10 extra. Lexicographic tie-break
  // picks all-background.
  CHECK(brute_force_segment(q).bits == std::vector<std::uint8_t>{0, 0});

  MrfProblem big;
  big.width = 7;
  big.height = 3;
  big.unary_background = Eigen::VectorXd::Zero(21);
  big.unary_foreground = Eigen::VectorXd::Zero(21);
  CHECK_THROWS_AS(brute_force_segment(big), DimensionError);
}

TEST_CASE("brute force lower-bounds every enumerated labeling") {
  Rng rng(5);
  const MrfProblem p = random_problem(rng, 3, 3, 4);
  const ForegroundMask best = brute_force_segment(p);
  const double best_energy = energy(best, p);
  ForegroundMask candidate;
  candidate.bits.assign(9, 0);
  for (std::uint32_t code = 0; code < 512; ++code) {
    for (int i = 0; i < 9; ++i) candidate.bits[static_cast<std::size_t>(i)] = (code >> i) & 1u;
    CHECK(best_energy <= energy(candidate, p) + 1e-12);
  }
}

TEST_CASE("graph cut matches the exhaustive minimum on random grids") {
  Rng rng(7);
  for (int trial = 0; trial < 400; ++trial) {
    const int connectivity = trial % 2 == 0 ? 4 : 8;
    const int width = 1 + static_cast<int>(rng.uniform() * 4);
    const int height = 1 + static_cast<int>(rng.uniform() * 4);
    const MrfProblem p = random_problem(rng, width, height, connectivity);
    SegmentStats stats;
    const ForegroundMask cut = segment(p, &stats);
    const ForegroundMask exact = brute_force_segment(p);
    const double cut_energy = energy(cut, p);
    CHECK(cut_energy == doctest::Approx(energy(exact, p)).epsilon(1e-12));
    // Max-flow value equals the labeling energy.
    CHECK(stats.flow == doctest::Approx(cut_energy).epsilon(1e-9));
  }
}

TEST_CASE("cut energy never exceeds simple candidate labelings") {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    MrfProblem p = random_problem(rng, 6, 5, 4);
    // Off-grid costs exercise the capacity snapping too.
    for (int i = 0; i < 30; ++i) {
      p.unary_background[i] += rng.uniform();
      p.unary_foreground[i] += rng.uniform();
    }
    const ForegroundMask cut = segment(p);
    const double e = energy(cut, p);

    ForegroundMask zeros, ones, threshold;
    zeros.bits.assign(30, 0);
    ones.bits.assign(30, 1);
    threshold.bits.resize(30);
    for (int i = 0; i < 30; ++i)
      threshold.bits[static_cast<std::size_t>(i)] =
          p.unary_background[i] > p.unary_foreground[i] ? 1 : 0;
    CHECK(e <= energy(zeros, p) + 1e-6);
    CHECK(e <= energy(ones, p) + 1e-6);
    CHECK(e <= energy(threshold, p) + 1e-6);
  }
}

TEST_CASE("raising the sparsity cost never grows the foreground") {
  Rng rng(13);
  for (int trial = 0; trial < 60; ++trial) {
    MrfProblem p = random_problem(rng, 4, 4, 4);
    for (int i = 0; i < 16; ++i) p.unary_background[i] += rng.uniform();
    int previous = 16;
    for (double beta2 : {0.0, 0.2, 0.5, 1.0, 2.0}) {
      p.unary_foreground = Eigen::VectorXd::Constant(16, beta2);
      const int count = segment(p).foreground_count();
      CHECK(count <= previous);
      previous = count;
    }
  }
}

TEST_CASE("segment validates its input") {
  MrfProblem p;
  p.width = 2;
  p.height = 2;
  p.unary_background = Eigen::VectorXd::Zero(4);
  p.unary_foreground = Eigen::VectorXd::Zero(4);
  p.gamma = -1.0;
  CHECK_THROWS_AS(segment(p), NumericalError);
  p.gamma = 0.0;
  p.unary_background[0] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(segment(p), NumericalError);
  p.unary_background[0] = 0.0;
  p.connectivity = 6;
  CHECK_THROWS_AS(segment(p), DimensionError);
}
