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

#include "corola/residual.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace corola::residual {

Eigen::VectorXd compute_residual(const Frame& frame, const Eigen::VectorXd& background) {
  if (frame.pixels.size() != background.size())
    throw DimensionError("residual operands differ in length");
  return frame.pixels - background;
}

GmmState::GmmState(int pixels, GmmParams p) : params(p), pixel_count(pixels) {
  const std::size_t n = static_cast<std::size_t>(pixels) * params.components;
  weight.assign(n, 0.0);
  mean.assign(n, 0.0);
  variance.assign(n, params.initial_variance);
  for (int i = 0; i < pixels; ++i) reset_pixel(i);
}

void GmmState::reset_pixel(int pixel) {
  const std::size_t base = static_cast<std::size_t>(pixel) * params.components;
  for (int k = 0; k < params.components; ++k) {
    weight[base + k] = k == 0 ? 1.0 : 0.0;
    mean[base + k] = 0.0;
    variance[base + k] = params.initial_variance;
  }
}

namespace {

// Components ordered by weight/sigma; the leading prefix whose cumulative
// weight exceeds the threshold is treated as background.
struct PixelRanking {
  std::array<int, 8> order;
  int background_count;
  int matched_rank;  // position in order, -1 when nothing matches
};

PixelRanking rank_pixel(const GmmParams& p, const double* w, const double* mu, const double* var,
                        double sample) {
  PixelRanking r{};
  const int kk = p.components;
  for (int k = 0; k < kk; ++k) r.order[static_cast<std::size_t>(k)] = k;
  std::sort(r.order.begin(), r.order.begin() + kk, [&](int a, int b) {
    const double fa = w[a] / std::sqrt(var[a]);
    const double fb = w[b] / std::sqrt(var[b]);
    if (fa != fb) return fa > fb;
    return a < b;
  });
  r.background_count = kk;
  double cumulative = 0.0;
  for (int k = 0; k < kk; ++k) {
    cumulative += w[r.order[static_cast<std::size_t>(k)]];
    if (cumulative > p.background_weight) {
      r.background_count = k + 1;
      break;
    }
  }
  r.matched_rank = -1;
  for (int k = 0; k < kk; ++k) {
    const int c = r.order[static_cast<std::size_t>(k)];
    if (std::abs(sample - mu[c]) <= p.match_sigma * std::sqrt(var[c])) {
      r.matched_rank = k;
      break;
    }
  }
  return r;
}

}  // namespace

Eigen::VectorXd gmm_observe(GmmState& state, const Eigen::VectorXd& e) {
  if (e.size() != state.pixel_count) throw DimensionError("residual length does not match GMM state");
  const GmmParams& p = state.params;
  const int kk = p.components;
  const double rho = p.learning_rate;
  Eigen::VectorXd evidence = Eigen::VectorXd::Zero(e.size());

  for (int i = 0; i < state.pixel_count; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * kk;
    double* w = &state.weight[base];
    double* mu = &state.mean[base];
    double* var = &state.variance[base];
    const double sample = e[i];

    const PixelRanking ranking = rank_pixel(p, w, mu, var, sample);
    const auto& order = ranking.order;
    const int background_count = ranking.background_count;
    const int matched_rank = ranking.matched_rank;

    if (matched_rank >= 0) {
      const int c = order[static_cast<std::size_t>(matched_rank)];
      for (int k = 0; k < kk; ++k) w[k] *= 1.0 - rho;
      w[c] += rho;
      const double d = sample - mu[c];
      mu[c] += rho * d;
      var[c] = (1.0 - rho) * var[c] + rho * d * d;
      if (var[c] < p.variance_floor) var[c] = p.variance_floor;
    } else {
      int lowest = 0;
      for (int k = 1; k < kk; ++k)
        if (w[k] < w[lowest]) lowest = k;
      w[lowest] = p.replacement_weight;
      mu[lowest] = sample;
      var[lowest] = p.initial_variance;
    }

    double total = 0.0;
    for (int k = 0; k < kk; ++k) total += w[k];
    for (int k = 0; k < kk; ++k) w[k] /= total;

    if (matched_rank < 0 || matched_rank >= background_count) evidence[i] = std::abs(sample);
  }
  return evidence;
}

Eigen::VectorXd gmm_evidence(const GmmState& state, const Eigen::VectorXd& e) {
  if (e.size() != state.pixel_count) throw DimensionError("residual length does not match GMM state");
  const GmmParams& p = state.params;
  Eigen::VectorXd evidence = Eigen::VectorXd::Zero(e.size());
  for (int i = 0; i < state.pixel_count; ++i) {
    const std::size_t base = static_cast<std::size_t>(i) * p.components;
    const PixelRanking ranking = rank_pixel(p, &state.weight[base], &state.mean[base],
                                            &state.variance[base], e[i]);
    if (ranking.matched_rank < 0 || ranking.matched_rank >= ranking.background_count)
      evidence[i] = std::abs(e[i]);
  }
  return evidence;
}

Eigen::VectorXd blend(const Eigen::VectorXd& e, const Eigen::VectorXd& evidence, double alpha) {
  if (alpha < 0.0 || alpha > 1.0) throw NumericalError("alpha must lie in [0,1]");
  if (e.size() != evidence.size()) throw DimensionError("blend operands differ in length");
  return (alpha * e + (1.0 - alpha) * evidence).cwiseAbs();
}

double ResidualScale::update(const Eigen::VectorXd& e) {
  std::vector<double> magnitudes(static_cast<std::size_t>(e.size()));
  for (Eigen::Index i = 0; i < e.size(); ++i) magnitudes[static_cast<std::size_t>(i)] = std::abs(e[i]);
  const std::size_t idx = magnitudes.empty()
                              ? 0
                              : std::min(magnitudes.size() - 1,
                                         static_cast<std::size_t>(0.99 * magnitudes.size()));
  std::nth_element(magnitudes.begin(), magnitudes.begin() + static_cast<std::ptrdiff_t>(idx),
                   magnitudes.end());
  const double p99 = magnitudes.empty() ? 0.0 : magnitudes[idx];
  ema_ = ema_ < 0.0 ? p99 : (1.0 - kSmoothing) * ema_ + kSmoothing * p99;
  return current();
}

}  // namespace corola::residual
