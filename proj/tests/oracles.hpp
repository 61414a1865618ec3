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

// Reference implementations kept independent of the library code paths they
// check: plain Gaussian elimination, naive products, a scalar mixture
// recurrence, and a power-iteration SVD.

#pragma once

#include <Eigen/Core>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "corola/residual.hpp"
#include "corola/types.hpp"

namespace oracles {

/// Solves A x = b by Gaussian elimination with partial pivoting.
inline Eigen::VectorXd gauss_solve(Eigen::MatrixXd a, Eigen::VectorXd b) {
  const int n = static_cast<int>(a.rows());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int row = col + 1; row < n; ++row)
      if (std::abs(a(row, col)) > std::abs(a(pivot, col))) pivot = row;
    if (a(pivot, col) == 0.0) throw std::runtime_error("singular system");
    a.row(col).swap(a.row(pivot));
    std::swap(b[col], b[pivot]);
    for (int row = col + 1; row < n; ++row) {
      const double f = a(row, col) / a(col, col);
      a.row(row) -= f * a.row(col);
      b[row] -= f * b[col];
    }
  }
  Eigen::VectorXd x(n);
  for (int row = n - 1; row >= 0; --row) {
    double s = b[row];
    for (int col = row + 1; col < n; ++col) s -= a(row, col) * x[col];
    x[row] = s / a(row, row);
  }
  return x;
}

/// Triple-loop matrix-vector product.
inline Eigen::VectorXd naive_matvec(const Eigen::MatrixXd& m, const Eigen::VectorXd& v) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(m.rows());
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i] += m(i, j) * v[j];
  return out;
}

/// Top-k left singular vectors by power iteration with deflation on the
/// Gram matrix; independent of any randomized sketching.
inline Eigen::MatrixXd power_iteration_svd(const Eigen::MatrixXd& data, int k, int iterations = 500) {
  Eigen::MatrixXd gram = data * data.transpose();  // m x m (use small m only)
  const Eigen::Index m = gram.rows();
  Eigen::MatrixXd vectors(m, k);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(m);
  for (int c = 0; c < k; ++c) {
    x.setOnes();
    x[0] += 0.5;  // break symmetric starts
    x.normalize();
    for (int it = 0; it < iterations; ++it) {
      x = gram * x;
      const double norm = x.norm();
      if (norm == 0.0) break;
      x /= norm;
    }
    vectors.col(c) = x;
    const double lambda = x.dot(gram * x);
    gram -= lambda * x * x.transpose();
  }
  return vectors;
}

/// One pixel's mixture recurrence with the default constants, written as a
/// direct scalar transcription.
struct ScalarGmm {
  corola::residual::GmmParams p;
  std::vector<double> w, mu, var;

  ScalarGmm() : w(3, 0.0), mu(3, 0.0), var(3, 0.0) {
    w[0] = 1.0;
    var[0] = var[1] = var[2] = p.initial_variance;
  }

  double observe(double e) {
    int order[3] = {0, 1, 2};
    for (int a = 0; a < 3; ++a)
      for (int b = a + 1; b < 3; ++b) {
        const double fa = w[order[a]] / std::sqrt(var[order[a]]);
        const double fb = w[order[b]] / std::sqrt(var[order[b]]);
        if (fb > fa || (fb == fa && order[b] < order[a])) std::swap(order[a], order[b]);
      }
    int background_count = 3;
    double cum = 0.0;
    for (int a = 0; a < 3; ++a) {
      cum += w[order[a]];
      if (cum > p.background_weight) {
        background_count = a + 1;
        break;
      }
    }
    int matched = -1;
    for (int a = 0; a < 3; ++a) {
      const int c = order[a];
      if (std::abs(e - mu[c]) <= p.match_sigma * std::sqrt(var[c])) {
        matched = a;
        break;
      }
    }
    if (matched >= 0) {
      const int c = order[matched];
      for (int k = 0; k < 3; ++k) w[k] *= 1.0 - p.learning_rate;
      w[c] += p.learning_rate;
      const double d = e - mu[c];
      mu[c] += p.learning_rate * d;
      var[c] = (1.0 - p.learning_rate) * var[c] + p.learning_rate * d * d;
      if (var[c] < p.variance_floor) var[c] = p.variance_floor;
    } else {
      int lowest = 0;
      for (int k = 1; k < 3; ++k)
        if (w[k] < w[lowest]) lowest = k;
      w[lowest] = p.replacement_weight;
      mu[lowest] = e;
      var[lowest] = p.initial_variance;
    }
    double total = w[0] + w[1] + w[2];
    for (int k = 0; k < 3; ++k) w[k] /= total;
    return (matched < 0 || matched >= background_count) ? std::abs(e) : 0.0;
  }
};

}  // namespace oracles
