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

#include "corola/lowrank.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

namespace corola::lowrank {
namespace {

void check_mask(const ForegroundMask& mask, int pixel_count) {
  if (mask.size() != pixel_count) throw DimensionError("mask length does not match pixel count");
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j)
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

Eigen::MatrixXd thin_q(const Eigen::MatrixXd& m) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  return qr.householderQ() * Eigen::MatrixXd::Identity(m.rows(), m.cols());
}

}  // namespace

Accumulators Accumulators::zero(int pixel_count, int rank) {
  Accumulators acc;
  acc.a = Eigen::MatrixXd::Zero(rank, rank);
  acc.b = Eigen::MatrixXd::Zero(pixel_count, rank);
  acc.frames_absorbed = 0;
  return acc;
}

std::tuple<Basis, Accumulators, Coefficients> initialize_basis(const std::vector<Frame>& frames,
                                                               int rank, double beta1,
                                                               const InitOptions& options) {
  if (rank < 1) throw InitializationError("rank must be positive");
  const int n0 = static_cast<int>(frames.size());
  if (n0 < rank)
    throw InitializationError("need at least " + std::to_string(rank) + " frames, got " +
                              std::to_string(n0));
  if (n0 > options.max_frames)
    throw InitializationError("initialization clip longer than cap of " +
                              std::to_string(options.max_frames));
  if (beta1 < 0.0) throw InitializationError("beta1 must be nonnegative");

  const int m = frames[0].count();
  Eigen::MatrixXd stacked(m, n0);
  for (int j = 0; j < n0; ++j) {
    if (frames[j].width != frames[0].width || frames[j].height != frames[0].height)
      throw DimensionError("initialization frames have mixed dimensions");
    stacked.col(j) = frames[j].pixels;
  }
  if (stacked.norm() == 0.0) throw DegenerateInputError("all-zero initialization clip");
  if (rank > m) throw InitializationError("rank exceeds pixel count");

  // Randomized subspace iteration for the top-r left singular subspace.
  Rng rng(options.seed ^ 0x5eed5eedull);
  const Eigen::Index sketch = std::min<Eigen::Index>(n0, rank + options.oversampling);
  Eigen::MatrixXd q = thin_q(stacked * gaussian_matrix(n0, sketch, rng));
  for (int it = 0; it < options.power_iterations; ++it) {
    q = thin_q(stacked.transpose() * q);
    q = thin_q(stacked * q);
  }
  const Eigen::MatrixXd small = q.transpose() * stacked;  // sketch x n0
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(small, Eigen::ComputeThinU);
  Basis basis;
  basis.columns = q * svd.matrixU().leftCols(rank);

  Accumulators acc = Accumulators::zero(m, rank);
  Coefficients coeffs;
  const ForegroundMask none = ForegroundMask::all_background(m);
  for (int j = 0; j < n0; ++j) {
    coeffs = solve_coefficients(basis, frames[j], none, beta1);
    update_accumulators(acc, coeffs, frames[j], none, true);
  }
  return {std::move(basis), std::move(acc), std::move(coeffs)};
}

Coefficients solve_coefficients(const Basis& basis, const Frame& frame, const ForegroundMask& mask,
                                double beta1) {
  const int m = basis.pixel_count();
  const int r = basis.rank();
  if (frame.count() != m) throw DimensionError("frame pixel count does not match basis");
  check_mask(mask, m);

  // Gram matrix and right-hand side over background-labeled rows. The
  // foreground set is usually small, so accumulate over all rows and undo
  // the masked ones.
  const int fg = mask.foreground_count();
  if (fg == m) throw NoSupportError("every pixel is labeled foreground");
  Eigen::MatrixXd gram(r, r);
  Eigen::VectorXd rhs(r);
  if (fg <= m / 2) {
    gram.noalias() = basis.columns.transpose() * basis.columns;
    rhs.noalias() = basis.columns.transpose() * frame.pixels;
    for (int i = 0; i < m; ++i) {
      if (mask.bits[static_cast<std::size_t>(i)] == 0) continue;
      const Eigen::RowVectorXd row = basis.columns.row(i);
      gram.noalias() -= row.transpose() * row;
      rhs.noalias() -= row.transpose() * frame.pixels[i];
    }
  } else {
    gram.setZero();
    rhs.setZero();
    for (int i = 0; i < m; ++i) {
      if (mask.bits[static_cast<std::size_t>(i)] != 0) continue;
      const Eigen::RowVectorXd row = basis.columns.row(i);
      gram.noalias() += row.transpose() * row;
      rhs.noalias() += row.transpose() * frame.pixels[i];
    }
  }

  Eigen::MatrixXd lhs = gram;
  lhs.diagonal().array() += 2.0 * beta1;

  Coefficients v;
  Eigen::LLT<Eigen::MatrixXd> llt(lhs);
  if (llt.info() == Eigen::Success) {
    v.values = llt.solve(rhs);
  } else if (beta1 > 0.0) {
    lhs.diagonal().array() += 1e-12;  // jitter fallback
    Eigen::LLT<Eigen::MatrixXd> jittered(lhs);
    if (jittered.info() != Eigen::Success) throw NumericalError("ridge system not positive definite");
    v.values = jittered.solve(rhs);
  } else {
    // Moore-Penrose solution of the singular normal equations.
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    const Eigen::VectorXd& ev = eig.eigenvalues();
    const double cutoff = std::max(ev.cwiseAbs().maxCoeff(), 1.0) * 1e-12;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(r);
    for (int k = 0; k < r; ++k)
      if (ev[k] > cutoff) inv[k] = 1.0 / ev[k];
    v.values = eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose() * rhs;
  }
  if (!v.values.allFinite()) throw NumericalError("coefficient solve produced non-finite values");
  return v;
}

void update_accumulators(Accumulators& acc, const Coefficients& v, const Frame& frame,
                         const ForegroundMask& mask, bool count_frame) {
  const int m = static_cast<int>(acc.b.rows());
  const int r = static_cast<int>(acc.a.rows());
  if (v.values.size() != r) throw DimensionError("coefficient length does not match statistics");
  if (frame.count() != m) throw DimensionError("frame pixel count does not match statistics");
  check_mask(mask, m);

  acc.a.noalias() += v.values * v.values.transpose();
  if (mask.empty_foreground()) {
    acc.b.noalias() += frame.pixels * v.values.transpose();
  } else {
    for (int i = 0; i < m; ++i) {
      if (mask.bits[static_cast<std::size_t>(i)] != 0) continue;
      acc.b.row(i).noalias() += frame.pixels[i] * v.values.transpose();
    }
  }
  if (count_frame) ++acc.frames_absorbed;
}

void update_basis(Basis& basis, const Accumulators& acc, const ForegroundMask& mask, double beta1) {
  const int m = basis.pixel_count();
  const int r = basis.rank();
  if (acc.a.rows() != r || acc.b.rows() != m) throw DimensionError("statistics do not match basis");
  check_mask(mask, m);

  Eigen::MatrixXd ridged = acc.a;
  ridged.diagonal().array() += beta1;
  for (int j = 0; j < r; ++j) {
    const double denom = ridged(j, j);
    if (denom == 0.0) throw DegenerateColumnError("column " + std::to_string(j) + " has zero weight");
    // All rows of column j move independently; masked rows stay put.
    const Eigen::VectorXd step = (acc.b.col(j) - basis.columns * ridged.col(j)) / denom;
    for (int i = 0; i < m; ++i) {
      if (mask.bits[static_cast<std::size_t>(i)] != 0) continue;
      basis.columns(i, j) += step[i];
    }
  }
}

double basis_surrogate(const Basis& basis, const Accumulators& acc, const ForegroundMask& mask,
                       double beta1) {
  const int m = basis.pixel_count();
  check_mask(mask, m);
  Eigen::MatrixXd ridged = acc.a;
  ridged.diagonal().array() += beta1;
  double value = 0.0;
  for (int i = 0; i < m; ++i) {
    if (mask.bits[static_cast<std::size_t>(i)] != 0) continue;
    const Eigen::RowVectorXd row = basis.columns.row(i);
    value += 0.5 * (row * ridged).dot(row) - row.dot(acc.b.row(i));
  }
  return value;
}

Eigen::VectorXd reconstruct(const Basis& basis, const Coefficients& v) {
  if (v.values.size() != basis.rank()) throw DimensionError("coefficient length does not match basis");
  return basis.columns * v.values;
}

Frame reconstruct_background(const Basis& basis, const Coefficients& v, int width, int height) {
  if (width * height != basis.pixel_count())
    throw DimensionError("width*height does not match basis pixel count");
  Frame f;
  f.width = width;
  f.height = height;
  f.pixels = reconstruct(basis, v);
  for (Eigen::Index i = 0; i < f.pixels.size(); ++i) f.pixels[i] = clamp01(f.pixels[i]);
  return f;
}

}  // namespace corola::lowrank
