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

#include "corola/motion.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace corola::motion {
namespace {

constexpr double kMinDet = 1e-6;

struct Pyramid {
  std::vector<Frame> levels;  // levels[0] is full resolution
};

Frame downsample(const Frame& f) {
  Frame out;
  out.width = f.width / 2;
  out.height = f.height / 2;
  out.pixels.resize(static_cast<Eigen::Index>(out.width) * out.height);
  for (int y = 0; y < out.height; ++y)
    for (int x = 0; x < out.width; ++x)
      out.at(x, y) = 0.25 * (f.at(2 * x, 2 * y) + f.at(2 * x + 1, 2 * y) + f.at(2 * x, 2 * y + 1) +
                             f.at(2 * x + 1, 2 * y + 1));
  return out;
}

Pyramid build_pyramid(const Frame& f, int levels) {
  Pyramid p;
  p.levels.push_back(f);
  for (int l = 1; l < levels; ++l) {
    const Frame& prev = p.levels.back();
    if (prev.width < 16 || prev.height < 16) break;
    p.levels.push_back(downsample(prev));
  }
  return p;
}

double sample_bilinear(const Frame& f, double x, double y, bool& inside) {
  if (x < 0.0 || y < 0.0 || x > f.width - 1.0 || y > f.height - 1.0) {
    inside = false;
    return 0.0;
  }
  inside = true;
  int x0 = static_cast<int>(std::floor(x));
  int y0 = static_cast<int>(std::floor(y));
  if (x0 >= f.width - 1) x0 = f.width - 2 >= 0 ? f.width - 2 : 0;
  if (y0 >= f.height - 1) y0 = f.height - 2 >= 0 ? f.height - 2 : 0;
  const double fx = x - x0;
  const double fy = y - y0;
  const int x1 = x0 + 1 < f.width ? x0 + 1 : x0;
  const int y1 = y0 + 1 < f.height ? y0 + 1 : y0;
  const double top = (1.0 - fx) * f.at(x0, y0) + fx * f.at(x1, y0);
  const double bottom = (1.0 - fx) * f.at(x0, y1) + fx * f.at(x1, y1);
  return (1.0 - fy) * top + fy * bottom;
}

double warp_ssd(const Frame& tmpl, const Frame& image, const AffineTransform& tau) {
  double sum = 0.0;
  long count = 0;
  for (int y = 0; y < tmpl.height; ++y) {
    for (int x = 0; x < tmpl.width; ++x) {
      double wx, wy;
      tau.apply(x, y, wx, wy);
      bool inside = false;
      const double v = sample_bilinear(image, wx, wy, inside);
      if (!inside) continue;
      const double d = v - tmpl.at(x, y);
      sum += d * d;
      ++count;
    }
  }
  return count > 0 ? sum / static_cast<double>(count) : 0.0;
}

/// One pyramid level of inverse-compositional Gauss-Newton. Updates tau.
void refine_level(const Frame& tmpl, const Frame& image, AffineTransform& tau) {
  const int w = tmpl.width;
  const int h = tmpl.height;
  if (w < 4 || h < 4) return;

  // Fixed Hessian from the template gradients.
  Eigen::Matrix<double, 6, 6> hess = Eigen::Matrix<double, 6, 6>::Zero();
  std::vector<Eigen::Matrix<double, 6, 1>> sd(static_cast<std::size_t>(w) * h);
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      const double gx = 0.5 * (tmpl.at(x + 1, y) - tmpl.at(x - 1, y));
      const double gy = 0.5 * (tmpl.at(x, y + 1) - tmpl.at(x, y - 1));
      Eigen::Matrix<double, 6, 1> row;
      row << gx * x, gx * y, gx, gy * x, gy * y, gy;
      sd[static_cast<std::size_t>(y) * w + x] = row;
      hess.noalias() += row * row.transpose();
    }
  }
  const Eigen::LDLT<Eigen::Matrix<double, 6, 6>> solver(hess);
  if (solver.info() != Eigen::Success) return;

  double last_ssd = std::numeric_limits<double>::max();
  int rising = 0;
  for (int iter = 0; iter < 50; ++iter) {
    Eigen::Matrix<double, 6, 1> rhs = Eigen::Matrix<double, 6, 1>::Zero();
    double ssd = 0.0;
    long count = 0;
    for (int y = 1; y + 1 < h; ++y) {
      for (int x = 1; x + 1 < w; ++x) {
        double wx, wy;
        tau.apply(x, y, wx, wy);
        bool inside = false;
        const double v = sample_bilinear(image, wx, wy, inside);
        if (!inside) continue;
        const double e = v - tmpl.at(x, y);
        rhs.noalias() += sd[static_cast<std::size_t>(y) * w + x] * e;
        ssd += e * e;
        ++count;
      }
    }
    if (count < 12) return;
    ssd /= static_cast<double>(count);
    // Divergence means the error grows iteration over iteration, beyond
    // floating-point wiggle at the optimum.
    if (ssd > last_ssd * (1.0 + 1e-9)) {
      if (++rising >= 5) throw EstimationError("affine registration diverged");
    } else {
      rising = 0;
    }
    const bool stalled = std::abs(last_ssd - ssd) <= 1e-14 * std::max(1.0, ssd);
    last_ssd = ssd;
    if (stalled) break;

    const Eigen::Matrix<double, 6, 1> delta = solver.solve(rhs);
    AffineTransform inc;
    inc.a11 = 1.0 + delta[0];
    inc.a12 = delta[1];
    inc.tx = delta[2];
    inc.a21 = delta[3];
    inc.a22 = 1.0 + delta[4];
    inc.ty = delta[5];
    if (!inc.valid()) return;
    tau = tau.compose(inc.inverse());
    if (delta.cwiseAbs().maxCoeff() < 1e-9) break;
  }
}

void check_state_dims(const pipeline::ModelState& state) {
  if (state.width < 1 || state.height < 1) throw DimensionError("model has no grid dimensions");
}

/// Affine rescale of fill values into [lo, hi]; values already inside the
/// range are left untouched.
void rescale_into_range(std::vector<double>& fills, double lo, double hi) {
  if (fills.empty()) return;
  double fmin = fills[0], fmax = fills[0];
  for (double v : fills) {
    fmin = std::min(fmin, v);
    fmax = std::max(fmax, v);
  }
  if (fmin >= lo && fmax <= hi) return;
  const double target_lo = std::max(fmin, lo);
  const double target_hi = std::min(fmax, hi);
  if (fmax > fmin && target_hi > target_lo) {
    const double gain = (target_hi - target_lo) / (fmax - fmin);
    for (double& v : fills) v = target_lo + (v - fmin) * gain;
  }
  for (double& v : fills) v = std::min(hi, std::max(lo, v));
}

}  // namespace

bool AffineTransform::valid() const {
  return std::isfinite(a11) && std::isfinite(a12) && std::isfinite(tx) && std::isfinite(a21) &&
         std::isfinite(a22) && std::isfinite(ty) && std::abs(det()) > kMinDet;
}

AffineTransform AffineTransform::inverse() const {
  const double d = det();
  AffineTransform inv;
  inv.a11 = a22 / d;
  inv.a12 = -a12 / d;
  inv.a21 = -a21 / d;
  inv.a22 = a11 / d;
  inv.tx = -(inv.a11 * tx + inv.a12 * ty);
  inv.ty = -(inv.a21 * tx + inv.a22 * ty);
  return inv;
}

AffineTransform AffineTransform::compose(const AffineTransform& inner) const {
  AffineTransform out;
  out.a11 = a11 * inner.a11 + a12 * inner.a21;
  out.a12 = a11 * inner.a12 + a12 * inner.a22;
  out.a21 = a21 * inner.a11 + a22 * inner.a21;
  out.a22 = a21 * inner.a12 + a22 * inner.a22;
  out.tx = a11 * inner.tx + a12 * inner.ty + tx;
  out.ty = a21 * inner.tx + a22 * inner.ty + ty;
  return out;
}

void AffineTransform::apply(double x, double y, double& out_x, double& out_y) const {
  out_x = a11 * x + a12 * y + tx;
  out_y = a21 * x + a22 * y + ty;
}

AffineTransform estimate_affine(const Frame& prev, const Frame& cur) {
  if (prev.width != cur.width || prev.height != cur.height)
    throw DimensionError("registration frames differ in size");
  if (prev.count() < 16) throw EstimationError("frames too small to register");
  const double mean = prev.pixels.mean();
  if ((prev.pixels.array() - mean).abs().maxCoeff() < 1e-12)
    throw EstimationError("template has no intensity variation");

  const Pyramid tp = build_pyramid(prev, 3);
  const Pyramid ip = build_pyramid(cur, 3);
  const int levels = static_cast<int>(std::min(tp.levels.size(), ip.levels.size()));

  AffineTransform tau;  // identity at the coarsest level
  for (int l = levels - 1; l >= 0; --l) {
    if (l < levels - 1) {
      tau.tx *= 2.0;
      tau.ty *= 2.0;
    }
    refine_level(tp.levels[static_cast<std::size_t>(l)], ip.levels[static_cast<std::size_t>(l)], tau);
  }

  const double ssd_identity = warp_ssd(prev, cur, AffineTransform::identity());
  const double ssd_final = warp_ssd(prev, cur, tau);
  if (ssd_identity - ssd_final < 1e-6 * std::max(ssd_identity, 1e-12))
    return AffineTransform::identity();
  return tau;
}

Eigen::VectorXd warp_bilinear(const Eigen::VectorXd& values, int width, int height,
                              const AffineTransform& tau, std::vector<std::uint8_t>* missing) {
  if (values.size() != static_cast<Eigen::Index>(width) * height)
    throw DimensionError("column length does not match grid");
  const AffineTransform inv = tau.inverse();
  Frame view;
  view.width = width;
  view.height = height;
  view.pixels = values;
  Eigen::VectorXd out(values.size());
  if (missing) missing->assign(static_cast<std::size_t>(values.size()), 0);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double sx, sy;
      inv.apply(x, y, sx, sy);
      bool inside = false;
      const double v = sample_bilinear(view, sx, sy, inside);
      const Eigen::Index i = static_cast<Eigen::Index>(y) * width + x;
      out[i] = inside ? v : 0.0;
      if (!inside && missing) (*missing)[static_cast<std::size_t>(i)] = 1;
    }
  }
  return out;
}

WarpReport warp_model(pipeline::ModelState& state, const AffineTransform& tau) {
  check_state_dims(state);
  if (!tau.valid()) throw EstimationError("invalid transform");
  const int w = state.width;
  const int h = state.height;
  const int m = w * h;

  WarpReport report;
  for (int j = 0; j < state.basis.rank(); ++j) {
    std::vector<std::uint8_t>* flags = j == 0 ? &report.missing : nullptr;
    state.basis.columns.col(j) = warp_bilinear(state.basis.columns.col(j), w, h, tau, flags);
  }
  for (int j = 0; j < static_cast<int>(state.acc.b.cols()); ++j)
    state.acc.b.col(j) = warp_bilinear(state.acc.b.col(j), w, h, tau, nullptr);
  if (report.missing.empty()) report.missing.assign(static_cast<std::size_t>(m), 0);

  // Mixtures follow the grid by nearest neighbor; interpolating mixture
  // parameters across pixels would mix unrelated modes.
  const AffineTransform inv = tau.inverse();
  residual::GmmState warped = state.gmm;
  const int kk = state.gmm.params.components;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const int i = y * w + x;
      double sx, sy;
      inv.apply(x, y, sx, sy);
      const int nx = static_cast<int>(std::lround(sx));
      const int ny = static_cast<int>(std::lround(sy));
      if (sx < 0.0 || sy < 0.0 || sx > w - 1.0 || sy > h - 1.0) continue;  // handled by fill
      const int src = std::min(h - 1, std::max(0, ny)) * w + std::min(w - 1, std::max(0, nx));
      if (src == i) continue;
      for (int k = 0; k < kk; ++k) {
        const std::size_t di = static_cast<std::size_t>(i) * kk + k;
        const std::size_t si = static_cast<std::size_t>(src) * kk + k;
        warped.weight[di] = state.gmm.weight[si];
        warped.mean[di] = state.gmm.mean[si];
        warped.variance[di] = state.gmm.variance[si];
      }
    }
  }
  state.gmm = std::move(warped);

  report.missing_per_column.assign(static_cast<std::size_t>(w), 0);
  long total = 0;
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      if (report.missing[static_cast<std::size_t>(y) * w + x]) {
        ++report.missing_per_column[static_cast<std::size_t>(x)];
        ++total;
      }
  report.missing_fraction = static_cast<double>(total) / static_cast<double>(m);
  return report;
}

void fill_missing(pipeline::ModelState& state, const Frame& frame,
                  const std::vector<std::uint8_t>& missing) {
  check_state_dims(state);
  const int m = state.width * state.height;
  if (frame.count() != m) throw DimensionError("frame does not match model grid");
  if (static_cast<int>(missing.size()) != m) throw DimensionError("missing flags do not match grid");

  bool any = false;
  for (std::uint8_t f : missing) any |= f != 0;
  if (!any) return;

  const Eigen::VectorXd& v = state.coeffs.values;
  const double vs = v.squaredNorm();
  if (vs < 1e-18) throw FillError("coefficient vector too small to estimate missing pixels");

  const int r = state.basis.rank();
  std::vector<int> idx;
  for (int i = 0; i < m; ++i)
    if (missing[static_cast<std::size_t>(i)]) idx.push_back(i);

  for (int j = 0; j < r; ++j) {
    // Surviving range of this column.
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (int i = 0; i < m; ++i) {
      if (missing[static_cast<std::size_t>(i)]) continue;
      lo = std::min(lo, state.basis.columns(i, j));
      hi = std::max(hi, state.basis.columns(i, j));
    }
    if (lo > hi) {
      lo = 0.0;
      hi = 1.0;
    }
    // Rank-one estimate: U ~ X v^T (v v^T)^+, entrywise x_i v_j / ||v||^2.
    std::vector<double> fills(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
      fills[k] = frame.pixels[idx[static_cast<std::size_t>(k)]] * v[j] / vs;
    rescale_into_range(fills, lo, hi);
    for (std::size_t k = 0; k < idx.size(); ++k) state.basis.columns(idx[k], j) = fills[k];
  }

  // Statistics rows follow the reconstruction: B ~ (U v) v^T.
  const Eigen::VectorXd recon_filled = state.basis.columns * v;
  for (int j = 0; j < r; ++j) {
    double lo = std::numeric_limits<double>::max();
    double hi = std::numeric_limits<double>::lowest();
    for (int i = 0; i < m; ++i) {
      if (missing[static_cast<std::size_t>(i)]) continue;
      lo = std::min(lo, state.acc.b(i, j));
      hi = std::max(hi, state.acc.b(i, j));
    }
    if (lo > hi) {
      lo = 0.0;
      hi = 1.0;
    }
    std::vector<double> fills(idx.size());
    for (std::size_t k = 0; k < idx.size(); ++k)
      fills[k] = recon_filled[idx[static_cast<std::size_t>(k)]] * v[j];
    rescale_into_range(fills, lo, hi);
    for (std::size_t k = 0; k < idx.size(); ++k) state.acc.b(idx[k], j) = fills[k];
  }

  for (int i : idx) state.gmm.reset_pixel(i);
}

pipeline::FrameResult process_frame_moving(pipeline::ModelState& state, const Frame& frame,
                                           const AffineTransform& tau, WarpReport* report) {
  WarpReport local = warp_model(state, tau);
  bool any = false;
  for (std::uint8_t f : local.missing) any |= f != 0;
  if (any) fill_missing(state, frame, local.missing);
  if (report) *report = std::move(local);
  return pipeline::process_frame(state, frame);
}

std::vector<AffineTransform> read_transform_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open transform file " + path);
  std::vector<AffineTransform> out;
  std::string line;
  while (std::getline(in, line)) {
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    AffineTransform t;
    if (ss >> t.a11 >> t.a12 >> t.tx >> t.a21 >> t.a22 >> t.ty) {
      if (!t.valid()) throw IoError("singular transform in " + path);
      out.push_back(t);
    } else {
      std::string leftover;
      if (ss.clear(), ss >> leftover)
        throw IoError("malformed transform line in " + path);
    }
  }
  return out;
}

void write_transform_file(const std::string& path, const std::vector<AffineTransform>& transforms) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write transform file " + path);
  out.precision(17);
  for (const auto& t : transforms)
    out << t.a11 << " " << t.a12 << " " << t.tx << " " << t.a21 << " " << t.a22 << " " << t.ty
        << "\n";
}

}  // namespace corola::motion
