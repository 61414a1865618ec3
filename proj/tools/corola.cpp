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

#include <CLI11.hpp>
#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "corola/bench.hpp"
#include "corola/motion.hpp"
#include "corola/pgm.hpp"
#include "corola/pipeline.hpp"

namespace fs = std::filesystem;
using namespace corola;

namespace {

enum class LogLevel { kError = 0, kInfo = 1, kDebug = 2 };

LogLevel log_level() {
  static const LogLevel level = [] {
    const char* env = std::getenv("COROLA_LOG");
    if (!env) return LogLevel::kError;
    const std::string v(env);
    if (v == "debug") return LogLevel::kDebug;
    if (v == "info") return LogLevel::kInfo;
    return LogLevel::kError;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= LogLevel::kInfo) std::fprintf(stderr, "[corola] %s\n", msg.c_str());
}

void log_debug(const std::string& msg) {
  if (log_level() >= LogLevel::kDebug) std::fprintf(stderr, "[corola] %s\n", msg.c_str());
}

std::vector<fs::path> list_pgms(const std::string& dir) {
  std::error_code ec;
  if (!fs::is_directory(dir, ec)) throw IoError("not a directory: " + dir);
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm")
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end(),
            [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  if (files.empty()) throw IoError("no .pgm frames in " + dir);
  return files;
}

std::string frame_name(const char* prefix, std::size_t index) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%s_%06zu.pgm", prefix, index);
  return buf;
}

struct RunOptions {
  std::string input;
  std::string out;
  pipeline::PipelineParams params;
  std::string beta2 = "auto";
  double gamma = -1.0;
  std::string camera = "static";
  std::string transforms;
  std::vector<std::string> emit = {"masks", "backgrounds", "trace"};
};

void apply_beta2(const RunOptions& opt, pipeline::PipelineParams& params) {
  if (opt.beta2 == "auto") {
    params.beta2 = -1.0;
  } else {
    try {
      params.beta2 = std::stod(opt.beta2);
    } catch (const std::logic_error&) {
      throw ConfigError("--beta2 expects a number or 'auto'");
    }
    if (params.beta2 < 0.0) throw ConfigError("--beta2 must be >= 0 or 'auto'");
  }
  params.gamma = opt.gamma;
}

int cmd_run(const RunOptions& opt) {
  pipeline::PipelineParams params = opt.params;
  apply_beta2(opt, params);
  if (params.alpha < 0.0 || params.alpha > 1.0) throw ConfigError("--alpha must lie in [0,1]");
  if (params.rank < 1) throw ConfigError("--rank must be >= 1");
  if (params.connectivity != 4 && params.connectivity != 8)
    throw ConfigError("--connectivity must be 4 or 8");

  bool emit_masks = false, emit_backgrounds = false, emit_residuals = false, emit_trace = false;
  for (const std::string& e : opt.emit) {
    if (e == "masks")
      emit_masks = true;
    else if (e == "backgrounds")
      emit_backgrounds = true;
    else if (e == "residuals")
      emit_residuals = true;
    else if (e == "trace")
      emit_trace = true;
    else
      throw ConfigError("unknown --emit token: " + e);
  }

  const bool moving = opt.camera == "moving";
  if (!moving && opt.camera != "static") throw ConfigError("--camera must be static or moving");

  const auto files = list_pgms(opt.input);
  const std::size_t init_count = static_cast<std::size_t>(params.resolved_init_frames());
  if (files.size() <= init_count)
    throw IoError("need more than " + std::to_string(init_count) + " frames, found " +
                  std::to_string(files.size()));

  std::vector<motion::AffineTransform> transforms;
  if (moving && !opt.transforms.empty()) {
    transforms = motion::read_transform_file(opt.transforms);
    if (transforms.size() < files.size())
      throw IoError("transform file has fewer lines than there are frames");
  }

  std::vector<Frame> init;
  init.reserve(init_count);
  for (std::size_t j = 0; j < init_count; ++j) init.push_back(read_pgm(files[j].string()));
  for (std::size_t j = 1; j < init.size(); ++j)
    if (init[j].width != init[0].width || init[j].height != init[0].height)
      throw DimensionError("initialization frames have mixed dimensions");

  pipeline::ModelState state = pipeline::initialize_model(init, params);
  log_info("initialized " + std::to_string(init_count) + " frames, rank " +
           std::to_string(params.rank));

  fs::create_directories(opt.out);
  std::ofstream csv;
  if (emit_trace) {
    csv.open(fs::path(opt.out) / "run.csv", std::ios::trunc);
    if (!csv) throw IoError("cannot write run.csv in " + opt.out);
    csv << "frame,energy_final,iters,converged,ms\n";
  }

  Frame prev = init.back();
  for (std::size_t j = init_count; j < files.size(); ++j) {
    Frame frame = read_pgm(files[j].string());
    if (frame.width != state.width || frame.height != state.height)
      throw DimensionError("frame " + files[j].filename().string() + " has mismatched dimensions");

    const auto start = std::chrono::steady_clock::now();
    pipeline::FrameResult result;
    if (moving) {
      motion::AffineTransform tau;
      if (!transforms.empty()) {
        tau = transforms[j];
      } else {
        try {
          tau = motion::estimate_affine(prev, frame);
        } catch (const EstimationError& err) {
          log_info(std::string("registration failed, assuming identity: ") + err.what());
          tau = motion::AffineTransform::identity();
        }
      }
      result = motion::process_frame_moving(state, frame, tau);
    } else {
      result = pipeline::process_frame(state, frame);
    }
    const auto stop = std::chrono::steady_clock::now();
    const double ms = std::chrono::duration<double, std::milli>(stop - start).count();

    if (emit_masks)
      write_mask_pgm((fs::path(opt.out) / frame_name("mask", j)).string(), result.mask, state.width,
                     state.height);
    if (emit_backgrounds)
      write_pgm((fs::path(opt.out) / frame_name("background", j)).string(), result.background);
    if (emit_residuals) {
      Frame residual = result.background;
      for (Eigen::Index i = 0; i < residual.pixels.size(); ++i)
        residual.pixels[i] = clamp01(std::abs(frame.pixels[i] - residual.pixels[i]));
      write_pgm((fs::path(opt.out) / frame_name("residual", j)).string(), residual);
    }
    if (emit_trace) {
      char line[160];
      std::snprintf(line, sizeof line, "%zu,%.12g,%d,%d,%.3f\n", j,
                    result.trace.energies.empty() ? 0.0 : result.trace.energies.back(),
                    result.trace.iterations, result.trace.converged ? 1 : 0, ms);
      csv << line;
    }
    log_debug("frame " + std::to_string(j) + ": " + std::to_string(result.mask.foreground_count()) +
              " fg px, " + std::to_string(result.trace.iterations) + " iters");
    prev = std::move(frame);
  }
  return 0;
}

struct SynthOptions {
  std::string axis = "snr";
  std::vector<double> values;
  std::string out;
  std::string export_dir;
  bench::SyntheticSpec spec;
  pipeline::PipelineParams params;
  std::string beta2 = "auto";
  double gamma = -1.0;
  int burn_in = 25;
};

int cmd_synth(const SynthOptions& opt) {
  pipeline::PipelineParams params = opt.params;
  RunOptions shim;
  shim.beta2 = opt.beta2;
  shim.gamma = opt.gamma;
  apply_beta2(shim, params);

  if (!opt.export_dir.empty()) {
    const bench::SyntheticSequence seq = bench::generate(opt.spec);
    fs::create_directories(fs::path(opt.export_dir) / "frames");
    fs::create_directories(fs::path(opt.export_dir) / "truth");
    for (std::size_t j = 0; j < seq.frames.size(); ++j) {
      write_pgm((fs::path(opt.export_dir) / "frames" / frame_name("frame", j)).string(),
                seq.frames[j]);
      write_mask_pgm((fs::path(opt.export_dir) / "truth" / frame_name("mask", j)).string(),
                     seq.truth[j], opt.spec.width, opt.spec.height);
    }
    log_info("exported " + std::to_string(seq.frames.size()) + " frames to " + opt.export_dir);
  }

  if (opt.values.empty()) return 0;

  bench::SweepAxis axis;
  if (opt.axis == "snr")
    axis = bench::SweepAxis::kSnr;
  else if (opt.axis == "rank")
    axis = bench::SweepAxis::kRank;
  else if (opt.axis == "object_size")
    axis = bench::SweepAxis::kObjectSize;
  else
    throw ConfigError("--axis must be snr, rank, or object_size");

  const auto points = bench::sweep(axis, opt.values, opt.spec, params, opt.burn_in);
  fs::create_directories(opt.out);
  std::ofstream csv(fs::path(opt.out) / "sweep.csv", std::ios::trunc);
  if (!csv) throw IoError("cannot write sweep.csv in " + opt.out);
  bench::write_sweep_csv(csv, points);

  std::ofstream baseline(fs::path(opt.out) / "baseline.csv", std::ios::trunc);
  baseline << "axis_value,mean_f\n";
  for (const auto& p : points) {
    char line[96];
    std::snprintf(line, sizeof line, "%.6g,%.9g\n", p.axis_value, p.baseline_mean_f);
    baseline << line;
  }
  for (const auto& p : points)
    log_info("axis " + std::to_string(p.axis_value) + ": F " + std::to_string(p.mean_f));
  return 0;
}

struct EvalOptions {
  std::string pred;
  std::string gt;
};

int cmd_eval(const EvalOptions& opt) {
  const auto pred_files = list_pgms(opt.pred);
  const auto gt_files = list_pgms(opt.gt);
  if (pred_files.size() != gt_files.size())
    throw IoError("prediction and ground-truth counts differ (" +
                  std::to_string(pred_files.size()) + " vs " + std::to_string(gt_files.size()) + ")");

  std::printf("frame,precision,recall,f_measure\n");
  double sum_p = 0.0, sum_r = 0.0, sum_f = 0.0;
  long n_p = 0, n_r = 0, n_f = 0;
  for (std::size_t j = 0; j < pred_files.size(); ++j) {
    int pw = 0, ph = 0, gw = 0, gh = 0;
    const ForegroundMask pred = read_mask_pgm(pred_files[j].string(), &pw, &ph);
    const ForegroundMask gt = read_mask_pgm(gt_files[j].string(), &gw, &gh);
    if (pw != gw || ph != gh)
      throw DimensionError("mask dimensions differ at " + pred_files[j].filename().string());
    const auto pr = bench::precision_recall(bench::confusion(pred, gt));
    const auto f = bench::f_measure(pr.precision, pr.recall);
    std::printf("%zu,", j);
    if (pr.precision) {
      std::printf("%.9f,", *pr.precision);
      sum_p += *pr.precision;
      ++n_p;
    } else {
      std::printf(",");
    }
    if (pr.recall) {
      std::printf("%.9f,", *pr.recall);
      sum_r += *pr.recall;
      ++n_r;
    } else {
      std::printf(",");
    }
    if (f) {
      std::printf("%.9f\n", *f);
      sum_f += *f;
      ++n_f;
    } else {
      std::printf("\n");
    }
  }
  std::printf("mean,%.9f,%.9f,%.9f\n", n_p ? sum_p / n_p : 0.0, n_r ? sum_r / n_r : 0.0,
              n_f ? sum_f / n_f : 0.0);
  return 0;
}

void add_pipeline_flags(CLI::App* cmd, pipeline::PipelineParams& params, std::string& beta2,
                        double& gamma) {
  cmd->add_option("--rank", params.rank, "Background rank bound");
  cmd->add_option("--beta1", params.beta1, "Ridge weight");
  cmd->add_option("--beta2", beta2, "Sparsity weight (number or 'auto')");
  cmd->add_option("--gamma", gamma, "Smoothness weight (< 0 follows beta2)");
  cmd->add_option("--alpha", params.alpha, "Residual/evidence blend");
  cmd->add_option("--init-frames", params.init_frames, "Initialization clip length (0: max(rank,10))");
  cmd->add_option("--max-iters", params.max_iterations, "Per-frame iteration cap (0: rank)");
  cmd->add_option("--connectivity", params.connectivity, "Grid connectivity (4 or 8)");
  cmd->add_option("--seed", params.seed, "Deterministic seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sequential low-rank background modelling with contiguous-outlier foreground detection"};
  app.require_subcommand(1);
  app.set_config("--config")->configurable(false);

  RunOptions run;
  CLI::App* run_cmd = app.add_subcommand("run", "Process a directory of PGM frames");
  run_cmd->add_option("--input", run.input, "Input directory of .pgm frames")->required();
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  add_pipeline_flags(run_cmd, run.params, run.beta2, run.gamma);
  run_cmd->add_option("--camera", run.camera, "static or moving");
  run_cmd->add_option("--transforms", run.transforms, "Sidecar affine file for moving mode");
  run_cmd->add_option("--emit", run.emit, "Outputs: masks,backgrounds,residuals,trace")
      ->delimiter(',');

  SynthOptions synth;
  CLI::App* synth_cmd = app.add_subcommand("synth", "Generate synthetic sequences and sweep");
  synth_cmd->add_option("--axis", synth.axis, "Sweep axis: snr, rank, object_size");
  synth_cmd->add_option("--values", synth.values, "Sweep values")->delimiter(',');
  synth_cmd->add_option("--out", synth.out, "Output directory for CSVs");
  synth_cmd->add_option("--export", synth.export_dir, "Export the base sequence as PGMs");
  synth_cmd->add_option("--frames", synth.spec.frames, "Sequence length");
  synth_cmd->add_option("--width", synth.spec.width, "Image width");
  synth_cmd->add_option("--height", synth.spec.height, "Image height");
  synth_cmd->add_option("--true-rank", synth.spec.rank, "Background rank of the data");
  synth_cmd->add_option("--object-width", synth.spec.object_width, "Object width (0: none)");
  synth_cmd->add_option("--object-height", synth.spec.object_height, "Object height");
  synth_cmd->add_option("--snr", synth.spec.snr, "Signal-to-noise ratio");
  synth_cmd->add_option("--burn-in", synth.burn_in, "Frames excluded from scoring");
  add_pipeline_flags(synth_cmd, synth.params, synth.beta2, synth.gamma);

  EvalOptions eval;
  CLI::App* eval_cmd = app.add_subcommand("eval", "Score predicted masks against ground truth");
  eval_cmd->add_option("--pred", eval.pred, "Directory of predicted masks")->required();
  eval_cmd->add_option("--gt", eval.gt, "Directory of ground-truth masks")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "corola: %s\n", e.what());
    return 4;
  }

  try {
    if (run_cmd->parsed()) return cmd_run(run);
    if (synth_cmd->parsed()) {
      synth.spec.seed = synth.params.seed;
      return cmd_synth(synth);
    }
    if (eval_cmd->parsed()) return cmd_eval(eval);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "corola: %s\n", e.what());
    return 4;
  } catch (const IoError& e) {
    std::fprintf(stderr, "corola: %s\n", e.what());
    return 2;
  } catch (const DimensionError& e) {
    std::fprintf(stderr, "corola: %s\n", e.what());
    return 3;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "corola: %s\n", e.what());
    return 1;
  }
  return 0;
}
