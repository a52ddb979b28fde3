/*
 * Copyright 2026 The isac-t2u Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <vector>

#include "isac/config.hpp"
#include "isac/sweeps.hpp"

namespace isac {

struct RunOptions {
  std::string out_dir = ".";
  int threads = 1;
  bool dump_images = false;
  // associate / eval-metrics: read detections from this file instead of
  // running the reference detector.
  std::string detections_path;
};

// Each runner writes into out_dir and returns the file names it wrote.
// Frames are numbered run * frames + t across the configured runs.

// Full pipeline: labels, detections, beam reports, associations, metrics,
// codebooks, per-frame diagnostics and optional image dumps.
std::vector<std::string> run_simulate(const ExperimentConfig& cfg, const RunOptions& opt);
// Scene, radar and detector only.
std::vector<std::string> run_detect(const ExperimentConfig& cfg, const RunOptions& opt);
// Beam training and association.
std::vector<std::string> run_associate(const ExperimentConfig& cfg, const RunOptions& opt);
// Detection and beam metrics against ground truth.
std::vector<std::string> run_eval_metrics(const ExperimentConfig& cfg, const RunOptions& opt);

std::vector<std::string> run_sweep_snr(const ExperimentConfig& cfg, const RunOptions& opt);
std::vector<std::string> run_sweep_clutter(const ExperimentConfig& cfg, const RunOptions& opt);
std::vector<std::string> run_sweep_matrix(const ExperimentConfig& cfg, const RunOptions& opt);

// CSV text of sweep points; the first line is a "#" provenance comment.
std::string curve_csv(const std::string& title, const ExperimentConfig& cfg,
                      const std::vector<CurvePoint>& points);
// n_ve rows by clutter columns of P(correct).
std::string matrix_csv(const ExperimentConfig& cfg, const std::vector<CurvePoint>& points);

// Text dump: axis, N, then the N x N entries as "re im" rows.
std::string codebook_text(const Codebook& cb);

}  // namespace isac
