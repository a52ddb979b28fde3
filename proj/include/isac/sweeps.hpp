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

#include <cstddef>
#include <vector>

#include "isac/comm.hpp"
#include "isac/config.hpp"

namespace isac {

// Mean probability of correct association over trials at one setting.
struct CurvePoint {
  ArrayGeometry array;
  double snr_db = 0.0;
  std::size_t n_ve = 0;
  std::size_t n_clutter = 0;
  double p_correct = 0.0;
  double p_stderr = 0.0;
  std::size_t trials = 0;           // trials with at least one scored frame
  std::size_t frames_skipped = 0;   // frames without VEs or aborted by an error
};

// Grid of a sweep: every (population, array, SNR) combination is scored.
struct SweepGrid {
  std::vector<std::pair<std::size_t, std::size_t>> populations;  // (n_ve, n_clutter)
  std::vector<ArrayGeometry> arrays;
  std::vector<double> snrs_db;
};

// Monte Carlo over cfg.trials x cfg.frames. Within a trial every grid point
// sees the same vehicles, radar noise, channels and training noise.
// Results do not depend on `threads`.
std::vector<CurvePoint> run_sweep(const ExperimentConfig& cfg, const SweepGrid& grid,
                                  int threads = 1);

// P(correct) vs SNR for each array at (n_ve, n_clutter).
std::vector<CurvePoint> sweep_snr(const ExperimentConfig& cfg, int threads = 1);
// P(correct) vs clutter count for each array at the communication SNR.
std::vector<CurvePoint> sweep_clutter(const ExperimentConfig& cfg, int threads = 1);
// P(correct) over ve_grid x clutter_grid at matrix_array and the
// communication SNR.
std::vector<CurvePoint> sweep_matrix(const ExperimentConfig& cfg, int threads = 1);

}  // namespace isac
