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
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "isac/assoc.hpp"
#include "isac/comm.hpp"
#include "isac/detect.hpp"
#include "isac/radarsim.hpp"
#include "isac/scene.hpp"

namespace isac {

// Every knob of an experiment. Parsed from a flat "key = value" file; `#`
// starts a comment; `vehicle` may repeat.
struct ExperimentConfig {
  // Scene and Monte Carlo.
  SceneKind scene = SceneKind::A;
  std::size_t frames = 20;
  std::size_t trials = 50;   // per sweep point
  std::size_t runs = 1;      // scenario runs of simulate / detect / associate / eval-metrics
  std::uint64_t seed = 1;
  double dt_s = 0.1;
  std::size_t n_ve = 2;
  std::size_t n_clutter = 2;
  std::vector<VehicleSpec> vehicles;  // explicit scene; overrides the preset

  // Sweeps.
  std::vector<ArrayGeometry> array_sizes{{2, 2}, {8, 8}, {32, 32}};
  std::vector<double> snr_grid_db{-55, -50, -45, -40, -35, -30, -25, -20, -15, -10};
  std::vector<std::size_t> clutter_grid{0, 1, 2, 3, 4, 5};
  std::vector<std::size_t> ve_grid{1, 2, 3, 4};
  ArrayGeometry matrix_array{8, 8};
  ArrayGeometry bs_array{8, 8};  // BS array of the single-run commands
  double comm_snr_db = -20.0;
  double label_snr_db = kLabelSnrDb;
  ArrayGeometry ve_array{2, 2};
  ChannelModel channel;

  // Radar.
  RadarWaveform waveform;
  double fs_hz = 40e6;
  std::size_t n_az = 128;
  std::size_t n_el = 4;
  std::size_t oversample = 8;
  double radar_height_m = 5.0;
  double radar_tilt_deg = 7.0;
  double radar_snr_db = -20.0;  // per sample, Gamma = 1 m^2 at 30 m
  Taper taper = Taper::Hann;     // range and azimuth taper of the image

  // Image grid.
  std::size_t n_range = 256;
  std::size_t n_angle = 64;
  double range_min_m = 12.0;
  double range_max_m = 52.0;
  double angle_span_deg = 90.0;

  // Detector and association. Guards cover a vehicle so its own returns
  // stay out of the training ring.
  DetectorConfig detector = [] {
    DetectorConfig d;
    d.cfar.guard = {20, 6};
    d.cfar.train = {8, 4};
    d.cfar.min_cells = 3;
    return d;
  }();
  double link_m = 2.2;
  BboxFilter bbox;
  CostKind cost = CostKind::CategoricalCrossEntropy;
  bool exclude_undetected = false;
  std::optional<double> gate;

  void validate() const;
  // Normalized "key = value" listing of every setting except the seed.
  std::string canonical() const;
  // FNV-1a of canonical(), 16 hex digits.
  std::string spec_hash() const;
};

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
// Applies one key; throws Parse on unknown keys or malformed values.
void apply_option(ExperimentConfig& cfg, const std::string& key, const std::string& value);

std::string format_array(const ArrayGeometry& a);  // "8x8"
ArrayGeometry parse_array(const std::string& text);

}  // namespace isac
