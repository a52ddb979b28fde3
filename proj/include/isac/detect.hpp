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

#include <array>
#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isac/comm.hpp"
#include "isac/common.hpp"
#include "isac/geometry.hpp"
#include "isac/scene.hpp"

namespace isac {

struct Detection {
  BoundingBox bbox;
  double confidence = 0.0;
  std::array<double, kTargetClassCount> class_scores{};
  std::vector<double> logits_h;
  std::vector<double> logits_v;

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Cell-averaging CFAR on the squared input. Window sizes are given per
// axis as (rows, cols). `floor` is an absolute floor on the input value.
struct CfarConfig {
  std::array<std::size_t, 2> guard{2, 2};
  std::array<std::size_t, 2> train{4, 4};
  double pfa = 1e-4;
  double floor = 0.0;
  // Cells this far below the image peak are ignored; 0 turns it off.
  double dynamic_range_db = 60.0;
  // Exceedances closer than this many pixels per axis join one cluster.
  std::array<std::size_t, 2> link{1, 1};
  // Metric linking on a polar grid; replaces `link` when link_m > 0.
  // Rows are ranges range0 + i * range_step, columns are angles spaced by
  // angle_step.
  struct Metric {
    double link_m = 0.0;
    double range0 = 0.0;
    double range_step = 0.0;
    double angle_step = 0.0;
  } metric;
  double min_box_pixels = 2.0;
  std::size_t min_cells = 1;  // smaller clusters are dropped

  void validate() const;
};

struct CfarHit {
  BoundingBox bbox;
  double confidence = 0.0;
  std::size_t peak_row = 0;
  std::size_t peak_col = 0;
  std::size_t cells = 0;
};

// CA-CFAR scale for N training cells: N (pfa^{-1/N} - 1).
double cfar_scale(std::size_t n_train, double pfa);

// Exceedance mask (1 = detection) of the CFAR test alone.
Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> cfar_mask(
    const RMatrix& image, const CfarConfig& cfg);

// Clusters of exceedances as boxes; confidence = 1 - threshold / peak power.
std::vector<CfarHit> cfar_detect_and_cluster(const RMatrix& image, const CfarConfig& cfg);

// Geometry the reference head needs to turn a box centre into beam logits.
struct BeamHeadConfig {
  double bs_height = 5.0;        // m
  double target_height = 1.7;    // m, assumed antenna height of a user
  double kappa = 10.0;
  double spacing = 0.5;          // BS element spacing, wavelengths
};

// Logits kappa * ln(gain of each beam toward the box centre).
std::pair<std::vector<double>, std::vector<double>> infer_beam_logits(
    const BoundingBox& box, const PixelGrid& grid, const Codebook& cb_h, const Codebook& cb_v,
    const BeamHeadConfig& cfg);

// Footprint match of the box against each class template, normalized to
// sum 1.
std::array<double, kTargetClassCount> infer_class_scores(const BoundingBox& box,
                                                         const PixelGrid& grid);

std::vector<Detection> nms(std::vector<Detection> dets, double iou_thr);

struct ClassDecision {
  std::optional<VehicleClass> target_class;
  std::vector<double> beams_h;
  std::vector<double> beams_v;
};

ClassDecision threshold_classes(const Detection& det, double gamma_class);

struct DetectorConfig {
  CfarConfig cfar;
  BeamHeadConfig head;
  double nms_iou = 0.7;
  double gamma_class = 0.25;
};

// Full reference detector on a linear magnitude image.
std::vector<Detection> detect_targets(const RMatrix& magnitude, const PixelGrid& grid,
                                      const Codebook& cb_h, const Codebook& cb_v,
                                      const DetectorConfig& cfg);

// Re-derives beam logits for another codebook pair (same boxes).
void relabel_beams(std::vector<Detection>& dets, const PixelGrid& grid, const Codebook& cb_h,
                   const Codebook& cb_v, const BeamHeadConfig& cfg);

// Detection interchange: newline-delimited JSON, a header then one record
// per detection.
struct DetectionFile {
  std::size_t n_h = 0;
  std::size_t n_v = 0;
  std::string spec_hash;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::size_t, Detection>> items;  // (frame, detection)
};

void write_detections(std::ostream& os, const DetectionFile& file);
void write_detections(const std::string& path, const DetectionFile& file);
DetectionFile read_detections(std::istream& is);
DetectionFile read_detections(const std::string& path);

}  // namespace isac
