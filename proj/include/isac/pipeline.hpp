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
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "isac/assoc.hpp"
#include "isac/comm.hpp"
#include "isac/config.hpp"
#include "isac/detect.hpp"
#include "isac/radarsim.hpp"
#include "isac/scene.hpp"

namespace isac {

// Radar front end shared by every frame of an experiment.
struct RadarChain {
  RadarWaveform waveform;
  double fs = 0.0;
  RadarPose pose;
  RadarArray array;
  PixelGrid grid;
  std::size_t oversample = 8;
  double noise_sigma2 = 0.0;
  Taper taper = Taper::Hann;
  std::vector<double> channel_weights;  // azimuth taper, empty: untapered
  std::shared_ptr<const BackprojectionPlan> plan;  // null: direct back-projection

  RadarImage render(std::span<const PointScatterer> scatterers, std::uint64_t noise_seed,
                    int threads = 1) const;
  // Noise-free image of the scatterers.
  RadarImage render_clean(std::span<const PointScatterer> scatterers, int threads = 1) const;
  // Image of receiver noise alone.
  RadarImage render_noise(std::uint64_t noise_seed, int threads = 1) const;
};

// Plans above this size fall back to direct back-projection.
inline constexpr std::size_t kMaxPlanBytes = std::size_t{512} << 20;

RadarChain make_radar_chain(const ExperimentConfig& cfg, bool use_plan, int threads = 1);

// Per-sample noise variance for the configured radar SNR: |beta|^2 of a
// 1 m^2 scatterer at 30 m divided by the linear SNR.
double radar_noise_sigma2(const ExperimentConfig& cfg);

// Detector settings with pixel link distances and BS height filled in.
DetectorConfig detector_for(const ExperimentConfig& cfg, const PixelGrid& grid);

BsMount bs_mount(const ExperimentConfig& cfg);

// Seed streams of one trial.
struct TrialSeeds {
  std::uint64_t base = 0;
  std::uint64_t scene() const;
  std::uint64_t radar_noise(std::size_t frame) const;
  std::uint64_t channel(std::size_t frame, int vehicle) const;
  std::uint64_t training(std::size_t frame, int vehicle) const;
  std::uint64_t labelling(std::size_t frame, int vehicle) const;
};

TrialSeeds trial_seeds(std::uint64_t master, std::size_t trial);

// Scenario of one trial: explicit vehicles when configured, otherwise a
// preset pool cut down to (n_ve, n_clutter).
ScenarioConfig trial_pool(const ExperimentConfig& cfg, const TrialSeeds& seeds,
                          std::size_t max_ve, std::size_t max_clutter);
ScenarioConfig trial_scenario(const ExperimentConfig& cfg, const TrialSeeds& seeds);

struct VehicleState {
  int id = 0;
  VehicleClass cls = VehicleClass::Sedan;
  bool is_ve = false;
  Pose pose;
  Vec3 antenna;
  std::optional<BoundingBox> bbox;  // none when not visible in the image
};

// Array-independent part of a frame: image, detections, truth matching.
struct SensedFrame {
  std::size_t frame = 0;
  std::vector<VehicleState> vehicles;
  std::optional<RadarImage> image;
  std::vector<Detection> detections;  // boxes, confidence, class scores
  // detection index -> vehicle id, greedy IoU >= 0.5
  std::vector<std::pair<std::size_t, int>> det_truth;
};

// The imaging chain is linear, so a frame is stored as one noise-free image
// per vehicle plus a noise image; any subset of vehicles is then a sum.
struct VehicleLayer {
  VehicleState state;
  RadarImage image;
};

struct FrameLayers {
  std::size_t frame = 0;
  std::vector<VehicleLayer> vehicles;
  RadarImage noise;
};

FrameLayers render_layers(const ExperimentConfig& cfg, const RadarChain& radar,
                          const Scenario& scenario, std::size_t t, const TrialSeeds& seeds,
                          int threads = 1);

// Detection on the sum of the noise layer and the listed vehicles (all
// when `ids` is null).
SensedFrame compose_frame(const RadarChain& radar, const DetectorConfig& det_cfg,
                          const FrameLayers& layers, const std::vector<int>* ids, bool keep_image);

SensedFrame sense_frame(const ExperimentConfig& cfg, const RadarChain& radar,
                        const DetectorConfig& det_cfg, const Scenario& scenario, std::size_t t,
                        const TrialSeeds& seeds, bool keep_image, int threads = 1);

// Greedy one-to-one matching of detections to visible vehicles by IoU.
std::vector<std::pair<std::size_t, int>> match_detections(const std::vector<Detection>& dets,
                                                          const std::vector<VehicleState>& vehicles,
                                                          double min_iou = 0.5);

ChannelRealization vehicle_channel(const ExperimentConfig& cfg, const ArrayGeometry& bs_array,
                                   const VehicleState& v, const TrialSeeds& seeds,
                                   std::size_t frame);

// Beam reports of every VE in the frame at the given SNR.
std::vector<BeamReport> train_frame(const ExperimentConfig& cfg, const TrainingCodebooks& cb,
                                    const std::vector<ChannelRealization>& channels,
                                    const SensedFrame& f, double snr_db, const TrialSeeds& seeds);

// Cost matrix, assignment and truth for one frame.
struct FrameOutcome {
  CostMatrix cost;
  Assignment assignment;
  FrameAssociation association;
};

FrameOutcome associate_frame(const ExperimentConfig& cfg, const SensedFrame& f,
                             const std::vector<Detection>& dets,
                             const std::vector<BeamReport>& reports);

// Ground-truth labels (visible vehicles) with beam indices for `bs_array`.
std::vector<GroundTruthLabel> frame_labels(const ExperimentConfig& cfg,
                                           const ArrayGeometry& bs_array, const SensedFrame& f,
                                           const TrialSeeds& seeds);

}  // namespace isac
