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

#include <cmath>
#include <limits>
#include <set>

#include "doctest.h"
#include "isac/deteval.hpp"
#include "isac/pipeline.hpp"

using namespace isac;

namespace {

struct FrameRun {
  SensedFrame sensed;
  std::vector<Detection> dets;
  std::vector<BeamReport> reports;
  FrameOutcome outcome;
};

FrameRun run_one(const ExperimentConfig& cfg, const RadarChain& radar, std::size_t trial,
                 std::size_t t, int threads = 1) {
  const DetectorConfig det = detector_for(cfg, radar.grid);
  const TrainingCodebooks cb = TrainingCodebooks::for_arrays(cfg.bs_array, cfg.ve_array);
  TrialSeeds seeds = trial_seeds(cfg.seed, trial);
  Scenario sc(trial_scenario(cfg, seeds));
  FrameRun r;
  r.sensed = sense_frame(cfg, radar, det, sc, t, seeds, false, threads);
  r.dets = r.sensed.detections;
  relabel_beams(r.dets, radar.grid, cb.tx_h, cb.tx_v, det.head);
  std::vector<ChannelRealization> channels;
  for (const auto& v : r.sensed.vehicles)
    if (v.is_ve) channels.push_back(vehicle_channel(cfg, cfg.bs_array, v, seeds, t));
  r.reports = train_frame(cfg, cb, channels, r.sensed, cfg.comm_snr_db, seeds);
  r.outcome = associate_frame(cfg, r.sensed, r.dets, r.reports);
  return r;
}

}  // namespace

TEST_CASE("seed streams are distinct") {
  TrialSeeds a = trial_seeds(1, 0), b = trial_seeds(1, 1), c = trial_seeds(2, 0);
  std::set<std::uint64_t> all = {a.scene(), b.scene(), c.scene(), a.radar_noise(0), a.radar_noise(1),
                                 a.channel(0, 1), a.channel(0, 2), a.training(0, 1), a.labelling(0, 1)};
  CHECK(all.size() == 9);
  CHECK(trial_seeds(1, 0).scene() == a.scene());
}

TEST_CASE("single user end to end") {
  ExperimentConfig cfg;
  cfg.n_ve = 1;
  cfg.n_clutter = 0;
  cfg.bs_array = {32, 32};
  cfg.comm_snr_db = -10.0;
  const RadarChain radar = make_radar_chain(cfg, true);
  for (std::size_t trial = 0; trial < 3; ++trial) {
    FrameRun r = run_one(cfg, radar, trial, 0);
    REQUIRE(r.sensed.vehicles.size() == 1);
    REQUIRE(r.reports.size() == 1);
    CHECK(r.outcome.assignment.pairs.size() == 1);
    CHECK(correct_association_prob({r.outcome.association}).p_correct == 1.0);
  }
}

TEST_CASE("empty scene") {
  ExperimentConfig cfg;
  cfg.n_ve = 0;
  cfg.n_clutter = 0;
  const RadarChain radar = make_radar_chain(cfg, true);
  FrameRun r = run_one(cfg, radar, 0, 0);
  CHECK(r.sensed.vehicles.empty());
  CHECK(r.dets.empty());
  CHECK(r.outcome.assignment.pairs.empty());
  CHECK(correct_association_prob({r.outcome.association}).frames_skipped == 1);
}

TEST_CASE("frames are reproducible at any worker count") {
  ExperimentConfig cfg;
  const RadarChain radar = make_radar_chain(cfg, true);
  FrameRun a = run_one(cfg, radar, 4, 2, 1);
  FrameRun b = run_one(cfg, radar, 4, 2, 3);
  CHECK(a.dets == b.dets);
  REQUIRE(a.reports.size() == b.reports.size());
  for (std::size_t i = 0; i < a.reports.size(); ++i) {
    CHECK(a.reports[i].f_h == b.reports[i].f_h);
    CHECK(a.reports[i].best_power_db == b.reports[i].best_power_db);
  }
  CHECK(a.outcome.assignment.pairs == b.outcome.assignment.pairs);
  // The planned and direct chains see the same targets.
  const RadarChain direct = make_radar_chain(cfg, false);
  FrameRun c = run_one(cfg, direct, 4, 2);
  REQUIRE(c.dets.size() == a.dets.size());
  for (std::size_t i = 0; i < a.dets.size(); ++i) CHECK(iou(c.dets[i].bbox, a.dets[i].bbox) > 0.9);
}

TEST_CASE("layered frames equal a direct render") {
  ExperimentConfig cfg;
  const RadarChain radar = make_radar_chain(cfg, true);
  const DetectorConfig det = detector_for(cfg, radar.grid);
  TrialSeeds seeds = trial_seeds(cfg.seed, 0);
  Scenario sc(trial_scenario(cfg, seeds));
  FrameLayers layers = render_layers(cfg, radar, sc, 1, seeds);
  std::vector<PointScatterer> all;
  for (const auto& pv : sc.advance(1)) {
    auto s = world_scatterers(pv);
    all.insert(all.end(), s.begin(), s.end());
  }
  RadarImage whole = radar.render(all, seeds.radar_noise(1));
  RadarImage sum = layers.noise;
  for (const auto& l : layers.vehicles) sum.pixels += l.image.pixels;
  double peak = whole.pixels.cwiseAbs().maxCoeff();
  CHECK((sum.pixels - whole.pixels).cwiseAbs().maxCoeff() < 1e-9 * peak);

  // A subset drops the other vehicles.
  std::vector<int> first = {layers.vehicles.at(0).state.id};
  SensedFrame one = compose_frame(radar, det, layers, &first, false);
  CHECK(one.vehicles.size() == 1);
}

TEST_CASE("labels carry beams in codebook range") {
  ExperimentConfig cfg;
  cfg.bs_array = {16, 8};
  const RadarChain radar = make_radar_chain(cfg, true);
  const DetectorConfig det = detector_for(cfg, radar.grid);
  TrialSeeds seeds = trial_seeds(cfg.seed, 1);
  Scenario sc(trial_scenario(cfg, seeds));
  SensedFrame f = sense_frame(cfg, radar, det, sc, 0, seeds, false);
  auto labels = frame_labels(cfg, cfg.bs_array, f, seeds);
  std::size_t visible = 0;
  for (const auto& v : f.vehicles) visible += v.bbox ? 1 : 0;
  CHECK(labels.size() == visible);
  for (const auto& l : labels) {
    CHECK(l.beam_h < 16);
    CHECK(l.beam_v < 8);
    CHECK(l.bbox.valid());
  }
}

TEST_CASE("noiseless detector benchmark") {
  // Recall >= 0.9 and at most 0.5 false positives per frame over the three
  // preset scenes.
  std::size_t visible = 0, found = 0, false_pos = 0, frames = 0;
  for (SceneKind kind : {SceneKind::A, SceneKind::B, SceneKind::C}) {
    ExperimentConfig cfg;
    cfg.scene = kind;
    cfg.n_ve = 2;
    cfg.n_clutter = 2;
    cfg.radar_snr_db = std::numeric_limits<double>::infinity();
    const RadarChain radar = make_radar_chain(cfg, true);
    const DetectorConfig det = detector_for(cfg, radar.grid);
    for (std::size_t trial = 0; trial < 3; ++trial) {
      TrialSeeds seeds = trial_seeds(cfg.seed, trial);
      Scenario sc(trial_scenario(cfg, seeds));
      for (std::size_t t : {0u, 9u}) {
        SensedFrame f = sense_frame(cfg, radar, det, sc, t, seeds, false);
        for (const auto& v : f.vehicles) visible += v.bbox ? 1 : 0;
        found += f.det_truth.size();
        false_pos += f.detections.size() - f.det_truth.size();
        ++frames;
      }
    }
  }
  double recall = double(found) / double(visible);
  double fp = double(false_pos) / double(frames);
  MESSAGE("recall " << recall << " fp/frame " << fp << " over " << frames << " frames");
  CHECK(recall >= 0.9);
  CHECK(fp <= 0.5);
}

TEST_CASE("match_detections is greedy and one to one") {
  VehicleState a, b;
  a.id = 1;
  a.bbox = BoundingBox{0.3, 0.3, 0.1, 0.1};
  b.id = 2;
  b.bbox = BoundingBox{0.7, 0.7, 0.1, 0.1};
  VehicleState hidden;
  hidden.id = 3;
  Detection d1, d2, d3;
  d1.bbox = {0.7, 0.71, 0.1, 0.1};
  d2.bbox = {0.3, 0.3, 0.1, 0.1};
  d3.bbox = {0.3, 0.31, 0.1, 0.1};
  auto m = match_detections({d1, d2, d3}, {a, b, hidden});
  REQUIRE(m.size() == 2);
  std::sort(m.begin(), m.end());
  CHECK(m[0] == std::make_pair(std::size_t(0), 2));
  CHECK(m[1] == std::make_pair(std::size_t(1), 1));
}
