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

#include "isac/pipeline.hpp"

#include <algorithm>

#include "isac/deteval.hpp"

namespace isac {

RadarImage RadarChain::render(std::span<const PointScatterer> scatterers,
                              std::uint64_t noise_seed, int threads) const {
  RadarFrame frame = synthesize_rx(scatterers, waveform, array, 0, fs, noise_sigma2, noise_seed,
                                   threads);
  RangeProfile prof = range_compress(frame, waveform, oversample, threads, taper);
  if (plan) return plan->apply(prof, threads);
  return backproject(prof, array, waveform, grid, threads, channel_weights);
}

RadarImage RadarChain::render_clean(std::span<const PointScatterer> scatterers,
                                    int threads) const {
  RadarChain quiet = *this;
  quiet.noise_sigma2 = 0.0;
  return quiet.render(scatterers, 0, threads);
}

RadarImage RadarChain::render_noise(std::uint64_t noise_seed, int threads) const {
  return render({}, noise_seed, threads);
}

double radar_noise_sigma2(const ExperimentConfig& cfg) {
  const double lambda = cfg.waveform.wavelength();
  const double r = 30.0;
  double beta = lambda / (std::pow(4.0 * kPi, 1.5) * r * r);
  return beta * beta / db_to_linear(cfg.radar_snr_db);
}

RadarChain make_radar_chain(const ExperimentConfig& cfg, bool use_plan, int threads) {
  RadarChain rc;
  rc.waveform = cfg.waveform;
  rc.fs = cfg.fs_hz;
  rc.pose = {{0.0, 0.0, cfg.radar_height_m}, 0.0, cfg.radar_tilt_deg * kPi / 180.0};
  rc.array = RadarArray::planar(rc.pose, cfg.n_az, cfg.n_el, cfg.waveform.wavelength() / 2.0);
  const double half = cfg.angle_span_deg * kPi / 360.0;
  rc.grid = PixelGrid::uniform(rc.pose, cfg.range_min_m, cfg.range_max_m, cfg.n_range, -half,
                               half, cfg.n_angle);
  rc.oversample = cfg.oversample;
  rc.noise_sigma2 = radar_noise_sigma2(cfg);
  rc.taper = cfg.taper;
  if (cfg.taper != Taper::None) rc.channel_weights = rc.array.azimuth_taper(cfg.taper, cfg.n_az, cfg.n_el);
  if (use_plan &&
      BackprojectionPlan::footprint(cfg.n_range * cfg.n_angle, rc.array.channels()) <=
          kMaxPlanBytes) {
    const std::size_t m = samples_per_chirp(cfg.waveform, cfg.fs_hz) * cfg.oversample;
    const double step = cfg.fs_hz / (static_cast<double>(m) * cfg.waveform.mu());
    rc.plan = std::make_shared<BackprojectionPlan>(rc.array, rc.waveform, rc.grid, step, m / 2, m,
                                                   threads, rc.channel_weights);
  }
  return rc;
}

DetectorConfig detector_for(const ExperimentConfig& cfg, const PixelGrid& grid) {
  DetectorConfig d = cfg.detector;
  d.cfar.metric = {cfg.link_m, grid.ranges.front(), grid.range_step(), grid.angle_step()};
  d.head.bs_height = cfg.radar_height_m;
  d.head.spacing = 0.5;
  return d;
}

BsMount bs_mount(const ExperimentConfig& cfg) { return {{0.0, 0.0, cfg.radar_height_m}, 0.0}; }

namespace {

enum Stream : std::uint64_t { kScene = 1, kRadar, kChannel, kTraining, kLabel };

std::uint64_t vid(int id) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(id)); }

}  // namespace

std::uint64_t TrialSeeds::scene() const { return derive_seed(base, {kScene}); }
std::uint64_t TrialSeeds::radar_noise(std::size_t f) const {
  return derive_seed(base, {kRadar, f});
}
std::uint64_t TrialSeeds::channel(std::size_t f, int v) const {
  return derive_seed(base, {kChannel, f, vid(v)});
}
std::uint64_t TrialSeeds::training(std::size_t f, int v) const {
  return derive_seed(base, {kTraining, f, vid(v)});
}
std::uint64_t TrialSeeds::labelling(std::size_t f, int v) const {
  return derive_seed(base, {kLabel, f, vid(v)});
}

TrialSeeds trial_seeds(std::uint64_t master, std::size_t trial) {
  return {derive_seed(master, {0x7121ULL, trial})};
}

ScenarioConfig trial_pool(const ExperimentConfig& cfg, const TrialSeeds& seeds,
                          std::size_t max_ve, std::size_t max_clutter) {
  const double duration = static_cast<double>(cfg.frames - 1) * cfg.dt_s;
  if (!cfg.vehicles.empty()) {
    ScenarioConfig sc;
    sc.kind = cfg.scene;
    sc.duration_s = duration;
    sc.dt_s = cfg.dt_s;
    sc.vehicles = cfg.vehicles;
    sc.seed = seeds.scene();
    return sc;
  }
  return make_preset_pool(cfg.scene, max_ve, max_clutter, duration, cfg.dt_s, seeds.scene());
}

ScenarioConfig trial_scenario(const ExperimentConfig& cfg, const TrialSeeds& seeds) {
  return trial_pool(cfg, seeds, cfg.n_ve, cfg.n_clutter);
}

std::vector<std::pair<std::size_t, int>> match_detections(const std::vector<Detection>& dets,
                                                          const std::vector<VehicleState>& vehicles,
                                                          double min_iou) {
  struct Cand {
    double o;
    std::size_t k, v;
  };
  std::vector<Cand> cands;
  for (std::size_t k = 0; k < dets.size(); ++k)
    for (std::size_t v = 0; v < vehicles.size(); ++v) {
      if (!vehicles[v].bbox) continue;
      double o = iou(dets[k].bbox, *vehicles[v].bbox);
      if (o >= min_iou) cands.push_back({o, k, v});
    }
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) {
    return a.o > b.o;
  });
  std::vector<char> used_k(dets.size(), 0), used_v(vehicles.size(), 0);
  std::vector<std::pair<std::size_t, int>> out;
  for (const auto& c : cands) {
    if (used_k[c.k] || used_v[c.v]) continue;
    used_k[c.k] = used_v[c.v] = 1;
    out.emplace_back(c.k, vehicles[c.v].id);
  }
  std::sort(out.begin(), out.end());
  return out;
}

FrameLayers render_layers(const ExperimentConfig& cfg, const RadarChain& radar,
                          const Scenario& scenario, std::size_t t, const TrialSeeds& seeds,
                          int threads) {
  FrameLayers out;
  out.frame = t;
  for (const auto& pv : scenario.advance(t)) {
    auto pts = world_scatterers(pv);
    VehicleLayer layer;
    VehicleState& vs = layer.state;
    vs.id = pv.target->id;
    vs.cls = pv.target->cls;
    vs.is_ve = pv.target->is_ve;
    vs.pose = pv.pose;
    vs.antenna = ve_antenna_position(pv);
    try {
      vs.bbox = ground_truth_bbox(pts, radar.pose, radar.grid, cfg.bbox);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::NoVisibleTarget) throw;
    }
    layer.image = radar.render_clean(pts, threads);
    out.vehicles.push_back(std::move(layer));
  }
  out.noise = radar.render_noise(seeds.radar_noise(t), threads);
  return out;
}

SensedFrame compose_frame(const RadarChain& radar, const DetectorConfig& det_cfg,
                          const FrameLayers& layers, const std::vector<int>* ids,
                          bool keep_image) {
  SensedFrame f;
  f.frame = layers.frame;
  RadarImage img = layers.noise;
  for (const auto& layer : layers.vehicles) {
    if (ids && std::find(ids->begin(), ids->end(), layer.state.id) == ids->end()) continue;
    f.vehicles.push_back(layer.state);
    img.pixels += layer.image.pixels;
  }
  RMatrix mag = magnitude_image(img);
  std::vector<Detection> dets;
  for (const auto& h : cfar_detect_and_cluster(mag, det_cfg.cfar)) {
    Detection d;
    d.bbox = h.bbox;
    d.confidence = h.confidence;
    d.class_scores = infer_class_scores(h.bbox, radar.grid);
    dets.push_back(std::move(d));
  }
  f.detections = nms(std::move(dets), det_cfg.nms_iou);
  f.det_truth = match_detections(f.detections, f.vehicles);
  if (keep_image) f.image = std::move(img);
  return f;
}

SensedFrame sense_frame(const ExperimentConfig& cfg, const RadarChain& radar,
                        const DetectorConfig& det_cfg, const Scenario& scenario, std::size_t t,
                        const TrialSeeds& seeds, bool keep_image, int threads) {
  return compose_frame(radar, det_cfg, render_layers(cfg, radar, scenario, t, seeds, threads),
                       nullptr, keep_image);
}

ChannelRealization vehicle_channel(const ExperimentConfig& cfg, const ArrayGeometry& bs_array,
                                   const VehicleState& v, const TrialSeeds& seeds,
                                   std::size_t frame) {
  Rng rng(seeds.channel(frame, v.id));
  return generate_channel(bs_mount(cfg), bs_array, v.antenna, v.pose.heading, v.pose.velocity,
                          cfg.ve_array, rng, cfg.channel);
}

std::vector<BeamReport> train_frame(const ExperimentConfig& /*cfg*/, const TrainingCodebooks& cb,
                                    const std::vector<ChannelRealization>& channels,
                                    const SensedFrame& f, double snr_db, const TrialSeeds& seeds) {
  std::vector<BeamReport> out;
  std::size_t i = 0;
  for (const auto& v : f.vehicles) {
    if (!v.is_ve) continue;
    Rng rng(seeds.training(f.frame, v.id));
    BeamReport r = beam_training(channels.at(i++), cb, snr_db, rng);
    r.ve_id = v.id;
    r.frame = f.frame;
    out.push_back(std::move(r));
  }
  return out;
}

FrameOutcome associate_frame(const ExperimentConfig& cfg, const SensedFrame& f,
                             const std::vector<Detection>& dets,
                             const std::vector<BeamReport>& reports) {
  FrameOutcome o;
  o.cost = build_cost_matrix(dets, reports, cfg.cost);
  o.assignment = solve_assignment(o.cost.values, cfg.gate);
  auto& a = o.association;
  a.frame = f.frame;
  for (const auto& [k, v] : o.assignment.pairs) a.assigned.emplace_back(k, reports[v].ve_id);
  for (const auto& v : f.vehicles)
    if (v.is_ve) a.ves_present.push_back(v.id);
  for (const auto& [k, id] : f.det_truth)
    if (std::find(a.ves_present.begin(), a.ves_present.end(), id) != a.ves_present.end()) {
      a.truth.emplace_back(k, id);
      a.ves_detected.push_back(id);
    }
  return o;
}

std::vector<GroundTruthLabel> frame_labels(const ExperimentConfig& cfg,
                                           const ArrayGeometry& bs_array, const SensedFrame& f,
                                           const TrialSeeds& seeds) {
  TrainingCodebooks cb = TrainingCodebooks::for_arrays(bs_array, cfg.ve_array);
  std::vector<GroundTruthLabel> out;
  for (const auto& v : f.vehicles) {
    if (!v.bbox) continue;
    ChannelRealization ch = vehicle_channel(cfg, bs_array, v, seeds, f.frame);
    Rng rng(seeds.labelling(f.frame, v.id));
    auto [bh, bv] = true_beam_indices(ch, cb, rng, cfg.label_snr_db);
    GroundTruthLabel l;
    l.frame = f.frame;
    l.target_id = v.id;
    l.bbox = *v.bbox;
    l.cls = v.cls;
    l.is_ve = v.is_ve;
    l.beam_h = bh;
    l.beam_v = bv;
    out.push_back(l);
  }
  return out;
}

}  // namespace isac
