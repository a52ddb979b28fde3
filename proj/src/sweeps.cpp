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

#include "isac/sweeps.hpp"

#include <algorithm>
#include <cmath>

#include "isac/pipeline.hpp"

namespace isac {

namespace {

// Per-trial mean P(correct) for every grid point; NaN when no frame scored.
struct TrialResult {
  std::vector<double> p;
  std::vector<std::size_t> skipped;
};

std::vector<int> population_ids(const ScenarioConfig& pool, std::size_t n_ve,
                                std::size_t n_clutter) {
  std::vector<int> ids;
  for (const auto& v : subset_scenario(pool, n_ve, n_clutter).vehicles) ids.push_back(v.id);
  return ids;
}

}  // namespace

std::vector<CurvePoint> run_sweep(const ExperimentConfig& cfg, const SweepGrid& grid,
                                  int threads) {
  cfg.validate();
  if (grid.populations.empty() || grid.arrays.empty() || grid.snrs_db.empty())
    fail(ErrorCode::InvalidArgument, "sweep grid must be nonempty");
  std::size_t max_ve = 0, max_clutter = 0;
  for (auto [v, c] : grid.populations) {
    max_ve = std::max(max_ve, v);
    max_clutter = std::max(max_clutter, c);
  }
  const RadarChain radar = make_radar_chain(cfg, true, threads);
  const DetectorConfig det = detector_for(cfg, radar.grid);
  std::vector<TrainingCodebooks> books;
  for (const auto& a : grid.arrays) books.push_back(TrainingCodebooks::for_arrays(a, cfg.ve_array));

  const std::size_t NP = grid.populations.size(), NA = grid.arrays.size(),
                    NS = grid.snrs_db.size(), cells = NP * NA * NS;
  auto cell = [&](std::size_t p, std::size_t a, std::size_t s) { return (p * NA + a) * NS + s; };

  std::vector<TrialResult> results(cfg.trials);
  parallel_for(cfg.trials, threads, [&](std::size_t trial) {
    const TrialSeeds seeds = trial_seeds(cfg.seed, trial);
    const ScenarioConfig pool = trial_pool(cfg, seeds, max_ve, max_clutter);
    const Scenario scenario(pool);
    std::vector<std::vector<int>> ids;
    for (auto [v, c] : grid.populations) ids.push_back(population_ids(pool, v, c));

    std::vector<double> sum(cells, 0.0);
    std::vector<std::size_t> used(cells, 0), skipped(cells, 0);
    for (std::size_t t = 0; t < cfg.frames; ++t) {
      FrameLayers layers;
      try {
        layers = render_layers(cfg, radar, scenario, t, seeds);
      } catch (const Error&) {
        for (auto& s : skipped) ++s;
        continue;
      }
      // Channels depend on the array and vehicle only, so they are shared
      // across populations and SNRs.
      std::vector<std::vector<ChannelRealization>> channels(NA);
      for (std::size_t a = 0; a < NA; ++a)
        for (const auto& layer : layers.vehicles)
          channels[a].push_back(
              layer.state.is_ve ? vehicle_channel(cfg, grid.arrays[a], layer.state, seeds, t)
                                : ChannelRealization{});
      for (std::size_t p = 0; p < NP; ++p) {
        SensedFrame f = compose_frame(radar, det, layers, &ids[p], false);
        for (std::size_t a = 0; a < NA; ++a) {
          std::vector<ChannelRealization> ve_channels;
          for (std::size_t i = 0; i < layers.vehicles.size(); ++i) {
            const auto& id_list = ids[p];
            const auto& st = layers.vehicles[i].state;
            if (st.is_ve && std::find(id_list.begin(), id_list.end(), st.id) != id_list.end())
              ve_channels.push_back(channels[a][i]);
          }
          std::vector<Detection> dets = f.detections;
          relabel_beams(dets, radar.grid, books[a].tx_h, books[a].tx_v, det.head);
          for (std::size_t s = 0; s < NS; ++s) {
            const std::size_t c = cell(p, a, s);
            try {
              auto reports = train_frame(cfg, books[a], ve_channels, f, grid.snrs_db[s], seeds);
              FrameOutcome o = associate_frame(cfg, f, dets, reports);
              AssociationScore sc = correct_association_prob({o.association}, cfg.exclude_undetected);
              if (sc.frames_used == 0) {
                ++skipped[c];
                continue;
              }
              sum[c] += sc.p_correct;
              ++used[c];
            } catch (const Error&) {
              ++skipped[c];
            }
          }
        }
      }
    }
    TrialResult r;
    r.p.resize(cells);
    for (std::size_t c = 0; c < cells; ++c)
      r.p[c] = used[c] ? sum[c] / static_cast<double>(used[c]) : std::nan("");
    r.skipped = std::move(skipped);
    results[trial] = std::move(r);
  });

  std::vector<CurvePoint> out;
  for (std::size_t p = 0; p < NP; ++p)
    for (std::size_t a = 0; a < NA; ++a)
      for (std::size_t s = 0; s < NS; ++s) {
        const std::size_t c = cell(p, a, s);
        CurvePoint pt;
        pt.array = grid.arrays[a];
        pt.snr_db = grid.snrs_db[s];
        pt.n_ve = grid.populations[p].first;
        pt.n_clutter = grid.populations[p].second;
        double m = 0.0, m2 = 0.0;
        for (const auto& r : results) {
          pt.frames_skipped += r.skipped[c];
          if (std::isnan(r.p[c])) continue;
          ++pt.trials;
          m += r.p[c];
          m2 += r.p[c] * r.p[c];
        }
        if (pt.trials > 0) {
          const double n = static_cast<double>(pt.trials);
          pt.p_correct = m / n;
          if (pt.trials > 1) {
            double var = std::max(0.0, (m2 - n * pt.p_correct * pt.p_correct) / (n - 1.0));
            pt.p_stderr = std::sqrt(var / n);
          }
        }
        out.push_back(pt);
      }
  return out;
}

std::vector<CurvePoint> sweep_snr(const ExperimentConfig& cfg, int threads) {
  return run_sweep(cfg, {{{cfg.n_ve, cfg.n_clutter}}, cfg.array_sizes, cfg.snr_grid_db}, threads);
}

std::vector<CurvePoint> sweep_clutter(const ExperimentConfig& cfg, int threads) {
  SweepGrid g;
  for (auto c : cfg.clutter_grid) g.populations.emplace_back(cfg.n_ve, c);
  g.arrays = cfg.array_sizes;
  g.snrs_db = {cfg.comm_snr_db};
  return run_sweep(cfg, g, threads);
}

std::vector<CurvePoint> sweep_matrix(const ExperimentConfig& cfg, int threads) {
  SweepGrid g;
  for (auto v : cfg.ve_grid)
    for (auto c : cfg.clutter_grid) g.populations.emplace_back(v, c);
  g.arrays = {cfg.matrix_array};
  g.snrs_db = {cfg.comm_snr_db};
  return run_sweep(cfg, g, threads);
}

}  // namespace isac
