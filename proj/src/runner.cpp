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

#include "isac/runner.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "isac/deteval.hpp"
#include "isac/pipeline.hpp"

namespace isac {

using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// JSON has no inf/NaN.
json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

std::string provenance(const ExperimentConfig& cfg) {
  return "spec_hash=" + cfg.spec_hash() + " seed=" + std::to_string(cfg.seed);
}

json header(const char* kind, const ExperimentConfig& cfg) {
  return {{"type", "header"}, {"kind", kind}, {"spec_hash", cfg.spec_hash()}, {"seed", cfg.seed}};
}

class Writer {
 public:
  explicit Writer(const RunOptions& opt) : dir_(opt.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) fail(ErrorCode::Io, "cannot create " + dir_ + ": " + ec.message());
  }

  std::string path(const std::string& name) const {
    return (std::filesystem::path(dir_) / name).string();
  }

  void text(const std::string& name, const std::string& body) {
    std::ofstream os(path(name), std::ios::binary);
    if (!os) fail(ErrorCode::Io, "cannot open " + path(name) + " for writing");
    os << body;
    if (!os) fail(ErrorCode::Io, "write failed for " + path(name));
    files_.push_back(name);
  }

  void lines(const std::string& name, const std::vector<json>& records) {
    std::string body;
    for (const auto& r : records) body += r.dump() + '\n';
    text(name, body);
  }

  void note(const std::string& name) { files_.push_back(name); }
  std::vector<std::string> files() const { return files_; }

 private:
  std::string dir_;
  std::vector<std::string> files_;
};

enum Stage : unsigned { kLabels = 1, kComm = 2 };

struct FrameRecord {
  std::size_t run = 0;
  std::size_t t = 0;
  std::size_t id = 0;  // run * frames + t
  bool ok = false;
  std::string error_class;
  std::string reason;
  SensedFrame sensed;
  std::vector<Detection> dets;  // with logits for bs_array
  std::vector<GroundTruthLabel> labels;
  std::vector<BeamReport> reports;
  FrameOutcome outcome;
};

// External detections grouped by global frame id.
std::map<std::size_t, std::vector<Detection>> load_external(const std::string& path,
                                                            const TrainingCodebooks& cb) {
  DetectionFile file = read_detections(path);
  if (file.n_h != cb.tx_h.size() || file.n_v != cb.tx_v.size())
    fail(ErrorCode::SchemaMismatch,
         path + ": codebook sizes " + std::to_string(file.n_h) + "x" + std::to_string(file.n_v) +
             " do not match bs_array " + std::to_string(cb.tx_h.size()) + "x" +
             std::to_string(cb.tx_v.size()));
  std::map<std::size_t, std::vector<Detection>> out;
  for (auto& [frame, d] : file.items) out[frame].push_back(std::move(d));
  return out;
}

std::vector<FrameRecord> run_frames(const ExperimentConfig& cfg, const RunOptions& opt,
                                    unsigned stages) {
  cfg.validate();
  const RadarChain radar = make_radar_chain(cfg, true, opt.threads);
  const DetectorConfig det = detector_for(cfg, radar.grid);
  const TrainingCodebooks cb = TrainingCodebooks::for_arrays(cfg.bs_array, cfg.ve_array);

  std::optional<std::map<std::size_t, std::vector<Detection>>> external;
  if (!opt.detections_path.empty()) {
    external = load_external(opt.detections_path, cb);
    const std::size_t total = cfg.runs * cfg.frames;
    if (!external->empty() && external->rbegin()->first >= total)
      fail(ErrorCode::InvalidArgument,
           opt.detections_path + ": frame " + std::to_string(external->rbegin()->first) +
               " is outside the configured " + std::to_string(total) + " frames");
  }

  std::vector<TrialSeeds> seeds;
  std::vector<Scenario> scenarios;
  for (std::size_t r = 0; r < cfg.runs; ++r) {
    seeds.push_back(trial_seeds(cfg.seed, r));
    scenarios.emplace_back(trial_scenario(cfg, seeds.back()));
  }

  std::vector<FrameRecord> out(cfg.runs * cfg.frames);
  parallel_for(out.size(), opt.threads, [&](std::size_t i) {
    FrameRecord& rec = out[i];
    rec.run = i / cfg.frames;
    rec.t = i % cfg.frames;
    rec.id = i;
    const TrialSeeds& s = seeds[rec.run];
    try {
      rec.sensed = sense_frame(cfg, radar, det, scenarios[rec.run], rec.t, s, opt.dump_images);
      if (external) {
        auto it = external->find(i);
        rec.dets = it == external->end() ? std::vector<Detection>{} : it->second;
        rec.sensed.detections = rec.dets;
        rec.sensed.det_truth = match_detections(rec.dets, rec.sensed.vehicles);
      } else {
        rec.dets = rec.sensed.detections;
        relabel_beams(rec.dets, radar.grid, cb.tx_h, cb.tx_v, det.head);
      }
      if (stages & kLabels) rec.labels = frame_labels(cfg, cfg.bs_array, rec.sensed, s);
      if (stages & kComm) {
        std::vector<ChannelRealization> channels;
        for (const auto& v : rec.sensed.vehicles)
          if (v.is_ve) channels.push_back(vehicle_channel(cfg, cfg.bs_array, v, s, rec.t));
        rec.reports = train_frame(cfg, cb, channels, rec.sensed, cfg.comm_snr_db, s);
        rec.outcome = associate_frame(cfg, rec.sensed, rec.dets, rec.reports);
      }
      rec.ok = true;
    } catch (const Error& e) {
      rec.ok = false;
      rec.error_class = to_string(e.code());
      rec.reason = e.what();
    }
  });
  return out;
}

void write_diagnostics(Writer& w, const ExperimentConfig& cfg,
                       const std::vector<FrameRecord>& frames) {
  std::vector<json> recs{header("diagnostics", cfg)};
  for (const auto& f : frames) {
    json j = {{"frame", f.id}, {"run", f.run}, {"t", f.t}, {"status", f.ok ? "ok" : "skipped"}};
    if (f.ok) {
      std::size_t visible = 0, ves = 0;
      for (const auto& v : f.sensed.vehicles) {
        visible += v.bbox ? 1 : 0;
        ves += v.is_ve ? 1 : 0;
      }
      j["vehicles"] = f.sensed.vehicles.size();
      j["visible"] = visible;
      j["ves"] = ves;
      j["detections"] = f.dets.size();
      j["matched"] = f.sensed.det_truth.size();
    } else {
      j["error_class"] = f.error_class;
      j["reason"] = f.reason;
    }
    recs.push_back(j);
  }
  w.lines("diagnostics.jsonl", recs);
}

void write_labels(Writer& w, const ExperimentConfig& cfg, const std::vector<FrameRecord>& frames) {
  json head = header("labels", cfg);
  head["bs_array"] = format_array(cfg.bs_array);
  head["index_base"] = 1;
  std::vector<json> recs{head};
  for (const auto& f : frames)
    for (const auto& l : f.labels)
      recs.push_back({{"frame", f.id},
                      {"target_id", l.target_id},
                      {"x", l.bbox.x},
                      {"y", l.bbox.y},
                      {"w", l.bbox.w},
                      {"h", l.bbox.h},
                      {"class", std::string(to_string(l.cls))},
                      {"is_ve", l.is_ve},
                      {"beam_h", l.beam_h + 1},
                      {"beam_v", l.beam_v + 1}});
  w.lines("labels.jsonl", recs);
}

void write_detection_file(Writer& w, const ExperimentConfig& cfg,
                          const std::vector<FrameRecord>& frames) {
  const TrainingCodebooks cb = TrainingCodebooks::for_arrays(cfg.bs_array, cfg.ve_array);
  DetectionFile file;
  file.n_h = cb.tx_h.size();
  file.n_v = cb.tx_v.size();
  file.spec_hash = cfg.spec_hash();
  file.seed = cfg.seed;
  for (const auto& f : frames)
    for (const auto& d : f.dets) file.items.emplace_back(f.id, d);
  std::ostringstream os;
  write_detections(os, file);
  w.text("detections.jsonl", os.str());
}

void write_images(Writer& w, const ExperimentConfig& cfg, const std::vector<FrameRecord>& frames) {
  const std::string note = provenance(cfg);
  for (const auto& f : frames) {
    if (!f.ok || !f.sensed.image) continue;
    char stem[32];
    std::snprintf(stem, sizeof stem, "frame_%05zu", f.id);
    write_image_dump(w.path(std::string(stem) + ".isacimg"), *f.sensed.image, cfg.waveform,
                     note + " frame=" + std::to_string(f.id));
    w.note(std::string(stem) + ".isacimg");
    write_pgm(w.path(std::string(stem) + ".pgm"), to_range_angle_image(*f.sensed.image).values,
              note + " frame=" + std::to_string(f.id));
    w.note(std::string(stem) + ".pgm");
  }
}

void write_comm(Writer& w, const ExperimentConfig& cfg, const std::vector<FrameRecord>& frames) {
  json rh = header("beam_reports", cfg);
  rh["bs_array"] = format_array(cfg.bs_array);
  rh["index_base"] = 1;
  std::vector<json> reports{rh};
  json ah = header("associations", cfg);
  ah["cost"] = std::string(to_string(cfg.cost));
  std::vector<json> assoc{ah};
  std::vector<FrameAssociation> scored;
  for (const auto& f : frames) {
    if (!f.ok) continue;
    for (const auto& r : f.reports)
      reports.push_back({{"frame", f.id},
                         {"ve_id", r.ve_id},
                         {"f_h", r.f_h + 1},
                         {"f_v", r.f_v + 1},
                         {"rx_beam", r.rx_beam + 1},
                         {"snr_db", finite_or_null(r.snr_db)},
                         {"best_power_db", finite_or_null(r.best_power_db)}});
    const auto& a = f.outcome.association;
    for (std::size_t i = 0; i < f.outcome.assignment.pairs.size(); ++i) {
      auto [k, v] = f.outcome.assignment.pairs[i];
      const int ve = f.reports[v].ve_id;
      bool correct = std::find(a.truth.begin(), a.truth.end(), std::make_pair(k, ve)) != a.truth.end();
      assoc.push_back({{"frame", f.id},
                       {"det_index", k},
                       {"ve_id", ve},
                       {"cost", f.outcome.cost.values(static_cast<Eigen::Index>(k),
                                                      static_cast<Eigen::Index>(v))},
                       {"correct", correct}});
    }
    scored.push_back(a);
  }
  AssociationScore s = correct_association_prob(scored, cfg.exclude_undetected);
  assoc.push_back({{"type", "summary"},
                   {"p_correct", s.p_correct},
                   {"frames_used", s.frames_used},
                   {"frames_skipped", s.frames_skipped + (frames.size() - scored.size())}});
  w.lines("beam_reports.jsonl", reports);
  w.lines("associations.jsonl", assoc);
}

void write_metrics(Writer& w, const ExperimentConfig& cfg, const std::vector<FrameRecord>& frames) {
  std::vector<std::vector<EvalDetection>> dets;
  std::vector<std::vector<EvalTruth>> truth;
  std::vector<BeamSample> beams;
  for (const auto& f : frames) {
    if (!f.ok) continue;
    std::vector<EvalDetection> fd;
    for (const auto& d : f.dets) {
      std::size_t cls = 0;
      for (std::size_t k = 1; k < kTargetClassCount; ++k)
        if (d.class_scores[k] > d.class_scores[cls]) cls = k;
      fd.push_back({d.bbox, d.confidence, cls});
    }
    std::vector<EvalTruth> ft;
    for (const auto& l : f.labels) ft.push_back({l.bbox, static_cast<std::size_t>(l.cls)});
    for (const auto& [k, id] : f.sensed.det_truth)
      for (const auto& l : f.labels)
        if (l.target_id == id) beams.push_back({f.dets[k].logits_h, f.dets[k].logits_v, l.beam_h, l.beam_v});
    dets.push_back(std::move(fd));
    truth.push_back(std::move(ft));
  }
  MapReport m = evaluate_map(dets, truth, kTargetClassCount);
  json topk = json::array();
  for (std::size_t k = 1; k <= 5; ++k)
    topk.push_back(beams.empty() ? json(nullptr) : json(topk_beam_accuracy(beams, k)));
  json ap = json::array();
  for (double v : m.ap50) ap.push_back(finite_or_null(v));
  json report = {{"spec_hash", cfg.spec_hash()},
                 {"seed", cfg.seed},
                 {"array_size", format_array(cfg.bs_array)},
                 {"precision", m.precision},
                 {"recall", m.recall},
                 {"f1", m.f1},
                 {"map50", m.map50},
                 {"map50_95", m.map50_95},
                 {"topk", topk},
                 {"ap50_per_class", ap},
                 {"frames", dets.size()},
                 {"beam_samples", beams.size()}};
  w.text("metrics.json", report.dump(2) + '\n');
}

}  // namespace

std::string codebook_text(const Codebook& cb) {
  std::string s = std::string(cb.axis == CodebookAxis::Horizontal ? "horizontal" : "vertical") +
                  "\n" + std::to_string(cb.size()) + "\n";
  for (Eigen::Index r = 0; r < cb.beams.rows(); ++r)
    for (Eigen::Index c = 0; c < cb.beams.cols(); ++c) {
      s += num(cb.beams(r, c).real()) + ' ' + num(cb.beams(r, c).imag());
      s += c + 1 == cb.beams.cols() ? '\n' : ' ';
    }
  return s;
}

std::vector<std::string> run_simulate(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto frames = run_frames(cfg, opt, kLabels | kComm);
  Writer w(opt);
  write_labels(w, cfg, frames);
  write_detection_file(w, cfg, frames);
  write_comm(w, cfg, frames);
  write_metrics(w, cfg, frames);
  write_diagnostics(w, cfg, frames);
  const TrainingCodebooks cb = TrainingCodebooks::for_arrays(cfg.bs_array, cfg.ve_array);
  w.text("codebook_h.txt", codebook_text(cb.tx_h));
  w.text("codebook_v.txt", codebook_text(cb.tx_v));
  if (opt.dump_images) write_images(w, cfg, frames);
  return w.files();
}

std::vector<std::string> run_detect(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto frames = run_frames(cfg, opt, kLabels);
  Writer w(opt);
  write_labels(w, cfg, frames);
  write_detection_file(w, cfg, frames);
  write_diagnostics(w, cfg, frames);
  if (opt.dump_images) write_images(w, cfg, frames);
  return w.files();
}

std::vector<std::string> run_associate(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto frames = run_frames(cfg, opt, kComm);
  Writer w(opt);
  write_comm(w, cfg, frames);
  write_diagnostics(w, cfg, frames);
  if (opt.dump_images) write_images(w, cfg, frames);
  return w.files();
}

std::vector<std::string> run_eval_metrics(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto frames = run_frames(cfg, opt, kLabels);
  Writer w(opt);
  write_metrics(w, cfg, frames);
  write_diagnostics(w, cfg, frames);
  return w.files();
}

std::string curve_csv(const std::string& title, const ExperimentConfig& cfg,
                      const std::vector<CurvePoint>& points) {
  std::string s = "# isac " + title + " " + provenance(cfg) + "\n";
  s += "array,snr_db,n_ve,n_clutter,p_correct,p_stderr,trials,frames_skipped\n";
  for (const auto& p : points)
    s += format_array(p.array) + ',' + num(p.snr_db) + ',' + std::to_string(p.n_ve) + ',' +
         std::to_string(p.n_clutter) + ',' + num(p.p_correct) + ',' + num(p.p_stderr) + ',' +
         std::to_string(p.trials) + ',' + std::to_string(p.frames_skipped) + '\n';
  return s;
}

std::string matrix_csv(const ExperimentConfig& cfg, const std::vector<CurvePoint>& points) {
  std::string s = "# isac sweep-matrix " + provenance(cfg) + " array=" +
                  format_array(cfg.matrix_array) + " snr_db=" + num(cfg.comm_snr_db) + "\n";
  s += "n_ve";
  for (auto c : cfg.clutter_grid) s += ",clutter_" + std::to_string(c);
  s += '\n';
  for (auto v : cfg.ve_grid) {
    s += std::to_string(v);
    for (auto c : cfg.clutter_grid) {
      auto it = std::find_if(points.begin(), points.end(), [&](const CurvePoint& p) {
        return p.n_ve == v && p.n_clutter == c;
      });
      s += ',' + (it == points.end() ? std::string() : num(it->p_correct));
    }
    s += '\n';
  }
  return s;
}

std::vector<std::string> run_sweep_snr(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto pts = sweep_snr(cfg, opt.threads);
  Writer w(opt);
  w.text("sweep_snr.csv", curve_csv("sweep-snr", cfg, pts));
  return w.files();
}

std::vector<std::string> run_sweep_clutter(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto pts = sweep_clutter(cfg, opt.threads);
  Writer w(opt);
  w.text("sweep_clutter.csv", curve_csv("sweep-clutter", cfg, pts));
  return w.files();
}

std::vector<std::string> run_sweep_matrix(const ExperimentConfig& cfg, const RunOptions& opt) {
  auto pts = sweep_matrix(cfg, opt.threads);
  Writer w(opt);
  w.text("sweep_matrix.csv", matrix_csv(cfg, pts));
  w.text("sweep_matrix_points.csv", curve_csv("sweep-matrix", cfg, pts));
  return w.files();
}

}  // namespace isac
