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

#include "isac/detect.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "isac/deteval.hpp"

namespace isac {

void CfarConfig::validate() const {
  if (train[0] == 0 || train[1] == 0)
    fail(ErrorCode::InvalidArgument, "CFAR needs at least one training cell per axis");
  if (!(pfa > 0.0 && pfa < 1.0)) fail(ErrorCode::InvalidArgument, "CFAR pfa must be in (0, 1)");
  if (!(floor >= 0.0)) fail(ErrorCode::InvalidArgument, "CFAR floor must be >= 0");
  if (!(dynamic_range_db >= 0.0))
    fail(ErrorCode::InvalidArgument, "CFAR dynamic range must be >= 0 dB");
  if (metric.link_m > 0.0 &&
      !(metric.range0 >= 0.0 && metric.range_step > 0.0 && metric.angle_step > 0.0))
    fail(ErrorCode::InvalidArgument, "metric linking needs positive grid steps");
}

double cfar_scale(std::size_t n_train, double pfa) {
  if (n_train == 0) fail(ErrorCode::InvalidArgument, "CFAR needs training cells");
  double n = static_cast<double>(n_train);
  return n * (std::pow(pfa, -1.0 / n) - 1.0);
}

namespace {

using Mask = Eigen::Matrix<unsigned char, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Summed-area table with a zero border: S(r, c) = sum of P[0..r) x [0..c).
struct Sat {
  RMatrix s;
  explicit Sat(const RMatrix& p) : s(RMatrix::Zero(p.rows() + 1, p.cols() + 1)) {
    for (Eigen::Index r = 0; r < p.rows(); ++r)
      for (Eigen::Index c = 0; c < p.cols(); ++c)
        s(r + 1, c + 1) = p(r, c) + s(r, c + 1) + s(r + 1, c) - s(r, c);
  }
  // Sum over rows [r0, r1), cols [c0, c1).
  double box(Eigen::Index r0, Eigen::Index r1, Eigen::Index c0, Eigen::Index c1) const {
    return s(r1, c1) - s(r0, c1) - s(r1, c0) + s(r0, c0);
  }
};

struct CfarField {
  Mask mask;
  RMatrix threshold;
};

CfarField run_cfar(const RMatrix& image, const CfarConfig& cfg) {
  cfg.validate();
  const Eigen::Index R = image.rows(), C = image.cols();
  RMatrix power = image.cwiseAbs2();
  Sat sat(power);
  CfarField f{Mask::Zero(R, C), RMatrix::Zero(R, C)};
  const auto gr = static_cast<Eigen::Index>(cfg.guard[0]);
  const auto gc = static_cast<Eigen::Index>(cfg.guard[1]);
  const auto orr = gr + static_cast<Eigen::Index>(cfg.train[0]);
  const auto oc = gc + static_cast<Eigen::Index>(cfg.train[1]);
  // Cells more than dynamic_range_db below the image peak never detect;
  // far below the peak the summed-area differences are rounding noise.
  double floor = cfg.floor;
  if (cfg.dynamic_range_db > 0.0 && image.size() > 0)
    floor = std::max(floor, image.maxCoeff() * std::pow(10.0, -cfg.dynamic_range_db / 20.0));
  std::vector<double> scale_cache;
  for (Eigen::Index r = 0; r < R; ++r)
    for (Eigen::Index c = 0; c < C; ++c) {
      Eigen::Index a0 = std::max<Eigen::Index>(0, r - orr), a1 = std::min(R, r + orr + 1);
      Eigen::Index b0 = std::max<Eigen::Index>(0, c - oc), b1 = std::min(C, c + oc + 1);
      Eigen::Index i0 = std::max<Eigen::Index>(0, r - gr), i1 = std::min(R, r + gr + 1);
      Eigen::Index j0 = std::max<Eigen::Index>(0, c - gc), j1 = std::min(C, c + gc + 1);
      auto n = static_cast<std::size_t>((a1 - a0) * (b1 - b0) - (i1 - i0) * (j1 - j0));
      if (n == 0) continue;
      double sum = sat.box(a0, a1, b0, b1) - sat.box(i0, i1, j0, j1);
      sum = std::max(sum, 0.0);  // guards against rounding in the table
      if (scale_cache.size() <= n) scale_cache.resize(n + 1, -1.0);
      if (scale_cache[n] < 0.0) scale_cache[n] = cfar_scale(n, cfg.pfa);
      double thr = scale_cache[n] * sum / static_cast<double>(n);
      f.threshold(r, c) = thr;
      if (power(r, c) > thr && image(r, c) > floor) f.mask(r, c) = 1;
    }
  return f;
}

std::size_t find_root(std::vector<std::size_t>& parent, std::size_t x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

}  // namespace

Mask cfar_mask(const RMatrix& image, const CfarConfig& cfg) { return run_cfar(image, cfg).mask; }

std::vector<CfarHit> cfar_detect_and_cluster(const RMatrix& image, const CfarConfig& cfg) {
  CfarField f = run_cfar(image, cfg);
  const Eigen::Index R = image.rows(), C = image.cols();
  // Label image: index into `cells` or -1.
  Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> label =
      Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Constant(R, C, -1);
  std::vector<std::pair<Eigen::Index, Eigen::Index>> cells;
  for (Eigen::Index r = 0; r < R; ++r)
    for (Eigen::Index c = 0; c < C; ++c)
      if (f.mask(r, c)) {
        label(r, c) = static_cast<long>(cells.size());
        cells.emplace_back(r, c);
      }
  std::vector<std::size_t> parent(cells.size());
  std::iota(parent.begin(), parent.end(), 0);
  const auto& m = cfg.metric;
  const bool metric = m.link_m > 0.0;
  Eigen::Index lr = static_cast<Eigen::Index>(std::max<std::size_t>(cfg.link[0], 1));
  Eigen::Index lc = static_cast<Eigen::Index>(std::max<std::size_t>(cfg.link[1], 1));
  if (metric) {
    lr = static_cast<Eigen::Index>(std::ceil(m.link_m / m.range_step));
    lc = static_cast<Eigen::Index>(std::ceil(m.link_m / (std::max(m.range0, m.range_step) * m.angle_step)));
    lc = std::min<Eigen::Index>(std::max<Eigen::Index>(lc, 1), C);
  }
  auto close = [&](Eigen::Index r1, Eigen::Index c1, Eigen::Index r2, Eigen::Index c2) {
    if (!metric) return true;
    double a = m.range0 + static_cast<double>(r1) * m.range_step;
    double b = m.range0 + static_cast<double>(r2) * m.range_step;
    double d2 = a * a + b * b - 2.0 * a * b * std::cos(static_cast<double>(c2 - c1) * m.angle_step);
    return d2 <= m.link_m * m.link_m * (1.0 + 1e-12);
  };
  for (std::size_t i = 0; i < cells.size(); ++i) {
    auto [r, c] = cells[i];
    for (Eigen::Index dr = 0; dr <= lr; ++dr)
      for (Eigen::Index dc = -lc; dc <= lc; ++dc) {
        if (dr == 0 && dc <= 0) continue;
        Eigen::Index rr = r + dr, cc = c + dc;
        if (rr >= R || cc < 0 || cc >= C || label(rr, cc) < 0) continue;
        if (!close(r, c, rr, cc)) continue;
        std::size_t a = find_root(parent, i);
        std::size_t b = find_root(parent, static_cast<std::size_t>(label(rr, cc)));
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
  }

  struct Acc {
    Eigen::Index r0, r1, c0, c1, pr, pc;
    double peak;
    std::size_t n;
  };
  std::vector<long> slot(cells.size(), -1);
  std::vector<Acc> accs;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    std::size_t root = find_root(parent, i);
    auto [r, c] = cells[i];
    double p = image(r, c) * image(r, c);
    if (slot[root] < 0) {
      slot[root] = static_cast<long>(accs.size());
      accs.push_back({r, r, c, c, r, c, p, 0});
    }
    Acc& a = accs[static_cast<std::size_t>(slot[root])];
    a.r0 = std::min(a.r0, r);
    a.r1 = std::max(a.r1, r);
    a.c0 = std::min(a.c0, c);
    a.c1 = std::max(a.c1, c);
    if (p > a.peak) {
      a.peak = p;
      a.pr = r;
      a.pc = c;
    }
    ++a.n;
  }

  std::vector<CfarHit> hits;
  hits.reserve(accs.size());
  for (const auto& a : accs) {
    if (a.n < cfg.min_cells) continue;
    CfarHit h;
    h.bbox = BoundingBox::from_pixel_extent(
        static_cast<double>(a.r0), static_cast<double>(a.r1), static_cast<double>(a.c0),
        static_cast<double>(a.c1), static_cast<std::size_t>(R), static_cast<std::size_t>(C),
        cfg.min_box_pixels);
    double thr = f.threshold(a.pr, a.pc);
    h.confidence = thr > 0.0 ? std::clamp(1.0 - thr / a.peak, 0.0, 1.0) : 1.0;
    h.peak_row = static_cast<std::size_t>(a.pr);
    h.peak_col = static_cast<std::size_t>(a.pc);
    h.cells = a.n;
    hits.push_back(h);
  }
  return hits;
}

std::pair<std::vector<double>, std::vector<double>> infer_beam_logits(
    const BoundingBox& box, const PixelGrid& grid, const Codebook& cb_h, const Codebook& cb_v,
    const BeamHeadConfig& cfg) {
  if (!(box.x >= 0.0 && box.x <= 1.0 && box.y >= 0.0 && box.y <= 1.0))
    fail(ErrorCode::DegenerateGeometry, "box centre outside the image");
  double col = box.x * static_cast<double>(grid.cols());
  double row = box.y * static_cast<double>(grid.rows());
  double range = grid.range_at(row);
  double angle = grid.angle_at(col);
  if (!(range > 0.0)) fail(ErrorCode::DegenerateGeometry, "box centre at non-positive range");
  double u_h = std::sin(angle);
  double u_v = std::clamp((cfg.target_height - cfg.bs_height) / range, -1.0, 1.0);
  auto logits = [&](const Codebook& cb, double u) {
    std::vector<double> out(cb.size());
    for (std::size_t i = 0; i < cb.size(); ++i)
      out[i] = cfg.kappa * std::log(std::max(ula_gain(cb.beam(i), u, cfg.spacing), 1e-6));
    return out;
  };
  return {logits(cb_h, u_h), logits(cb_v, u_v)};
}

std::array<double, kTargetClassCount> infer_class_scores(const BoundingBox& box,
                                                         const PixelGrid& grid) {
  double range = grid.range_at(box.y * static_cast<double>(grid.rows()));
  double range_px = grid.range_step();
  double cross_px = grid.angle_step() * range;
  double dr = box.h * static_cast<double>(grid.rows()) * range_px;
  double dc = box.w * static_cast<double>(grid.cols()) * cross_px;
  constexpr double kSigma = 1.0;  // m
  std::array<double, kTargetClassCount> s{};
  for (std::size_t k = 0; k < kTargetClassCount; ++k) {
    Extent e = class_extent(static_cast<VehicleClass>(k));
    double best = std::numeric_limits<double>::infinity();
    for (int step = 0; step <= 18; ++step) {
      double psi = kPi / 2 * step / 18.0;
      double er = e.length * std::abs(std::cos(psi)) + e.width * std::abs(std::sin(psi)) + range_px;
      double ec = e.length * std::abs(std::sin(psi)) + e.width * std::abs(std::cos(psi)) + cross_px;
      best = std::min(best, (dr - er) * (dr - er) + (dc - ec) * (dc - ec));
    }
    s[k] = std::exp(-best / (2 * kSigma * kSigma));
  }
  double sum = s[0] + s[1] + s[2];
  for (auto& v : s) v = sum > 0.0 ? v / sum : 1.0 / kTargetClassCount;
  return s;
}

std::vector<Detection> nms(std::vector<Detection> dets, double iou_thr) {
  std::stable_sort(dets.begin(), dets.end(), [](const Detection& a, const Detection& b) {
    if (a.confidence != b.confidence) return a.confidence > b.confidence;
    return a.bbox.x < b.bbox.x;
  });
  std::vector<Detection> kept;
  for (auto& d : dets) {
    bool suppressed = false;
    for (const auto& k : kept)
      if (iou(d.bbox, k.bbox) > iou_thr) {
        suppressed = true;
        break;
      }
    if (!suppressed) kept.push_back(std::move(d));
  }
  return kept;
}

ClassDecision threshold_classes(const Detection& det, double gamma_class) {
  ClassDecision out;
  std::size_t best = 0;
  for (std::size_t k = 1; k < kTargetClassCount; ++k)
    if (det.class_scores[k] > det.class_scores[best]) best = k;
  if (det.class_scores[best] >= gamma_class) out.target_class = static_cast<VehicleClass>(best);
  out.beams_h = det.logits_h;
  out.beams_v = det.logits_v;
  return out;
}

std::vector<Detection> detect_targets(const RMatrix& magnitude, const PixelGrid& grid,
                                      const Codebook& cb_h, const Codebook& cb_v,
                                      const DetectorConfig& cfg) {
  std::vector<Detection> dets;
  for (const auto& h : cfar_detect_and_cluster(magnitude, cfg.cfar)) {
    Detection d;
    d.bbox = h.bbox;
    d.confidence = h.confidence;
    d.class_scores = infer_class_scores(h.bbox, grid);
    std::tie(d.logits_h, d.logits_v) = infer_beam_logits(h.bbox, grid, cb_h, cb_v, cfg.head);
    dets.push_back(std::move(d));
  }
  return nms(std::move(dets), cfg.nms_iou);
}

void relabel_beams(std::vector<Detection>& dets, const PixelGrid& grid, const Codebook& cb_h,
                   const Codebook& cb_v, const BeamHeadConfig& cfg) {
  for (auto& d : dets) std::tie(d.logits_h, d.logits_v) = infer_beam_logits(d.bbox, grid, cb_h, cb_v, cfg);
}

}  // namespace isac
