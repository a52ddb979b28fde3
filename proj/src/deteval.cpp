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

#include "isac/deteval.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "isac/common.hpp"

namespace isac {

double iou(const BoundingBox& a, const BoundingBox& b) {
  double iw = std::max(0.0, std::min(a.right(), b.right()) - std::max(a.left(), b.left()));
  double ih = std::max(0.0, std::min(a.bottom(), b.bottom()) - std::max(a.top(), b.top()));
  double inter = iw * ih;
  double uni = a.area() + b.area() - inter;
  return uni > 0.0 ? inter / uni : 0.0;
}

double bce_loss(double x, double y, double w) {
  // Each log argument is floored at eps; a perfect prediction costs 0.
  double loss = 0.0;
  if (y != 0.0) loss -= y * std::log(std::max(x, kLogEpsilon));
  if (y != 1.0) loss -= (1.0 - y) * std::log(std::max(1.0 - x, kLogEpsilon));
  return w * loss;
}

double bce_grad(double x, double y, double w) {
  if (x < kLogEpsilon || x > 1.0 - kLogEpsilon) return 0.0;
  return -w * (y / x - (1.0 - y) / (1.0 - x));
}

double dfl_loss(double y, double y_i, double y_ip1, double p_i, double p_ip1) {
  if (!(y_ip1 > y_i))
    fail(ErrorCode::DegenerateInterval, "DFL needs y_i < y_ip1");
  double span = y_ip1 - y_i;
  double wl = (y_ip1 - y) / span;
  double wr = (y - y_i) / span;
  double loss = 0.0;
  if (wl != 0.0) loss -= wl * std::log(std::clamp(p_i, kLogEpsilon, 1.0));
  if (wr != 0.0) loss -= wr * std::log(std::clamp(p_ip1, kLogEpsilon, 1.0));
  return loss;
}

namespace {

// Forward-mode dual number for the box gradient.
struct Dual {
  double v = 0.0;
  double d = 0.0;
};

Dual operator+(Dual a, Dual b) { return {a.v + b.v, a.d + b.d}; }
Dual operator-(Dual a, Dual b) { return {a.v - b.v, a.d - b.d}; }
Dual operator*(Dual a, Dual b) { return {a.v * b.v, a.d * b.v + a.v * b.d}; }
Dual operator/(Dual a, Dual b) { return {a.v / b.v, (a.d * b.v - a.v * b.d) / (b.v * b.v)}; }
Dual dmin(Dual a, Dual b) { return a.v <= b.v ? a : b; }
Dual dmax(Dual a, Dual b) { return a.v >= b.v ? a : b; }
Dual datan(Dual a) { return {std::atan(a.v), a.d / (1.0 + a.v * a.v)}; }
Dual k(double v) { return {v, 0.0}; }

struct DBox {
  Dual x, y, w, h;
  Dual half(Dual s) const { return s * k(0.5); }
  Dual l() const { return x - half(w); }
  Dual r() const { return x + half(w); }
  Dual t() const { return y - half(h); }
  Dual b() const { return y + half(h); }
};

// 1 - IoU + d^2 / c^2 (+ alpha v when `aspect`).
Dual box_loss(const DBox& p, const DBox& g, bool aspect) {
  Dual iw = dmax(k(0.0), dmin(p.r(), g.r()) - dmax(p.l(), g.l()));
  Dual ih = dmax(k(0.0), dmin(p.b(), g.b()) - dmax(p.t(), g.t()));
  Dual inter = iw * ih;
  Dual uni = p.w * p.h + g.w * g.h - inter;
  Dual iou_v = uni.v > 0.0 ? inter / uni : k(0.0);
  Dual dx = p.x - g.x, dy = p.y - g.y;
  Dual cw = dmax(p.r(), g.r()) - dmin(p.l(), g.l());
  Dual ch = dmax(p.b(), g.b()) - dmin(p.t(), g.t());
  Dual c2 = cw * cw + ch * ch;
  Dual dist = c2.v > 0.0 ? (dx * dx + dy * dy) / c2 : k(0.0);
  Dual loss = k(1.0) - iou_v + dist;
  if (!aspect) return loss;
  Dual da = datan(g.w / g.h) - datan(p.w / p.h);
  Dual v = k(4.0 / (kPi * kPi)) * da * da;
  Dual denom = (k(1.0) - iou_v) + v;
  Dual alpha = denom.v > 0.0 ? v / denom : k(0.0);
  return loss + alpha * v;
}

DBox lift(const BoundingBox& b) { return {k(b.x), k(b.y), k(b.w), k(b.h)}; }

}  // namespace

double diou_loss(const BoundingBox& b, const BoundingBox& gt) {
  return box_loss(lift(b), lift(gt), false).v;
}

double ciou_loss(const BoundingBox& b, const BoundingBox& gt) {
  return box_loss(lift(b), lift(gt), true).v;
}

BoxGradient ciou_loss_grad(const BoundingBox& b, const BoundingBox& gt) {
  BoxGradient g;
  DBox target = lift(gt);
  double* out[4] = {&g.dx, &g.dy, &g.dw, &g.dh};
  for (int i = 0; i < 4; ++i) {
    DBox p = lift(b);
    Dual* f[4] = {&p.x, &p.y, &p.w, &p.h};
    f[i]->d = 1.0;
    Dual l = box_loss(p, target, true);
    g.loss = l.v;
    *out[i] = l.d;
  }
  return g;
}

double tal_score(double p, double r, double lambda, double mu) {
  if (!(lambda > 0.0) || !(mu > 0.0)) fail(ErrorCode::InvalidArgument, "TAL exponents must be > 0");
  return std::pow(p, lambda) * std::pow(r, mu);
}

MatchConfig MatchConfig::coco() {
  MatchConfig c;
  for (int i = 0; i < 10; ++i) c.iou_thresholds.push_back(0.5 + 0.05 * i);
  return c;
}

void MatchConfig::validate() const {
  if (iou_thresholds.empty()) fail(ErrorCode::InvalidArgument, "no IoU thresholds");
  for (std::size_t i = 0; i < iou_thresholds.size(); ++i) {
    double t = iou_thresholds[i];
    if (!(t > 0.0 && t < 1.0)) fail(ErrorCode::InvalidArgument, "IoU threshold outside (0, 1)");
    if (i > 0 && !(t > iou_thresholds[i - 1]))
      fail(ErrorCode::InvalidArgument, "IoU thresholds must increase");
  }
  if (!(lambda > 0.0) || !(mu > 0.0)) fail(ErrorCode::InvalidArgument, "TAL exponents must be > 0");
}

namespace {

struct Ranked {
  double conf;
  std::size_t frame;
  std::size_t index;
};

std::vector<Ranked> rank_class(const std::vector<std::vector<EvalDetection>>& dets,
                               std::size_t cls) {
  std::vector<Ranked> out;
  for (std::size_t f = 0; f < dets.size(); ++f)
    for (std::size_t i = 0; i < dets[f].size(); ++i)
      if (dets[f][i].cls == cls) out.push_back({dets[f][i].confidence, f, i});
  std::stable_sort(out.begin(), out.end(),
                   [](const Ranked& a, const Ranked& b) { return a.conf > b.conf; });
  return out;
}

}  // namespace

PrCurve pr_curve(const std::vector<std::vector<EvalDetection>>& dets,
                 const std::vector<std::vector<EvalTruth>>& truth, std::size_t cls,
                 double iou_threshold) {
  std::size_t n_truth = 0;
  std::vector<std::vector<char>> used(truth.size());
  for (std::size_t f = 0; f < truth.size(); ++f) {
    used[f].assign(truth[f].size(), 0);
    for (const auto& t : truth[f]) n_truth += t.cls == cls;
  }
  PrCurve c;
  std::size_t tp = 0, fp = 0;
  for (const auto& r : rank_class(dets, cls)) {
    const auto& d = dets[r.frame][r.index];
    double best = -1.0;
    std::size_t best_j = 0;
    if (r.frame < truth.size())
      for (std::size_t j = 0; j < truth[r.frame].size(); ++j) {
        const auto& t = truth[r.frame][j];
        if (t.cls != cls || used[r.frame][j]) continue;
        double o = iou(d.bbox, t.bbox);
        if (o > best) {
          best = o;
          best_j = j;
        }
      }
    if (best >= iou_threshold) {
      used[r.frame][best_j] = 1;
      ++tp;
    } else {
      ++fp;
    }
    c.confidence.push_back(r.conf);
    c.precision.push_back(static_cast<double>(tp) / static_cast<double>(tp + fp));
    c.recall.push_back(n_truth ? static_cast<double>(tp) / static_cast<double>(n_truth) : 0.0);
  }
  return c;
}

double average_precision(const PrCurve& c) {
  const std::size_t n = c.precision.size();
  // Precision envelope: max precision at any recall >= r.
  std::vector<double> env(c.precision);
  for (std::size_t i = n; i-- > 1;) env[i - 1] = std::max(env[i - 1], env[i]);
  double sum = 0.0;
  std::size_t j = 0;
  for (int s = 0; s <= 100; ++s) {
    double r = s / 100.0;
    while (j < n && c.recall[j] < r - 1e-12) ++j;
    if (j < n) sum += env[j];
  }
  return sum / 101.0;
}

MapReport evaluate_map(const std::vector<std::vector<EvalDetection>>& dets,
                       const std::vector<std::vector<EvalTruth>>& truth, std::size_t n_classes,
                       const MatchConfig& cfg) {
  cfg.validate();
  MapReport rep;
  const double nan = std::numeric_limits<double>::quiet_NaN();
  rep.ap50.assign(n_classes, nan);
  rep.ap50_95.assign(n_classes, nan);
  rep.curves50.resize(n_classes);

  std::vector<std::size_t> n_truth(n_classes, 0);
  for (const auto& f : truth)
    for (const auto& t : f) {
      if (t.cls >= n_classes) fail(ErrorCode::InvalidArgument, "truth class out of range");
      ++n_truth[t.cls];
    }
  std::vector<std::size_t> present;
  for (std::size_t c = 0; c < n_classes; ++c)
    if (n_truth[c]) present.push_back(c);
  if (present.empty()) return rep;

  double sum50 = 0.0, sum_all = 0.0;
  for (std::size_t c : present) {
    rep.curves50[c] = pr_curve(dets, truth, c, 0.5);
    rep.ap50[c] = average_precision(rep.curves50[c]);
    double s = 0.0;
    for (double thr : cfg.iou_thresholds) s += average_precision(pr_curve(dets, truth, c, thr));
    rep.ap50_95[c] = s / static_cast<double>(cfg.iou_thresholds.size());
    sum50 += rep.ap50[c];
    sum_all += rep.ap50_95[c];
  }
  rep.map50 = sum50 / static_cast<double>(present.size());
  rep.map50_95 = sum_all / static_cast<double>(present.size());

  // Operating point: confidence maximising F1 of the class-mean P and R.
  std::vector<double> cand;
  for (std::size_t c : present)
    cand.insert(cand.end(), rep.curves50[c].confidence.begin(), rep.curves50[c].confidence.end());
  std::sort(cand.begin(), cand.end(), std::greater<>());
  cand.erase(std::unique(cand.begin(), cand.end()), cand.end());
  rep.f1 = -1.0;
  for (double thr : cand) {
    double p_sum = 0.0, r_sum = 0.0;
    for (std::size_t c : present) {
      const auto& cv = rep.curves50[c];
      // Last entry with confidence >= thr.
      auto it = std::upper_bound(cv.confidence.begin(), cv.confidence.end(), thr,
                                 [](double t, double v) { return t > v; });
      std::size_t n = static_cast<std::size_t>(it - cv.confidence.begin());
      if (n == 0) continue;
      p_sum += cv.precision[n - 1];
      r_sum += cv.recall[n - 1];
    }
    double p = p_sum / static_cast<double>(present.size());
    double r = r_sum / static_cast<double>(present.size());
    double f1 = p + r > 0.0 ? 2.0 * p * r / (p + r) : 0.0;
    if (f1 > rep.f1) {
      rep.f1 = f1;
      rep.precision = p;
      rep.recall = r;
      rep.best_confidence = thr;
    }
  }
  if (rep.f1 < 0.0) rep.f1 = 0.0;
  return rep;
}

double topk_beam_accuracy(const std::vector<BeamSample>& samples, std::size_t k) {
  if (k == 0) fail(ErrorCode::InvalidArgument, "top-k needs k >= 1");
  if (samples.empty()) return 0.0;
  auto hit = [k](const std::vector<double>& logits, std::size_t truth) {
    if (truth >= logits.size()) fail(ErrorCode::InvalidArgument, "true beam index out of range");
    std::size_t rank = 0;
    for (std::size_t i = 0; i < logits.size(); ++i)
      if (logits[i] > logits[truth] || (logits[i] == logits[truth] && i < truth)) ++rank;
    return rank < std::min(k, logits.size()) ? 1.0 : 0.0;
  };
  double sum = 0.0;
  for (const auto& s : samples) sum += 0.5 * (hit(s.logits_h, s.true_h) + hit(s.logits_v, s.true_v));
  return sum / static_cast<double>(samples.size());
}

}  // namespace isac
