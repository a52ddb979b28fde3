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

#include "isac/geometry.hpp"

namespace isac {

inline constexpr double kLogEpsilon = 1e-7;

double iou(const BoundingBox& a, const BoundingBox& b);

// Binary cross-entropy; log arguments are floored at eps.
double bce_loss(double x, double y, double w = 1.0);
// d bce / d x (zero inside the clamp region).
double bce_grad(double x, double y, double w = 1.0);

// Distribution focal loss between knots y_i < y_ip1; 0 log 0 := 0.
// Throws DegenerateInterval when y_i == y_ip1.
double dfl_loss(double y, double y_i, double y_ip1, double p_i, double p_ip1);

double diou_loss(const BoundingBox& b, const BoundingBox& gt);
double ciou_loss(const BoundingBox& b, const BoundingBox& gt);

struct BoxGradient {
  double loss = 0.0;
  double dx = 0.0, dy = 0.0, dw = 0.0, dh = 0.0;
};
// CIoU loss and its gradient with respect to the predicted box, alpha
// treated as a function of the box.
BoxGradient ciou_loss_grad(const BoundingBox& b, const BoundingBox& gt);

double tal_score(double p, double r, double lambda = 1.0, double mu = 1.0);

struct MatchConfig {
  std::vector<double> iou_thresholds;  // strictly increasing, in (0, 1)
  double lambda = 1.0;
  double mu = 1.0;

  static MatchConfig coco();  // 0.50, 0.55, ..., 0.95
  void validate() const;
};

struct EvalDetection {
  BoundingBox bbox;
  double confidence = 0.0;
  std::size_t cls = 0;
};

struct EvalTruth {
  BoundingBox bbox;
  std::size_t cls = 0;
};

struct PrCurve {
  std::vector<double> confidence;  // descending
  std::vector<double> precision;
  std::vector<double> recall;
};

struct MapReport {
  double precision = 0.0;  // mean over classes at the best-F1 confidence
  double recall = 0.0;
  double f1 = 0.0;
  double best_confidence = 0.0;
  double map50 = 0.0;
  double map50_95 = 0.0;
  std::vector<double> ap50;      // per class; NaN for classes without truth
  std::vector<double> ap50_95;
  std::vector<PrCurve> curves50;  // per class at IoU 0.5
};

// Greedy matching in descending confidence; each detection takes the
// highest-IoU unmatched truth of its class in its frame.
PrCurve pr_curve(const std::vector<std::vector<EvalDetection>>& dets,
                 const std::vector<std::vector<EvalTruth>>& truth, std::size_t cls,
                 double iou_threshold);
// 101-point interpolated area under a precision-recall curve.
double average_precision(const PrCurve& curve);

MapReport evaluate_map(const std::vector<std::vector<EvalDetection>>& dets,
                       const std::vector<std::vector<EvalTruth>>& truth, std::size_t n_classes,
                       const MatchConfig& cfg = MatchConfig::coco());

struct BeamSample {
  std::vector<double> logits_h;
  std::vector<double> logits_v;
  std::size_t true_h = 0;  // 0-based
  std::size_t true_v = 0;
};

// Mean over samples and axes of 1[true index among the k largest logits].
// Equal logits rank the lower index first; k is clamped per axis to the
// codebook size.
double topk_beam_accuracy(const std::vector<BeamSample>& samples, std::size_t k);

}  // namespace isac
