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
#include <optional>
#include <utility>
#include <vector>

#include "isac/comm.hpp"
#include "isac/common.hpp"
#include "isac/detect.hpp"

namespace isac {

inline constexpr double kProbEpsilon = 1e-12;

std::vector<double> softmax(const std::vector<double>& z);

enum class CostKind { CategoricalCrossEntropy, BinaryCrossEntropy };

std::string_view to_string(CostKind k);
CostKind parse_cost_kind(std::string_view name);

// -sum_i y_h[i] log softmax(l_h)_i - sum_j y_v[j] log softmax(l_v)_j.
double cce_cost(const std::vector<double>& y_h, const std::vector<double>& y_v,
                const std::vector<double>& logits_h, const std::vector<double>& logits_v,
                double eps = kProbEpsilon);
// Element-wise binary cross-entropy over both softmax vectors.
double bce_cost(const std::vector<double>& y_h, const std::vector<double>& y_v,
                const std::vector<double>& logits_h, const std::vector<double>& logits_v,
                double eps = kProbEpsilon);

struct CostMatrix {
  RMatrix values;                // [K x V]
  std::vector<std::size_t> det_ids;
  std::vector<int> ve_ids;

  std::size_t rows() const { return static_cast<std::size_t>(values.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(values.cols()); }
};

CostMatrix build_cost_matrix(const std::vector<Detection>& dets,
                             const std::vector<BeamReport>& reports,
                             CostKind kind = CostKind::CategoricalCrossEntropy);

struct Assignment {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (row, col), sorted by row
  double total_cost = 0.0;
};

// Minimum-cost one-to-one matching of size min(K, V). Among optimal
// matchings the lexicographically smallest pair set is returned. Pairs
// costing more than `gate` are dropped afterwards when a gate is given.
Assignment solve_assignment(const RMatrix& cost, std::optional<double> gate = std::nullopt);

// Square Hungarian solve (shortest augmenting paths); row -> column.
std::vector<std::size_t> hungarian_square(const RMatrix& cost);

struct FrameAssociation {
  std::size_t frame = 0;
  // (detection index, VE id) pairs produced by the solver.
  std::vector<std::pair<std::size_t, int>> assigned;
  // Truth: detection index -> VE id it observes (from IoU matching).
  std::vector<std::pair<std::size_t, int>> truth;
  std::vector<int> ves_present;
  std::vector<int> ves_detected;  // VEs with a matched detection
};

struct AssociationScore {
  double p_correct = 0.0;
  std::size_t frames_used = 0;
  std::size_t frames_skipped = 0;  // frames without VEs
};

// Per frame: correct pairs / VEs present (or / VEs detected when
// `exclude_undetected`), averaged over frames with at least one VE.
AssociationScore correct_association_prob(const std::vector<FrameAssociation>& frames,
                                          bool exclude_undetected = false);

}  // namespace isac
