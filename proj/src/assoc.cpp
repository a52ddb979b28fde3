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

#include "isac/assoc.hpp"

#include <algorithm>
#include <limits>

namespace isac {

std::vector<double> softmax(const std::vector<double>& z) {
  if (z.empty()) return {};
  double m = *std::max_element(z.begin(), z.end());
  std::vector<double> p(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) sum += p[i] = std::exp(z[i] - m);
  for (auto& v : p) v /= sum;
  return p;
}

std::string_view to_string(CostKind k) {
  return k == CostKind::CategoricalCrossEntropy ? "cce" : "bce";
}

CostKind parse_cost_kind(std::string_view name) {
  if (name == "cce") return CostKind::CategoricalCrossEntropy;
  if (name == "bce") return CostKind::BinaryCrossEntropy;
  fail(ErrorCode::Parse, "unknown cost '" + std::string(name) + "'");
}

namespace {

void check_sizes(const std::vector<double>& y, const std::vector<double>& logits) {
  if (y.size() != logits.size())
    fail(ErrorCode::SchemaMismatch, "one-hot length " + std::to_string(y.size()) +
                                        " differs from logit length " +
                                        std::to_string(logits.size()));
}

double cce_axis(const std::vector<double>& y, const std::vector<double>& logits, double eps) {
  check_sizes(y, logits);
  auto p = softmax(logits);
  double c = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i)
    if (y[i] != 0.0) c -= y[i] * std::log(std::max(p[i], eps));
  return c;
}

double bce_axis(const std::vector<double>& y, const std::vector<double>& logits, double eps) {
  check_sizes(y, logits);
  auto p = softmax(logits);
  double c = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    double q = std::clamp(p[i], eps, 1.0 - eps);
    c -= y[i] * std::log(q) + (1.0 - y[i]) * std::log(1.0 - q);
  }
  return c;
}

}  // namespace

double cce_cost(const std::vector<double>& y_h, const std::vector<double>& y_v,
                const std::vector<double>& logits_h, const std::vector<double>& logits_v,
                double eps) {
  return cce_axis(y_h, logits_h, eps) + cce_axis(y_v, logits_v, eps);
}

double bce_cost(const std::vector<double>& y_h, const std::vector<double>& y_v,
                const std::vector<double>& logits_h, const std::vector<double>& logits_v,
                double eps) {
  return bce_axis(y_h, logits_h, eps) + bce_axis(y_v, logits_v, eps);
}

CostMatrix build_cost_matrix(const std::vector<Detection>& dets,
                             const std::vector<BeamReport>& reports, CostKind kind) {
  CostMatrix m;
  m.values.resize(static_cast<Eigen::Index>(dets.size()),
                  static_cast<Eigen::Index>(reports.size()));
  for (std::size_t k = 0; k < dets.size(); ++k) m.det_ids.push_back(k);
  for (const auto& r : reports) m.ve_ids.push_back(r.ve_id);
  for (std::size_t v = 0; v < reports.size(); ++v) {
    const auto& r = reports[v];
    auto yh = r.y_h();
    auto yv = r.y_v();
    for (std::size_t k = 0; k < dets.size(); ++k) {
      const auto& d = dets[k];
      if (d.logits_h.size() != r.n_h || d.logits_v.size() != r.n_v)
        fail(ErrorCode::SchemaMismatch, "detection and beam report codebook sizes differ");
      m.values(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(v)) =
          kind == CostKind::CategoricalCrossEntropy ? cce_cost(yh, yv, d.logits_h, d.logits_v)
                                                    : bce_cost(yh, yv, d.logits_h, d.logits_v);
    }
  }
  return m;
}

std::vector<std::size_t> hungarian_square(const RMatrix& cost) {
  const auto n = static_cast<std::size_t>(cost.rows());
  if (static_cast<std::size_t>(cost.cols()) != n)
    fail(ErrorCode::InvalidArgument, "hungarian_square needs a square matrix");
  const double inf = std::numeric_limits<double>::infinity();
  // 1-based potentials; p[j] is the row matched to column j.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    p[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      std::size_t i0 = p[j0], j1 = 0;
      double delta = inf;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                     u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      std::size_t j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0);
  }
  std::vector<std::size_t> row_to_col(n);
  for (std::size_t j = 1; j <= n; ++j) row_to_col[p[j] - 1] = j - 1;
  return row_to_col;
}

namespace {

double solve_value(const RMatrix& s, const std::vector<std::size_t>& rows,
                   const std::vector<std::size_t>& cols) {
  const std::size_t n = rows.size();
  if (n == 0) return 0.0;
  RMatrix sub(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)) =
          s(static_cast<Eigen::Index>(rows[a]), static_cast<Eigen::Index>(cols[b]));
  auto m = hungarian_square(sub);
  double total = 0.0;
  for (std::size_t a = 0; a < n; ++a)
    total += sub(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(m[a]));
  return total;
}

}  // namespace

Assignment solve_assignment(const RMatrix& cost, std::optional<double> gate) {
  Assignment out;
  const auto K = static_cast<std::size_t>(cost.rows());
  const auto V = static_cast<std::size_t>(cost.cols());
  if (K == 0 || V == 0) return out;
  if (!cost.allFinite()) fail(ErrorCode::InvalidArgument, "cost matrix has non-finite entries");

  // Square padding with a constant sentinel above every real cost.
  const std::size_t n = std::max(K, V);
  const double sentinel = cost.maxCoeff() + 1.0;
  RMatrix s = RMatrix::Constant(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), sentinel);
  s.topLeftCorner(static_cast<Eigen::Index>(K), static_cast<Eigen::Index>(V)) = cost;

  std::vector<std::size_t> rows(n), cols(n);
  for (std::size_t i = 0; i < n; ++i) rows[i] = cols[i] = i;
  const double opt = solve_value(s, rows, cols);
  const double tol = 1e-9 * std::max(1.0, std::abs(opt));

  // Fix rows in order, each to the smallest column that keeps the total
  // optimal; real columns first, so a row stays unmatched only if it must.
  double fixed = 0.0;
  for (std::size_t r = 0; r < n; ++r) {
    auto rit = std::find(rows.begin(), rows.end(), r);
    std::vector<std::size_t> rest_rows(rows);
    rest_rows.erase(rest_rows.begin() + (rit - rows.begin()));
    bool placed = false;
    for (std::size_t ci = 0; ci < cols.size() && !placed; ++ci) {
      std::size_t c = cols[ci];
      std::vector<std::size_t> rest_cols(cols);
      rest_cols.erase(rest_cols.begin() + static_cast<std::ptrdiff_t>(ci));
      double total = fixed + s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) +
                     solve_value(s, rest_rows, rest_cols);
      if (total <= opt + tol) {
        fixed += s(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        if (r < K && c < V) out.pairs.emplace_back(r, c);
        rows = rest_rows;
        cols = rest_cols;
        placed = true;
      }
    }
    if (!placed) fail(ErrorCode::InvalidArgument, "assignment refinement lost optimality");
  }
  for (auto& [r, c] : out.pairs)
    out.total_cost += cost(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
  if (gate) {
    std::vector<std::pair<std::size_t, std::size_t>> kept;
    out.total_cost = 0.0;
    for (auto& pr : out.pairs) {
      double c = cost(static_cast<Eigen::Index>(pr.first), static_cast<Eigen::Index>(pr.second));
      if (c <= *gate) {
        kept.push_back(pr);
        out.total_cost += c;
      }
    }
    out.pairs = std::move(kept);
  }
  return out;
}

AssociationScore correct_association_prob(const std::vector<FrameAssociation>& frames,
                                          bool exclude_undetected) {
  AssociationScore s;
  double sum = 0.0;
  for (const auto& f : frames) {
    std::size_t denom = exclude_undetected ? f.ves_detected.size() : f.ves_present.size();
    if (denom == 0) {
      ++s.frames_skipped;
      continue;
    }
    std::size_t correct = 0;
    for (const auto& a : f.assigned)
      if (std::find(f.truth.begin(), f.truth.end(), a) != f.truth.end()) ++correct;
    sum += static_cast<double>(correct) / static_cast<double>(denom);
    ++s.frames_used;
  }
  s.p_correct = s.frames_used ? sum / static_cast<double>(s.frames_used) : 0.0;
  return s;
}

}  // namespace isac
