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

#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "isac/assoc.hpp"

using namespace isac;

namespace {

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

// Every matching of size min(K, V); minimum cost, then lexicographically
// smallest row-sorted pair list.
std::pair<double, Pairs> brute_force(const RMatrix& c) {
  const std::size_t K = c.rows(), V = c.cols();
  const bool by_row = K <= V;
  const std::size_t small = std::min(K, V), big = std::max(K, V);
  std::vector<std::size_t> perm(big);
  std::iota(perm.begin(), perm.end(), 0);
  double best = std::numeric_limits<double>::infinity();
  Pairs best_pairs;
  do {
    Pairs p;
    for (std::size_t i = 0; i < small; ++i)
      p.emplace_back(by_row ? i : perm[i], by_row ? perm[i] : i);
    std::sort(p.begin(), p.end());
    double cost = 0.0;
    for (auto [r, col] : p) cost += c(Eigen::Index(r), Eigen::Index(col));
    if (cost < best || (cost == best && p < best_pairs)) {
      best = cost;
      best_pairs = p;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return {best, best_pairs};
}

std::vector<double> one_hot(std::size_t n, std::size_t i) {
  std::vector<double> v(n, 0.0);
  v[i] = 1.0;
  return v;
}

Detection det_with_logits(std::vector<double> h, std::vector<double> v) {
  Detection d;
  d.bbox = {0.5, 0.5, 0.1, 0.1};
  d.confidence = 0.9;
  d.logits_h = std::move(h);
  d.logits_v = std::move(v);
  return d;
}

BeamReport report(int id, std::size_t fh, std::size_t fv, std::size_t nh, std::size_t nv) {
  BeamReport r;
  r.ve_id = id;
  r.f_h = fh;
  r.f_v = fv;
  r.n_h = nh;
  r.n_v = nv;
  return r;
}

}  // namespace

TEST_CASE("softmax") {
  auto u = softmax({2.0, 2.0, 2.0, 2.0});
  for (double p : u) CHECK(p == doctest::Approx(0.25));
  auto a = softmax({0.0, std::log(3.0)});
  CHECK(std::abs(a[0] - 0.25) < 1e-15);
  CHECK(std::abs(a[1] - 0.75) < 1e-15);
  Rng rng(1);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> z(9);
    for (auto& x : z) x = rng.normal() * 30;
    auto p = softmax(z);
    std::vector<double> z2 = z;
    for (auto& x : z2) x += 1234.5;
    auto p2 = softmax(z2);
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
      s += p[i];
      CHECK(std::abs(p[i] - p2[i]) < 1e-12);
    }
    CHECK(std::abs(s - 1.0) < 1e-12);
  }
  CHECK(softmax({1000.0, 0.0})[0] == 1.0);
}

TEST_CASE("CCE cost") {
  std::vector<double> lh(8, 0.0), lv(8, 0.0);
  CHECK(cce_cost(one_hot(8, 3), one_hot(8, 5), lh, lv) == doctest::Approx(2 * std::log(8.0)));
  CHECK(2 * std::log(8.0) == doctest::Approx(4.1589).epsilon(1e-4));
  lh[3] = 50.0;
  lv[5] = 50.0;
  CHECK(cce_cost(one_hot(8, 3), one_hot(8, 5), lh, lv) < 1e-18);
  // A miss is capped by the probability floor.
  CHECK(cce_cost(one_hot(8, 0), one_hot(8, 0), {1e4, 0, 0, 0, 0, 0, 0, 0}, lv) <=
        -std::log(kProbEpsilon) + 60.0);

  std::vector<double> z = {0.3, -1.0, 2.0, 0.5};
  double prev = std::numeric_limits<double>::infinity();
  for (double x = -5; x <= 5; x += 0.25) {
    z[1] = x;
    double c = cce_cost(one_hot(4, 1), one_hot(1, 0), z, {0.0});
    CHECK(c < prev);
    prev = c;
  }
  CHECK(parse_cost_kind(to_string(CostKind::BinaryCrossEntropy)) == CostKind::BinaryCrossEntropy);
  CHECK(bce_cost(one_hot(4, 1), one_hot(1, 0), {0, 5, 0, 0}, {0}) <
        bce_cost(one_hot(4, 1), one_hot(1, 0), {5, 0, 0, 0}, {0}));
}

TEST_CASE("cost matrix") {
  std::vector<Detection> one = {det_with_logits({0.1, 0.7, -0.3}, {1.0, 0.0})};
  auto cm = build_cost_matrix(one, {report(7, 2, 1, 3, 2)});
  REQUIRE(cm.rows() == 1);
  REQUIRE(cm.cols() == 1);
  CHECK(cm.values(0, 0) == cce_cost(one_hot(3, 2), one_hot(2, 1), one[0].logits_h, one[0].logits_v));
  CHECK(cm.ve_ids == std::vector<int>{7});

  // Three detections aimed at beams 2, 8, 13; three users with those beams.
  const std::size_t nh = 16, nv = 4;
  std::vector<Detection> dets;
  std::vector<BeamReport> reps;
  const std::size_t beams[3] = {2, 8, 13};
  for (std::size_t k = 0; k < 3; ++k) {
    std::vector<double> h(nh), v(nv);
    for (std::size_t i = 0; i < nh; ++i) h[i] = -10.0 * std::abs(double(i) - double(beams[k]));
    for (std::size_t i = 0; i < nv; ++i) v[i] = i == 1 ? 0.0 : -3.0;
    dets.push_back(det_with_logits(h, v));
    reps.push_back(report(int(10 + k), beams[k], 1, nh, nv));
  }
  cm = build_cost_matrix(dets, reps);
  for (Eigen::Index r = 0; r < 3; ++r)
    for (Eigen::Index c = 0; c < 3; ++c)
      if (c != r) CHECK(cm.values(r, r) < cm.values(r, c));

  // Permuting reports permutes columns.
  std::vector<BeamReport> perm = {reps[2], reps[0], reps[1]};
  auto cp = build_cost_matrix(dets, perm);
  CHECK(cp.values.col(0) == cm.values.col(2));
  CHECK(cp.values.col(1) == cm.values.col(0));
  CHECK(cp.values.col(2) == cm.values.col(1));
  CHECK(cp.ve_ids == std::vector<int>{12, 10, 11});

  try {
    build_cost_matrix(dets, {report(1, 0, 0, 8, 4)});
    FAIL("expected SchemaMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaMismatch);
  }
  CHECK(build_cost_matrix({}, reps).rows() == 0);
}

TEST_CASE("assignment examples") {
  RMatrix a(2, 2);
  a << 1, 2, 2, 1;
  Assignment s = solve_assignment(a);
  CHECK(s.pairs == Pairs{{0, 0}, {1, 1}});
  CHECK(s.total_cost == 2.0);
  a << 1, 1, 1, 1;
  s = solve_assignment(a);
  CHECK(s.pairs == Pairs{{0, 0}, {1, 1}});
  CHECK(s.total_cost == 2.0);
  s = solve_assignment(RMatrix(0, 3));
  CHECK(s.pairs.empty());
  CHECK(s.total_cost == 0.0);
  RMatrix bad = RMatrix::Zero(2, 2);
  bad(0, 1) = std::nan("");
  CHECK_THROWS_AS(solve_assignment(bad), Error);

  // Gate drops expensive pairs after the solve.
  RMatrix g(2, 2);
  g << 1, 9, 9, 8;
  s = solve_assignment(g, 5.0);
  CHECK(s.pairs == Pairs{{0, 0}});
  CHECK(s.total_cost == 1.0);

  auto h = hungarian_square(a);
  CHECK(h.size() == 2);
}

TEST_CASE("assignment equals brute force") {
  Rng rng(77);
  for (int t = 0; t < 1000; ++t) {
    std::size_t K = 1 + rng.index(6), V = 1 + rng.index(6);
    RMatrix c(K, V);
    bool integer = t % 2 == 0;
    for (Eigen::Index i = 0; i < c.size(); ++i)
      c.data()[i] = integer ? double(rng.index(4)) : rng.uniform(0.0, 10.0);
    Assignment s = solve_assignment(c);
    auto [best, pairs] = brute_force(c);
    CHECK(s.total_cost == best);
    CHECK(s.pairs.size() == std::min(K, V));
    if (integer) CHECK(s.pairs == pairs);
  }
}

TEST_CASE("assignment invariances") {
  Rng rng(78);
  for (int t = 0; t < 200; ++t) {
    std::size_t K = 1 + rng.index(5), V = 1 + rng.index(5);
    RMatrix c(K, V);
    for (Eigen::Index i = 0; i < c.size(); ++i) c.data()[i] = rng.uniform(0.0, 5.0);
    Assignment s = solve_assignment(c);

    // Row shift keeps the optimal set (square problems: every row is used).
    if (K <= V) {
      RMatrix shifted = c;
      shifted.row(Eigen::Index(rng.index(K))).array() += 3.7;
      CHECK(solve_assignment(shifted).pairs == s.pairs);
    }

    // Relabelling rows and columns relabels the assignment.
    std::vector<std::size_t> pr(K), pc(V);
    std::iota(pr.begin(), pr.end(), 0);
    std::iota(pc.begin(), pc.end(), 0);
    for (std::size_t i = K; i > 1; --i) std::swap(pr[i - 1], pr[rng.index(i)]);
    for (std::size_t i = V; i > 1; --i) std::swap(pc[i - 1], pc[rng.index(i)]);
    RMatrix p(K, V);
    for (std::size_t i = 0; i < K; ++i)
      for (std::size_t j = 0; j < V; ++j) p(Eigen::Index(i), Eigen::Index(j)) = c(Eigen::Index(pr[i]), Eigen::Index(pc[j]));
    Assignment sp = solve_assignment(p);
    Pairs mapped;
    for (auto [i, j] : sp.pairs) mapped.emplace_back(pr[i], pc[j]);
    std::sort(mapped.begin(), mapped.end());
    CHECK(mapped == s.pairs);
  }
}

TEST_CASE("probability of correct association") {
  FrameAssociation f1;
  f1.assigned = {{0, 1}, {1, 2}};
  f1.truth = {{0, 1}, {1, 2}};
  f1.ves_present = {1, 2};
  f1.ves_detected = {1, 2};
  CHECK(correct_association_prob({f1, f1}).p_correct == 1.0);

  FrameAssociation swapped = f1;
  swapped.assigned = {{0, 2}, {1, 1}};
  CHECK(correct_association_prob({swapped}).p_correct == 0.0);

  FrameAssociation half = f1;
  half.assigned = {{0, 1}, {1, 3}};
  AssociationScore s = correct_association_prob({f1, half});
  CHECK(s.p_correct == 0.75);
  CHECK(s.frames_used == 2);

  FrameAssociation none;
  s = correct_association_prob({f1, none});
  CHECK(s.p_correct == 1.0);
  CHECK(s.frames_skipped == 1);

  // An undetected user counts against the score unless excluded.
  FrameAssociation missed;
  missed.assigned = {{0, 1}};
  missed.truth = {{0, 1}};
  missed.ves_present = {1, 2};
  missed.ves_detected = {1};
  CHECK(correct_association_prob({missed}).p_correct == 0.5);
  CHECK(correct_association_prob({missed}, true).p_correct == 1.0);
}

TEST_CASE("separated beams associate perfectly") {
  // Four users on distinct beams plus two clutter detections elsewhere.
  const std::size_t nh = 16, nv = 4;
  const std::size_t user_beams[4] = {1, 5, 9, 14};
  const std::size_t clutter_beams[2] = {3, 11};
  std::vector<Detection> dets;
  FrameAssociation fa;
  auto logits_at = [&](std::size_t b) {
    std::vector<double> h(nh);
    for (std::size_t i = 0; i < nh; ++i) h[i] = -4.0 * std::abs(double(i) - double(b));
    return h;
  };
  std::vector<std::size_t> order = {4, 0, 2, 5, 1, 3};  // shuffled detection order
  std::vector<BeamReport> reps;
  for (std::size_t k = 0; k < 4; ++k) {
    reps.push_back(report(int(k), user_beams[k], 2, nh, nv));
    fa.ves_present.push_back(int(k));
  }
  for (std::size_t pos = 0; pos < order.size(); ++pos) {
    std::size_t o = order[pos];
    std::size_t b = o < 4 ? user_beams[o] : clutter_beams[o - 4];
    dets.push_back(det_with_logits(logits_at(b), {-3, -1, 0, -1}));
    if (o < 4) fa.truth.emplace_back(pos, int(o));
  }
  CostMatrix cm = build_cost_matrix(dets, reps);
  Assignment s = solve_assignment(cm.values);
  for (auto [r, c] : s.pairs) fa.assigned.emplace_back(r, cm.ve_ids[c]);
  CHECK(correct_association_prob({fa}).p_correct == 1.0);
}
