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
#include <sstream>

#include "doctest.h"
#include "isac/detect.hpp"

using namespace isac;

namespace {

RMatrix noise_magnitude(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  RMatrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = std::abs(rng.complex_normal(1.0));
  return m;
}

Detection box_det(double x, double y, double w, double h, double conf) {
  Detection d;
  d.bbox = {x, y, w, h};
  d.confidence = conf;
  return d;
}

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

}  // namespace

TEST_CASE("CFAR scale") {
  CHECK(cfar_scale(1, 0.5) == doctest::Approx(1.0));
  CHECK(cfar_scale(16, 1e-4) == doctest::Approx(16 * (std::pow(1e-4, -1.0 / 16) - 1)));
}

TEST_CASE("CFAR on empty and injected images") {
  CfarConfig cfg;
  CHECK(cfar_detect_and_cluster(RMatrix::Zero(20, 30), cfg).empty());

  int exact = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    Rng rng(seed);
    RMatrix img = noise_magnitude(16, 16, rng);
    img(7, 9) = std::sqrt(1000.0);
    auto hits = cfar_detect_and_cluster(img, cfg);
    if (hits.size() != 1) continue;
    const auto& b = hits[0].bbox;
    bool inside = b.left() * 16 <= 9.0 && b.right() * 16 >= 9.0 && b.top() * 16 <= 7.0 &&
                  b.bottom() * 16 >= 7.0;
    exact += inside && hits[0].peak_row == 7 && hits[0].peak_col == 9;
  }
  CHECK(exact >= 95);

  // Two injections further apart than the guard plus training window.
  int good = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(100 + seed);
    RMatrix img = noise_magnitude(24, 24, rng);
    img(5, 4) = img(17, 19) = std::sqrt(1000.0);
    auto hits = cfar_detect_and_cluster(img, cfg);
    if (hits.size() != 2) continue;
    std::sort(hits.begin(), hits.end(), [](const CfarHit& a, const CfarHit& b) { return a.peak_row < b.peak_row; });
    good += std::abs(hits[0].bbox.y * 24 - 5) <= 1 && std::abs(hits[0].bbox.x * 24 - 4) <= 1 &&
            std::abs(hits[1].bbox.y * 24 - 17) <= 1 && std::abs(hits[1].bbox.x * 24 - 19) <= 1;
  }
  CHECK(good >= 18);
}

TEST_CASE("CFAR false-alarm rate on pure noise") {
  CfarConfig cfg;
  Rng rng(2024);
  RMatrix img = noise_magnitude(1000, 1000, rng);
  auto mask = cfar_mask(img, cfg);
  double rate = double(mask.cast<double>().sum()) / 1e6;
  CHECK(rate >= cfg.pfa / 3);
  CHECK(rate <= cfg.pfa * 3);
}

TEST_CASE("CFAR config validation") {
  CfarConfig c;
  c.pfa = 1.0;
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.train = {0, 4};
  CHECK_THROWS_AS(c.validate(), Error);
  c = {};
  c.metric.link_m = 2.0;
  CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("beam logits from box centres") {
  PixelGrid grid = PixelGrid::uniform({{0, 0, 5}, 0.0, 0.0}, 10.0, 50.0, 81, -0.8, 0.8, 65);
  Codebook h7 = make_dft_codebook(CodebookAxis::Horizontal, 7);
  Codebook v7 = make_dft_codebook(CodebookAxis::Vertical, 7);
  BeamHeadConfig head;
  // Column 32 sits at angle 0, row 60 at 40 m.
  BoundingBox centre{32.0 / 65, 60.0 / 81, 0.05, 0.05};
  auto [lh, lv] = infer_beam_logits(centre, grid, h7, v7, head);
  CHECK(argmax(lh) == Codebook::center_index(7));
  CHECK(argmax(lv) == Codebook::center_index(7));
  BoundingBox wide = centre;
  wide.w = 0.3;
  wide.h = 0.01;
  auto [lh2, lv2] = infer_beam_logits(wide, grid, h7, v7, head);
  CHECK(lh2 == lh);
  CHECK(lv2 == lv);

  Codebook h16 = make_dft_codebook(CodebookAxis::Horizontal, 16);
  Rng rng(3);
  for (int t = 0; t < 100; ++t) {
    BoundingBox b{rng.uniform(0.0, 1.0), rng.uniform(0.0, 1.0), 0.1, 0.1};
    auto [l, unused] = infer_beam_logits(b, grid, h16, v7, head);
    double u = std::sin(grid.angle_at(b.x * 65));
    std::size_t best = 0;
    for (std::size_t i = 1; i < 16; ++i)
      if (ula_gain(h16.beam(i), u) > ula_gain(h16.beam(best), u)) best = i;
    CHECK(argmax(l) == best);
  }

  // Moving the direction by one beam spacing moves the argmax by one.
  PixelGrid fine = PixelGrid::uniform({{0, 0, 5}, 0.0, 0.0}, 10.0, 50.0, 81, -1.45, 1.45, 2001);
  for (std::size_t i = 0; i + 1 < 16; ++i) {
    double a0 = std::asin(Codebook::spatial_frequency(i, 16));
    double a1 = std::asin(Codebook::spatial_frequency(i + 1, 16));
    auto l0 = infer_beam_logits({fine.col_of(a0) / 2001, 0.5, 0.1, 0.1}, fine, h16, v7, head).first;
    auto l1 = infer_beam_logits({fine.col_of(a1) / 2001, 0.5, 0.1, 0.1}, fine, h16, v7, head).first;
    CHECK(argmax(l0) == i);
    CHECK(argmax(l1) == i + 1);
  }
  CHECK_THROWS_AS(infer_beam_logits({1.5, 0.5, 0.1, 0.1}, grid, h7, v7, head), Error);
}

TEST_CASE("class scores") {
  PixelGrid grid = PixelGrid::uniform({{0, 0, 5}, 0.0, 0.0}, 10.0, 50.0, 128, -0.8, 0.8, 64);
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    auto s = infer_class_scores({rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.01, 0.3),
                                 rng.uniform(0.01, 0.3)},
                                grid);
    double sum = 0.0;
    for (double v : s) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
      sum += v;
    }
    CHECK(sum == doctest::Approx(1.0));
  }
}

TEST_CASE("non-maximum suppression") {
  auto kept = nms({box_det(0.5, 0.5, 0.2, 0.2, 0.9), box_det(0.5, 0.5, 0.2, 0.2, 0.8)}, 0.7);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].confidence == 0.9);

  kept = nms({box_det(0.1, 0.1, 0.1, 0.1, 0.3), box_det(0.6, 0.6, 0.1, 0.1, 0.5),
              box_det(0.3, 0.8, 0.1, 0.1, 0.4)},
             0.5);
  CHECK(kept.size() == 3);

  // Chain on one axis: IoU(A,B) = IoU(B,C) = 0.5, IoU(A,C) = 0.2.
  Detection a = box_det(0.05, 0.5, 0.1, 0.1, 0.9);
  Detection b = box_det(0.05 + 0.1 / 3, 0.5, 0.1, 0.1, 0.5);
  Detection c = box_det(0.05 + 0.2 / 3, 0.5, 0.1, 0.1, 0.7);
  kept = nms({b, c, a}, 0.4);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].confidence == 0.9);
  CHECK(kept[1].confidence == 0.7);

  // Equal confidence: lower x first.
  kept = nms({box_det(0.7, 0.5, 0.1, 0.1, 0.5), box_det(0.2, 0.5, 0.1, 0.1, 0.5)}, 0.5);
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].bbox.x == 0.2);

  // Antichain property on random boxes.
  Rng rng(12);
  std::vector<Detection> many;
  for (int i = 0; i < 300; ++i)
    many.push_back(box_det(rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9), rng.uniform(0.02, 0.2),
                           rng.uniform(0.02, 0.2), rng.uniform()));
  kept = nms(many, 0.3);
  for (std::size_t i = 0; i < kept.size(); ++i)
    for (std::size_t j = i + 1; j < kept.size(); ++j) {
      const auto &p = kept[i].bbox, &q = kept[j].bbox;
      double iw = std::max(0.0, std::min(p.right(), q.right()) - std::max(p.left(), q.left()));
      double ih = std::max(0.0, std::min(p.bottom(), q.bottom()) - std::max(p.top(), q.top()));
      double inter = iw * ih;
      CHECK(inter / (p.area() + q.area() - inter) <= 0.3 + 1e-12);
    }
}

TEST_CASE("class thresholding") {
  Detection d;
  d.class_scores = {0.7, 0.2, 0.1};
  d.logits_h = {1.0, -2.0};
  auto r = threshold_classes(d, 0.5);
  REQUIRE(r.target_class);
  CHECK(*r.target_class == VehicleClass::Sedan);
  CHECK(r.beams_h == d.logits_h);
  d.class_scores = {0.3, 0.3, 0.4};
  CHECK(!threshold_classes(d, 0.5).target_class);
  d.class_scores = {0.4, 0.4, 0.2};
  r = threshold_classes(d, 0.0);
  REQUIRE(r.target_class);
  CHECK(*r.target_class == VehicleClass::Sedan);
  d.class_scores = {0.0, 0.0, 0.0};
  CHECK(threshold_classes(d, 0.0).target_class == VehicleClass::Sedan);
}

TEST_CASE("detection file round trip") {
  Rng rng(21);
  DetectionFile f;
  f.n_h = 8;
  f.n_v = 4;
  f.spec_hash = "0123456789abcdef";
  f.seed = 99;
  for (int i = 0; i < 1000; ++i) {
    Detection d = box_det(rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform(), rng.uniform());
    for (auto& s : d.class_scores) s = rng.uniform();
    for (int k = 0; k < 8; ++k) d.logits_h.push_back(rng.normal() * 1e3);
    for (int k = 0; k < 4; ++k) d.logits_v.push_back(rng.normal() * 1e-7);
    f.items.emplace_back(rng.index(50), d);
  }
  std::stringstream ss;
  write_detections(ss, f);
  DetectionFile back = read_detections(ss);
  CHECK(back.n_h == 8);
  CHECK(back.n_v == 4);
  CHECK(back.spec_hash == f.spec_hash);
  CHECK(back.seed == 99);
  REQUIRE(back.items.size() == f.items.size());
  bool same = true;
  for (std::size_t i = 0; i < f.items.size(); ++i)
    same = same && back.items[i] == f.items[i];
  CHECK(same);

  std::stringstream empty;
  CHECK(read_detections(empty).items.empty());

  std::stringstream bad;
  bad << R"({"type":"header","n_h":2,"n_v":1,"c_target":3})" << "\n"
      << R"({"frame":0,"x":0.5,"y":0.5,"w":0.1,"h":0.1,"conf":0.9,"class_scores":[1,0,0],"logits_h":[1,2,3],"logits_v":[0]})"
      << "\n";
  try {
    read_detections(bad);
    FAIL("expected SchemaMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SchemaMismatch);
  }

  std::stringstream broken;
  broken << R"({"type":"header","n_h":2,"n_v":1,"c_target":3})" << "\n\n{\"frame\": 0,";
  try {
    read_detections(broken);
    FAIL("expected Parse");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
}
