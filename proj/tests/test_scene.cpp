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

#include "doctest.h"
#include "isac/common.hpp"
#include "isac/geometry.hpp"
#include "isac/scene.hpp"

using namespace isac;

namespace {

ScenarioConfig one_vehicle(TrajectoryModel tr, double duration = 2.0) {
  ScenarioConfig sc;
  sc.duration_s = duration;
  sc.dt_s = 0.1;
  sc.vehicles.push_back({7, VehicleClass::Sedan, tr, true});
  return sc;
}

}  // namespace

TEST_CASE("straight road kinematics") {
  TrajectoryModel tr;
  tr.kind = TrajectoryKind::StraightRoad;
  tr.speed = 10.0;
  tr.heading = 0.0;
  Scenario s(one_vehicle(tr));
  Pose p = s.advance(10).front().pose;
  CHECK(p.position.x == doctest::Approx(10.0).epsilon(1e-12));
  CHECK(p.position.y == doctest::Approx(0.0));
  CHECK(p.position.z == 0.0);
}

TEST_CASE("zero speed keeps the start position") {
  TrajectoryModel tr;
  tr.speed = 0.0;
  tr.start = {3.0, -4.0, 0.0};
  Scenario s(one_vehicle(tr));
  for (std::size_t t : {0u, 5u, 20u}) CHECK(s.advance(t).front().pose.position == tr.start);
}

TEST_CASE("roundabout quarter circle") {
  TrajectoryModel tr;
  tr.kind = TrajectoryKind::Roundabout;
  tr.speed = 10.0;
  tr.turn_radius = 20.0;
  tr.heading = 0.3;
  tr.start = {5.0, 1.0, 0.0};
  tr.turn_left = true;
  const double t_quarter = (kPi / 2 * 20.0) / 10.0;
  Pose p = evaluate_trajectory(tr, t_quarter);
  // Centre lies one radius to the left of the initial heading.
  Vec3 centre = tr.start + 20.0 * Vec3{-std::sin(tr.heading), std::cos(tr.heading), 0.0};
  CHECK(std::abs(distance(p.position, centre) - 20.0) < 1e-9);
  CHECK(p.heading - tr.heading == doctest::Approx(kPi / 2).epsilon(1e-12));
  // Sampled frames stay on the circle too.
  for (double t = 0.0; t < 6.0; t += 0.37)
    CHECK(std::abs(distance(evaluate_trajectory(tr, t).position, centre) - 20.0) < 1e-9);
}

TEST_CASE("advance beyond the duration throws OutOfDuration") {
  TrajectoryModel tr;
  tr.speed = 1.0;
  Scenario s(one_vehicle(tr, 1.0));
  CHECK(s.frame_count() == 11);
  CHECK_NOTHROW(s.advance(10));
  try {
    s.advance(11);
    FAIL("expected OutOfDuration");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OutOfDuration);
  }
}

TEST_CASE("scenario streams are deterministic per seed") {
  ScenarioConfig a = make_preset_pool(SceneKind::B, 2, 3, 1.9, 0.1, 42);
  ScenarioConfig b = make_preset_pool(SceneKind::B, 2, 3, 1.9, 0.1, 42);
  Scenario sa(a), sb(b);
  for (std::size_t t = 0; t < sa.frame_count(); t += 4) {
    auto va = sa.advance(t), vb = sb.advance(t);
    REQUIRE(va.size() == vb.size());
    for (std::size_t i = 0; i < va.size(); ++i) {
      auto pa = world_scatterers(va[i]), pb = world_scatterers(vb[i]);
      REQUIRE(pa.size() == pb.size());
      for (std::size_t q = 0; q < pa.size(); ++q) {
        CHECK(pa[q].position == pb[q].position);
        CHECK(pa[q].phase == pb[q].phase);
      }
    }
  }
  ScenarioConfig c = make_preset_pool(SceneKind::B, 2, 3, 1.9, 0.1, 43);
  Scenario sc(c);
  bool differs = false;
  auto p0 = world_scatterers(sa.advance(0).front()), p1 = world_scatterers(sc.advance(0).front());
  for (std::size_t q = 0; q < std::min(p0.size(), p1.size()); ++q)
    differs |= p0[q].phase != p1[q].phase;
  CHECK(differs);
}

TEST_CASE("scatterer templates sit inside the class extent") {
  for (auto cls : {VehicleClass::Sedan, VehicleClass::Hatchback, VehicleClass::Truck}) {
    Extent e = class_extent(cls);
    CHECK(e.length > 0.0);
    CHECK(e.width > 0.0);
    CHECK(e.height > 0.0);
    auto tpl = scatterer_template(cls);
    CHECK(tpl.size() >= 4);
    for (const auto& s : tpl) {
      CHECK(std::abs(s.offset.x) <= e.length / 2 + 1e-12);
      CHECK(std::abs(s.offset.y) <= e.width / 2 + 1e-12);
      CHECK(s.offset.z >= 0.0);
      CHECK(s.offset.z <= e.height + 1e-12);
      CHECK(s.rcs >= 0.0);
    }
  }
  Scenario s(make_preset_pool(SceneKind::A, 2, 2, 1.0, 0.1, 5));
  for (const auto& v : s.targets())
    for (const auto& q : v.scatterers) {
      CHECK(q.phase >= 0.0);
      CHECK(q.phase < 2 * kPi);
    }
}

TEST_CASE("slant-plane projection") {
  RadarPose flat{{0, 0, 0}, 0.0, 0.0};
  auto a = project_to_slant_plane({10, 0, 0}, flat);
  CHECK(a.range == doctest::Approx(10.0));
  CHECK(a.azimuth == doctest::Approx(0.0));
  auto b = project_to_slant_plane({0, 10, 0}, flat);
  CHECK(b.range == doctest::Approx(10.0));
  CHECK(b.azimuth == doctest::Approx(kPi / 2));
  RadarPose mast{{0, 0, 5}, 0.0, 0.0};
  auto c = project_to_slant_plane({12, 0, 0.5}, mast);
  CHECK(c.range == doctest::Approx(std::sqrt(144.0 + 20.25)).epsilon(1e-14));
  CHECK(c.azimuth == doctest::Approx(0.0));
  try {
    project_to_slant_plane({0, 0, 5}, mast);
    FAIL("expected DegenerateGeometry");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateGeometry);
  }
}

TEST_CASE("ground-truth box of a single scatterer") {
  RadarPose pose{{0, 0, 0}, 0.0, 0.0};
  PixelGrid grid = PixelGrid::uniform(pose, 10.0, 30.0, 41, -0.5, 0.5, 21);
  const std::size_t r = 12, c = 7;
  PointScatterer s;
  s.position = grid.point(r, c);
  s.rcs = 1.0;
  BboxFilter f;
  BoundingBox b = ground_truth_bbox(std::span(&s, 1), pose, grid, f);
  CHECK(b.x == doctest::Approx(double(c) / 21));
  CHECK(b.y == doctest::Approx(double(r) / 41));
  CHECK(b.w == doctest::Approx(2.0 / 21));
  CHECK(b.h == doctest::Approx(2.0 / 41));
}

TEST_CASE("ground-truth box of two corner scatterers spans the image") {
  RadarPose pose{{0, 0, 0}, 0.0, 0.0};
  PixelGrid grid = PixelGrid::uniform(pose, 10.0, 30.0, 41, -0.5, 0.5, 21);
  PointScatterer s[2];
  s[0].position = grid.point(0, 0);
  s[1].position = grid.point(40, 20);
  s[0].rcs = s[1].rcs = 1.0;
  BboxFilter f;
  f.power_floor_db = -1000.0;
  f.distance_cap_m = 1e9;
  BoundingBox b = ground_truth_bbox(s, pose, grid, f);
  CHECK(b.w == doctest::Approx(1.0).epsilon(0.03));
  CHECK(b.h == doctest::Approx(1.0).epsilon(0.03));
}

TEST_CASE("ground-truth box of a sedan matches brute-force projection") {
  RadarPose pose{{0, 0, 5}, 0.0, 7.0 * kPi / 180};
  PixelGrid grid = PixelGrid::uniform(pose, 12.0, 52.0, 256, -kPi / 4, kPi / 4, 64);
  TrajectoryModel tr;
  tr.start = {30.0, 0.0, 0.0};
  tr.heading = kPi / 2;
  ScenarioConfig sc = one_vehicle(tr, 0.0);
  Scenario s(sc);
  auto pts = world_scatterers(s.advance(0).front());
  BboxFilter f;
  f.power_floor_db = -1000.0;
  f.distance_cap_m = 1e9;
  BoundingBox b = ground_truth_bbox(pts, pose, grid, f);

  // Independent projection: azimuth is the cone angle off boresight along
  // the horizontal array axis.
  const double r0 = 12.0, dr = 40.0 / 255, a0 = -kPi / 4, da = (kPi / 2) / 63;
  double rmin = 1e9, rmax = -1e9, cmin = 1e9, cmax = -1e9;
  for (const auto& p : pts) {
    Vec3 d = p.position - pose.position;
    double R = norm(d);
    double az = std::asin(d.y / R);  // left axis = +y at yaw 0, any tilt
    double row = (R - r0) / dr, col = (az - a0) / da;
    rmin = std::min(rmin, row);
    rmax = std::max(rmax, row);
    cmin = std::min(cmin, col);
    cmax = std::max(cmax, col);
  }
  CHECK(b.left() == doctest::Approx((cmin - 0.5) / 64).epsilon(1e-9));
  CHECK(b.right() == doctest::Approx((cmax + 0.5) / 64).epsilon(1e-9));
  CHECK(b.top() == doctest::Approx((rmin - 0.5) / 256).epsilon(1e-9));
  CHECK(b.bottom() == doctest::Approx((rmax + 0.5) / 256).epsilon(1e-9));
}

TEST_CASE("ground-truth box grows monotonically as filters relax") {
  RadarPose pose{{0, 0, 5}, 0.0, 7.0 * kPi / 180};
  PixelGrid grid = PixelGrid::uniform(pose, 12.0, 52.0, 256, -kPi / 4, kPi / 4, 64);
  Scenario s(make_preset_pool(SceneKind::A, 2, 2, 0.0, 0.1, 9));
  for (const auto& v : s.advance(0)) {
    auto pts = world_scatterers(v);
    BoundingBox prev;
    bool have = false;
    for (double floor_db : {-3.0, -6.0, -10.0, -20.0, -40.0}) {
      BboxFilter f;
      f.power_floor_db = floor_db;
      BoundingBox b;
      try {
        b = ground_truth_bbox(pts, pose, grid, f);
      } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::NoVisibleTarget);
        continue;
      }
      if (have) {
        CHECK(b.left() <= prev.left() + 1e-12);
        CHECK(b.right() >= prev.right() - 1e-12);
        CHECK(b.top() <= prev.top() + 1e-12);
        CHECK(b.bottom() >= prev.bottom() - 1e-12);
      }
      prev = b;
      have = true;
    }
  }
}

TEST_CASE("filtering everything away throws NoVisibleTarget") {
  RadarPose pose{{0, 0, 0}, 0.0, 0.0};
  PixelGrid grid = PixelGrid::uniform(pose, 10.0, 30.0, 41, -0.5, 0.5, 21);
  PointScatterer far;
  far.position = {100.0, 0.0, 0.0};  // outside the range axis
  far.rcs = 1.0;
  try {
    ground_truth_bbox(std::span(&far, 1), pose, grid, {});
    FAIL("expected NoVisibleTarget");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoVisibleTarget);
  }
}

TEST_CASE("preset pools keep nested prefixes") {
  ScenarioConfig pool = make_preset_pool(SceneKind::C, 4, 5, 1.9, 0.1, 3);
  std::size_t ves = 0, clutter = 0;
  for (const auto& v : pool.vehicles) (v.is_ve ? ves : clutter)++;
  CHECK(ves == 4);
  CHECK(clutter == 5);
  ScenarioConfig small = subset_scenario(pool, 2, 1);
  std::size_t sv = 0, scl = 0;
  for (const auto& v : small.vehicles) {
    (v.is_ve ? sv : scl)++;
    auto it = std::find_if(pool.vehicles.begin(), pool.vehicles.end(),
                           [&](const VehicleSpec& p) { return p.id == v.id; });
    REQUIRE(it != pool.vehicles.end());
    CHECK(it->is_ve == v.is_ve);
  }
  CHECK(sv == 2);
  CHECK(scl == 1);
}

TEST_CASE("bounding box edges are clamped") {
  BoundingBox b = BoundingBox::from_edges(-0.2, 0.1, 0.3, 1.4);
  CHECK(b.left() == doctest::Approx(0.0));
  CHECK(b.bottom() == doctest::Approx(1.0));
  CHECK(b.valid());
}
