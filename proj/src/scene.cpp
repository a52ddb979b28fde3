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

#include "isac/scene.hpp"

#include <algorithm>
#include <limits>

namespace isac {

Extent class_extent(VehicleClass cls) {
  switch (cls) {
    case VehicleClass::Sedan: return {4.6, 1.8, 1.45};
    case VehicleClass::Hatchback: return {4.0, 1.75, 1.5};
    case VehicleClass::Truck: return {7.5, 2.5, 3.0};
  }
  fail(ErrorCode::InvalidArgument, "unknown vehicle class");
}

std::string_view to_string(VehicleClass cls) {
  switch (cls) {
    case VehicleClass::Sedan: return "sedan";
    case VehicleClass::Hatchback: return "hatchback";
    case VehicleClass::Truck: return "truck";
  }
  return "?";
}

VehicleClass parse_vehicle_class(std::string_view name) {
  if (name == "sedan") return VehicleClass::Sedan;
  if (name == "hatchback") return VehicleClass::Hatchback;
  if (name == "truck") return VehicleClass::Truck;
  fail(ErrorCode::Parse, "unknown vehicle class '" + std::string(name) + "'");
}

std::vector<Scatterer> scatterer_template(VehicleClass cls) {
  const Extent e = class_extent(cls);
  const double hl = e.length / 2;
  const double hw = e.width / 2;
  std::vector<Scatterer> s;
  auto add = [&](double x, double y, double z, double rcs) { s.push_back({{x, y, z}, rcs, 0.0}); };

  // Body corners and bumper centres.
  double corner_rcs = cls == VehicleClass::Truck ? 10.0 : 5.0;
  for (double sx : {1.0, -1.0})
    for (double sy : {1.0, -1.0}) add(sx * hl, sy * hw, 0.6, corner_rcs);
  add(hl, 0.0, 0.6, corner_rcs);
  add(-hl, 0.0, 0.6, cls == VehicleClass::Hatchback ? 3.0 : corner_rcs);

  // Side panels and wheel wells.
  std::vector<double> side_x;
  if (cls == VehicleClass::Truck)
    side_x = {-3.0 / 8, -1.0 / 8, 1.0 / 8, 3.0 / 8};
  else
    side_x = {-0.25, 0.0, 0.25};
  double side_rcs = cls == VehicleClass::Truck ? 5.0 : 2.0;
  for (double fx : side_x)
    for (double sy : {1.0, -1.0}) add(fx * e.length, sy * hw, 0.5, side_rcs);

  // Roof line.
  switch (cls) {
    case VehicleClass::Sedan:
      add(0.15 * e.length, 0.0, e.height, 1.5);
      add(-0.15 * e.length, 0.0, e.height, 1.5);
      break;
    case VehicleClass::Hatchback:
      add(0.0, 0.0, e.height, 1.5);
      add(-hl, 0.0, 1.0, 3.0);
      break;
    case VehicleClass::Truck:
      add(hl - 0.8, 0.0, e.height, 4.0);
      add(-hl, hw, e.height, 6.0);
      add(-hl, -hw, e.height, 6.0);
      break;
  }
  return s;
}

std::string_view to_string(TrajectoryKind kind) {
  switch (kind) {
    case TrajectoryKind::StraightRoad: return "straight";
    case TrajectoryKind::Roundabout: return "roundabout";
    case TrajectoryKind::Intersection: return "intersection";
  }
  return "?";
}

TrajectoryKind parse_trajectory_kind(std::string_view name) {
  if (name == "straight") return TrajectoryKind::StraightRoad;
  if (name == "roundabout") return TrajectoryKind::Roundabout;
  if (name == "intersection") return TrajectoryKind::Intersection;
  fail(ErrorCode::Parse, "unknown trajectory kind '" + std::string(name) + "'");
}

std::string_view to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::A: return "A";
    case SceneKind::B: return "B";
    case SceneKind::C: return "C";
  }
  return "?";
}

SceneKind parse_scene_kind(std::string_view name) {
  if (name == "A" || name == "a" || name == "straight") return SceneKind::A;
  if (name == "B" || name == "b" || name == "roundabout") return SceneKind::B;
  if (name == "C" || name == "c" || name == "intersection") return SceneKind::C;
  fail(ErrorCode::Parse, "unknown scene kind '" + std::string(name) + "'");
}

namespace {

Vec3 heading_dir(double h) { return {std::cos(h), std::sin(h), 0.0}; }

Vec3 rotate_z(const Vec3& v, double a) {
  double c = std::cos(a), s = std::sin(a);
  return {c * v.x - s * v.y, s * v.x + c * v.y, v.z};
}

// Circular arc of `arc` metres starting at `p0` with heading `h0`.
Pose arc_pose(const Vec3& p0, double h0, double radius, bool left, double arc, double speed) {
  double sign = left ? 1.0 : -1.0;
  Vec3 normal = sign * Vec3{-std::sin(h0), std::cos(h0), 0.0};
  Vec3 center = p0 + radius * normal;
  double phi = sign * arc / radius;
  Pose p;
  p.position = center + rotate_z(p0 - center, phi);
  p.heading = h0 + phi;
  p.velocity = speed * heading_dir(p.heading);
  return p;
}

}  // namespace

Pose evaluate_trajectory(const TrajectoryModel& traj, double t) {
  const double s = traj.speed * t;
  switch (traj.kind) {
    case TrajectoryKind::StraightRoad: {
      Vec3 d = heading_dir(traj.heading);
      return {traj.start + s * d, traj.heading, traj.speed * d};
    }
    case TrajectoryKind::Roundabout:
      return arc_pose(traj.start, traj.heading, traj.turn_radius, traj.turn_left, s, traj.speed);
    case TrajectoryKind::Intersection: {
      Vec3 d = heading_dir(traj.heading);
      if (s <= traj.straight_length) return {traj.start + s * d, traj.heading, traj.speed * d};
      Vec3 turn_start = traj.start + traj.straight_length * d;
      double quarter = kPi / 2 * traj.turn_radius;
      double on_arc = s - traj.straight_length;
      if (on_arc <= quarter)
        return arc_pose(turn_start, traj.heading, traj.turn_radius, traj.turn_left, on_arc,
                        traj.speed);
      Pose end = arc_pose(turn_start, traj.heading, traj.turn_radius, traj.turn_left, quarter,
                          traj.speed);
      Vec3 d2 = heading_dir(end.heading);
      return {end.position + (on_arc - quarter) * d2, end.heading, traj.speed * d2};
    }
  }
  fail(ErrorCode::InvalidArgument, "unknown trajectory kind");
}

std::size_t ScenarioConfig::frame_count() const {
  return static_cast<std::size_t>(std::floor(duration_s / dt_s + 1e-9)) + 1;
}

Scenario::Scenario(ScenarioConfig config) : config_(std::move(config)) {
  if (!(config_.dt_s > 0.0) || !(config_.duration_s >= 0.0))
    fail(ErrorCode::InvalidArgument, "scenario needs dt > 0 and duration >= 0");
  const std::size_t frames = config_.frame_count();
  for (const auto& v : config_.vehicles) {
    const auto& tr = v.trajectory;
    if (!(tr.speed >= 0.0))
      fail(ErrorCode::InvalidArgument, "vehicle " + std::to_string(v.id) + ": negative speed");
    if (tr.kind != TrajectoryKind::StraightRoad && !(tr.turn_radius > 0.0))
      fail(ErrorCode::InvalidArgument, "vehicle " + std::to_string(v.id) + ": turn radius <= 0");
    for (std::size_t t = 0; t < frames; ++t) {
      Pose p = evaluate_trajectory(tr, static_cast<double>(t) * config_.dt_s);
      if (!config_.bounds.contains(p.position))
        fail(ErrorCode::InvalidArgument,
             "vehicle " + std::to_string(v.id) + " leaves the scene bounds at frame " +
                 std::to_string(t));
    }
    VehicleTarget target{v.id, v.cls, tr, scatterer_template(v.cls), v.is_ve};
    Rng rng(derive_seed(config_.seed, {0x5ca7ULL, static_cast<std::uint64_t>(v.id)}));
    for (auto& s : target.scatterers) s.phase = rng.uniform(0.0, 2.0 * kPi);
    targets_.push_back(std::move(target));
  }
}

std::vector<PlacedVehicle> Scenario::advance(std::size_t t) const {
  if (t >= frame_count())
    fail(ErrorCode::OutOfDuration, "time index " + std::to_string(t) + " beyond " +
                                       std::to_string(frame_count()) + " frames");
  std::vector<PlacedVehicle> out;
  out.reserve(targets_.size());
  const double time = static_cast<double>(t) * config_.dt_s;
  for (const auto& target : targets_)
    out.push_back({&target, evaluate_trajectory(target.trajectory, time)});
  return out;
}

std::vector<PointScatterer> world_scatterers(const PlacedVehicle& v) {
  std::vector<PointScatterer> out;
  out.reserve(v.target->scatterers.size());
  for (const auto& s : v.target->scatterers)
    out.push_back({v.pose.position + rotate_z(s.offset, v.pose.heading), v.pose.velocity, s.rcs,
                   s.phase});
  return out;
}

Vec3 vehicle_centroid(const PlacedVehicle& v) {
  Vec3 c;
  const auto pts = world_scatterers(v);
  for (const auto& p : pts) c += p.position;
  return (1.0 / static_cast<double>(std::max<std::size_t>(pts.size(), 1))) * c;
}

Vec3 ve_antenna_position(const PlacedVehicle& v) {
  return v.pose.position +
         Vec3{0.0, 0.0, class_extent(v.target->cls).height + kVeAntennaAboveRoof};
}

BoundingBox ground_truth_bbox(std::span<const PointScatterer> scatterers, const RadarPose& radar,
                              const PixelGrid& grid, const BboxFilter& filter) {
  if (scatterers.empty()) fail(ErrorCode::NoVisibleTarget, "no scatterers");
  Vec3 centroid;
  for (const auto& s : scatterers) centroid += s.position;
  centroid = (1.0 / static_cast<double>(scatterers.size())) * centroid;

  // Monostatic path-loss term of the echo power: Gamma / R^4.
  std::vector<double> power(scatterers.size());
  std::vector<SlantCoords> proj(scatterers.size());
  double p_max = 0.0;
  for (std::size_t i = 0; i < scatterers.size(); ++i) {
    proj[i] = project_to_slant_plane(scatterers[i].position, radar);
    double r2 = proj[i].range * proj[i].range;
    power[i] = scatterers[i].rcs / (r2 * r2);
    p_max = std::max(p_max, power[i]);
  }
  if (!(p_max > 0.0)) fail(ErrorCode::NoVisibleTarget, "all scatterers have zero RCS");

  const double rows_max = static_cast<double>(grid.rows() - 1);
  const double cols_max = static_cast<double>(grid.cols() - 1);
  double r_lo = std::numeric_limits<double>::infinity(), r_hi = -r_lo;
  double c_lo = r_lo, c_hi = -r_lo;
  bool any = false;
  for (std::size_t i = 0; i < scatterers.size(); ++i) {
    if (!(power[i] > 0.0) || linear_to_db(power[i] / p_max) < filter.power_floor_db) continue;
    if (distance(scatterers[i].position, centroid) > filter.distance_cap_m) continue;
    double row = grid.row_of(proj[i].range);
    double col = grid.col_of(proj[i].azimuth);
    if (row < -0.5 || row > rows_max + 0.5 || col < -0.5 || col > cols_max + 0.5) continue;
    any = true;
    r_lo = std::min(r_lo, row);
    r_hi = std::max(r_hi, row);
    c_lo = std::min(c_lo, col);
    c_hi = std::max(c_hi, col);
  }
  if (!any) fail(ErrorCode::NoVisibleTarget, "no scatterer survives filtering inside the grid");
  return BoundingBox::from_pixel_extent(r_lo, r_hi, c_lo, c_hi, grid.rows(), grid.cols(),
                                        filter.min_pixels);
}

namespace {

struct Lane {
  TrajectoryKind kind;
  Vec3 origin;         // s = 0 point
  double heading;      // heading at s = 0
  double radius;       // roundabout ring / intersection turn radius
  double s_min, s_max; // admissible start arc-length
  bool circular;
  double speed_lo, speed_hi;
  double run_up;       // intersection: distance from s=0 to the turn
};

std::vector<Lane> preset_lanes(SceneKind kind) {
  std::vector<Lane> lanes;
  switch (kind) {
    case SceneKind::A:
      // Two lanes each way on a road crossing the field of view laterally.
      for (double x : {18.0, 23.5})
        lanes.push_back({TrajectoryKind::StraightRoad, {x, 0.0, 0.0}, kPi / 2, 0.0, -15.0, 13.0,
                         false, 6.0, 12.0, 0.0});
      for (double x : {29.0, 34.5})
        lanes.push_back({TrajectoryKind::StraightRoad, {x, 0.0, 0.0}, -kPi / 2, 0.0, -15.0, 13.0,
                         false, 6.0, 12.0, 0.0});
      break;
    case SceneKind::B:
      // Two-ring roundabout, counter-clockwise.
      for (double r : {7.0, 12.5})
        lanes.push_back({TrajectoryKind::Roundabout, {32.0, 0.0, 0.0}, 0.0, r, 0.0,
                         2 * kPi * r, true, 4.0, 8.0, 0.0});
      break;
    case SceneKind::C:
      // Crossing roads; east-west traffic turns at the junction.
      lanes.push_back({TrajectoryKind::StraightRoad, {25.0, 0.0, 0.0}, kPi / 2, 0.0, -18.0, 12.0,
                       false, 5.0, 10.0, 0.0});
      lanes.push_back({TrajectoryKind::StraightRoad, {31.0, 0.0, 0.0}, -kPi / 2, 0.0, -12.0, 18.0,
                       false, 5.0, 10.0, 0.0});
      lanes.push_back({TrajectoryKind::Intersection, {12.0, -3.0, 0.0}, 0.0, 5.0, 0.0, 12.0,
                       false, 4.0, 8.0, 14.0});
      lanes.push_back({TrajectoryKind::Intersection, {46.0, 3.0, 0.0}, kPi, 5.0, 0.0, 12.0,
                       false, 4.0, 8.0, 14.0});
      break;
  }
  return lanes;
}

constexpr double kMinGap = 3.0;

}  // namespace

ScenarioConfig make_preset_pool(SceneKind kind, std::size_t max_ve, std::size_t max_clutter,
                                double duration_s, double dt_s, std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.kind = kind;
  cfg.duration_s = duration_s;
  cfg.dt_s = dt_s;
  cfg.seed = seed;
  const double reach = 60.0 + 15.0 * duration_s;
  cfg.bounds = {-reach, 80.0 + reach, -reach, reach};

  const auto lanes = preset_lanes(kind);
  struct Placed {
    std::size_t lane;
    double s;
    double length;
  };
  std::vector<Placed> placed;
  const std::size_t total = max_ve + max_clutter;
  // A dense pool can paint itself into a corner; start over on a fresh stream.
  bool done = false;
  for (std::uint64_t layout = 0; layout < 64 && !done; ++layout) {
    Rng rng(derive_seed(seed, {0x9001ULL, layout}));
    std::vector<double> lane_speed(lanes.size());
    for (std::size_t i = 0; i < lanes.size(); ++i)
      lane_speed[i] = rng.uniform(lanes[i].speed_lo, lanes[i].speed_hi);
    placed.clear();
    cfg.vehicles.clear();
    done = true;
    for (std::size_t n = 0; n < total; ++n) {
      VehicleClass cls = static_cast<VehicleClass>(rng.index(kTargetClassCount));
      double len = class_extent(cls).length;
      bool ok = false;
      std::size_t lane_idx = 0;
      double s = 0.0;
      bool turn_left = true;
      for (int attempt = 0; attempt < 400 && !ok; ++attempt) {
        lane_idx = rng.index(lanes.size());
        const Lane& ln = lanes[lane_idx];
        s = rng.uniform(ln.s_min, ln.s_max);
        turn_left = rng.uniform() < 0.5;
        ok = true;
        for (const auto& p : placed) {
          if (p.lane != lane_idx) continue;
          double ds = std::abs(p.s - s);
          if (ln.circular) ds = std::min(ds, 2 * kPi * ln.radius - ds);
          if (ds < (p.length + len) / 2 + kMinGap) {
            ok = false;
            break;
          }
        }
      }
      if (!ok) {
        done = false;
        break;
      }
      placed.push_back({lane_idx, s, len});

      const Lane& ln = lanes[lane_idx];
      TrajectoryModel tr;
      tr.kind = ln.kind;
      tr.speed = lane_speed[lane_idx];
      if (ln.circular) {
        double phi = s / ln.radius;
        tr.start = ln.origin + Vec3{ln.radius * std::cos(phi), ln.radius * std::sin(phi), 0.0};
        tr.heading = phi + kPi / 2;
        tr.turn_radius = ln.radius;
        tr.turn_left = true;
      } else {
        Vec3 d{std::cos(ln.heading), std::sin(ln.heading), 0.0};
        tr.start = ln.origin + s * d;
        tr.heading = ln.heading;
        if (ln.kind == TrajectoryKind::Intersection) {
          tr.turn_radius = ln.radius;
          tr.straight_length = std::max(0.0, ln.run_up - s);
          tr.turn_left = turn_left;
        }
      }
      VehicleSpec v;
      v.id = static_cast<int>(n);
      v.cls = cls;
      v.trajectory = tr;
      v.is_ve = n < max_ve;
      cfg.vehicles.push_back(v);
    }
  }
  if (!done) fail(ErrorCode::InvalidArgument, "preset scene too crowded for the vehicle count");
  return cfg;
}

ScenarioConfig subset_scenario(const ScenarioConfig& pool, std::size_t n_ve,
                               std::size_t n_clutter) {
  ScenarioConfig out = pool;
  out.vehicles.clear();
  std::size_t ve = 0, clutter = 0;
  for (const auto& v : pool.vehicles) {
    if (v.is_ve ? ve++ < n_ve : clutter++ < n_clutter) out.vehicles.push_back(v);
  }
  if (ve < n_ve || clutter < n_clutter)
    fail(ErrorCode::InvalidArgument, "pool has fewer vehicles than requested");
  return out;
}

}  // namespace isac
