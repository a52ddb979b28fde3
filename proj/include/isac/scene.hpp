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

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "isac/common.hpp"
#include "isac/geometry.hpp"

namespace isac {

enum class VehicleClass { Sedan = 0, Hatchback = 1, Truck = 2 };
inline constexpr std::size_t kTargetClassCount = 3;

struct Extent {
  double length = 0.0;
  double width = 0.0;
  double height = 0.0;
};

Extent class_extent(VehicleClass cls);
std::string_view to_string(VehicleClass cls);
VehicleClass parse_vehicle_class(std::string_view name);

// Body-frame scatterer: x forward, y left, z up from the ground.
struct Scatterer {
  Vec3 offset;
  double rcs = 0.0;    // Gamma_q, m^2
  double phase = 0.0;  // delta_q, drawn once per scenario
};

// Fixed per-class layout: corners, bumpers, side panels / wheel wells, roof.
std::vector<Scatterer> scatterer_template(VehicleClass cls);

enum class TrajectoryKind { StraightRoad, Roundabout, Intersection };

std::string_view to_string(TrajectoryKind kind);
TrajectoryKind parse_trajectory_kind(std::string_view name);

struct TrajectoryModel {
  TrajectoryKind kind = TrajectoryKind::StraightRoad;
  double speed = 0.0;            // m/s
  Vec3 start;                    // m, ground contact point
  double heading = 0.0;          // rad, world x-y plane
  double turn_radius = 0.0;      // m, Roundabout / Intersection
  double straight_length = 0.0;  // m, Intersection: run-up before the turn
  bool turn_left = true;
};

struct Pose {
  Vec3 position;
  double heading = 0.0;
  Vec3 velocity;
};

Pose evaluate_trajectory(const TrajectoryModel& traj, double t_seconds);

struct VehicleSpec {
  int id = 0;
  VehicleClass cls = VehicleClass::Sedan;
  TrajectoryModel trajectory;
  bool is_ve = false;
};

struct VehicleTarget {
  int id = 0;
  VehicleClass cls = VehicleClass::Sedan;
  TrajectoryModel trajectory;
  std::vector<Scatterer> scatterers;
  bool is_ve = false;
};

enum class SceneKind { A, B, C };

std::string_view to_string(SceneKind kind);
SceneKind parse_scene_kind(std::string_view name);

struct SceneBounds {
  double x_min = -200.0;
  double x_max = 200.0;
  double y_min = -200.0;
  double y_max = 200.0;
  bool contains(const Vec3& p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
};

struct ScenarioConfig {
  SceneKind kind = SceneKind::A;
  double duration_s = 1.9;
  double dt_s = 0.1;
  std::vector<VehicleSpec> vehicles;
  std::uint64_t seed = 1;
  SceneBounds bounds;

  std::size_t frame_count() const;
};

struct PlacedVehicle {
  const VehicleTarget* target = nullptr;
  Pose pose;
};

// Deterministic scenario: scatterer phases are drawn from (seed, vehicle id).
class Scenario {
 public:
  explicit Scenario(ScenarioConfig config);

  const ScenarioConfig& config() const { return config_; }
  const std::vector<VehicleTarget>& targets() const { return targets_; }
  std::size_t frame_count() const { return config_.frame_count(); }

  // Poses at time index t (t * dt seconds); throws OutOfDuration.
  std::vector<PlacedVehicle> advance(std::size_t t) const;

 private:
  ScenarioConfig config_;
  std::vector<VehicleTarget> targets_;
};

std::vector<PointScatterer> world_scatterers(const PlacedVehicle& v);
Vec3 vehicle_centroid(const PlacedVehicle& v);

// VE antenna sits 0.2 m above the roof.
inline constexpr double kVeAntennaAboveRoof = 0.2;
Vec3 ve_antenna_position(const PlacedVehicle& v);

struct BboxFilter {
  double power_floor_db = -30.0;  // keep scatterers within this of the strongest echo
  double distance_cap_m = 10.0;   // keep scatterers this close to the vehicle centroid
  double min_pixels = 2.0;
};

// Minimal box enclosing the projected scatterers that survive filtering.
// Throws NoVisibleTarget when nothing survives or everything projects
// outside the grid.
BoundingBox ground_truth_bbox(std::span<const PointScatterer> scatterers, const RadarPose& radar,
                              const PixelGrid& grid, const BboxFilter& filter);

struct GroundTruthLabel {
  std::size_t frame = 0;
  int target_id = 0;
  BoundingBox bbox;
  VehicleClass cls = VehicleClass::Sedan;
  bool is_ve = false;
  std::size_t beam_h = 0;  // 0-based; files store 1-based
  std::size_t beam_v = 0;
};

// Randomized preset scenes (straight road / roundabout / intersection). The
// first `max_ve` vehicles are VEs, the rest clutter; `subset_scenario`
// keeps nested prefixes of each role so sweeps share vehicles across points.
ScenarioConfig make_preset_pool(SceneKind kind, std::size_t max_ve, std::size_t max_clutter,
                                double duration_s, double dt_s, std::uint64_t seed);
ScenarioConfig subset_scenario(const ScenarioConfig& pool, std::size_t n_ve,
                               std::size_t n_clutter);

}  // namespace isac
