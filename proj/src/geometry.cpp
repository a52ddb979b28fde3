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

#include "isac/geometry.hpp"

#include <algorithm>

namespace isac {

Vec3 RadarPose::boresight() const {
  return {std::cos(tilt) * std::cos(yaw), std::cos(tilt) * std::sin(yaw), -std::sin(tilt)};
}

Vec3 RadarPose::left() const { return {-std::sin(yaw), std::cos(yaw), 0.0}; }

Vec3 RadarPose::up() const {
  return {std::sin(tilt) * std::cos(yaw), std::sin(tilt) * std::sin(yaw), std::cos(tilt)};
}

SlantCoords project_to_slant_plane(const Vec3& point, const RadarPose& pose) {
  Vec3 d = point - pose.position;
  double r = norm(d);
  if (!(r > 0.0)) fail(ErrorCode::DegenerateGeometry, "point coincides with the radar position");
  double s = std::clamp(dot(d, pose.left()) / r, -1.0, 1.0);
  return {r, std::asin(s)};
}

bool BoundingBox::valid() const {
  return std::isfinite(x) && std::isfinite(y) && w > 0.0 && h > 0.0 && left() >= -1e-12 &&
         right() <= 1.0 + 1e-12 && top() >= -1e-12 && bottom() <= 1.0 + 1e-12;
}

BoundingBox BoundingBox::from_edges(double l, double t, double r, double b) {
  l = std::clamp(l, 0.0, 1.0);
  r = std::clamp(r, 0.0, 1.0);
  t = std::clamp(t, 0.0, 1.0);
  b = std::clamp(b, 0.0, 1.0);
  return {(l + r) / 2, (t + b) / 2, r - l, b - t};
}

BoundingBox BoundingBox::from_pixel_extent(double row_min, double row_max, double col_min,
                                           double col_max, std::size_t rows, std::size_t cols,
                                           double min_pixels) {
  double W = static_cast<double>(cols);
  double H = static_cast<double>(rows);
  double cx = (col_min + col_max) / 2;
  double cy = (row_min + row_max) / 2;
  double wpx = std::max(col_max - col_min + 1.0, min_pixels);
  double hpx = std::max(row_max - row_min + 1.0, min_pixels);
  return from_edges((cx - wpx / 2) / W, (cy - hpx / 2) / H, (cx + wpx / 2) / W,
                    (cy + hpx / 2) / H);
}

PixelGrid PixelGrid::uniform(const RadarPose& origin, double range_min, double range_max,
                             std::size_t n_range, double angle_min, double angle_max,
                             std::size_t n_angle) {
  PixelGrid g;
  g.origin = origin;
  g.ranges.resize(n_range);
  g.angles.resize(n_angle);
  for (std::size_t i = 0; i < n_range; ++i)
    g.ranges[i] = n_range == 1 ? range_min
                               : range_min + (range_max - range_min) * static_cast<double>(i) /
                                                 static_cast<double>(n_range - 1);
  for (std::size_t i = 0; i < n_angle; ++i)
    g.angles[i] = n_angle == 1 ? angle_min
                               : angle_min + (angle_max - angle_min) * static_cast<double>(i) /
                                                 static_cast<double>(n_angle - 1);
  g.validate();
  return g;
}

void PixelGrid::validate() const {
  if (ranges.size() < 2 || angles.size() < 2)
    fail(ErrorCode::InvalidArgument, "pixel grid needs at least 2 samples per axis");
  for (std::size_t i = 1; i < ranges.size(); ++i)
    if (!(ranges[i] > ranges[i - 1])) fail(ErrorCode::InvalidArgument, "ranges not increasing");
  for (std::size_t i = 1; i < angles.size(); ++i)
    if (!(angles[i] > angles[i - 1])) fail(ErrorCode::InvalidArgument, "angles not increasing");
  if (!(ranges.front() > 0.0)) fail(ErrorCode::InvalidArgument, "ranges must be positive");
}

double PixelGrid::range_step() const {
  return (ranges.back() - ranges.front()) / static_cast<double>(ranges.size() - 1);
}

double PixelGrid::angle_step() const {
  return (angles.back() - angles.front()) / static_cast<double>(angles.size() - 1);
}

Vec3 PixelGrid::point_at(double range, double angle) const {
  return origin.position +
         range * (std::cos(angle) * origin.boresight() + std::sin(angle) * origin.left());
}

Vec3 PixelGrid::point(std::size_t row, std::size_t col) const {
  return point_at(ranges[row], angles[col]);
}

double PixelGrid::row_of(double range) const { return (range - ranges.front()) / range_step(); }

double PixelGrid::col_of(double angle) const { return (angle - angles.front()) / angle_step(); }

double PixelGrid::range_at(double row) const { return ranges.front() + row * range_step(); }

double PixelGrid::angle_at(double col) const { return angles.front() + col * angle_step(); }

}  // namespace isac
