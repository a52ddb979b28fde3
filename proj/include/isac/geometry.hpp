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

#include "isac/common.hpp"

namespace isac {

// World-frame point scatterer as seen by the radar.
struct PointScatterer {
  Vec3 position;
  Vec3 velocity;
  double rcs = 0.0;    // m^2
  double phase = 0.0;  // rad, [0, 2pi)
};

// Radar / base-station mounting. Boresight azimuth `yaw` in the world x-y
// plane, `tilt` is the depression of the slant imaging plane (positive down).
struct RadarPose {
  Vec3 position;
  double yaw = 0.0;
  double tilt = 0.0;

  Vec3 boresight() const;   // unit, tilted
  Vec3 left() const;        // unit, horizontal, the array axis
  Vec3 up() const;          // unit, orthogonal to boresight and left
};

struct SlantCoords {
  double range = 0.0;
  double azimuth = 0.0;
};

// Spherical projection onto the slant-range plane: range is the Euclidean
// distance, azimuth the cone angle off boresight along the array axis.
SlantCoords project_to_slant_plane(const Vec3& point, const RadarPose& pose);

// Normalized (x, y, w, h) box; x indexes columns (angle), y rows (range).
struct BoundingBox {
  double x = 0.0;
  double y = 0.0;
  double w = 0.0;
  double h = 0.0;

  double left() const { return x - w / 2; }
  double right() const { return x + w / 2; }
  double top() const { return y - h / 2; }
  double bottom() const { return y + h / 2; }
  double area() const { return w * h; }
  bool valid() const;

  // Box covering pixel rows [row_min, row_max] and cols [col_min, col_max]
  // inclusive, each side at least `min_pixels` wide, clamped to the image.
  static BoundingBox from_pixel_extent(double row_min, double row_max, double col_min,
                                       double col_max, std::size_t rows, std::size_t cols,
                                       double min_pixels);
  static BoundingBox from_edges(double left, double top, double right, double bottom);

  friend bool operator==(const BoundingBox&, const BoundingBox&) = default;
};

// Range-angle pixel grid on the slant plane of `origin`.
struct PixelGrid {
  std::vector<double> ranges;   // strictly increasing, m
  std::vector<double> angles;   // strictly increasing, rad
  RadarPose origin;

  static PixelGrid uniform(const RadarPose& origin, double range_min, double range_max,
                           std::size_t n_range, double angle_min, double angle_max,
                           std::size_t n_angle);

  std::size_t rows() const { return ranges.size(); }
  std::size_t cols() const { return angles.size(); }
  double range_step() const;
  double angle_step() const;
  Vec3 point(std::size_t row, std::size_t col) const;
  Vec3 point_at(double range, double angle) const;
  // Continuous pixel coordinates; may fall outside [0, n-1].
  double row_of(double range) const;
  double col_of(double angle) const;
  double range_at(double row) const;
  double angle_at(double col) const;
  void validate() const;
};

}  // namespace isac
