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
#include <string>
#include <utility>
#include <vector>

#include "isac/common.hpp"
#include "isac/geometry.hpp"

namespace isac {

// Uniform planar array; element spacing in wavelengths.
struct ArrayGeometry {
  std::size_t n_h = 1;
  std::size_t n_v = 1;
  double spacing = 0.5;

  std::size_t size() const { return n_h * n_v; }
  void validate() const;
  friend bool operator==(const ArrayGeometry&, const ArrayGeometry&) = default;
};

struct Direction {
  double az = 0.0;  // rad, from broadside in the horizontal plane
  double el = 0.0;  // rad, above the horizon
};

// Unit-norm response for spatial frequencies u_h, u_v (direction cosines
// along the two array axes); a = a_h (x) a_v, entries exp(j 2 pi s n u).
CVector array_response(const ArrayGeometry& geom, double u_h, double u_v);
// Response toward (az, el): u_h = cos(el) sin(az), u_v = sin(el).
CVector steering_vector(const ArrayGeometry& geom, Direction dir);

enum class CodebookAxis { Horizontal, Vertical };

// DFT beams for an N-element ULA: beam i points at u_i = (2i + 1 - N) / N,
// entries of modulus 1/sqrt(N). Columns of `beams` are the beam vectors.
struct Codebook {
  CodebookAxis axis = CodebookAxis::Horizontal;
  CMatrix beams;

  std::size_t size() const { return static_cast<std::size_t>(beams.cols()); }
  CVector beam(std::size_t i) const { return beams.col(static_cast<Eigen::Index>(i)); }
  static double spatial_frequency(std::size_t i, std::size_t n);
  // Beam nearest broadside; lowest index when two are equally near.
  static std::size_t center_index(std::size_t n) { return (n - 1) / 2; }
};

Codebook make_dft_codebook(CodebookAxis axis, std::size_t n);

// f_h (x) f_v.
CVector compose_beam(const CVector& f_h, const CVector& f_v);

// |beam^H a|^2 for a ULA of beam.size() elements at spatial frequency u.
double ula_gain(const CVector& beam, double u, double spacing = 0.5);

enum class HybridViolation {
  ShapeMismatch,
  BlockDiagonalViolation,
  ModulusViolation,
  PowerConstraintViolation,
};

std::string_view to_string(HybridViolation v);

// Sub-connected hybrid precoder checks. Returns the violated constraints
// (empty when valid); never throws.
std::vector<HybridViolation> validate_hybrid(const CMatrix& f_rf, const CMatrix& f_bb,
                                             std::size_t n_rf);

// Block-diagonal analog precoder: sub-array n steers DFT beam `beam[n]` of
// an N/N_RF element codebook; entries of modulus 1/sqrt(N).
CMatrix make_subconnected_precoder(std::size_t n, std::size_t n_rf,
                                   const std::vector<std::size_t>& beam);

struct PathParams {
  Complex alpha;
  double doppler_nu = 0.0;  // Hz, kept for reference; snapshots use t = 0
  Direction dod;            // at the BS
  Direction doa;            // at the VE, in its local array frame
  double bs_u_h = 0.0, bs_u_v = 0.0;
  double ve_u_h = 0.0, ve_u_v = 0.0;
  double sigma2 = 0.0;
};

enum class PathModel { LosOnly, LosGroundBounce };

struct ChannelModel {
  PathModel paths = PathModel::LosGroundBounce;
  double los_share = 0.8;  // sigma^2 of the LOS path; the bounce takes the rest
  double f0 = 28e9;
};

// Narrowband snapshot H = rho^{-1/2} sum_p alpha_p sqrt(N_R N_T) a_VE a_BS^H.
struct ChannelRealization {
  std::vector<PathParams> paths;
  double rho = 1.0;
  ArrayGeometry bs;
  ArrayGeometry ve;
  CMatrix matrix;  // [N_R x N_T]
};

// Communication end of the BS: planar array in the plane spanned by the
// pose's left axis and world up, facing along the horizontal boresight.
struct BsMount {
  Vec3 position;
  double yaw = 0.0;
};

ChannelRealization generate_channel(const BsMount& bs, const ArrayGeometry& bs_geom,
                                    const Vec3& ve_position, double ve_heading,
                                    const Vec3& ve_velocity, const ArrayGeometry& ve_geom,
                                    Rng& rng, const ChannelModel& model = {});

// Channel from explicit paths (used by tests and oracles).
ChannelRealization channel_from_paths(std::vector<PathParams> paths, double rho,
                                      const ArrayGeometry& bs, const ArrayGeometry& ve);

double free_space_rho(double distance_m, double f0);

struct BeamReport {
  int ve_id = 0;
  std::size_t frame = 0;
  std::size_t f_h = 0;  // 0-based
  std::size_t f_v = 0;
  std::size_t rx_beam = 0;
  std::size_t n_h = 0;
  std::size_t n_v = 0;
  double snr_db = 0.0;
  double best_power_db = 0.0;
  // [tx pair (i * n_v + j)][rx beam], dB; filled on request.
  std::optional<RMatrix> rx_power_table;

  std::vector<double> y_h() const;
  std::vector<double> y_v() const;
};

struct TrainingCodebooks {
  Codebook tx_h, tx_v;
  Codebook rx_h, rx_v;

  static TrainingCodebooks for_arrays(const ArrayGeometry& bs, const ArrayGeometry& ve);
};

// Exhaustive sweep over (i, j, r) of |w_r^H H (f_i^h (x) f_j^v) + n|^2 with
// n ~ CN(0, 1 / (rho snr)). snr_db = +inf gives noiseless training. Noise
// draws follow a fixed order so equal rng states give common random
// numbers across SNRs. Ties go to the lowest (i, j, r).
BeamReport beam_training(const ChannelRealization& ch, const TrainingCodebooks& cb,
                         double snr_db, Rng& rng, bool keep_table = false);

// Same measurement through the dense channel matrix; slow reference.
Complex measure_beam_pair(const ChannelRealization& ch, const CVector& w, const CVector& f);

// Training at the labelling SNR; returns (f_h, f_v), 0-based.
inline constexpr double kLabelSnrDb = -10.0;
std::pair<std::size_t, std::size_t> true_beam_indices(const ChannelRealization& ch,
                                                      const TrainingCodebooks& cb, Rng& rng,
                                                      double label_snr_db = kLabelSnrDb);

// Leakage power |w_k^H H_k f_u|^2 summed over the other users' selected Tx
// beams. Diagnostic only; beam selection ignores it.
double intra_cell_interference(const ChannelRealization& ch, const TrainingCodebooks& cb,
                               const BeamReport& own, const std::vector<BeamReport>& others);

}  // namespace isac
