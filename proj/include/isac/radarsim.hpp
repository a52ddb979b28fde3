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
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "isac/common.hpp"
#include "isac/geometry.hpp"

namespace isac {

enum class ChirpConvention { FullSweep, HalfSweep };

std::string_view to_string(ChirpConvention c);
ChirpConvention parse_chirp_convention(std::string_view name);

// Amplitude taper; weights are normalized to unit mean so a matched peak
// keeps its untapered height.
enum class Taper { None, Hann };

std::string_view to_string(Taper t);
Taper parse_taper(std::string_view name);
std::vector<double> taper_weights(Taper t, std::size_t n);

struct RadarWaveform {
  double f0 = 28e9;     // Hz
  double bs = 800e6;    // Hz
  double tc = 16e-6;    // s
  double tp = 20e-6;    // s
  double amplitude = 1.0;
  ChirpConvention convention = ChirpConvention::FullSweep;

  // Chirp rate: bs/tc for FullSweep, bs/(2 tc) for HalfSweep.
  double mu() const;
  double wavelength() const { return kSpeedOfLight / f0; }
  // Range-compressed peak gain, tc * bs * amplitude.
  double alpha() const { return tc * bs * amplitude; }
  void validate() const;
};

// Virtual MIMO array. Channel l pairs tx[l / rx.size()] with rx[l % rx.size()].
struct RadarArray {
  std::vector<Vec3> tx;
  std::vector<Vec3> rx;

  std::size_t channels() const { return tx.size() * rx.size(); }
  const Vec3& tx_of(std::size_t l) const { return tx[l / rx.size()]; }
  const Vec3& rx_of(std::size_t l) const { return rx[l % rx.size()]; }

  // One Tx at the array centre, n_az x n_el receivers on the pose's left/up
  // axes at `spacing` metres. Receivers are ordered azimuth-major.
  static RadarArray planar(const RadarPose& pose, std::size_t n_az, std::size_t n_el,
                           double spacing);

  // Per-channel weights of a taper across the azimuth axis of a planar
  // array built with `planar`.
  std::vector<double> azimuth_taper(Taper t, std::size_t n_az, std::size_t n_el) const;
};

double two_way_delay(const Vec3& p, const Vec3& tx, const Vec3& rx);

// Complex echo amplitude of one scatterer on one channel at PRI k, isotropic
// elements unless gains are given.
Complex scattering_amplitude(const PointScatterer& s, const Vec3& tx, const Vec3& rx,
                             const RadarWaveform& wf, std::size_t k, double gain_tx = 1.0,
                             double gain_rx = 1.0);

std::size_t samples_per_chirp(const RadarWaveform& wf, double fs);

struct RadarFrame {
  std::size_t k = 0;
  CMatrix samples;  // [L x N_t]
  double fs = 0.0;
  double noise_sigma2 = 0.0;
};

// Dechirped echoes of all scatterers plus circular Gaussian noise.
// Contributions are accumulated in scatterer order, so frames superpose
// exactly when the noise is zero.
RadarFrame synthesize_rx(std::span<const PointScatterer> scatterers, const RadarWaveform& wf,
                         const RadarArray& array, std::size_t k, double fs, double noise_sigma2,
                         std::uint64_t seed, int threads = 1);

// Range-compressed channels on a uniform delay axis t_m = m * delay_step.
// Samples hold the spectrum with the linear phase of the chirp centre
// removed so that linear interpolation sees a smooth mainlobe; `at` restores
// it.
struct RangeProfile {
  CMatrix samples;          // [L x M], M = oversample * N_t
  double delay_step = 0.0;  // s per column
  double t_center = 0.0;    // s, chirp-centre time
  double mu = 0.0;
  std::size_t support = 0;  // columns [0, support) are unambiguous

  std::size_t channels() const { return static_cast<std::size_t>(samples.rows()); }
  // Linearly interpolated compressed sample at delay t; zero outside support.
  Complex at(std::size_t channel, double t) const;
};

RangeProfile range_compress(const RadarFrame& frame, const RadarWaveform& wf,
                            std::size_t oversample = 8, int threads = 1,
                            Taper taper = Taper::None);

struct RadarImage {
  CMatrix pixels;  // [N_r x N_a]
  PixelGrid grid;
  std::size_t k = 0;
};

// Optional per-channel weights (empty: all ones).
RadarImage backproject(const RangeProfile& profiles, const RadarArray& array,
                       const RadarWaveform& wf, const PixelGrid& grid, int threads = 1,
                       std::span<const double> channel_weights = {});

// Precomputed interpolation taps and phases of `backproject` for a fixed
// array, waveform, grid and profile layout. Applying it is a gather and a
// multiply per pixel and channel.
class BackprojectionPlan {
 public:
  BackprojectionPlan(const RadarArray& array, const RadarWaveform& wf, const PixelGrid& grid,
                     double delay_step, std::size_t support, std::size_t columns,
                     int threads = 1, std::span<const double> channel_weights = {});

  // Bytes needed for a plan of this size.
  static std::size_t footprint(std::size_t pixels, std::size_t channels);

  RadarImage apply(const RangeProfile& profiles, int threads = 1) const;
  const PixelGrid& grid() const { return grid_; }

 private:
  struct Tap {
    std::uint32_t index;  // UINT32_MAX: outside support
    float weight;
    std::complex<float> phase;
  };
  PixelGrid grid_;
  std::size_t channels_ = 0;
  double delay_step_ = 0.0;
  std::size_t support_ = 0;
  std::size_t columns_ = 0;
  std::vector<Tap> taps_;  // [pixel][channel]
};

// dB-mapped magnitude: 20 log10(|I| / max) clipped at -dynamic_range_db and
// mapped affinely onto [0, 1].
struct NormalizedImage {
  RMatrix values;
  bool all_zero = false;  // input had no energy; values are all zero
};

NormalizedImage to_range_angle_image(const RadarImage& img, double dynamic_range_db = 60.0);

// Linear magnitude |I| / max |I|; all zeros for an all-zero image.
RMatrix magnitude_image(const RadarImage& img);

// Binary dump: "ISACIMG1", u32 N_r, u32 N_a, f64 f0, f64 bs, u32 length
// and bytes of a free-text provenance note, the two grid axes as f64, then
// row-major complex64 pixels. Little-endian.
void write_image_dump(const std::string& path, const RadarImage& img, const RadarWaveform& wf,
                      const std::string& provenance = {});
RadarImage read_image_dump(const std::string& path, RadarWaveform* wf = nullptr,
                           std::string* provenance = nullptr);
// 8-bit binary PGM of values in [0, 1]; `comment` goes on a "#" line.
void write_pgm(const std::string& path, const RMatrix& values, const std::string& comment = {});

}  // namespace isac
