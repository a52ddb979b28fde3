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

#include "isac/radarsim.hpp"

#include <algorithm>
#include <limits>

#include <unsupported/Eigen/FFT>

namespace isac {

std::string_view to_string(ChirpConvention c) {
  return c == ChirpConvention::FullSweep ? "full" : "half";
}

ChirpConvention parse_chirp_convention(std::string_view name) {
  if (name == "full" || name == "full_sweep") return ChirpConvention::FullSweep;
  if (name == "half") return ChirpConvention::HalfSweep;
  fail(ErrorCode::Parse, "unknown chirp convention '" + std::string(name) + "'");
}

std::string_view to_string(Taper t) { return t == Taper::None ? "none" : "hann"; }

Taper parse_taper(std::string_view name) {
  if (name == "none") return Taper::None;
  if (name == "hann") return Taper::Hann;
  fail(ErrorCode::Parse, "unknown taper '" + std::string(name) + "'");
}

std::vector<double> taper_weights(Taper t, std::size_t n) {
  std::vector<double> w(n, 1.0);
  if (t == Taper::None || n < 2) return w;
  // Symmetric Hann over n + 2 points so the end weights stay nonzero.
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i + 1) / static_cast<double>(n + 1));
    sum += w[i];
  }
  for (auto& v : w) v *= static_cast<double>(n) / sum;
  return w;
}

double RadarWaveform::mu() const {
  return convention == ChirpConvention::FullSweep ? bs / tc : bs / (2.0 * tc);
}

void RadarWaveform::validate() const {
  if (!(tc > 0.0) || !(tp >= tc)) fail(ErrorCode::InvalidArgument, "waveform needs 0 < Tc <= Tp");
  if (!(bs > 0.0)) fail(ErrorCode::InvalidArgument, "waveform needs Bs > 0");
  if (!(f0 > bs)) fail(ErrorCode::InvalidArgument, "waveform needs f0 > Bs");
  if (!(amplitude > 0.0)) fail(ErrorCode::InvalidArgument, "waveform needs A > 0");
}

RadarArray RadarArray::planar(const RadarPose& pose, std::size_t n_az, std::size_t n_el,
                              double spacing) {
  if (n_az == 0 || n_el == 0) fail(ErrorCode::InvalidArgument, "radar array needs elements");
  RadarArray a;
  a.tx.push_back(pose.position);
  const Vec3 left = pose.left();
  const Vec3 up = pose.up();
  const double ca = (static_cast<double>(n_az) - 1.0) / 2.0;
  const double ce = (static_cast<double>(n_el) - 1.0) / 2.0;
  a.rx.reserve(n_az * n_el);
  for (std::size_t i = 0; i < n_az; ++i)
    for (std::size_t j = 0; j < n_el; ++j)
      a.rx.push_back(pose.position + ((static_cast<double>(i) - ca) * spacing) * left +
                     ((static_cast<double>(j) - ce) * spacing) * up);
  return a;
}

std::vector<double> RadarArray::azimuth_taper(Taper t, std::size_t n_az, std::size_t n_el) const {
  if (n_az * n_el != rx.size())
    fail(ErrorCode::InvalidArgument, "taper layout does not match the receive array");
  auto w = taper_weights(t, n_az);
  std::vector<double> out(channels());
  for (std::size_t l = 0; l < out.size(); ++l) out[l] = w[(l % rx.size()) / n_el];
  return out;
}

double two_way_delay(const Vec3& p, const Vec3& tx, const Vec3& rx) {
  double a = distance(p, tx);
  double b = distance(rx, p);
  if (!(a > 0.0) || !(b > 0.0))
    fail(ErrorCode::DegenerateGeometry, "scatterer coincides with an antenna");
  return (a + b) / kSpeedOfLight;
}

Complex scattering_amplitude(const PointScatterer& s, const Vec3& tx, const Vec3& rx,
                             const RadarWaveform& wf, std::size_t k, double gain_tx,
                             double gain_rx) {
  Vec3 dt = s.position - tx;
  Vec3 dr = s.position - rx;
  double r1 = norm(dt);
  double r2 = norm(dr);
  if (!(r1 > 0.0) || !(r2 > 0.0))
    fail(ErrorCode::DegenerateGeometry, "scatterer coincides with an antenna");
  if (s.rcs <= 0.0) return {0.0, 0.0};
  const double lambda = wf.wavelength();
  double mag = std::sqrt(lambda * lambda * gain_tx * gain_rx * s.rcs /
                         (std::pow(4.0 * kPi, 3) * r1 * r1 * r2 * r2));
  // Radial velocity averaged over the two legs; nu = 2 V / lambda.
  double v_radial = 0.5 * (dot(s.velocity, dt) / r1 + dot(s.velocity, dr) / r2);
  double nu = 2.0 * v_radial / lambda;
  double phase = s.phase + 2.0 * kPi * nu * static_cast<double>(k) * wf.tp;
  return std::polar(mag, phase);
}

std::size_t samples_per_chirp(const RadarWaveform& wf, double fs) {
  if (!(fs > 0.0)) fail(ErrorCode::InvalidArgument, "sample rate must be positive");
  auto n = static_cast<std::size_t>(std::llround(wf.tc * fs));
  if (n < 2) fail(ErrorCode::InvalidArgument, "chirp holds fewer than 2 samples");
  return n;
}

namespace {

constexpr std::size_t kAnchorEvery = 64;

// Wraps x (cycles) to [0, 1) to keep phase arguments small.
double frac_cycles(double x) { return x - std::floor(x); }

}  // namespace

RadarFrame synthesize_rx(std::span<const PointScatterer> scatterers, const RadarWaveform& wf,
                         const RadarArray& array, std::size_t k, double fs, double noise_sigma2,
                         std::uint64_t seed, int threads) {
  wf.validate();
  if (!(noise_sigma2 >= 0.0)) fail(ErrorCode::InvalidArgument, "noise variance must be >= 0");
  const std::size_t n_t = samples_per_chirp(wf, fs);
  const std::size_t L = array.channels();
  const double mu = wf.mu();

  // Unambiguous range: delay inside the chirp and beat below Nyquist.
  for (const auto& s : scatterers)
    for (std::size_t l = 0; l < L; ++l) {
      double tau = two_way_delay(s.position, array.tx_of(l), array.rx_of(l));
      if (tau >= wf.tc || mu * tau >= fs / 2.0)
        fail(ErrorCode::RangeAmbiguity,
             "scatterer at delay " + std::to_string(tau) + " s beyond the unambiguous range");
    }

  RadarFrame frame;
  frame.k = k;
  frame.fs = fs;
  frame.noise_sigma2 = noise_sigma2;
  frame.samples = CMatrix::Zero(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(n_t));

  parallel_for(L, threads, [&](std::size_t l) {
    Complex* row = frame.samples.row(static_cast<Eigen::Index>(l)).data();
    const Vec3& tx = array.tx_of(l);
    const Vec3& rx = array.rx_of(l);
    for (const auto& s : scatterers) {
      Complex beta = scattering_amplitude(s, tx, rx, wf, k);
      if (beta == Complex(0.0, 0.0)) continue;
      double tau = two_way_delay(s.position, tx, rx);
      // Phase in cycles: -(f0 tau - mu tau^2 / 2 + mu tau t_n).
      double c0 = -frac_cycles(wf.f0 * tau - 0.5 * mu * tau * tau);
      double step = -mu * tau / fs;
      Complex rot = std::polar(1.0, 2.0 * kPi * step);
      Complex ph;
      for (std::size_t n = 0; n < n_t; ++n) {
        if (n % kAnchorEvery == 0)
          ph = beta * std::polar(1.0, 2.0 * kPi * (c0 + frac_cycles(step * static_cast<double>(n))));
        else
          ph *= rot;
        row[n] += ph;
      }
    }
    if (noise_sigma2 > 0.0) {
      Rng rng(derive_seed(seed, {static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(l)}));
      for (std::size_t n = 0; n < n_t; ++n) row[n] += rng.complex_normal(noise_sigma2);
    }
  });
  return frame;
}

Complex RangeProfile::at(std::size_t channel, double t) const {
  double p = t / delay_step;
  if (!(p >= 0.0)) return {0.0, 0.0};
  auto i = static_cast<std::size_t>(p);
  if (i + 1 >= support) return {0.0, 0.0};
  double w = p - static_cast<double>(i);
  auto r = static_cast<Eigen::Index>(channel);
  Complex v = samples(r, static_cast<Eigen::Index>(i)) * (1.0 - w) +
              samples(r, static_cast<Eigen::Index>(i + 1)) * w;
  return v * std::polar(1.0, 2.0 * kPi * frac_cycles(mu * t * t_center));
}

RangeProfile range_compress(const RadarFrame& frame, const RadarWaveform& wf,
                            std::size_t oversample, int threads, Taper taper) {
  if (oversample == 0) fail(ErrorCode::InvalidArgument, "oversample must be >= 1");
  const std::size_t L = static_cast<std::size_t>(frame.samples.rows());
  const std::size_t n_t = static_cast<std::size_t>(frame.samples.cols());
  if (n_t != samples_per_chirp(wf, frame.fs))
    fail(ErrorCode::SchemaMismatch, "frame length does not match the waveform and sample rate");
  const std::size_t M = n_t * oversample;
  const double mu = wf.mu();
  const double dt = 1.0 / frame.fs;
  const std::vector<double> window = taper_weights(taper, n_t);

  RangeProfile prof;
  prof.mu = mu;
  prof.delay_step = frame.fs / (static_cast<double>(M) * mu);
  prof.t_center = static_cast<double>(n_t - 1) * dt / 2.0;
  prof.support = M / 2;
  prof.samples.resize(static_cast<Eigen::Index>(L), static_cast<Eigen::Index>(M));

  // Per-column correction: centre-ramp removal and video-phase removal.
  const double scale = wf.amplitude * wf.bs * dt;
  std::vector<Complex> corr(M);
  for (std::size_t m = 0; m < M; ++m) {
    double t = static_cast<double>(m) * prof.delay_step;
    double cycles = -(mu * t * prof.t_center) - 0.5 * mu * t * t;
    corr[m] = scale * std::polar(1.0, 2.0 * kPi * frac_cycles(cycles));
  }

  parallel_for(L, threads, [&](std::size_t l) {
    thread_local Eigen::FFT<double> fft;
    fft.SetFlag(Eigen::FFT<double>::Unscaled);
    std::vector<Complex> in(M, Complex(0.0, 0.0));
    std::vector<Complex> out;
    const Complex* row = frame.samples.row(static_cast<Eigen::Index>(l)).data();
    for (std::size_t n = 0; n < n_t; ++n) in[n] = row[n] * window[n];
    // E_m = sum_n y[n] exp(+j 2 pi m n / M).
    fft.inv(out, in);
    Complex* dst = prof.samples.row(static_cast<Eigen::Index>(l)).data();
    for (std::size_t m = 0; m < M; ++m) dst[m] = out[m] * corr[m];
  });
  return prof;
}

namespace {

std::vector<double> channel_gains(std::span<const double> w, std::size_t L) {
  if (w.empty()) return std::vector<double>(L, 1.0);
  if (w.size() != L) fail(ErrorCode::SchemaMismatch, "channel weight count does not match the array");
  return {w.begin(), w.end()};
}

void check_layout(const RangeProfile& p, const RadarArray& array) {
  if (p.channels() != array.channels())
    fail(ErrorCode::SchemaMismatch, "profile channel count does not match the array");
  if (!(p.delay_step > 0.0) || p.support < 2)
    fail(ErrorCode::InvalidArgument, "range profile has no support");
}

}  // namespace

RadarImage backproject(const RangeProfile& profiles, const RadarArray& array,
                       const RadarWaveform& wf, const PixelGrid& grid, int threads,
                       std::span<const double> channel_weights) {
  check_layout(profiles, array);
  const std::vector<double> gain = channel_gains(channel_weights, array.channels());
  grid.validate();
  const std::size_t L = array.channels();
  const std::size_t R = grid.rows();
  const std::size_t A = grid.cols();
  RadarImage img;
  img.grid = grid;
  img.pixels = CMatrix::Zero(static_cast<Eigen::Index>(R), static_cast<Eigen::Index>(A));
  parallel_for(R, threads, [&](std::size_t r) {
    for (std::size_t a = 0; a < A; ++a) {
      const Vec3 x = grid.point(r, a);
      Complex acc(0.0, 0.0);
      for (std::size_t l = 0; l < L; ++l) {
        double tau = two_way_delay(x, array.tx_of(l), array.rx_of(l));
        Complex v = profiles.at(l, tau);
        if (v == Complex(0.0, 0.0)) continue;
        acc += v * std::polar(gain[l], 2.0 * kPi * frac_cycles(wf.f0 * tau));
      }
      img.pixels(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) = acc;
    }
  });
  return img;
}

std::size_t BackprojectionPlan::footprint(std::size_t pixels, std::size_t channels) {
  return pixels * channels * sizeof(Tap);
}

BackprojectionPlan::BackprojectionPlan(const RadarArray& array, const RadarWaveform& wf,
                                       const PixelGrid& grid, double delay_step,
                                       std::size_t support, std::size_t columns, int threads,
                                       std::span<const double> channel_weights)
    : grid_(grid),
      channels_(array.channels()),
      delay_step_(delay_step),
      support_(support),
      columns_(columns) {
  grid.validate();
  if (!(delay_step > 0.0) || support < 2 || support > columns)
    fail(ErrorCode::InvalidArgument, "invalid profile layout for the back-projection plan");
  const std::size_t P = grid.rows() * grid.cols();
  const double mu = wf.mu();
  const std::vector<double> gain = channel_gains(channel_weights, channels_);
  taps_.resize(P * channels_);
  const std::size_t A = grid.cols();
  const std::size_t L = channels_;
  // Chirp-centre time for the matching range_compress layout.
  const double fs = delay_step * static_cast<double>(columns) * mu;
  const double t_center = (std::round(wf.tc * fs) - 1.0) / fs / 2.0;
  parallel_for(grid.rows(), threads, [&](std::size_t r) {
    for (std::size_t a = 0; a < A; ++a) {
      const Vec3 x = grid.point(r, a);
      Tap* t = &taps_[(r * A + a) * L];
      for (std::size_t l = 0; l < L; ++l) {
        double tau = two_way_delay(x, array.tx_of(l), array.rx_of(l));
        double p = tau / delay_step;
        auto i = p >= 0.0 ? static_cast<std::size_t>(p) : support;
        if (i + 1 >= support) {
          t[l] = {std::numeric_limits<std::uint32_t>::max(), 0.0f, {0.0f, 0.0f}};
          continue;
        }
        Complex ph = std::polar(gain[l], 2.0 * kPi * frac_cycles(wf.f0 * tau + mu * tau * t_center));
        t[l] = {static_cast<std::uint32_t>(i), static_cast<float>(p - static_cast<double>(i)),
                std::complex<float>(static_cast<float>(ph.real()), static_cast<float>(ph.imag()))};
      }
    }
  });
}

RadarImage BackprojectionPlan::apply(const RangeProfile& p, int threads) const {
  if (p.channels() != channels_ || static_cast<std::size_t>(p.samples.cols()) != columns_ ||
      p.support != support_ || std::abs(p.delay_step - delay_step_) > 1e-12 * delay_step_)
    fail(ErrorCode::SchemaMismatch, "range profile layout does not match the plan");
  const std::size_t A = grid_.cols();
  const std::size_t L = channels_;
  RadarImage img;
  img.grid = grid_;
  img.pixels.resize(static_cast<Eigen::Index>(grid_.rows()), static_cast<Eigen::Index>(A));
  parallel_for(grid_.rows(), threads, [&](std::size_t r) {
    for (std::size_t a = 0; a < A; ++a) {
      const Tap* t = &taps_[(r * A + a) * L];
      Complex acc(0.0, 0.0);
      for (std::size_t l = 0; l < L; ++l) {
        if (t[l].index == std::numeric_limits<std::uint32_t>::max()) continue;
        const Complex* row = p.samples.row(static_cast<Eigen::Index>(l)).data();
        double w = t[l].weight;
        Complex v = row[t[l].index] * (1.0 - w) + row[t[l].index + 1] * w;
        acc += v * Complex(t[l].phase.real(), t[l].phase.imag());
      }
      img.pixels(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) = acc;
    }
  });
  return img;
}

NormalizedImage to_range_angle_image(const RadarImage& img, double dynamic_range_db) {
  if (img.pixels.size() == 0) fail(ErrorCode::InvalidArgument, "empty image");
  if (!(dynamic_range_db > 0.0)) fail(ErrorCode::InvalidArgument, "dynamic range must be > 0");
  NormalizedImage out;
  out.values = RMatrix::Zero(img.pixels.rows(), img.pixels.cols());
  double peak = img.pixels.cwiseAbs().maxCoeff();
  if (!(peak > 0.0)) {
    out.all_zero = true;
    return out;
  }
  for (Eigen::Index r = 0; r < img.pixels.rows(); ++r)
    for (Eigen::Index c = 0; c < img.pixels.cols(); ++c) {
      double m = std::abs(img.pixels(r, c));
      if (m <= 0.0) continue;
      double db = 20.0 * std::log10(m / peak);
      out.values(r, c) = std::clamp((db + dynamic_range_db) / dynamic_range_db, 0.0, 1.0);
    }
  return out;
}

RMatrix magnitude_image(const RadarImage& img) {
  RMatrix m = img.pixels.cwiseAbs();
  double peak = m.size() ? m.maxCoeff() : 0.0;
  if (peak > 0.0) m /= peak;
  return m;
}

}  // namespace isac
