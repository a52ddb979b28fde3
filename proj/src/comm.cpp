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

#include "isac/comm.hpp"

#include <algorithm>
#include <limits>

namespace isac {

void ArrayGeometry::validate() const {
  if (n_h == 0 || n_v == 0) fail(ErrorCode::InvalidArgument, "array needs n_h, n_v >= 1");
  if (!(spacing > 0.0)) fail(ErrorCode::InvalidArgument, "array spacing must be positive");
}

namespace {

CVector ula_response(std::size_t n, double u, double spacing) {
  CVector a(static_cast<Eigen::Index>(n));
  const double inv = 1.0 / std::sqrt(static_cast<double>(n));
  for (std::size_t i = 0; i < n; ++i)
    a(static_cast<Eigen::Index>(i)) =
        std::polar(inv, 2.0 * kPi * spacing * static_cast<double>(i) * u);
  return a;
}

CVector kron(const CVector& a, const CVector& b) {
  CVector out(a.size() * b.size());
  for (Eigen::Index i = 0; i < a.size(); ++i)
    for (Eigen::Index j = 0; j < b.size(); ++j) out(i * b.size() + j) = a(i) * b(j);
  return out;
}

}  // namespace

CVector array_response(const ArrayGeometry& geom, double u_h, double u_v) {
  geom.validate();
  return kron(ula_response(geom.n_h, u_h, geom.spacing), ula_response(geom.n_v, u_v, geom.spacing));
}

CVector steering_vector(const ArrayGeometry& geom, Direction dir) {
  return array_response(geom, std::cos(dir.el) * std::sin(dir.az), std::sin(dir.el));
}

double Codebook::spatial_frequency(std::size_t i, std::size_t n) {
  return (2.0 * static_cast<double>(i) + 1.0 - static_cast<double>(n)) / static_cast<double>(n);
}

Codebook make_dft_codebook(CodebookAxis axis, std::size_t n) {
  if (n == 0) fail(ErrorCode::InvalidArgument, "codebook needs at least one beam");
  Codebook cb;
  cb.axis = axis;
  cb.beams.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i)
    cb.beams.col(static_cast<Eigen::Index>(i)) =
        ula_response(n, Codebook::spatial_frequency(i, n), 0.5);
  return cb;
}

CVector compose_beam(const CVector& f_h, const CVector& f_v) {
  if (f_h.size() == 0 || f_v.size() == 0)
    fail(ErrorCode::InvalidArgument, "compose_beam: empty beam");
  return kron(f_h, f_v);
}

double ula_gain(const CVector& beam, double u, double spacing) {
  CVector a = ula_response(static_cast<std::size_t>(beam.size()), u, spacing);
  return std::norm(beam.dot(a));
}

std::string_view to_string(HybridViolation v) {
  switch (v) {
    case HybridViolation::ShapeMismatch: return "ShapeMismatch";
    case HybridViolation::BlockDiagonalViolation: return "BlockDiagonalViolation";
    case HybridViolation::ModulusViolation: return "ModulusViolation";
    case HybridViolation::PowerConstraintViolation: return "PowerConstraintViolation";
  }
  return "?";
}

std::vector<HybridViolation> validate_hybrid(const CMatrix& f_rf, const CMatrix& f_bb,
                                             std::size_t n_rf) {
  std::vector<HybridViolation> out;
  const auto n = static_cast<std::size_t>(f_rf.rows());
  if (n_rf == 0 || n == 0 || n % n_rf != 0 || static_cast<std::size_t>(f_rf.cols()) != n_rf ||
      static_cast<std::size_t>(f_bb.rows()) != n_rf || f_bb.cols() == 0) {
    out.push_back(HybridViolation::ShapeMismatch);
    return out;
  }
  const std::size_t block = n / n_rf;
  const double modulus = 1.0 / std::sqrt(static_cast<double>(n));
  bool off_block = false, bad_modulus = false;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n_rf; ++c) {
      double m = std::abs(f_rf(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)));
      bool in_block = r / block == c;
      if (!in_block) {
        if (m != 0.0) off_block = true;
      } else if (std::abs(m - modulus) > 1e-9) {
        bad_modulus = true;
      }
    }
  if (off_block) out.push_back(HybridViolation::BlockDiagonalViolation);
  if (bad_modulus) out.push_back(HybridViolation::ModulusViolation);
  double power = (f_rf * f_bb).squaredNorm();
  if (std::abs(power - static_cast<double>(f_bb.cols())) > 1e-9)
    out.push_back(HybridViolation::PowerConstraintViolation);
  return out;
}

CMatrix make_subconnected_precoder(std::size_t n, std::size_t n_rf,
                                   const std::vector<std::size_t>& beam) {
  if (n_rf == 0 || n % n_rf != 0 || beam.size() != n_rf)
    fail(ErrorCode::InvalidArgument, "sub-connected precoder needs N_RF | N and one beam per chain");
  const std::size_t block = n / n_rf;
  Codebook cb = make_dft_codebook(CodebookAxis::Horizontal, block);
  CMatrix f = CMatrix::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n_rf));
  const double s = std::sqrt(static_cast<double>(block) / static_cast<double>(n));
  for (std::size_t c = 0; c < n_rf; ++c) {
    if (beam[c] >= block) fail(ErrorCode::InvalidArgument, "sub-array beam index out of range");
    f.block(static_cast<Eigen::Index>(c * block), static_cast<Eigen::Index>(c),
            static_cast<Eigen::Index>(block), 1) = s * cb.beam(beam[c]);
  }
  return f;
}

double free_space_rho(double distance_m, double f0) {
  if (!(distance_m > 0.0)) fail(ErrorCode::DegenerateGeometry, "zero BS-VE distance");
  double lambda = kSpeedOfLight / f0;
  double x = 4.0 * kPi * distance_m / lambda;
  return x * x;
}

ChannelRealization channel_from_paths(std::vector<PathParams> paths, double rho,
                                      const ArrayGeometry& bs, const ArrayGeometry& ve) {
  bs.validate();
  ve.validate();
  ChannelRealization ch;
  ch.paths = std::move(paths);
  ch.rho = rho;
  ch.bs = bs;
  ch.ve = ve;
  const double amp = std::sqrt(static_cast<double>(bs.size() * ve.size()) / rho);
  ch.matrix = CMatrix::Zero(static_cast<Eigen::Index>(ve.size()),
                            static_cast<Eigen::Index>(bs.size()));
  for (const auto& p : ch.paths) {
    CVector a_ve = array_response(ve, p.ve_u_h, p.ve_u_v);
    CVector a_bs = array_response(bs, p.bs_u_h, p.bs_u_v);
    ch.matrix += (amp * p.alpha) * a_ve * a_bs.adjoint();
  }
  return ch;
}

namespace {

Direction to_direction(double u_h, double u_v) {
  double el = std::asin(std::clamp(u_v, -1.0, 1.0));
  double c = std::cos(el);
  double az = c > 0.0 ? std::asin(std::clamp(u_h / c, -1.0, 1.0)) : 0.0;
  return {az, el};
}

}  // namespace

ChannelRealization generate_channel(const BsMount& bs, const ArrayGeometry& bs_geom,
                                    const Vec3& ve_position, double ve_heading,
                                    const Vec3& ve_velocity, const ArrayGeometry& ve_geom,
                                    Rng& rng, const ChannelModel& model) {
  const double lambda = kSpeedOfLight / model.f0;
  const Vec3 bs_left{-std::sin(bs.yaw), std::cos(bs.yaw), 0.0};
  const Vec3 up{0.0, 0.0, 1.0};
  const Vec3 ve_x{std::cos(ve_heading), std::sin(ve_heading), 0.0};
  const Vec3 ve_y{-std::sin(ve_heading), std::cos(ve_heading), 0.0};

  const double d_los = distance(bs.position, ve_position);
  const double rho = free_space_rho(d_los, model.f0);

  // Departure toward `target`, arrival from `source` (both world points).
  auto make_path = [&](const Vec3& target, const Vec3& source, double sigma2) {
    Vec3 dep = target - bs.position;
    dep = (1.0 / norm(dep)) * dep;
    Vec3 arr = source - ve_position;
    arr = (1.0 / norm(arr)) * arr;
    PathParams p;
    p.sigma2 = sigma2;
    p.bs_u_h = dot(dep, bs_left);
    p.bs_u_v = dot(dep, up);
    p.ve_u_h = dot(arr, ve_x);
    p.ve_u_v = dot(arr, ve_y);
    p.dod = to_direction(p.bs_u_h, p.bs_u_v);
    p.doa = to_direction(p.ve_u_h, p.ve_u_v);
    p.doppler_nu = dot(ve_velocity, arr) / lambda;
    p.alpha = rng.complex_normal(sigma2);
    return p;
  };

  std::vector<PathParams> paths;
  if (model.paths == PathModel::LosOnly) {
    paths.push_back(make_path(ve_position, bs.position, 1.0));
  } else {
    if (!(model.los_share > 0.0 && model.los_share < 1.0))
      fail(ErrorCode::InvalidArgument, "LOS power share must be in (0, 1)");
    paths.push_back(make_path(ve_position, bs.position, model.los_share));
    // Ground bounce: image points mirrored through z = 0.
    Vec3 ve_img{ve_position.x, ve_position.y, -ve_position.z};
    Vec3 bs_img{bs.position.x, bs.position.y, -bs.position.z};
    paths.push_back(make_path(ve_img, bs_img, 1.0 - model.los_share));
  }
  return channel_from_paths(std::move(paths), rho, bs_geom, ve_geom);
}

std::vector<double> BeamReport::y_h() const {
  std::vector<double> y(n_h, 0.0);
  if (f_h < n_h) y[f_h] = 1.0;
  return y;
}

std::vector<double> BeamReport::y_v() const {
  std::vector<double> y(n_v, 0.0);
  if (f_v < n_v) y[f_v] = 1.0;
  return y;
}

TrainingCodebooks TrainingCodebooks::for_arrays(const ArrayGeometry& bs, const ArrayGeometry& ve) {
  return {make_dft_codebook(CodebookAxis::Horizontal, bs.n_h),
          make_dft_codebook(CodebookAxis::Vertical, bs.n_v),
          make_dft_codebook(CodebookAxis::Horizontal, ve.n_h),
          make_dft_codebook(CodebookAxis::Vertical, ve.n_v)};
}

Complex measure_beam_pair(const ChannelRealization& ch, const CVector& w, const CVector& f) {
  return w.dot(ch.matrix * f);
}

namespace {

// Per-path projections of each codebook beam onto the path response.
std::vector<std::vector<Complex>> projections(const Codebook& cb, double spacing,
                                              const std::vector<PathParams>& paths,
                                              double PathParams::*u) {
  std::vector<std::vector<Complex>> out(paths.size());
  for (std::size_t p = 0; p < paths.size(); ++p) {
    CVector a = ula_response(cb.size(), paths[p].*u, spacing);
    out[p].resize(cb.size());
    for (std::size_t i = 0; i < cb.size(); ++i) out[p][i] = cb.beam(i).dot(a);
  }
  return out;
}

constexpr double kTieTolerance = 1e-9;

}  // namespace

BeamReport beam_training(const ChannelRealization& ch, const TrainingCodebooks& cb,
                         double snr_db, Rng& rng, bool keep_table) {
  if (cb.tx_h.size() != ch.bs.n_h || cb.tx_v.size() != ch.bs.n_v ||
      cb.rx_h.size() != ch.ve.n_h || cb.rx_v.size() != ch.ve.n_v)
    fail(ErrorCode::SchemaMismatch, "codebook sizes do not match the array geometries");
  if (std::isnan(snr_db)) fail(ErrorCode::InvalidArgument, "SNR is NaN");
  const bool noisy = !(std::isinf(snr_db) && snr_db > 0.0);
  const double sigma = noisy ? std::sqrt(1.0 / (ch.rho * db_to_linear(snr_db))) : 0.0;

  const std::size_t P = ch.paths.size();
  // w_r^H a_VE = (w_rh^H a_h)(w_rv^H a_v), likewise on the BS side.
  auto th = projections(cb.tx_h, ch.bs.spacing, ch.paths, &PathParams::bs_u_h);
  auto tv = projections(cb.tx_v, ch.bs.spacing, ch.paths, &PathParams::bs_u_v);
  auto rh = projections(cb.rx_h, ch.ve.spacing, ch.paths, &PathParams::ve_u_h);
  auto rv = projections(cb.rx_v, ch.ve.spacing, ch.paths, &PathParams::ve_u_v);
  const double amp = std::sqrt(static_cast<double>(ch.bs.size() * ch.ve.size()) / ch.rho);

  const std::size_t nh = cb.tx_h.size(), nv = cb.tx_v.size();
  const std::size_t nrh = cb.rx_h.size(), nrv = cb.rx_v.size();
  const std::size_t nr = nrh * nrv;
  // Rx side per path: conj(w^H a_VE) enters since g = w^H H f and
  // H = amp sum alpha a_VE a_BS^H; f projection enters as a_BS^H f.
  std::vector<std::vector<Complex>> rx(P, std::vector<Complex>(nr));
  for (std::size_t p = 0; p < P; ++p)
    for (std::size_t a = 0; a < nrh; ++a)
      for (std::size_t b = 0; b < nrv; ++b)
        rx[p][a * nrv + b] = amp * ch.paths[p].alpha * rh[p][a] * rv[p][b];

  BeamReport rep;
  rep.n_h = nh;
  rep.n_v = nv;
  rep.snr_db = snr_db;
  if (keep_table)
    rep.rx_power_table = RMatrix(static_cast<Eigen::Index>(nh * nv), static_cast<Eigen::Index>(nr));
  double best = -1.0;
  for (std::size_t i = 0; i < nh; ++i)
    for (std::size_t j = 0; j < nv; ++j)
      for (std::size_t r = 0; r < nr; ++r) {
        Complex g(0.0, 0.0);
        for (std::size_t p = 0; p < P; ++p) g += rx[p][r] * std::conj(th[p][i] * tv[p][j]);
        if (noisy) g += sigma * rng.complex_normal(1.0);
        double pw = std::norm(g);
        if (keep_table)
          (*rep.rx_power_table)(static_cast<Eigen::Index>(i * nv + j),
                                static_cast<Eigen::Index>(r)) = 10.0 * std::log10(pw);
        if (pw > best * (1.0 + kTieTolerance) || best < 0.0) {
          best = pw;
          rep.f_h = i;
          rep.f_v = j;
          rep.rx_beam = r;
        }
      }
  rep.best_power_db = 10.0 * std::log10(best);
  return rep;
}

std::pair<std::size_t, std::size_t> true_beam_indices(const ChannelRealization& ch,
                                                      const TrainingCodebooks& cb, Rng& rng,
                                                      double label_snr_db) {
  BeamReport r = beam_training(ch, cb, label_snr_db, rng);
  return {r.f_h, r.f_v};
}

double intra_cell_interference(const ChannelRealization& ch, const TrainingCodebooks& cb,
                               const BeamReport& own, const std::vector<BeamReport>& others) {
  const std::size_t nrv = cb.rx_v.size();
  CVector w = compose_beam(cb.rx_h.beam(own.rx_beam / nrv), cb.rx_v.beam(own.rx_beam % nrv));
  double total = 0.0;
  for (const auto& o : others) {
    if (o.ve_id == own.ve_id) continue;
    CVector f = compose_beam(cb.tx_h.beam(o.f_h), cb.tx_v.beam(o.f_v));
    total += std::norm(measure_beam_pair(ch, w, f));
  }
  return total;
}

}  // namespace isac
