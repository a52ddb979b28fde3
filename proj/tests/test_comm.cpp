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

#include <cmath>
#include <limits>

#include "doctest.h"
#include "isac/comm.hpp"

using namespace isac;

namespace {

double dirichlet(std::size_t n, double du) {
  double x = kPi * 0.5 * du;  // half-wavelength spacing
  if (std::abs(std::sin(x)) < 1e-15) return 1.0;
  return std::abs(std::sin(double(n) * x) / (double(n) * std::sin(x)));
}

ChannelRealization los_channel(const ArrayGeometry& bs, const ArrayGeometry& ve, double u_h,
                               double u_v, double rho = 1e6) {
  PathParams p;
  p.alpha = Complex(0.6, -0.8);
  p.sigma2 = 1.0;
  p.bs_u_h = u_h;
  p.bs_u_v = u_v;
  p.ve_u_h = -0.3;
  p.ve_u_v = 0.1;
  return channel_from_paths({p}, rho, bs, ve);
}

// Exhaustive search through the dense matrix, lowest index on ties.
std::pair<std::size_t, std::size_t> brute_force_pair(const ChannelRealization& ch,
                                                     const TrainingCodebooks& cb) {
  std::vector<double> pw;
  for (std::size_t i = 0; i < cb.tx_h.size(); ++i)
    for (std::size_t j = 0; j < cb.tx_v.size(); ++j)
      for (std::size_t a = 0; a < cb.rx_h.size(); ++a)
        for (std::size_t b = 0; b < cb.rx_v.size(); ++b)
          pw.push_back(std::norm(measure_beam_pair(ch, compose_beam(cb.rx_h.beam(a), cb.rx_v.beam(b)),
                                                   compose_beam(cb.tx_h.beam(i), cb.tx_v.beam(j)))));
  double top = *std::max_element(pw.begin(), pw.end());
  std::size_t k = 0;
  while (pw[k] < top * (1 - 1e-9)) ++k;
  std::size_t nr = cb.rx_h.size() * cb.rx_v.size();
  return {k / nr / cb.tx_v.size(), (k / nr) % cb.tx_v.size()};
}

}  // namespace

TEST_CASE("steering vectors") {
  ArrayGeometry g{4, 2, 0.5};
  CVector a = steering_vector(g, {0.0, 0.0});
  for (Eigen::Index i = 0; i < a.size(); ++i) CHECK(std::abs(a(i) - Complex(1.0 / std::sqrt(8.0), 0.0)) < 1e-15);
  Rng rng(4);
  for (int t = 0; t < 50; ++t) {
    CVector v = steering_vector(g, {rng.uniform(-1.5, 1.5), rng.uniform(-0.7, 0.7)});
    CHECK(v.norm() == doctest::Approx(1.0).epsilon(1e-12));
  }
  ArrayGeometry ula{8, 1, 0.5};
  for (double deg : {30.0, 20.0, 7.0}) {
    double az = deg * kPi / 180;
    CVector a30 = steering_vector(ula, {az, 0.0});
    CHECK(std::abs(a30.dot(a30)) == doctest::Approx(1.0));
    CVector a0 = steering_vector(ula, {0.0, 0.0});
    CHECK(std::abs(a30.dot(a0)) == doctest::Approx(dirichlet(8, std::sin(az))).epsilon(1e-9));
  }
  // Kronecker order: horizontal index major.
  CVector k = array_response(g, 0.2, 0.7);
  CVector h = array_response({4, 1, 0.5}, 0.2, 0.0), v = array_response({1, 2, 0.5}, 0.0, 0.7);
  for (Eigen::Index i = 0; i < 4; ++i)
    for (Eigen::Index j = 0; j < 2; ++j) CHECK(std::abs(k(i * 2 + j) - h(i) * v(j)) < 1e-15);
}

TEST_CASE("DFT codebooks") {
  for (std::size_t n : {1u, 2u, 5u, 8u, 32u}) {
    Codebook cb = make_dft_codebook(CodebookAxis::Horizontal, n);
    CHECK(cb.size() == n);
    CMatrix gram = cb.beams.adjoint() * cb.beams;
    CHECK((gram - CMatrix::Identity(Eigen::Index(n), Eigen::Index(n))).cwiseAbs().maxCoeff() < 1e-12);
    for (Eigen::Index i = 0; i < cb.beams.size(); ++i)
      CHECK(std::abs(cb.beams.data()[i]) == doctest::Approx(1.0 / std::sqrt(double(n))));
    // Each beam wins at its own design direction.
    for (std::size_t i = 0; i < n; ++i) {
      double u = Codebook::spatial_frequency(i, n);
      double own = ula_gain(cb.beam(i), u);
      CHECK(own == doctest::Approx(1.0));
      for (std::size_t k = 0; k < n; ++k) CHECK(ula_gain(cb.beam(k), u) <= own + 1e-12);
    }
  }
  CHECK(Codebook::spatial_frequency(0, 2) == doctest::Approx(-0.5));
  CHECK(Codebook::spatial_frequency(1, 2) == doctest::Approx(0.5));
  CHECK(Codebook::center_index(2) == 0);
  CHECK(Codebook::center_index(8) == 3);
}

TEST_CASE("compose_beam") {
  CVector one(1);
  one << Complex(1.0, 0.0);
  CVector s = compose_beam(one, one);
  REQUIRE(s.size() == 1);
  CHECK(s(0) == Complex(1.0, 0.0));
  CVector a(2), b(2);
  a << Complex(1, 2), Complex(3, 0);
  b << Complex(0, 1), Complex(2, 0);
  CVector ab = compose_beam(a, b);
  REQUIRE(ab.size() == 4);
  CHECK(ab(0) == a(0) * b(0));
  CHECK(ab(1) == a(0) * b(1));
  CHECK(ab(2) == a(1) * b(0));
  CHECK(ab(3) == a(1) * b(1));

  Codebook h = make_dft_codebook(CodebookAxis::Horizontal, 8);
  Codebook v = make_dft_codebook(CodebookAxis::Vertical, 4);
  CVector f = compose_beam(h.beam(2), v.beam(1));
  CHECK(f.norm() == doctest::Approx(1.0));
  for (Eigen::Index i = 0; i < f.size(); ++i) CHECK(std::abs(f(i)) == doctest::Approx(1.0 / std::sqrt(32.0)));
  // Separable gain on the URA.
  ArrayGeometry ura{8, 4, 0.5};
  CVector a_dir = array_response(ura, 0.31, -0.22);
  double g = std::norm(f.dot(a_dir));
  CHECK(g == doctest::Approx(ula_gain(h.beam(2), 0.31) * ula_gain(v.beam(1), -0.22)).epsilon(1e-12));

  // Completeness of the composed codebook.
  CMatrix all(32, 32);
  for (std::size_t i = 0; i < 8; ++i)
    for (std::size_t j = 0; j < 4; ++j) all.col(Eigen::Index(i * 4 + j)) = compose_beam(h.beam(i), v.beam(j));
  Eigen::FullPivLU<CMatrix> lu(all);
  CHECK(lu.rank() == 32);
}

TEST_CASE("hybrid precoder constraints") {
  const std::size_t n = 16, n_rf = 4;
  CMatrix f_rf = make_subconnected_precoder(n, n_rf, {0, 1, 2, 3});
  CMatrix f_bb = std::sqrt(double(n_rf)) * CMatrix::Identity(4, 4);
  CHECK(validate_hybrid(f_rf, f_bb, n_rf).empty());

  CMatrix leak = f_rf;
  leak(0, 3) = Complex(0.25, 0.0);
  auto v = validate_hybrid(leak, f_bb, n_rf);
  CHECK(std::find(v.begin(), v.end(), HybridViolation::BlockDiagonalViolation) != v.end());

  v = validate_hybrid(f_rf, 2.0 * f_bb, n_rf);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == HybridViolation::PowerConstraintViolation);
  CHECK((f_rf * 2.0 * f_bb).squaredNorm() == doctest::Approx(4.0 * 4));

  CMatrix bad_mod = f_rf;
  bad_mod(5, 1) *= 2.0;
  v = validate_hybrid(bad_mod, f_bb, n_rf);
  CHECK(std::find(v.begin(), v.end(), HybridViolation::ModulusViolation) != v.end());
  v = validate_hybrid(f_rf, CMatrix::Identity(3, 3), n_rf);
  REQUIRE(v.size() == 1);
  CHECK(v[0] == HybridViolation::ShapeMismatch);
}

TEST_CASE("channel realizations") {
  BsMount bs{{0, 0, 6}, 0.0};
  ArrayGeometry g_bs{8, 8, 0.5}, g_ve{2, 2, 0.5};
  Rng rng(11);
  ChannelModel los;
  los.paths = PathModel::LosOnly;
  ChannelRealization h1 = generate_channel(bs, g_bs, {30, 4, 1}, kPi / 2, {0, 8, 0}, g_ve, rng, los);
  REQUIRE(h1.paths.size() == 1);
  CHECK(h1.paths[0].sigma2 == doctest::Approx(1.0));
  Eigen::JacobiSVD<CMatrix> svd(h1.matrix);
  auto sv = svd.singularValues();
  CHECK(sv(1) < 1e-12 * sv(0));

  // E ||H||^2 = N_R N_T / rho.
  double acc = 0.0, rho = 0.0;
  const int draws = 10000;
  for (int t = 0; t < draws; ++t) {
    ChannelRealization h = generate_channel(bs, g_bs, {30, 4, 1}, kPi / 2, {0, 8, 0}, g_ve, rng);
    double s2 = 0.0;
    for (const auto& p : h.paths) s2 += p.sigma2;
    CHECK(s2 == doctest::Approx(1.0));
    acc += h.matrix.squaredNorm();
    rho = h.rho;
  }
  CHECK(acc / draws == doctest::Approx(64.0 * 4.0 / rho).epsilon(0.05));

  double r1 = free_space_rho(20.0, 28e9), r2 = free_space_rho(40.0, 28e9);
  CHECK(10 * std::log10(r2 / r1) == doctest::Approx(6.0206).epsilon(1e-4));
  CHECK_THROWS_AS(free_space_rho(0.0, 28e9), Error);
}

TEST_CASE("beam training") {
  ArrayGeometry g_bs{8, 4, 0.5}, g_ve{2, 2, 0.5};
  auto cb = TrainingCodebooks::for_arrays(g_bs, g_ve);
  const double inf = std::numeric_limits<double>::infinity();
  Rng rng(5);
  for (int t = 0; t < 40; ++t) {
    ChannelRealization ch = los_channel(g_bs, g_ve, rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9));
    BeamReport r = beam_training(ch, cb, inf, rng);
    auto bf = brute_force_pair(ch, cb);
    CHECK(r.f_h == bf.first);
    CHECK(r.f_v == bf.second);
    // One-hot outputs.
    auto yh = r.y_h(), yv = r.y_v();
    CHECK(std::count(yh.begin(), yh.end(), 1.0) == 1);
    CHECK(std::count(yv.begin(), yv.end(), 1.0) == 1);
    CHECK(yh[r.f_h] == 1.0);
    // Scaling the channel leaves the choice alone.
    ChannelRealization scaled = channel_from_paths(ch.paths, ch.rho * 37.0, g_bs, g_ve);
    BeamReport rs = beam_training(scaled, cb, inf, rng);
    CHECK(rs.f_h == r.f_h);
    CHECK(rs.f_v == r.f_v);
  }

  // High SNR agrees with the noiseless choice.
  int agree = 0;
  for (int t = 0; t < 200; ++t) {
    ChannelRealization ch = los_channel(g_bs, g_ve, rng.uniform(-0.9, 0.9), rng.uniform(-0.9, 0.9));
    BeamReport clean = beam_training(ch, cb, inf, rng);
    BeamReport noisy = beam_training(ch, cb, 40.0, rng);
    agree += clean.f_h == noisy.f_h && clean.f_v == noisy.f_v;
  }
  CHECK(agree >= 198);

  // 2x2 BS, broadside VE: both beams tie, the lower one wins.
  ArrayGeometry small{2, 2, 0.5};
  auto cb2 = TrainingCodebooks::for_arrays(small, g_ve);
  BeamReport b = beam_training(los_channel(small, g_ve, 0.0, 0.0), cb2, inf, rng);
  CHECK(b.f_h == 0);
  CHECK(b.f_v == 0);

  // Same seed, same report; the table has one row per Tx pair.
  ChannelRealization ch = los_channel(g_bs, g_ve, 0.2, -0.1);
  Rng ra(9), rb(9);
  BeamReport x = beam_training(ch, cb, -20.0, ra, true), y = beam_training(ch, cb, -20.0, rb);
  CHECK(x.f_h == y.f_h);
  CHECK(x.f_v == y.f_v);
  CHECK(x.best_power_db == y.best_power_db);
  REQUIRE(x.rx_power_table);
  CHECK(x.rx_power_table->rows() == 32);
  CHECK(x.rx_power_table->cols() == 4);
  CHECK(x.rx_power_table->maxCoeff() == doctest::Approx(x.best_power_db));

  auto wrong = TrainingCodebooks::for_arrays({4, 4, 0.5}, g_ve);
  CHECK_THROWS_AS(beam_training(ch, wrong, 0.0, rng), Error);

  // Interference from the user's own beam is excluded.
  BeamReport other = x;
  other.ve_id = 1;
  CHECK(intra_cell_interference(ch, cb, x, {x}) == 0.0);
  CHECK(intra_cell_interference(ch, cb, x, {other}) > 0.0);
}
