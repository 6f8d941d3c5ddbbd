#include <doctest.h>

#include <cmath>
#include <random>

#include "../common.hpp"
#include "oam/channel.hpp"
#include "oam/link.hpp"
#include "oam/precoding.hpp"
#include "oam/transform.hpp"

using namespace oam;

namespace {

EffectiveOamChannel fig7_effective(int carriers, std::vector<SbsPlacement> placements = {}) {
  const auto c = testing::fig7_config(20, 20, carriers, carriers);
  if (placements.empty()) placements = c.placements();
  const auto h = assemble_channel(c, placements, ChannelMode::farfield, c.carriers.wave_numbers);
  return effective_oam_channel(h, build_mode_transform(c.modes.data_modes, 21, 3));
}

CMat random_matrix(int rows, int cols, std::mt19937_64& gen) {
  std::normal_distribution<double> g;
  CMat m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = cplx(g(gen), g(gen));
  return m;
}

}  // namespace

TEST_CASE("stacking other users") {
  std::mt19937_64 gen(3);
  const CMat h = random_matrix(6, 6, gen);
  const CMat two = stack_other_users<double>(h, 0, 3);
  CHECK((two - h.bottomRows(3)).norm() == 0.0);
  const CMat h3 = random_matrix(9, 9, gen);
  const CMat s = stack_other_users<double>(h3, 1, 3);
  CHECK(s.rows() == 6);
  CHECK((s.topRows(3) - h3.topRows(3)).norm() == 0.0);
  CHECK((s.bottomRows(3) - h3.bottomRows(3)).norm() == 0.0);
}

TEST_CASE("co-mode null basis") {
  std::mt19937_64 gen(11);
  SUBCASE("random full rank") {
    const int U = 5, P = 3;
    const CMat hh = random_matrix((P - 1) * U, P * U, gen);
    const CMat e = comode_null_basis<double>(hh, U);
    CHECK(e.cols() == U);
    CHECK((hh * e).norm() < 1e-12 * hh.norm());
    CHECK((e.adjoint() * e - CMat::Identity(U, U)).norm() < 1e-12);
    Eigen::JacobiSVD<CMat> svd(hh);
    CHECK((svd.singularValues().array() > 1e-10).count() == (P - 1) * U);
  }
  SUBCASE("zero input gives canonical vectors") {
    const CMat e = comode_null_basis<double>(CMat::Zero(4, 6), 2);
    CHECK((e - CMat::Identity(6, 6).rightCols(2)).norm() == 0.0);
  }
  SUBCASE("unitary left factor leaves the residual unchanged") {
    const CMat hh = random_matrix(8, 12, gen);
    const CMat q = random_matrix(8, 8, gen).householderQr().householderQ();
    const CMat a = comode_null_basis<double>(hh, 4);
    const CMat b = comode_null_basis<double>(q * hh, 4);
    CHECK(std::fabs((hh * a).norm() - (hh * b).norm()) < 1e-12);
  }
}

TEST_CASE("inter-mode inverse") {
  Eigen::VectorXcd d(4);
  d << cplx(2, 0), cplx(0, 1), cplx(-4, 0), cplx(0.5, 0.5);
  const CMat D = d.asDiagonal();
  double cond = 0.0;
  const CMat g = intermode_inverse<double>(D, &cond);
  CHECK((g - CMat(d.cwiseInverse().asDiagonal())).norm() < 1e-14);
  CHECK(cond == doctest::Approx(4.0 / std::abs(d(3))));
  CMat singular = CMat::Identity(3, 3);
  singular(2, 2) = 0.0;
  CHECK_THROWS_AS(intermode_inverse<double>(singular), IllConditionedError);
  CMat near = CMat::Identity(3, 3);
  near(2, 2) = 1e-14;
  CHECK_THROWS_AS(intermode_inverse<double>(near), IllConditionedError);
}

TEST_CASE("Fig. 7 precoder decouples the users") {
  const auto h = fig7_effective(4);
  const auto set = build_precoder(h);
  REQUIRE(set.carrier_count() == 4);
  const int U = 20;
  for (int w = 0; w < 4; ++w) {
    const CMat& H = h.per_carrier[static_cast<std::size_t>(w)];
    const CMat& E = set.E[static_cast<std::size_t>(w)];
    const CMat& G = set.G[static_cast<std::size_t>(w)];
    for (int p = 0; p < 3; ++p) {
      const CMat ep = E.middleCols(p * U, U);
      for (int q = 0; q < 3; ++q)
        if (q != p) CHECK((H.middleRows(q * U, U) * ep).norm() < 1e-10 * H.middleRows(q * U, U).norm());
      const CMat gp = G.block(p * U, p * U, U, U);
      CHECK((H.middleRows(p * U, U) * ep * gp - CMat::Identity(U, U)).norm() < 1e-8);
    }
  }
  const auto rep = verify_decoupling(h, set);
  CHECK(rep.max_relative_total() < 1e-9);
  for (const auto& row : rep.inter_mode)
    for (double v : row) CHECK(v < 1e-9 * std::sqrt(20.0) * 10);
}

TEST_CASE("single coaxial user: precoder inverts the channel") {
  auto c = testing::single_user_config(12, 30.0, 0.0, 0.0, 11, 2);
  const auto ch = assemble_channel(c, c.placements(), ChannelMode::farfield, c.carriers.wave_numbers);
  const auto h = effective_oam_channel(ch, build_mode_transform(c.modes.data_modes, 12, 1));
  const auto set = build_precoder(h);
  for (int w = 0; w < 2; ++w) {
    const CMat& H = h.per_carrier[static_cast<std::size_t>(w)];
    CHECK((set.P[static_cast<std::size_t>(w)] - H.inverse()).norm() < 1e-8 * H.inverse().norm());
    CHECK((H * set.P[static_cast<std::size_t>(w)] - CMat::Identity(11, 11)).norm() < 1e-10);
  }
}

TEST_CASE("scaling the channel scales G inversely") {
  const auto h = fig7_effective(1);
  auto scaled = h;
  const cplx a(0.3, -1.7);
  scaled.per_carrier[0] *= a;
  PrecoderOptions o;
  o.precision = Precision::extended;
  const auto s1 = build_precoder(h, o);
  const auto s2 = build_precoder(scaled, o);
  const CMat hp1 = h.per_carrier[0] * s1.P[0];
  const CMat hp2 = scaled.per_carrier[0] * s2.P[0];
  CHECK((hp1 - hp2).norm() < 1e-8 * hp1.norm());
  // E is unique up to a unitary, so compare through H^p E_p G_p = I instead of entrywise.
  for (int p = 0; p < 3; ++p) {
    const CMat g1 = s1.G[0].block(p * 20, p * 20, 20, 20);
    const CMat g2 = s2.G[0].block(p * 20, p * 20, 20, 20);
    CHECK(g1.norm() / g2.norm() == doctest::Approx(std::abs(a)).epsilon(1e-6));
  }
}

TEST_CASE("decoupling residuals") {
  const auto truth = testing::fig7_config(20, 20, 2, 2).placements();
  const auto h = fig7_effective(2);
  SUBCASE("zero precoder") {
    auto set = build_precoder(h);
    for (auto& m : set.P) m.setZero();
    set.P_ext.clear();
    set.extended = false;
    const auto rep = verify_decoupling(h, set);
    for (const auto& row : rep.inter_mode)
      for (double v : row) CHECK(v == doctest::Approx(std::sqrt(20.0)));
  }
  SUBCASE("residual grows with the range error of user 1") {
    double prev_inter = 0.0, prev_co = 0.0;
    for (double dr : {1e-6, 1e-5, 1e-4, 1e-3, 1e-2}) {
      auto pl = truth;
      pl[0].range += dr;
      const auto set = build_precoder(fig7_effective(2, pl));
      const auto rep = verify_decoupling(h, set);
      double inter = 0.0, co = 0.0;
      for (const auto& row : rep.inter_mode) inter = std::max(inter, row[0]);
      for (const auto& row : rep.co_mode) co = std::max(co, row[0]);
      CHECK(inter > prev_inter);
      CHECK(co > prev_co);
      prev_inter = inter;
      prev_co = co;
    }
  }
}

TEST_CASE("identity precoder") {
  const auto h = fig7_effective(2);
  const auto set = identity_precoder(h);
  CHECK((set.P[1] - CMat::Identity(60, 60)).norm() == 0.0);
}
