#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nhb/errors.hpp"
#include "nhb/rolling.hpp"
#include "support.hpp"

using namespace nhb;

namespace {

constexpr double kPi = std::numbers::pi;

// Two-plates system written with zeta = eta v1 / r.
Vec9 zeta_oracle(const Vec9& y, double eta, double r, double g) {
  const double z = eta * y[3] / r;
  Vec9 d;
  d << y[4], y[3] / r, y[5], 0.0, -z * y[6], -z * y[7] - g, z * y[4], z * y[5], 0.0;
  return d;
}

Vec9 random_state(test::Gen& gen, double phi_lo = 0.0, double phi_hi = kPi) {
  Vec9 y;
  y << gen.uniform(0, 6), gen.uniform(phi_lo, phi_hi), gen.uniform(-1, 1), gen.vec(6);
  return y;
}

RollState disc_entry(double v1, double v2, double S12, double v3 = 0.0, double S13 = 0.0, double S23 = 0.0) {
  RollState st;
  st.region = Region::Curved;
  st.s = 0.3;
  st.phi = 0.0;
  st.v = {v1, v2, v3};
  st.spin = {S12, S13, S23};
  return st;
}

}  // namespace

TEST_CASE("kappa = 0 reduces to the zeta system") {
  test::Gen gen(3);
  for (int i = 0; i < 500; ++i) {
    const Vec9 y = random_state(gen);
    const double eta = gen.uniform(0, 0.99), r = gen.uniform(0.05, 1), g = gen.uniform(0, 5);
    CHECK((cylinder4d_field(y, 0.0, eta, r, g) - zeta_oracle(y, eta, r, g)).norm() < 1e-14);
  }
}

TEST_CASE("rolling field is orthogonal to the state up to the gravity power") {
  test::Gen gen(4);
  for (int i = 0; i < 2000; ++i) {
    const Vec9 y = random_state(gen);
    const double kappa = -1.0 / gen.uniform(0.5, 3.0), eta = gen.uniform(0, 0.99);
    const double r = gen.uniform(0.01, 0.4), g = gen.uniform(0, 5);
    const Vec9 d = cylinder4d_field(y, kappa, eta, r, g);
    const double e1 = y[3] * d[3] + y[4] * d[4] + y[6] * d[6];
    const double e2 = y[5] * d[5] + y[7] * d[7] + y[8] * d[8];
    const double scale = std::max(1.0, d.tail<6>().norm() * y.tail<6>().norm());
    CHECK(std::abs(e1) < 1e-14 * scale);
    CHECK(std::abs(e2 + g * y[5]) < 1e-14 * scale);
  }
}

TEST_CASE("eta = 0: geodesic center, spin transported") {
  test::Gen gen(5);
  for (int i = 0; i < 200; ++i) {
    const Vec9 y = random_state(gen);
    const double kappa = -1.0, r = 0.2, g = 1.5;
    const Vec9 d = cylinder4d_field(y, kappa, 0.0, r, g);
    CHECK(d[6] == 0.0);
    const CurvatureFactors cf = curvature_factors(kappa, y[1], r);
    CHECK(d[3] == doctest::Approx(-cf.f_c * y[4] * y[4]));
    CHECK(d[4] == doctest::Approx(cf.f_c * y[3] * y[4]));
    CHECK(d[5] == -g);
  }
}

TEST_CASE("focal point") {
  const Vec9 y = (Vec9() << 0, kPi / 2, 0, 1, 0, 0, 0, 0, 0).finished();
  CHECK_THROWS_AS(cylinder4d_field(y, 2.0, 0.5, 0.5, 0.0), Error);
  try {
    cylinder4d_field(y, 2.0, 0.5, 0.5, 0.0);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FocalPoint);
  }
}

TEST_CASE("junction conversions round-trip") {
  test::Gen gen(6);
  const CrossSection disc = CrossSection::disc(1.0);
  for (int i = 0; i < 200; ++i) {
    const BoundaryPoint where = disc.at(0, gen.uniform(0, 2 * kPi));
    RollState flat;
    flat.region = gen.integer(0, 1) ? Region::FlatPlus : Region::FlatMinus;
    flat.p = where.point;
    flat.x3 = gen.normal();
    flat.v = gen.vec(3);
    flat.spin = gen.vec(3);
    const RollState c = enter_curved(flat, where);
    CHECK(energy_monitor(c, 1.0).with_gravity == doctest::Approx(energy_monitor(flat, 1.0).with_gravity));
    const RollState back = leave_curved(c, disc);
    CHECK(back.region == flat.region);
    CHECK((back.v - flat.v).norm() < 1e-14);
    CHECK((back.spin - flat.spin).norm() < 1e-14);
    CHECK((back.p - flat.p).norm() < 1e-14);
    const RollState j = junction_state(edge_view(c), flat.region, c.loop, c.s, c.x3);
    CHECK((j.v - c.v).norm() == 0.0);
    CHECK((j.spin - c.spin).norm() == 0.0);
  }
}

TEST_CASE("edge_map_flat") {
  VecX vb(2), w(2);
  vb << 0.3, -0.7;
  w << 0.2, 0.5;
  const auto m0 = edge_map_flat(vb, w, 1.0, InertiaParams::from_eta(0.0), 0.1);
  CHECK((m0.v_bar - vb).norm() < 1e-15);
  CHECK((m0.W + w).norm() < 1e-15);
  CHECK(m0.v_hat == -1.0);
  CHECK(std::abs(m0.T - 0.314159) < 1e-6);
  const auto mh = edge_map_flat(vb, w, 2.0, InertiaParams::from_eta(0.5), 0.1);
  CHECK((mh.v_bar - w).norm() < 1e-15);
  CHECK((mh.W - vb).norm() < 1e-15);
  CHECK_THROWS_AS(edge_map_flat(vb, w, 0.0, InertiaParams::from_eta(0.5), 0.1), Error);
}

TEST_CASE("strip closed form") {
  const double eta = 0.577, u = 1.3, r = 0.5;
  const auto prof = stadium_profile(1.0, r);
  SUBCASE("flat piece, no gravity: constant") {
    const auto x = strip_closed_form(prof, eta, u, 0.0, 0.4, -0.2, 0.5);
    CHECK(x.v2 == 0.4);
    CHECK(x.s == -0.2);
  }
  SUBCASE("full half-arc equals the edge map") {
    const double T = kPi * r / u;
    const auto x = strip_closed_form(prof, eta, u, 0.0, 0.4, -0.2, T, 1.0);
    VecX vb(1), w(1);
    vb << 0.4;
    w << -0.2;
    const auto m = edge_map_flat(vb, w, u, InertiaParams::from_eta(eta), r);
    CHECK(std::abs(x.v2 - m.v_bar[0]) < 1e-12);
    CHECK(std::abs(x.s + m.W[0]) < 1e-12);
  }
  SUBCASE("eta = 0 free fall") {
    for (double t : {0.3, 2.0, 7.5}) {
      const auto x = strip_closed_form(prof, 0.0, u, 5.0, 0.7, 0.1, t);
      CHECK(std::abs(x.v2 - (0.7 - 5.0 * t)) < 1e-12 * std::max(1.0, 5 * t));
      CHECK(std::abs(x.height - (0.7 * t - 2.5 * t * t)) < 1e-12 * std::max(1.0, 2.5 * t * t));
    }
  }
  SUBCASE("agrees with adaptive integration, g = 5") {
    double worst = 0.0;
    auto check = [&](double t, const StripSolution& num) {
      const auto ref = strip_closed_form(prof, eta, u, 5.0, 0.4, -0.2, t);
      worst = std::max({worst, std::abs(num.v2 - ref.v2), std::abs(num.s - ref.s)});
    };
    integrate_strip(prof, eta, u, 5.0, 0.4, -0.2, 20.0, IntegratorConfig{}, 0.0, check, 0.05);
    CHECK(worst < 1e-9);
  }
  SUBCASE("negative u walks the profile backwards") {
    const auto a = strip_closed_form(prof, eta, -u, 1.0, 0.4, -0.2, 3.0, 0.2);
    const auto b = integrate_strip(prof, eta, -u, 1.0, 0.4, -0.2, 3.0, IntegratorConfig{}, 0.2);
    CHECK(std::abs(a.v2 - b.v2) < 1e-9);
    CHECK(std::abs(a.s - b.s) < 1e-9);
    CHECK(std::abs(a.pos - (0.2 - 3.0 * u)) < 1e-12);
  }
  CHECK_THROWS_AS(strip_closed_form(prof, eta, 0.0, 1.0, 0.0, 0.0, 1.0), Error);
}

TEST_CASE("circular cylinder: harmonic vertical motion") {
  const auto prof = circle_profile(1.0);
  double lo = 1e300, hi = -1e300;
  for (int k = 1; k <= 400; ++k) {
    const auto x = strip_closed_form(prof, 0.5, 1.0, 1.0, 0.0, 0.0, 0.25 * k);
    lo = std::min(lo, x.height);
    hi = std::max(hi, x.height);
  }
  CHECK(hi - lo < 10.0);
  CHECK(lo > -10.0);
}

TEST_CASE("curved pass conserves E1 and E2 + g x3") {
  const TubeChart chart(CrossSection::disc(1.0), 0.2);
  const InertiaParams in = InertiaParams::from_eta(0.4);
  const double g = 1.0;
  RollState st = disc_entry(0.3, 1.0, 0.2, 0.1, -0.3, 0.5);
  st.phi = 0.7;
  const Energies e0 = energy_monitor(st, g);
  double worst1 = 0.0, worst2 = 0.0;
  IntegratorConfig cfg;
  RollRun run;
  run.horizon = 10.0;
  run.sample_dt = 0.1;
  const RollTrajectory tr = simulate_roll4d(chart, in, g, st, run);
  for (const auto& smp : tr.samples) {
    const Energies e = energy_monitor(smp.state, g);
    worst1 = std::max(worst1, std::abs(e.e1 - e0.e1));
    worst2 = std::max(worst2, std::abs(e.with_gravity - e0.with_gravity));
  }
  CHECK(worst2 < 1e-9);
  if (tr.transitions.empty()) CHECK(worst1 < 1e-9);
}

TEST_CASE("v1 is conserved on straight rims only") {
  const InertiaParams in = InertiaParams::from_eta(0.5);
  RollState st = disc_entry(0.5, 0.8, 0.1);
  st.s = 0.0;
  st.phi = 0.2;
  RollRun run;
  run.horizon = 0.5;
  run.exact_straight_edges = false;
  const auto strip = simulate_roll4d(TubeChart(CrossSection::strip(1.0), 0.3), in, 0.0, st, run);
  CHECK(std::abs(strip.final_state.v[0] - 0.5) < 1e-12);
  const auto disc = simulate_roll4d(TubeChart(CrossSection::disc(1.0), 0.3), in, 0.0, st, run);
  CHECK(std::abs(disc.final_state.v[0] - 0.5) > 1e-3);
}

TEST_CASE("numeric straight rim matches the closed form") {
  const TubeChart chart(CrossSection::strip(1.0), 0.5);
  const InertiaParams in = InertiaParams::from_eta(0.577);
  RollState st = disc_entry(1.0, 0.2, -0.1, -1.0, -0.5, 0.3);
  st.s = 0.0;
  RollRun exact, numeric;
  exact.horizon = numeric.horizon = 12.0;
  numeric.exact_straight_edges = false;
  const auto a = simulate_roll4d(chart, in, 5.0, st, exact);
  const auto b = simulate_roll4d(chart, in, 5.0, st, numeric);
  REQUIRE(a.transitions.size() == b.transitions.size());
  CHECK(std::abs(a.final_state.x3 - b.final_state.x3) < 1e-7);
  CHECK((a.final_state.v - b.final_state.v).norm() < 1e-8);
}

TEST_CASE("two plates, eta = 0: exact parabola") {
  const TubeChart chart(CrossSection::strip(1.0), 0.5);
  RollState st;
  st.region = Region::FlatPlus;
  st.v = {-1.0, 0.0, -1.0};
  RollRun run;
  run.horizon = 30.0;
  run.sample_dt = 0.1;
  const auto tr = simulate_roll4d(chart, InertiaParams::from_eta(0.0), 5.0, st, run);
  CHECK(tr.transitions.size() > 10);
  for (const auto& s : tr.samples) {
    const double want = -s.t - 2.5 * s.t * s.t;
    CHECK(std::abs(s.state.x3 - want) < 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("time reversal of the rolling flow") {
  const TubeChart chart(CrossSection::disc(1.0), 0.1);
  const InertiaParams in = InertiaParams::from_eta(0.35);
  RollState st;
  st.region = Region::FlatPlus;
  st.p = {0.2, -0.1};
  st.v = {0.8, 0.5, 0.3};
  st.spin = {0.61, 0.0, -1.0};
  RollRun run;
  run.horizon = 10.0;
  const auto fwd = simulate_roll4d(chart, in, 1.0, st, run);
  RollState back = fwd.final_state;
  back.v = -back.v;
  back.spin = -back.spin;
  const auto bwd = simulate_roll4d(chart, in, 1.0, back, run);
  const RollState& end = bwd.final_state;
  REQUIRE(end.region == st.region);
  CHECK((end.p - st.p).norm() < 1e-7);
  CHECK(std::abs(end.x3 - st.x3) < 1e-7);
  CHECK((end.v + st.v).norm() < 1e-7);
  CHECK((end.spin + st.spin).norm() < 1e-7);
}

TEST_CASE("limit check") {
  IntegratorConfig cfg;
  const Vec3 u(0.8, 0.5, -0.3);
  Mat3 S = spin_matrix(Vec3(0.4, -0.2, 0.7));
  SUBCASE("straight edge is exact") {
    for (double eta : {0.0, 0.39183, 0.7}) {
      const auto rows = noslip_limit_check(eta, CrossSection::strip(1.0), 0, 0.3, u, S, {0.3, 0.1, 0.01}, cfg);
      for (const auto& row : rows) CHECK(row.deviation < 1e-12);
    }
  }
  SUBCASE("circle: deviations decrease") {
    const auto rows = noslip_limit_check(eta_matched_to(1.0 / std::sqrt(2.0)), CrossSection::disc(1.0), 0, 0.3, u,
                                         S, {0.2, 0.1, 0.05}, cfg);
    REQUIRE(rows.size() == 3);
    CHECK_FALSE(rows[0].friendly);
    CHECK(rows[1].deviation < rows[0].deviation);
    CHECK(rows[2].deviation < rows[1].deviation);
  }
  SUBCASE("gamma = 0 pair: specular with W flip") {
    const auto rows = noslip_limit_check(0.0, CrossSection::disc(1.0), 0, 0.3, u, S, {0.01, 0.001}, cfg);
    CHECK(rows[1].deviation < rows[0].deviation);
    CHECK(rows[1].deviation < 1e-2);
  }
  CHECK_THROWS_AS(noslip_limit_check(0.3, CrossSection::disc(1.0), 0, 0.3, -u, S, {0.1}, cfg), Error);
}

TEST_CASE("edge pass dwell time on a straight rim") {
  const TubeChart chart(CrossSection::strip(1.0), 0.1);
  const auto pass = edge_pass(chart, InertiaParams::from_eta(0.0), 0.0, disc_entry(1.0, 0.0, 0.0), 10.0,
                              IntegratorConfig{});
  CHECK(pass.completed);
  CHECK_FALSE(pass.friendly);
  CHECK(std::abs(pass.dwell - kPi * 0.1) < 1e-14);
}
