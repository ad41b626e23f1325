#include <algorithm>
#include <cmath>
#include <numbers>

#include "doctest.h"
#include "nhb/errors.hpp"
#include "nhb/noslip.hpp"
#include "support.hpp"

using namespace nhb;

namespace {

constexpr double kPi = std::numbers::pi;

// Reference map written directly from the (U,u) form of the collision, with r = 1.
std::pair<MatX, VecX> reference_collision(const MatX& S, const VecX& u, const VecX& nu, double gamma) {
  const auto b = beta_from_gamma(gamma);
  const MatX U = S / gamma;
  const VecX slip = u - U * nu;
  MatX U_out = U + (b.s / gamma) * wedge(nu, slip);
  VecX u_out = b.c * u - (b.s / gamma) * u.dot(nu) * nu + b.s * gamma * U * nu;
  return {gamma * U_out, u_out};
}

double state_distance(const std::pair<MatX, VecX>& a, const std::pair<MatX, VecX>& b) {
  return std::max((a.first - b.first).cwiseAbs().maxCoeff(), (a.second - b.second).cwiseAbs().maxCoeff());
}

}  // namespace

TEST_CASE("collide_2d examples") {
  const Vec2 nu(-1.0, 0.0);
  const Vec2 tau = quarter_turn(nu);
  auto run = [&](double gamma, double uh, double ub, double s) {
    const NoSlipState2D in{Vec2(1, 0), uh * nu + ub * tau, s};
    const auto out = collide_2d(in, nu, InertiaParams::from_gamma(gamma));
    return decompose_2d(out.u, out.s, nu);
  };
  auto a = run(0.0, -1.0, 0.5, 0.2);
  CHECK(a.u_hat == 1.0);
  CHECK(std::abs(a.u_bar - 0.5) < 1e-15);
  CHECK(std::abs(a.s + 0.2) < 1e-15);
  auto b = run(1.0, -1.0, 0.5, 0.2);
  CHECK(std::abs(b.u_bar - 0.2) < 1e-15);
  CHECK(std::abs(b.s - 0.5) < 1e-15);
  auto c = run(1.0 / std::sqrt(2.0), -1.0, 1.0, 0.0);
  CHECK(std::abs(c.u_hat - 1.0) < 1e-15);
  CHECK(std::abs(c.u_bar - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(c.s - 2.0 * std::sqrt(2.0) / 3.0) < 1e-15);
  CHECK_THROWS_AS(run(0.5, 0.0, 1.0, 0.0), Error);
}

TEST_CASE("collide_3d examples") {
  const auto inertia = InertiaParams::from_gamma(1.0 / std::sqrt(2.0));
  const Vec3 nu(-1.0, 0.0, 0.0);
  const TangentBasis tb = tangent_basis(nu);
  CHECK(std::abs(tb.t1.cross(tb.t2).dot(-nu) - 1.0) < 1e-15);
  CHECK((tb.t2 - Vec3::UnitZ()).norm() < 1e-15);

  // Normal bounce with spin about the normal only.
  NoSlipState3D st{Vec3(1, 0, 0), Vec3(-2, 0, 0), hat(Vec3(0.7, 0, 0))};
  auto out = collide_3d(st, nu, inertia);
  CHECK((out.u - Vec3(2, 0, 0)).norm() < 1e-15);
  CHECK((out.S - st.S).norm() < 1e-15);

  const Decomposition3D d{0.3, -1.0, Vec2(1, 0), Vec2(0, 0)};
  const auto o = collide_components_3d(d, inertia);
  CHECK(o.s_bar == 0.3);
  CHECK(o.u_hat == 1.0);
  CHECK(std::abs(o.u_bar.x() - 1.0 / 3.0) < 1e-15);
  CHECK(std::abs(o.W.x() - 2.0 * std::sqrt(2.0) / 3.0) < 1e-15);
  CHECK(o.u_bar.y() == 0.0);
  CHECK(o.W.y() == 0.0);

  // Round trip of the decomposition.
  test::Gen gen(2);
  for (int i = 0; i < 100; ++i) {
    const Vec3 n = gen.unit(3);
    const Vec3 u = gen.vec(3);
    const Mat3 S = gen.skew(3);
    const auto tbn = tangent_basis(n);
    const auto [S2, u2] = recompose_3d(decompose_3d(u, S, n, tbn), n, tbn);
    CHECK((S2 - S).norm() < 1e-13);
    CHECK((u2 - u).norm() < 1e-13);
  }
}

TEST_CASE("collide_general special cases") {
  const auto inertia = InertiaParams::from_gamma(0.8);
  const VecX nu = Vec3(0, 0, 1);
  auto [S, u] = collide_general(MatX::Zero(3, 3), -2.0 * nu, nu, inertia);
  CHECK(S.norm() < 1e-15);
  CHECK((u - 2.0 * nu).norm() < 1e-15);

  test::Gen gen(4);
  const auto zero = InertiaParams::from_gamma(0.0);
  for (int n = 2; n <= 4; ++n) {
    const VecX nn = gen.unit(n);
    const MatX Sn = gen.skew(n);
    const VecX un = gen.vec(n);
    auto [S0, u0] = collide_general(Sn, un, nn, zero);
    const MatX P = MatX::Identity(n, n) - nn * nn.transpose();
    CHECK((P * u0 - P * un).norm() < 1e-14);
    CHECK((S0 * nn + Sn * nn).norm() < 1e-14);
    CHECK((P * S0 * P - P * Sn * P).norm() < 1e-14);
  }
  CHECK_THROWS_AS(collide_general(MatX::Zero(2, 2), VecX::Ones(2), VecX::Ones(2), inertia), Error);
}

TEST_CASE("collide_general agrees with the (U,u) form") {
  test::Gen gen(6);
  for (int i = 0; i < 300; ++i) {
    const int n = gen.integer(2, 5);
    const double gamma = gen.uniform(0.05, 3.0);
    const VecX nu = gen.unit(n);
    const MatX S = gen.skew(n);
    const VecX u = gen.vec(n);
    const auto got = collide_general(S, u, nu, InertiaParams::from_gamma(gamma));
    CHECK(state_distance(got, reference_collision(S, u, nu, gamma)) < 1e-12);
  }
}

TEST_CASE("property: involution, isometry, rolling fixity, block structure") {
  test::Gen gen(7);
  for (int i = 0; i < 2000; ++i) {
    const int n = gen.integer(2, 4);
    const auto inertia = InertiaParams::from_gamma(std::exp(gen.uniform(-3.0, 3.0)));
    const VecX nu = gen.unit(n);
    const MatX S = gen.skew(n);
    const VecX u = gen.vec(n);
    const auto once = collide_general(S, u, nu, inertia);
    const auto twice = collide_general(once.first, once.second, nu, inertia);
    CHECK(state_distance(twice, {S, u}) < 1e-12);
    CHECK(std::abs(std::sqrt(kinetic_norm2(once.first, once.second)) - std::sqrt(kinetic_norm2(S, u))) < 1e-12);
    // rolling subspace: u = W / gamma
    const VecX ur = S * nu / inertia.gamma();
    const auto fixed = collide_general(S, ur, nu, inertia);
    CHECK(state_distance(fixed, {S, ur}) < 1e-12);
  }
  for (double gamma : {0.0, 0.3, 1.0, 4.0}) {
    const auto inertia = InertiaParams::from_gamma(gamma);
    Eigen::Matrix4d block;
    for (int k = 0; k < 4; ++k) {
      Decomposition3D d{0.0, -1.0, Vec2::Zero(), Vec2::Zero()};
      if (k < 2) d.u_bar[k] = 1.0;
      else d.W[k - 2] = 1.0;
      const auto o = collide_components_3d(d, inertia);
      block.col(k) << o.u_bar, o.W;
    }
    CHECK((block * block.transpose() - Eigen::Matrix4d::Identity()).norm() < 1e-14);
    // the 2x2 coefficient matrix acts on each tangent direction: det of the full block is (-1)^2
    CHECK(std::abs(block.determinant() - 1.0) < 1e-14);
    Mat2 b2;
    for (int k = 0; k < 2; ++k) {
      Decomposition2D d{-1.0, k == 0 ? 1.0 : 0.0, k == 1 ? 1.0 : 0.0};
      const auto o = collide_components_2d(d, inertia);
      b2.col(k) << o.u_bar, o.s;
    }
    CHECK(std::abs(b2.determinant() + 1.0) < 1e-14);
  }
}

TEST_CASE("general map matches dimension-specific maps") {
  test::Gen gen(9);
  for (int i = 0; i < 500; ++i) {
    const auto inertia = InertiaParams::from_gamma(gen.uniform(0.0, 3.0));
    const Vec2 nu2 = gen.unit(2);
    NoSlipState2D s2{Vec2::Zero(), gen.vec(2), gen.normal()};
    if (std::abs(s2.u.dot(nu2)) < 1e-6) continue;
    const auto o2 = collide_2d(s2, nu2, inertia);
    MatX S2(2, 2);
    S2 << 0, -s2.s, s2.s, 0;
    const auto g2 = collide_general(S2, s2.u, nu2, inertia);
    CHECK((g2.second - o2.u).norm() < 1e-12);
    CHECK(std::abs(g2.first(1, 0) - o2.s) < 1e-12);

    const Vec3 nu3 = gen.unit(3);
    NoSlipState3D s3{Vec3::Zero(), gen.vec(3), gen.skew(3)};
    if (std::abs(s3.u.dot(nu3)) < 1e-6) continue;
    const auto o3 = collide_3d(s3, nu3, inertia);
    const auto g3 = collide_general(s3.S, s3.u, nu3, inertia);
    CHECK((g3.second - o3.u).norm() < 1e-12);
    CHECK((g3.first - o3.S).norm() < 1e-12);
  }
}

TEST_CASE("equivariance under domain symmetries") {
  test::Gen gen(10);
  const auto disc = CrossSection::disc(1.0);
  const auto strip = CrossSection::strip(2.0);
  for (int i = 0; i < 300; ++i) {
    const auto inertia = InertiaParams::from_gamma(gen.uniform(0.0, 2.0));
    const bool reflect = gen.integer(0, 1) == 1;
    // disc: orthogonal maps about the center
    {
      const double th = gen.uniform(0.0, 2 * kPi);
      const Vec2 a(std::cos(th), std::sin(th));
      const Mat2 Q = gen.orthogonal(2, reflect);
      const Vec2 nu = boundary_data(disc, a).nu;
      const Vec2 nu_f = boundary_data(disc, Q * a).nu;
      MatX S(2, 2);
      const double s = gen.normal();
      S << 0, -s, s, 0;
      const VecX u = gen.vec(2);
      const auto lhs = collide_general(S, u, nu, inertia);
      const auto rhs = collide_general(Q * S * Q.transpose(), Q * u, nu_f, inertia);
      CHECK((Q * lhs.first * Q.transpose() - rhs.first).norm() < 1e-12);
      CHECK((Q * lhs.second - rhs.second).norm() < 1e-12);
    }
    // strip: vertical translations and the reflection x -> -x
    {
      const Vec2 a(gen.integer(0, 1) ? 1.0 : -1.0, gen.uniform(-5, 5));
      Mat2 Q = Mat2::Identity();
      if (reflect) Q(0, 0) = -1.0;
      const Vec2 shift(0.0, gen.uniform(-3, 3));
      const Vec2 nu = boundary_data(strip, a).nu;
      const Vec2 nu_f = boundary_data(strip, Q * a + shift).nu;
      MatX S(2, 2);
      const double s = gen.normal();
      S << 0, -s, s, 0;
      const VecX u = gen.vec(2);
      const auto lhs = collide_general(S, u, nu, inertia);
      const auto rhs = collide_general(Q * S * Q.transpose(), Q * u, nu_f, inertia);
      CHECK((Q * lhs.first * Q.transpose() - rhs.first).norm() < 1e-12);
      CHECK((Q * lhs.second - rhs.second).norm() < 1e-12);
    }
  }
}

TEST_CASE("flight") {
  const auto disc = CrossSection::disc(1.0);
  auto h = flight_2d(disc, Vec2::Zero(), Vec2(1, 0), 0.0, 10.0);
  REQUIRE(h);
  CHECK(std::abs(h->t - 1.0) < 1e-15);
  CHECK((h->nu - Vec2(-1, 0)).norm() < 1e-15);
  CHECK_FALSE(flight_2d(disc, Vec2::Zero(), Vec2(1, 0), 0.0, 0.5));

  const auto sphere = Domain3D::sphere(2.0);
  auto hs = flight_3d(sphere, Vec3::Zero(), Vec3(0, 0, 1), 0.0, 10.0);
  REQUIRE(hs);
  CHECK(std::abs(hs->t - 2.0) < 1e-14);
  auto hg = flight_3d(sphere, Vec3::Zero(), Vec3(1, 0, 1), 1.0, 10.0);
  REQUIRE(hg);
  CHECK(std::abs(hg->x.norm() - 2.0) < 1e-12);
  CHECK(std::abs((Vec3(0, 0, 0) + hg->t * Vec3(1, 0, 1) + 0.5 * hg->t * hg->t * Vec3(0, 0, -1)).norm() - 2.0) < 1e-10);
}

TEST_CASE("trajectories: disc single caustic and strip rotation law") {
  const auto disc = CrossSection::disc(1.0);
  NoSlipRun run;
  run.n_events = 100;
  const NoSlipState2D init{Vec2(0.1, -0.2), Vec2(0.6, 0.8), 0.4};
  auto tr = billiard_trajectory_2d(disc, InertiaParams::from_gamma(0.0), 0.0, init, run);
  REQUIRE(tr.events.size() == 101);
  const double d0 = chord_distance(tr.events[1].x.head<2>(), tr.events[2].x.head<2>());
  for (std::size_t k = 2; k + 1 < tr.events.size(); ++k)
    CHECK(std::abs(chord_distance(tr.events[k].x.head<2>(), tr.events[k + 1].x.head<2>()) - d0) < 1e-10);
  for (const auto& e : tr.events) CHECK(std::abs(e.energy - tr.events[0].energy) < 1e-13);

  // Strip without gravity: horizontal bounce is period 2; in general (u_y, s)
  // advances by a rotation through 2 beta per round trip.
  const auto strip = CrossSection::strip(1.0);
  const auto inertia = InertiaParams::from_gamma(1.0 / std::sqrt(2.0));
  auto flat = billiard_trajectory_2d(strip, inertia, 0.0, {Vec2(0, 0.3), Vec2(1, 0), 0.0}, run);
  for (std::size_t k = 3; k < flat.events.size(); ++k)
    CHECK((flat.events[k].x - flat.events[k - 2].x).norm() < 1e-14);
  auto gen = billiard_trajectory_2d(strip, inertia, 0.0, {Vec2(-0.5, 0.0), Vec2(1, 0.3), 0.2}, run);
  const double b2 = 2.0 * inertia.beta();
  for (std::size_t k = 0; k + 2 < gen.events.size(); k += 2) {
    const auto& e0 = gen.events[k];
    const auto& e2 = gen.events[k + 2];
    const Vec2 z0(e0.u[1], e0.S(1, 0));
    const Vec2 z2(e2.u[1], e2.S(1, 0));
    const Vec2 expect(std::cos(b2) * z0.x() - std::sin(b2) * z0.y(), std::sin(b2) * z0.x() + std::cos(b2) * z0.y());
    CHECK((z2 - expect).norm() < 1e-13);
  }
}

TEST_CASE("disc double caustic") {
  const auto disc = CrossSection::disc(1.0);
  NoSlipRun run;
  run.n_events = 200;
  const NoSlipState2D init{Vec2(0.2, 0.1), Vec2(0.3, 0.9), -0.5};
  auto tr = billiard_trajectory_2d(disc, InertiaParams::from_gamma(1.0 / std::sqrt(2.0)), 0.0, init, run);
  REQUIRE(tr.termination == Termination::Completed);
  std::vector<double> even, odd;
  for (std::size_t k = 1; k + 1 < tr.events.size(); ++k) {
    const double d = chord_distance(tr.events[k].x.head<2>(), tr.events[k + 1].x.head<2>());
    (k % 2 ? odd : even).push_back(d);
  }
  auto spread = [](const std::vector<double>& v) {
    auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  CHECK(spread(even) < 1e-8);
  CHECK(spread(odd) < 1e-8);
  CHECK(std::abs(even.front() - odd.front()) > 1e-3);
}

TEST_CASE("projection onto the cross-section") {
  const auto inertia = InertiaParams::from_gamma(0.6);
  const auto cyl = Domain3D::cylinder(CrossSection::disc(1.0));
  NoSlipRun run;
  run.n_events = 50;
  test::Gen gen(12);
  const NoSlipState3D init{Vec3(0.2, -0.1, 0.0), Vec3(0.5, 0.7, 0.3), gen.skew(3)};
  const auto proj0 = project_axis(cyl, init);
  auto t2 = billiard_trajectory_2d(cyl.section(), inertia, 0.0, proj0, run);
  for (double g : {0.0, 2.0}) {
    auto t3 = billiard_trajectory_3d(cyl, inertia, g, init, run);
    REQUIRE(t3.events.size() == t2.events.size());
    for (std::size_t k = 0; k < t3.events.size(); ++k) {
      const auto& a = t3.events[k];
      const auto& b = t2.events[k];
      CHECK(std::abs(a.t - b.t) < 1e-9);
      CHECK((a.x.head<2>() - b.x).norm() < 1e-9);
      CHECK((a.u.head<2>() - b.u).norm() < 1e-9);
      CHECK(std::abs(a.S(1, 0) - b.S(1, 0)) < 1e-9);
    }
  }
  CHECK_THROWS_AS(project_axis(Domain3D::sphere(1.0), init), Error);
  // axial-only motion projects to a resting point
  const auto still = project_axis(cyl, {Vec3(0.1, 0.2, 0.0), Vec3(0, 0, 3), Mat3::Zero()});
  CHECK(still.u.norm() == 0.0);
}

TEST_CASE("event-wise time reversibility") {
  const auto inertia = InertiaParams::from_gamma(0.7);
  NoSlipRun run;
  run.n_events = 20;
  const auto disc = CrossSection::disc(1.0);
  for (double g : {0.0, 1.5}) {
    const NoSlipState2D init{Vec2(0.1, 0.3), Vec2(0.8, -0.5), 0.3};
    auto fwd = billiard_trajectory_2d(disc, inertia, g, init, run);
    REQUIRE(fwd.termination == Termination::Completed);
    const auto& last = fwd.events.back();
    // Reverse the outgoing state at the last wall: collide again to recover the incoming
    // state, then negate it.
    NoSlipState2D back{last.x, -last.u, -last.S(1, 0)};
    const Vec2 nu = boundary_data(disc, last.x).nu;
    back = collide_2d(back, nu, inertia);
    NoSlipRun rrun = run;
    rrun.n_events = 19;
    auto rev = billiard_trajectory_2d(disc, inertia, g, back, rrun);
    REQUIRE(rev.events.size() == 20);
    const auto& end = rev.events.back();
    CHECK((end.x - fwd.events[1].x).norm() < 1e-8);
    const auto [x0, u0] = trajectory_state_at(fwd, 0.0);
    (void)x0;
    (void)u0;
  }
}

TEST_CASE("rolling impact") {
  const auto inertia = InertiaParams::from_gamma(0.5);
  const auto cyl = Domain3D::cylinder(CrossSection::disc(1.0));
  const Vec3 a(1.0, 0.0, 0.0);
  CHECK(rolling_impact({a, Vec3(0, 0, 1), Mat3::Zero()}, a, cyl, inertia));
  CHECK_FALSE(rolling_impact({a, Vec3(0, 1, 0), Mat3::Zero()}, a, cyl, inertia));
  // u tangential; spin so that S nu / gamma cancels it
  const Vec3 nu = cyl.inward_normal(a);
  const Vec3 u(0.0, 0.7, 0.0);
  // want S nu = gamma u: S = hat(w) with w x nu = gamma u
  const Vec3 w = nu.cross(inertia.gamma() * u);
  const Mat3 S = hat(w);
  CHECK((S * nu - inertia.gamma() * u).norm() < 1e-15);
  CHECK(rolling_impact({a, u, S}, a, cyl, inertia));
}
