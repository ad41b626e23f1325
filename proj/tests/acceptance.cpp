// Acceptance gate: one PASS/FAIL line per criterion, tolerances pinned here.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "nhb/errors.hpp"
#include "nhb/experiments.hpp"
#include "nhb/noslip.hpp"
#include "nhb/rolling.hpp"
#include "support.hpp"

using namespace nhb;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double dist(const std::pair<MatX, VecX>& a, const std::pair<MatX, VecX>& b) {
  return std::max((a.first - b.first).cwiseAbs().maxCoeff(), (a.second - b.second).cwiseAbs().maxCoeff());
}

MatX spin2(double s) {
  MatX S(2, 2);
  S << 0, -s, s, 0;
  return S;
}

// Orthonormal basis of nu-perp as matrix columns.
MatX complement(const VecX& nu) {
  const int n = static_cast<int>(nu.size());
  MatX A = MatX::Identity(n, n);
  A.col(0) = nu;
  Eigen::HouseholderQR<MatX> qr(A);
  MatX Q = qr.householderQ();
  return Q.rightCols(n - 1);
}

Outcome c1_collision_algebra() {
  test::Gen gen(101);
  double inv = 0, energy = 0, fixity = 0, ortho = 0, det = 0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int n = 2; n <= 4; ++n) {
    for (int i = 0; i < 10000; ++i) {
      const auto in = InertiaParams::from_gamma(std::exp(gen.uniform(-3.0, 3.0)));
      const VecX nu = gen.unit(n);
      const MatX S = gen.skew(n);
      const VecX u = gen.vec(n);
      const auto once = collide_general(S, u, nu, in);
      inv = std::max(inv, dist(collide_general(once.first, once.second, nu, in), {S, u}));
      energy = std::max(energy, std::abs(std::sqrt(kinetic_norm2(once.first, once.second)) -
                                         std::sqrt(kinetic_norm2(S, u))));
      const VecX ur = S * nu / in.gamma();
      fixity = std::max(fixity, dist(collide_general(S, ur, nu, in), {S, ur}));

      // (u_bar, W) block on nu-perp.
      const MatX T = complement(nu);
      const int m = n - 1;
      MatX B(2 * m, 2 * m);
      for (int k = 0; k < 2 * m; ++k) {
        VecX uk = VecX::Zero(n);
        MatX Sk = MatX::Zero(n, n);
        if (k < m) uk = T.col(k);
        else Sk = wedge(nu, T.col(k - m));  // Sk nu = T.col(k - m)
        const auto o = collide_general(Sk, uk, nu, in);
        B.col(k) << T.transpose() * o.second, T.transpose() * (o.first * nu);
      }
      ortho = std::max(ortho, (B * B.transpose() - MatX::Identity(2 * m, 2 * m)).cwiseAbs().maxCoeff());
      Mat2 c;
      c << B(0, 0), B(0, m), B(m, 0), B(m, m);
      det = std::max(det, std::abs(c.determinant() + 1.0));
    }
  }
  const double secs = seconds_since(t0);
  const double tol = 1e-12;
  const bool pass = inv < tol && energy < tol && fixity < tol && ortho < tol && det < tol && secs < 1.0;
  return {pass, "3x10^4 states n=2,3,4: involution " + fmt("%.1e", inv) + ", energy " + fmt("%.1e", energy) +
                    ", rolling fixity " + fmt("%.1e", fixity) + ", block orthogonality " + fmt("%.1e", ortho) +
                    ", |det+1| " + fmt("%.1e", det) + " (tol 1e-12); " + fmt("%.2f", secs) + " s (< 1 s)"};
}

Outcome c2_dimensions() {
  test::Gen gen(102);
  double err = 0;
  int used = 0;
  while (used < 1000) {
    const auto in = InertiaParams::from_gamma(gen.uniform(0.0, 3.0));
    const Vec2 nu2 = gen.unit(2);
    const NoSlipState2D s2{Vec2::Zero(), gen.vec(2), gen.normal()};
    const Vec3 nu3 = gen.unit(3);
    const NoSlipState3D s3{Vec3::Zero(), gen.vec(3), gen.skew(3)};
    if (std::abs(s2.u.dot(nu2)) < 1e-6 || std::abs(s3.u.dot(nu3)) < 1e-6) continue;
    const auto o2 = collide_2d(s2, nu2, in);
    const auto g2 = collide_general(spin2(s2.s), s2.u, nu2, in);
    err = std::max({err, (g2.second - o2.u).cwiseAbs().maxCoeff(), std::abs(g2.first(1, 0) - o2.s)});
    const auto o3 = collide_3d(s3, nu3, in);
    const auto g3 = collide_general(s3.S, s3.u, nu3, in);
    err = std::max({err, (g3.second - o3.u).cwiseAbs().maxCoeff(), (g3.first - o3.S).cwiseAbs().maxCoeff()});
    ++used;
  }
  return {err < 1e-12, "10^3 states: max deviation " + fmt("%.1e", err) + " (tol 1e-12)"};
}

Outcome c3_projection() {
  const auto in = InertiaParams::from_gamma(1.0 / std::sqrt(2.0));
  const auto cyl = Domain3D::cylinder(CrossSection::disc(1.0));
  NoSlipRun run;
  run.n_events = 50;
  test::Gen gen(103);
  const NoSlipState3D init{Vec3(0.2, -0.1, 0.0), Vec3(0.5, 0.7, 0.3), gen.skew(3)};
  const auto t2 = billiard_trajectory_2d(cyl.section(), in, 0.0, project_axis(cyl, init), run);
  double err = 0;
  bool complete = t2.events.size() == 51;
  for (double g : {0.0, 1.0}) {
    const auto t3 = billiard_trajectory_3d(cyl, in, g, init, run);
    complete = complete && t3.events.size() == t2.events.size();
    for (std::size_t k = 0; k < std::min(t3.events.size(), t2.events.size()); ++k) {
      const auto& a = t3.events[k];
      const auto& b = t2.events[k];
      const auto p = project_axis(cyl, {a.x.head<3>(), a.u.head<3>(), a.S});
      err = std::max({err, std::abs(a.t - b.t), (p.x - b.x).cwiseAbs().maxCoeff(), (p.u - b.u).cwiseAbs().maxCoeff(),
                      std::abs(p.s - b.S(1, 0))});
    }
  }
  return {complete && err < 1e-9,
          "50 collisions, g = 0 and g = 1: max event-wise error " + fmt("%.1e", err) + " (tol 1e-9)"};
}

Outcome c4_equivariance() {
  test::Gen gen(104);
  const auto disc = CrossSection::disc(1.0);
  const auto strip = CrossSection::strip(2.0);
  double err = 0;
  for (int i = 0; i < 1000; ++i) {
    const auto in = InertiaParams::from_gamma(gen.uniform(0.0, 2.0));
    const bool reflect = gen.integer(0, 1) == 1;
    const MatX S = spin2(gen.normal());
    const VecX u = gen.vec(2);
    {
      const double th = gen.uniform(0.0, 2 * kPi);
      const Vec2 a(std::cos(th), std::sin(th));
      const Mat2 Q = gen.orthogonal(2, reflect);
      const auto lhs = collide_general(S, u, boundary_data(disc, a).nu, in);
      const auto rhs = collide_general(Q * S * Q.transpose(), Q * u, boundary_data(disc, Q * a).nu, in);
      err = std::max(err, dist({Q * lhs.first * Q.transpose(), Q * lhs.second}, rhs));
    }
    {
      const Vec2 a(gen.integer(0, 1) ? 1.0 : -1.0, gen.uniform(-5, 5));
      Mat2 Q = Mat2::Identity();
      if (reflect) Q(0, 0) = -1.0;
      const Vec2 shift(0.0, gen.uniform(-3, 3));
      const auto lhs = collide_general(S, u, boundary_data(strip, a).nu, in);
      const auto rhs = collide_general(Q * S * Q.transpose(), Q * u, boundary_data(strip, Q * a + shift).nu, in);
      err = std::max(err, dist({Q * lhs.first * Q.transpose(), Q * lhs.second}, rhs));
    }
  }
  return {err < 1e-12, "10^3 disc + 10^3 strip states: max deviation " + fmt("%.1e", err) + " (tol 1e-12)"};
}

Outcome c5_closed_form() {
  const auto profile = stadium_profile(1.0, 0.5);
  const double eta = 0.577, u = 1.0, g = 5.0, v2 = -1.0, s = -0.5;
  IntegratorConfig cfg;
  double err = 0;
  int samples = 0;
  integrate_strip(profile, eta, u, g, v2, s, 50.0, cfg, 0.0,
                  [&](double t, const StripSolution& num) {
                    const auto ex = strip_closed_form(profile, eta, u, g, v2, s, t);
                    err = std::max({err, std::abs(ex.v2 - num.v2), std::abs(ex.s - num.s)});
                    ++samples;
                  },
                  0.05);
  // Homogeneous part over one half-circle arc (flat of length 1 first).
  test::Gen gen(105);
  double arc = 0;
  for (int i = 0; i < 100; ++i) {
    const double e = gen.uniform(0.0, 0.99), sp = gen.uniform(0.2, 3.0), r = gen.uniform(0.05, 2.0);
    const Vec2 x0 = gen.vec(2);
    const auto prof = stadium_profile(1.0, r);
    const auto out = strip_closed_form(prof, e, sp, 0.0, x0[0], x0[1], kPi * r / sp, 1.0);
    const double th = -kPi * e;  // eta u kappa T with kappa = -1/r, T = pi r / u
    const Vec2 rot(std::cos(th) * x0[0] - std::sin(th) * x0[1], std::sin(th) * x0[0] + std::cos(th) * x0[1]);
    arc = std::max({arc, std::abs(out.v2 - rot[0]), std::abs(out.s - rot[1])});
  }
  return {samples > 900 && err < 1e-8 && arc < 1e-12,
          "stadium t in [0,50]: sup |closed form - integration| " + fmt("%.1e", err) +
              " (tol 1e-8); half-arc vs rotation by pi*eta " + fmt("%.1e", arc) + " (tol 1e-12)"};
}

Outcome c6_conservation() {
  const TubeChart chart(CrossSection::disc(1.0), 0.2);
  const auto in = InertiaParams::from_eta(0.4);
  const double g = 1.0;
  RollState st;
  st.region = Region::Curved;
  st.s = 0.3;
  st.phi = 0.7;
  st.v = {0.3, 1.0, 0.1};
  st.spin = {0.2, -0.3, 0.5};
  RollRun run;
  run.horizon = 10.0;
  run.sample_dt = 0.01;
  const auto tr = simulate_roll4d(chart, in, g, st, run);
  const auto e0 = energy_monitor(st, g);
  double de1 = 0, de = 0;
  for (const auto& smp : tr.samples) {
    const auto e = energy_monitor(smp.state, g);
    de1 = std::max(de1, std::abs(e.e1 - e0.e1));
    de = std::max(de, std::abs(e.with_gravity - e0.with_gravity));
  }
  return {tr.samples.size() == 1001 && de1 < 1e-9 && de < 1e-9,
          "disc R=1, r=0.2, eta=0.4, g=1, 10 units: |dE1| " + fmt("%.1e", de1) + ", |d(E + g x3)| " + fmt("%.1e", de) +
              " (tol 1e-9)"};
}

Outcome c7_reversibility() {
  // No-slip: forward 10 units, negate, forward 10 units.
  const auto in = InertiaParams::from_gamma(0.7);
  const auto disc = CrossSection::disc(1.0);
  double ns = 0;
  for (double g : {0.0, 1.5}) {
    NoSlipRun run;
    run.n_events = 100000;
    run.horizon = 10.0;
    const NoSlipState2D init{Vec2(0.1, 0.3), Vec2(0.8, -0.5), 0.3};
    const auto fwd = billiard_trajectory_2d(disc, in, g, init, run);
    const auto [x1, u1] = trajectory_state_at(fwd, 10.0);
    const NoSlipState2D back{x1, -u1, -fwd.events.back().S(1, 0)};
    const auto bwd = billiard_trajectory_2d(disc, in, g, back, run);
    const auto [x2, u2] = trajectory_state_at(bwd, 10.0);
    ns = std::max({ns, (x2 - init.x).cwiseAbs().maxCoeff(), (u2 + init.u).cwiseAbs().maxCoeff(),
                   std::abs(bwd.events.back().S(1, 0) + init.s)});
  }
  // Rolling on the 4D cylinder.
  const TubeChart chart(CrossSection::disc(1.0), 0.2);
  RollState st;
  st.region = Region::FlatPlus;
  st.p = {0.2, -0.1};
  st.v = {0.8, 0.5, 0.3};
  st.spin = {0.61, 0.0, -1.0};
  RollRun run;
  run.horizon = 10.0;
  const auto f = simulate_roll4d(chart, InertiaParams::from_eta(0.39), 1.0, st, run);
  RollState rev = f.final_state;
  rev.v = -rev.v;
  rev.spin = -rev.spin;
  const auto b = simulate_roll4d(chart, InertiaParams::from_eta(0.39), 1.0, rev, run);
  const RollState& end = b.final_state;
  double roll = (center(chart, end) - center(chart, st)).cwiseAbs().maxCoeff();
  roll = std::max({roll, (end.v + st.v).cwiseAbs().maxCoeff(), (end.spin + st.spin).cwiseAbs().maxCoeff()});
  if (end.region != st.region) roll = INFINITY;
  return {ns < 1e-7 && roll < 1e-7, "no-slip disc (g = 0, 1.5) " + fmt("%.1e", ns) + ", rolling 4D disc " +
                                        fmt("%.1e", roll) + " (tol 1e-7)"};
}

Outcome c8_limit() {
  const auto t0 = std::chrono::steady_clock::now();
  const std::vector<double> radii = {0.2, 0.1, 0.05, 0.025};
  const double eta = eta_matched_to(1.0 / std::sqrt(2.0));
  const auto rows = noslip_limit_check(eta, CrossSection::disc(1.0), 0, 0.3, Vec3(0.8, 0.5, -0.3),
                                       spin_matrix(Vec3(0.4, -0.2, 0.7)), radii, IntegratorConfig{});
  const double secs = seconds_since(t0);
  bool decreasing = rows.size() == radii.size();
  for (std::size_t i = 1; i < rows.size(); ++i) decreasing = decreasing && rows[i].deviation < rows[i - 1].deviation;
  // Least-squares slope of log(deviation) against log(r).
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(rows.size());
  for (const auto& row : rows) {
    const double x = std::log(row.r), y = std::log(row.deviation);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double order = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  std::string devs;
  for (const auto& row : rows) devs += (devs.empty() ? "" : ", ") + fmt("%.3e", row.deviation);
  return {decreasing && order >= 0.8 && secs < 60.0,
          "eta=" + fmt("%.5f", eta) + ", r = 0.2..0.025: errors " + devs + "; order " + fmt("%.2f", order) +
              " (>= 0.8); " + fmt("%.1f", secs) + " s (< 60 s)"};
}

Outcome c9_two_plates() {
  TwoPlatesSpec spec;
  spec.etas = {0.0, 0.3, 0.577, 0.9};
  const auto series = run_two_plates_height(spec);
  double par = 0;
  const auto& s0 = series[0];
  for (std::size_t i = 0; i < s0.t.size(); ++i) {
    const double t = s0.t[i];
    const double exact = spec.x3 + spec.v3 * t - 0.5 * spec.g * t * t;
    par = std::max(par, std::abs(s0.x3[i] - exact) / std::max(1.0, std::abs(exact)));
  }
  bool bounded = true;
  std::string periods;
  for (std::size_t k = 1; k < series.size(); ++k) {
    const auto& r = series[k].report;
    bounded = bounded && r.status == Boundedness::Bounded && r.period && std::isfinite(*r.period);
    periods += (periods.empty() ? "" : ", ") + fmt("%.3g", series[k].parameter) + ":" +
               (r.period ? fmt("%.3f", *r.period) : std::string("none")) + "/" + to_string(r.status);
  }
  return {par < 1e-12 && bounded, "eta=0 parabola relative error " + fmt("%.1e", par) +
                                      " (tol 1e-12); eta:period/status " + periods + " over 200 units"};
}

Outcome c10_radius_limit() {
  const auto res = run_radius_limit(RadiusLimitSpec{});
  std::string d;
  for (double x : res.sup_diffs) d += (d.empty() ? "" : ", ") + fmt("%.3f", x);
  bool dec = res.sup_diffs.size() == 3;
  for (std::size_t i = 1; i < res.sup_diffs.size(); ++i) dec = dec && res.sup_diffs[i] < res.sup_diffs[i - 1];
  return {dec, "L=1, eta=0.39, g=1, r = 0.4,0.2,0.1,0.05, 20 units: sup differences " + d + " (strictly decreasing)"};
}

Outcome c11_circular_cylinder() {
  CausticSpec base;
  const auto a = run_caustic_and_height(base);
  CausticSpec pert = base;
  pert.v_init = Vec3(-0.2, 1.1, 0.0);
  const auto b = run_caustic_and_height(pert);
  const bool pass = a.clusters.count == 1 && a.report.status == Boundedness::Bounded && b.clusters.count == 2 &&
                    b.report.status == Boundedness::Unbounded;
  return {pass, "v=(-0.2,1,0): " + std::to_string(a.clusters.count) + " caustic, " + to_string(a.report.status) +
                    "; perturbed v=(-0.2,1.1,0): " + std::to_string(b.clusters.count) + " caustics, " +
                    to_string(b.report.status) + " (eta=0.39, horizon 100, merge 1e-3 R; reported, not a theorem)"};
}

Outcome c12_disc_caustics() {
  const NoSlipState2D start{Vec2(0.2, -0.1), Vec2(0.3, 1.0), 0.4};
  const auto c = noslip_disc_caustics(1.0 / std::sqrt(2.0), start, 200, 1e-3);
  const auto c0 = noslip_disc_caustics(0.0, start, 200, 1e-3);
  double spread = 0;
  for (double s : c.spreads) spread = std::max(spread, s);
  return {c.count == 2 && spread < 1e-8 && c0.count == 1,
          "200 collisions, gamma=1/sqrt2: " + std::to_string(c.count) + " clusters, max spread " +
              fmt("%.1e", spread) + " (tol 1e-8); gamma=0: " + std::to_string(c0.count) + " cluster"};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
      {"collision-map algebra", c1_collision_algebra},
      {"dimensional consistency", c2_dimensions},
      {"projection onto the cross-section", c3_projection},
      {"equivariance", c4_equivariance},
      {"closed form vs numeric", c5_closed_form},
      {"conservation on the 4D cylinder", c6_conservation},
      {"time reversibility", c7_reversibility},
      {"limit at desk scale", c8_limit},
      {"two-plates regimes", c9_two_plates},
      {"radius-limit self-convergence", c10_radius_limit},
      {"circular-cylinder regimes", c11_circular_cylinder},
      {"disc double caustic", c12_disc_caustics},
  };
  int failed = 0;
  int k = 0;
  for (const auto& [name, run] : criteria) {
    ++k;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("[%2d] %s  %s: %s\n", k, o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
