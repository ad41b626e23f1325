#include "nhb/integrate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <boost/math/tools/toms748_solve.hpp>

#include "nhb/errors.hpp"

namespace nhb {

namespace {

// Dormand-Prince 5(4) coefficients.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                 a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

constexpr double kSafety = 0.9;
constexpr double kFacMin = 0.2;
constexpr double kFacMax = 5.0;

struct Stages {
  VecX k2, k3, k4, k5, k6, k7, y1, err, tmp;
  explicit Stages(Eigen::Index n)
      : k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), y1(n), err(n), tmp(n) {}
};

// One step from (t,y) with slope k1; fills y1, k7 (slope at y1) and err.
void rk_step(const Rhs& f, double t, const VecX& y, const VecX& k1, double h, Stages& s) {
  s.tmp = y + h * a21 * k1;
  f(t + c2 * h, s.tmp, s.k2);
  s.tmp = y + h * (a31 * k1 + a32 * s.k2);
  f(t + c3 * h, s.tmp, s.k3);
  s.tmp = y + h * (a41 * k1 + a42 * s.k2 + a43 * s.k3);
  f(t + c4 * h, s.tmp, s.k4);
  s.tmp = y + h * (a51 * k1 + a52 * s.k2 + a53 * s.k3 + a54 * s.k4);
  f(t + c5 * h, s.tmp, s.k5);
  s.tmp = y + h * (a61 * k1 + a62 * s.k2 + a63 * s.k3 + a64 * s.k4 + a65 * s.k5);
  f(t + h, s.tmp, s.k6);
  s.y1 = y + h * (a71 * k1 + a73 * s.k3 + a74 * s.k4 + a75 * s.k5 + a76 * s.k6);
  f(t + h, s.y1, s.k7);
  s.err = h * (e1 * k1 + e3 * s.k3 + e4 * s.k4 + e5 * s.k5 + e6 * s.k6 + e7 * s.k7);
}

double error_norm(const VecX& err, const VecX& y0, const VecX& y1, const IntegratorConfig& cfg) {
  const Eigen::Index n = err.size();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double sk = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(y0[i]), std::abs(y1[i]));
    const double q = err[i] / sk;
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double scaled_norm(const VecX& v, const VecX& y, const IntegratorConfig& cfg) {
  const Eigen::Index n = v.size();
  if (n == 0) return 0.0;
  double acc = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double q = v[i] / (cfg.abs_tol + cfg.rel_tol * std::abs(y[i]));
    acc += q * q;
  }
  return std::sqrt(acc / static_cast<double>(n));
}

double initial_step(const Rhs& f, double t, const VecX& y, const VecX& k1, double direction,
                    const IntegratorConfig& cfg) {
  const double dn0 = scaled_norm(y, y, cfg);
  const double dn1 = scaled_norm(k1, y, cfg);
  double h0 = (dn0 < 1e-10 || dn1 < 1e-10) ? 1e-6 : 0.01 * dn0 / dn1;
  h0 = std::min(h0, cfg.max_step);
  VecX y1 = y + direction * h0 * k1;
  VecX k2(y.size());
  f(t + direction * h0, y1, k2);
  const double dn2 = scaled_norm(k2 - k1, y, cfg) / h0;
  const double m = std::max(dn1, dn2);
  const double h1 = m <= 1e-15 ? std::max(1e-6, h0 * 1e-3) : std::pow(0.01 / m, 0.2);
  return std::min({100.0 * h0, h1, cfg.max_step});
}

bool crosses(double g0, double g1, int direction) {
  const bool rising = g0 < 0.0 && g1 >= 0.0;
  const bool falling = g0 > 0.0 && g1 <= 0.0;
  if (direction > 0) return rising;
  if (direction < 0) return falling;
  return rising || falling;
}

}  // namespace

void IntegratorConfig::validate() const {
  auto bad = [](double x) { return !(x > 0.0); };
  if (bad(rel_tol) || bad(abs_tol)) fail(ErrorKind::Domain, "integrator tolerances must be positive");
  if (bad(max_step)) fail(ErrorKind::Domain, "max_step must be positive");
  if (bad(event_tol)) fail(ErrorKind::Domain, "event_tol must be positive");
  if (fixed_step < 0.0 || initial_step < 0.0) fail(ErrorKind::Domain, "step sizes must be non-negative");
  if (max_events < 1) fail(ErrorKind::Domain, "max_events must be at least 1");
  if (bad(max_time)) fail(ErrorKind::Domain, "max_time must be positive");
}

VecX DenseStep::operator()(double t) const {
  const double th = (t - t0) / h;
  const double th1 = 1.0 - th;
  return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
}

IntegrationResult integrate_to_event(const Rhs& rhs, double t0, const VecX& y0, double t_end,
                                     std::span<const EventFn> events, const IntegratorConfig& cfg,
                                     const StepObserver& observer) {
  cfg.validate();
  IntegrationResult res;
  res.t = t0;
  res.y = y0;
  if (t_end == t0) return res;
  const double dir = t_end > t0 ? 1.0 : -1.0;
  const Eigen::Index n = y0.size();

  double t = t0;
  VecX y = y0;
  VecX k1(n);
  rhs(t, y, k1);
  Stages st(n);

  std::vector<double> g_prev(events.size());
  for (std::size_t i = 0; i < events.size(); ++i) g_prev[i] = events[i].g(t, y);

  const bool fixed = cfg.fixed_step > 0.0;
  double h;
  if (fixed) {
    h = cfg.fixed_step;
  } else if (cfg.initial_step > 0.0) {
    h = std::min(cfg.initial_step, cfg.max_step);
  } else {
    h = initial_step(rhs, t, y, k1, dir, cfg);
  }
  bool last_rejected = false;

  while (dir * (t_end - t) > 0.0) {
    if (res.steps + res.rejected >= cfg.max_steps) fail(ErrorKind::Timeout, "integrator step budget exhausted");
    double step = std::min(h, cfg.max_step);
    bool lands = false;
    if (step >= std::abs(t_end - t) || (!fixed && 1.01 * step >= std::abs(t_end - t))) {
      step = std::abs(t_end - t);
      lands = true;
    }
    const double hs = dir * step;
    rk_step(rhs, t, y, k1, hs, st);
    const double err = fixed ? 0.0 : error_norm(st.err, y, st.y1, cfg);
    if (!std::isfinite(err) || err > 1.0) {
      ++res.rejected;
      const double fac = std::isfinite(err) ? std::max(kFacMin, kSafety * std::pow(err, -0.2)) : kFacMin;
      h = step * std::min(1.0, fac);
      last_rejected = true;
      if (h < 16.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(t))) {
        std::ostringstream os;
        os << "step size underflow at t = " << t;
        fail(ErrorKind::StepUnderflow, os.str());
      }
      continue;
    }
    ++res.steps;
    const double t1 = lands ? t_end : t + hs;

    DenseStep dense;
    dense.t0 = t;
    dense.h = hs;
    dense.t_valid = t1;

    // Event detection on the accepted step; refine on true RK steps from (t, y).
    int hit = -1;
    double hit_lo = 0.0, hit_hi = 0.0;
    for (std::size_t i = 0; i < events.size(); ++i) {
      const double g1 = events[i].g(t1, st.y1);
      if (!crosses(g_prev[i], g1, events[i].direction)) continue;
      Stages probe(n);
      auto phi = [&](double tau) {
        if (tau == t) return g_prev[i];
        rk_step(rhs, t, y, k1, tau - t, probe);
        return events[i].g(tau, probe.y1);
      };
      double lo = t, hi = t1;
      double glo = g_prev[i], ghi = g1;
      if (ghi != 0.0) {
        std::uintmax_t iters = 200;
        auto tol = [](double a, double b) {
          return std::abs(b - a) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(a), std::abs(b));
        };
        const auto [a, b] = boost::math::tools::toms748_solve(phi, std::min(lo, hi), std::max(lo, hi),
                                                              dir > 0 ? glo : ghi, dir > 0 ? ghi : glo, tol, iters);
        lo = dir > 0 ? a : b;
        hi = dir > 0 ? b : a;
        // Report the endpoint on the far side of the crossing.
        const double g_hi = phi(hi);
        if ((g_hi < 0.0) == (glo < 0.0) && g_hi != 0.0) hi = lo;
      }
      if (hit < 0 || dir * (hi - hit_hi) < 0.0) {
        hit = static_cast<int>(i);
        hit_lo = lo;
        hit_hi = hi;
      }
    }

    if (hit >= 0) {
      Stages fin(n);
      VecX y_event = st.y1;
      if (hit_hi != t1) {
        rk_step(rhs, t, y, k1, hit_hi - t, fin);
        y_event = fin.y1;
      }
      dense.r1 = y;
      dense.r2 = st.y1 - y;
      dense.r3 = hs * k1 - dense.r2;
      dense.r4 = dense.r2 - hs * st.k7 - dense.r3;
      dense.r5 = hs * (d1 * k1 + d3 * st.k3 + d4 * st.k4 + d5 * st.k5 + d6 * st.k6 + d7 * st.k7);
      dense.t_valid = hit_hi;
      if (observer) observer(dense);
      res.status = IntegrationResult::Status::Event;
      res.event = hit;
      res.t = hit_hi;
      res.y = y_event;
      res.bracket_lo = std::min(hit_lo, hit_hi);
      res.bracket_hi = std::max(hit_lo, hit_hi);
      res.last_h = step;
      return res;
    }

    if (observer) {
      dense.r1 = y;
      dense.r2 = st.y1 - y;
      dense.r3 = hs * k1 - dense.r2;
      dense.r4 = dense.r2 - hs * st.k7 - dense.r3;
      dense.r5 = hs * (d1 * k1 + d3 * st.k3 + d4 * st.k4 + d5 * st.k5 + d6 * st.k6 + d7 * st.k7);
      observer(dense);
    }
    for (std::size_t i = 0; i < events.size(); ++i) g_prev[i] = events[i].g(t1, st.y1);
    t = t1;
    y = st.y1;
    k1 = st.k7;
    res.last_h = step;
    if (!fixed) {
      double fac = err == 0.0 ? kFacMax : kSafety * std::pow(err, -0.2);
      fac = std::clamp(fac, kFacMin, last_rejected ? 1.0 : kFacMax);
      h = step * fac;
    }
    last_rejected = false;
  }
  res.status = IntegrationResult::Status::End;
  res.t = t;
  res.y = y;
  return res;
}

IntegrationResult integrate(const Rhs& rhs, double t0, const VecX& y0, double t_end, const IntegratorConfig& cfg,
                            const StepObserver& observer) {
  return integrate_to_event(rhs, t0, y0, t_end, {}, cfg, observer);
}

Energies energy_monitor(const Vec3& v, const Vec3& spin, double x3, double g) {
  Energies e;
  e.e1 = 0.5 * (v[0] * v[0] + v[1] * v[1] + spin[0] * spin[0]);
  e.e2 = 0.5 * (v[2] * v[2] + spin[1] * spin[1] + spin[2] * spin[2]);
  e.total = e.e1 + e.e2;
  e.with_gravity = e.total + g * x3;
  return e;
}

}  // namespace nhb
