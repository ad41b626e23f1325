#include "nhb/rolling.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "nhb/errors.hpp"

namespace nhb {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

double sinc(double x) { return x == 0.0 ? 1.0 : std::sin(x) / x; }

// (1 - cos x)/x and (1 - cos x)/x^2 without cancellation.
double one_minus_cos_over(double x) {
  if (x == 0.0) return 0.0;
  const double h = std::sin(0.5 * x);
  return 2.0 * h * h / x;
}

double one_minus_cos_over2(double x) {
  if (x == 0.0) return 0.5;
  const double h = std::sin(0.5 * x);
  return 2.0 * h * h / (x * x);
}

int side_sign(Region side) {
  if (side == Region::FlatPlus) return 1;
  if (side == Region::FlatMinus) return -1;
  fail(ErrorKind::Domain, "junction side must be a flat part");
}

Region junction_side(double phi) { return phi < 0.5 * kPi ? Region::FlatPlus : Region::FlatMinus; }

struct LegResult {
  enum class Outcome { Flat, End, Corner };
  Outcome outcome = Outcome::End;
  RollState state;
  double t = 0.0;
  double travel = 0.0;  // unwrapped arclength covered along the rim
  std::string message;
};

using SampleFn = std::function<void(double, const RollState&)>;

// Closed-form rim pass over an unbounded straight segment (kappa = 0).
LegResult straight_leg(double eta, double r, double g, const RollState& in, double t0, double t_end,
                       const SampleFn& sample, double sample_dt, long& next_sample) {
  const double v1 = in.v[0];
  const double zeta = eta * v1 / r;
  double T = kInf;
  if (v1 > 0.0) T = (kPi - in.phi) * r / v1;
  if (v1 < 0.0) T = in.phi * r / -v1;
  const bool ends = t0 + T <= t_end;
  const double dt_total = ends ? T : t_end - t0;

  auto at = [&](double tau) {
    RollState st = in;
    const ForcedRotation a = forced_rotation({in.v[1], in.spin[0]}, zeta, 0.0, tau);
    const ForcedRotation b = forced_rotation({in.v[2], in.spin[1]}, zeta, g, tau);
    st.v[1] = a.x[0];
    st.spin[0] = a.x[1];
    st.s = in.s + a.integral;
    st.v[2] = b.x[0];
    st.spin[1] = b.x[1];
    st.x3 = in.x3 + b.integral;
    st.phi = in.phi + v1 * tau / r;
    return st;
  };

  if (sample && sample_dt > 0.0) {
    while (next_sample * sample_dt <= t0 + dt_total) {
      const double ts = next_sample * sample_dt;
      sample(ts, at(ts - t0));
      ++next_sample;
    }
  }

  LegResult res;
  res.state = at(dt_total);
  res.t = t0 + dt_total;
  res.travel = res.state.s - in.s;
  if (ends) {
    res.state.phi = v1 > 0.0 ? kPi : 0.0;
    res.outcome = LegResult::Outcome::Flat;
  }
  return res;
}

LegResult numeric_leg(const TubeChart& chart, double eta, double g, const RollState& in, double t0, double t_end,
                      const IntegratorConfig& cfg, const SampleFn& sample, double sample_dt, long& next_sample) {
  const CrossSection& section = chart.section();
  const double r = chart.r();
  const BoundaryLoop& loop = section.loops()[in.loop];
  RollState st = in;
  st.s = loop.wrap(st.s);
  int seg = loop.segment_at(st.s);
  double t = t0;
  double travel = 0.0;

  LegResult res;
  const int n = static_cast<int>(loop.segments.size());
  // Move to the neighbouring segment; false when the join is not smooth.
  auto cross = [&](bool forward) {
    int next = forward ? seg + 1 : seg - 1;
    if (next >= n || next < 0) {
      if (!loop.closed) {
        res.message = "rolled off the end of an open boundary";
        return false;
      }
      next = (next + n) % n;
    }
    if (!loop.smooth_start[forward ? next : seg]) {
      res.message = "rim reached a non-smooth boundary join";
      return false;
    }
    st.s = loop.wrap(st.s);
    seg = next;
    if (st.s < loop.offsets[seg] || st.s > loop.offsets[seg] + loop.segments[seg].length)
      st.s = forward ? loop.offsets[seg] : loop.offsets[seg] + loop.segments[seg].length;
    return true;
  };
  while (true) {
    if (!loop.segments[seg].unbounded && st.s <= loop.offsets[seg] && st.v[1] < 0.0) {
      if (!cross(false)) {
        res.outcome = LegResult::Outcome::Corner;
        break;
      }
    }
    const Segment& sg = loop.segments[seg];
    const double kappa = sg.kappa();
    const double lo = loop.offsets[seg];
    const double hi = sg.unbounded ? kInf : lo + sg.length;
    Rhs rhs = [&](double, const VecX& y, VecX& dy) {
      dy = cylinder4d_field(y, kappa, eta, r, g);
    };
    std::vector<EventFn> events;
    events.push_back({[](double, const VecX& y) { return y[1]; }, -1});
    events.push_back({[](double, const VecX& y) { return y[1] - kPi; }, +1});
    if (!sg.unbounded) {
      events.push_back({[lo](double, const VecX& y) { return y[0] - lo; }, -1});
      events.push_back({[hi](double, const VecX& y) { return y[0] - hi; }, +1});
    }
    StepObserver obs;
    const int cur_loop = st.loop;
    if (sample && sample_dt > 0.0) {
      obs = [&](const DenseStep& d) {
        const double a = std::min(d.t0, d.t_valid), b = std::max(d.t0, d.t_valid);
        while (next_sample * sample_dt <= b) {
          const double ts = next_sample * sample_dt;
          if (ts >= a) sample(ts, unpack(d(ts), cur_loop));
          ++next_sample;
        }
      };
    }
    const double s_before = st.s;
    const IntegrationResult ir = integrate_to_event(rhs, t, pack(st), t_end, events, cfg, obs);
    st = unpack(ir.y, st.loop);
    travel += st.s - s_before;
    t = ir.t;
    if (ir.status == IntegrationResult::Status::End) {
      res.outcome = LegResult::Outcome::End;
      break;
    }
    if (ir.event <= 1) {
      st.phi = ir.event == 0 ? 0.0 : kPi;
      res.outcome = LegResult::Outcome::Flat;
      break;
    }
    if (!cross(ir.event == 3)) {
      res.outcome = LegResult::Outcome::Corner;
      break;
    }
  }
  res.state = st;
  res.t = t;
  res.travel = travel;
  return res;
}

LegResult curved_leg(const TubeChart& chart, double eta, double g, const RollState& in, double t0, double t_end,
                     const IntegratorConfig& cfg, bool exact, const SampleFn& sample, double sample_dt,
                     long& next_sample) {
  const BoundaryLoop& loop = chart.section().loops()[in.loop];
  const Segment& sg = loop.segments[loop.segment_at(loop.wrap(in.s))];
  if (exact && sg.unbounded && sg.kappa() == 0.0)
    return straight_leg(eta, chart.r(), g, in, t0, t_end, sample, sample_dt, next_sample);
  return numeric_leg(chart, eta, g, in, t0, t_end, cfg, sample, sample_dt, next_sample);
}

}  // namespace

Energies energy_monitor(const RollState& state, double g) { return energy_monitor(state.v, state.spin, state.x3, g); }

Mat3 spin_matrix(const Vec3& spin) {
  Mat3 M = Mat3::Zero();
  M(1, 0) = spin[0];
  M(2, 0) = spin[1];
  M(2, 1) = spin[2];
  M(0, 1) = -spin[0];
  M(0, 2) = -spin[1];
  M(1, 2) = -spin[2];
  return M;
}

Vec3 spin_components(const Mat3& M) {
  return {0.5 * (M(1, 0) - M(0, 1)), 0.5 * (M(2, 0) - M(0, 2)), 0.5 * (M(2, 1) - M(1, 2))};
}

Mat3 junction_frame(const BoundaryPoint& where, Region side) {
  const double sg = side_sign(side);
  Mat3 Q = Mat3::Zero();
  Q.col(0) << sg * where.e1, 0.0;
  Q.col(1) << where.e2, 0.0;
  Q(2, 2) = 1.0;
  return Q;
}

RollState enter_curved(const RollState& flat, const BoundaryPoint& where) {
  const Mat3 Q = junction_frame(where, flat.region);
  RollState c;
  c.region = Region::Curved;
  c.loop = where.loop;
  c.s = where.s;
  c.phi = flat.region == Region::FlatPlus ? 0.0 : kPi;
  c.x3 = flat.x3;
  c.p = where.point;
  c.v = Q.transpose() * flat.v;
  c.spin = spin_components(Q.transpose() * spin_matrix(flat.spin) * Q);
  return c;
}

RollState leave_curved(const RollState& curved, const CrossSection& section) {
  const Region side = junction_side(curved.phi);
  const BoundaryPoint where = section.at(curved.loop, curved.s);
  const Mat3 Q = junction_frame(where, side);
  RollState f;
  f.region = side;
  f.loop = curved.loop;
  f.s = where.s;
  f.phi = curved.phi;
  f.x3 = curved.x3;
  f.p = where.point;
  f.v = Q * curved.v;
  f.spin = spin_components(Q * spin_matrix(curved.spin) * Q.transpose());
  return f;
}

Vec4 center(const TubeChart& chart, const RollState& state) {
  if (state.region == Region::Curved) return chart.embed(state.loop, state.s, state.phi, state.x3);
  const double h = state.region == Region::FlatPlus ? chart.r() : -chart.r();
  return {state.p.x(), state.p.y(), state.x3, h};
}

Vec9 cylinder4d_field(const Vec9& y, double kappa, double eta, double r, double g) {
  const double phi = y[1];
  const double v1 = y[3], v2 = y[4], v3 = y[5];
  const double S12 = y[6], S13 = y[7], S23 = y[8];
  const CurvatureFactors cf = curvature_factors(kappa, phi, r);
  const double den = 1.0 - r * kappa * std::sin(phi);
  Vec9 d;
  d[0] = v2 / den;
  d[1] = v1 / r;
  d[2] = v3;
  d[3] = -cf.f_c * v2 * v2 - eta * cf.f_s * v2 * S12;
  d[4] = cf.f_c * v1 * v2 - (eta / r) * v1 * S12;
  d[5] = eta * (cf.f_s * v2 * S23 - v1 * S13 / r) - g;
  d[6] = eta * (cf.f_s + 1.0 / r) * v1 * v2;
  d[7] = -cf.f_c * v2 * S23 + (eta / r) * v1 * v3;
  d[8] = cf.f_c * v2 * S13 - eta * cf.f_s * v2 * v3;
  return d;
}

Vec9 cylinder4d_rhs(const RollState& state, const InertiaParams& inertia, double g, const TubeChart& chart) {
  if (state.region != Region::Curved) fail(ErrorKind::Domain, "cylinder4d_rhs needs a curved-part state");
  return cylinder4d_field(pack(state), chart.section().kappa(state.loop, state.s), inertia.eta(), chart.r(), g);
}

Vec9 pack(const RollState& st) {
  Vec9 y;
  y << st.s, st.phi, st.x3, st.v, st.spin;
  return y;
}

RollState unpack(const Vec9& y, int loop) {
  RollState st;
  st.region = Region::Curved;
  st.loop = loop;
  st.s = y[0];
  st.phi = y[1];
  st.x3 = y[2];
  st.v = y.segment<3>(3);
  st.spin = y.segment<3>(6);
  return st;
}

ForcedRotation forced_rotation(const Vec2& x0, double w, double g, double t) {
  const double x = w * t;
  const double c = std::cos(x), s = std::sin(x);
  const double a = x0[0], b = x0[1];
  ForcedRotation out;
  out.x[0] = c * a - s * b - g * t * sinc(x);
  out.x[1] = s * a + c * b - g * t * one_minus_cos_over(x);
  out.integral = a * t * sinc(x) - b * t * one_minus_cos_over(x) - g * t * t * one_minus_cos_over2(x);
  return out;
}

// --- 3D strip rolling ---------------------------------------------------------------

std::vector<KappaPiece> stadium_profile(double flat_length, double radius) {
  if (!(flat_length > 0.0) || !(radius > 0.0)) fail(ErrorKind::Domain, "stadium profile needs positive sizes");
  const double arc = kPi * radius;
  return {{flat_length, 0.0}, {arc, -1.0 / radius}, {flat_length, 0.0}, {arc, -1.0 / radius}};
}

std::vector<KappaPiece> circle_profile(double radius) {
  if (!(radius > 0.0)) fail(ErrorKind::Domain, "circle profile needs a positive radius");
  return {{2.0 * kPi * radius, -1.0 / radius}};
}

void cylinder3d_rhs(const VecX& y, VecX& dy, double eta, double g, double kappa) {
  dy.resize(5);
  const double v1 = y[2], v2 = y[3], s = y[4];
  dy[0] = v1;
  dy[1] = v2;
  dy[2] = 0.0;
  dy[3] = -eta * v1 * kappa * s - g;
  dy[4] = eta * v1 * kappa * v2;
}

namespace {

struct ProfileCursor {
  const std::vector<KappaPiece>& profile;
  double total = 0.0;
  int piece = 0;
  double offset = 0.0;  // distance from the start of `piece`

  ProfileCursor(const std::vector<KappaPiece>& p, double pos, double u) : profile(p) {
    if (p.empty()) fail(ErrorKind::Domain, "empty curvature profile");
    for (const auto& k : p) {
      if (!(k.length > 0.0)) fail(ErrorKind::Domain, "profile pieces need positive length");
      total += k.length;
    }
    double w = std::fmod(pos, total);
    if (w < 0.0) w += total;
    while (piece < static_cast<int>(p.size()) - 1 && w >= p[piece].length) {
      w -= p[piece].length;
      ++piece;
    }
    offset = std::min(w, p[piece].length);
    if (u < 0.0 && offset == 0.0) retreat();
  }

  double remaining(double u) const { return u > 0.0 ? profile[piece].length - offset : offset; }
  void advance() {
    piece = (piece + 1) % static_cast<int>(profile.size());
    offset = 0.0;
  }
  void retreat() {
    piece = (piece + static_cast<int>(profile.size()) - 1) % static_cast<int>(profile.size());
    offset = profile[piece].length;
  }
};

void require_moving(double u) {
  if (!(u != 0.0) || !std::isfinite(u)) fail(ErrorKind::Domain, "transversal speed u must be nonzero");
}

}  // namespace

StripSolution strip_closed_form(const std::vector<KappaPiece>& profile, double eta, double u, double g, double v2_0,
                                double s0, double t, double pos0) {
  require_moving(u);
  if (!(t >= 0.0)) fail(ErrorKind::Domain, "strip_closed_form needs t >= 0");
  ProfileCursor cur(profile, pos0, u);
  StripSolution out{v2_0, s0, 0.0, pos0};
  double left = t;
  while (left > 0.0) {
    const double piece_t = cur.remaining(u) / std::abs(u);
    const double dt = std::min(piece_t, left);
    const double w = eta * u * profile[cur.piece].kappa;
    const ForcedRotation fr = forced_rotation({out.v2, out.s}, w, g, dt);
    out.v2 = fr.x[0];
    out.s = fr.x[1];
    out.height += fr.integral;
    out.pos += u * dt;
    left -= dt;
    if (dt == piece_t) {
      u > 0.0 ? cur.advance() : cur.retreat();
    } else {
      cur.offset += (u > 0.0 ? 1.0 : -1.0) * dt * std::abs(u);
    }
  }
  return out;
}

StripSolution integrate_strip(const std::vector<KappaPiece>& profile, double eta, double u, double g, double v2_0,
                              double s0, double t, const IntegratorConfig& cfg, double pos0,
                              const std::function<void(double, const StripSolution&)>& sample, double sample_dt) {
  require_moving(u);
  ProfileCursor cur(profile, pos0, u);
  VecX y(5);
  y << pos0, 0.0, u, v2_0, s0;
  double now = 0.0;
  long next = 0;
  auto to_solution = [](const VecX& z) { return StripSolution{z[3], z[4], z[1], z[0]}; };
  while (now < t) {
    const double piece_t = cur.remaining(u) / std::abs(u);
    const double t_end = std::min(now + piece_t, t);
    const double kappa = profile[cur.piece].kappa;
    Rhs rhs = [&](double, const VecX& z, VecX& dz) { cylinder3d_rhs(z, dz, eta, g, kappa); };
    StepObserver obs;
    if (sample && sample_dt > 0.0) {
      obs = [&](const DenseStep& d) {
        while (next * sample_dt <= d.t_valid) {
          const double ts = next * sample_dt;
          if (ts >= d.t0) sample(ts, to_solution(d(ts)));
          ++next;
        }
      };
    }
    y = integrate(rhs, now, y, t_end, cfg, obs).y;
    if (t_end == now + piece_t) {
      u > 0.0 ? cur.advance() : cur.retreat();
    } else {
      cur.offset += (u > 0.0 ? 1.0 : -1.0) * (t_end - now) * std::abs(u);
    }
    now = t_end;
  }
  return to_solution(y);
}

// --- edge passes ------------------------------------------------------------------------

EdgeMap edge_map_flat(const VecX& v_bar, const VecX& W, double v_n, const InertiaParams& inertia, double r) {
  if (!(v_n > 0.0)) fail(ErrorKind::Domain, "edge_map_flat needs v_n > 0");
  if (!(r > 0.0)) fail(ErrorKind::Domain, "edge_map_flat needs r > 0");
  if (v_bar.size() != W.size()) fail(ErrorKind::Domain, "edge_map_flat: v_bar and W differ in size");
  const double th = kPi * inertia.eta();
  const double c = std::cos(th), s = std::sin(th);
  return {-v_n, c * v_bar + s * W, s * v_bar - c * W, kPi * r / v_n};
}

EdgeView edge_view(const RollState& j) {
  if (j.region != Region::Curved) fail(ErrorKind::Domain, "edge_view needs a junction state");
  const double sg = side_sign(junction_side(j.phi));
  return {sg * j.v[0], {j.v[1], j.v[2]}, {-sg * j.spin[0], -sg * j.spin[1]}, j.spin[2]};
}

RollState junction_state(const EdgeView& view, Region side, int loop, double s, double x3) {
  const double sg = side_sign(side);
  RollState st;
  st.region = Region::Curved;
  st.loop = loop;
  st.s = s;
  st.phi = side == Region::FlatPlus ? 0.0 : kPi;
  st.x3 = x3;
  st.v = {sg * view.v_hat, view.v_bar[0], view.v_bar[1]};
  st.spin = {-sg * view.W[0], -sg * view.W[1], view.s_bar};
  return st;
}

EdgePass edge_pass(const TubeChart& chart, const InertiaParams& inertia, double g, const RollState& entry,
                   double max_time, const IntegratorConfig& cfg) {
  if (entry.region != Region::Curved) fail(ErrorKind::Domain, "edge_pass needs a curved-part state");
  long unused = 0;
  const LegResult leg = curved_leg(chart, inertia.eta(), g, entry, 0.0, max_time, cfg, true, {}, 0.0, unused);
  if (leg.outcome == LegResult::Outcome::Corner) fail(ErrorKind::Corner, leg.message);
  EdgePass out;
  out.exit = leg.state;
  out.dwell = leg.t;
  out.distance = std::abs(leg.travel);
  out.completed = leg.outcome == LegResult::Outcome::Flat;
  out.friendly = out.completed && junction_side(leg.state.phi) == junction_side(entry.phi);
  return out;
}

std::vector<LimitRow> noslip_limit_check(double eta, const CrossSection& section, int loop, double s,
                                         const Vec3& u, const Mat3& S, const std::vector<double>& radii,
                                         const IntegratorConfig& cfg, double g) {
  const InertiaParams rolling = InertiaParams::from_eta(eta);
  const InertiaParams noslip = InertiaParams::from_gamma(match_inertia(eta));
  const BoundaryPoint where = section.at(loop, s);
  const Vec3 e1(where.e1.x(), where.e1.y(), 0.0);
  if (!(u.dot(e1) > 0.0)) fail(ErrorKind::Domain, "incoming velocity must point toward the wall");

  NoSlipState3D ns;
  ns.x << where.point, 0.0;
  ns.u = u;
  ns.S = S;
  const NoSlipState3D want = collide_3d(ns, -e1, noslip);

  RollState flat;
  flat.region = Region::FlatPlus;
  flat.p = where.point;
  flat.v = u;
  flat.spin = spin_components(S);
  const RollState entry = enter_curved(flat, where);

  std::vector<LimitRow> rows;
  for (double r : radii) {
    const TubeChart chart(section, r);
    const EdgePass pass = edge_pass(chart, rolling, g, entry, 1e3 * r / u.dot(e1) + 1.0, cfg);
    LimitRow row;
    row.r = r;
    row.dwell = pass.dwell;
    row.friendly = pass.friendly || !pass.completed;
    if (!row.friendly) {
      const RollState out = leave_curved(pass.exit, section);
      const double dv = (out.v - want.u).squaredNorm();
      const double ds = (out.spin - spin_components(want.S)).squaredNorm();
      row.deviation = std::sqrt(dv + ds);
    } else {
      row.deviation = std::numeric_limits<double>::quiet_NaN();
    }
    rows.push_back(row);
  }
  return rows;
}

// --- hybrid simulation ------------------------------------------------------------------

RollTrajectory simulate_roll4d(const TubeChart& chart, const InertiaParams& inertia, double g,
                               const RollState& initial, const RollRun& run) {
  run.integrator.validate();
  if (!(run.horizon >= 0.0)) fail(ErrorKind::Domain, "horizon must be non-negative");
  if (!(g >= 0.0)) fail(ErrorKind::Domain, "gravity must be non-negative");
  const CrossSection& section = chart.section();
  const double eta = inertia.eta();

  RollState st = initial;
  if (st.region == Region::Curved) {
    if (st.loop < 0 || st.loop >= static_cast<int>(section.loops().size()))
      fail(ErrorKind::Domain, "loop index out of range");
    if (!(st.phi >= 0.0 && st.phi <= kPi)) fail(ErrorKind::Domain, "phi must lie in [0, pi]");
  } else if (!section.contains(st.p, 1e-12)) {
    fail(ErrorKind::Domain, "flat-part start outside the cross-section");
  }

  RollTrajectory traj;
  long next_sample = 0;
  const double dt = run.sample_dt;
  SampleFn sample = [&](double t, const RollState& s) {
    if (t <= run.horizon * (1.0 + 1e-14)) traj.samples.push_back({t, s});
  };

  double t = 0.0;
  while (true) {
    if (static_cast<long>(traj.transitions.size()) >= run.max_transitions) {
      traj.termination = Termination::Timeout;
      traj.message = "transition budget exhausted";
      break;
    }
    if (st.region != Region::Curved) {
      const Vec2 vh = st.v.head<2>();
      const double left = run.horizon - t;
      std::optional<BoundaryHit> hit;
      if (vh.squaredNorm() > 0.0 && left > 0.0) hit = section.first_exit(st.p, vh, left);
      const double T = hit ? hit->t : std::max(left, 0.0);
      const RollState base = st;
      auto at = [&](double tau) {
        RollState s = base;
        s.p = base.p + tau * vh;
        s.x3 = base.x3 + tau * base.v[2] - 0.5 * g * tau * tau;
        s.v[2] = base.v[2] - g * tau;
        return s;
      };
      if (dt > 0.0) {
        while (next_sample * dt <= t + T) {
          const double ts = next_sample * dt;
          sample(ts, at(ts - t));
          ++next_sample;
        }
      }
      st = at(T);
      t += T;
      if (!hit) {
        traj.termination = Termination::Horizon;
        break;
      }
      if (hit->corner) {
        traj.termination = Termination::Corner;
        traj.message = "flat motion reached a corner of the cross-section";
        break;
      }
      const Region from = st.region;
      st = enter_curved(st, hit->where);
      traj.transitions.push_back({t, from, Region::Curved, st.loop, st.s, hit->where.point});
      continue;
    }

    const LegResult leg =
        curved_leg(chart, eta, g, st, t, run.horizon, run.integrator, run.exact_straight_edges, sample, dt, next_sample);
    st = leg.state;
    t = leg.t;
    if (leg.outcome == LegResult::Outcome::Corner) {
      traj.termination = Termination::Corner;
      traj.message = leg.message;
      break;
    }
    if (leg.outcome == LegResult::Outcome::End) {
      traj.termination = Termination::Horizon;
      break;
    }
    st = leave_curved(st, section);
    traj.transitions.push_back({t, Region::Curved, st.region, st.loop, st.s, st.p});
    if (t >= run.horizon) {
      traj.termination = Termination::Horizon;
      break;
    }
  }
  traj.final_state = st;
  traj.t_final = t;
  return traj;
}

}  // namespace nhb
