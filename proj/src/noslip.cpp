#include "nhb/noslip.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "nhb/errors.hpp"

namespace nhb {

namespace {

void require_transversal(double u_hat) {
  if (!(std::abs(u_hat) >= kGrazingTol)) {
    std::ostringstream os;
    os << "grazing contact: normal speed " << u_hat;
    fail(ErrorKind::Grazing, os.str());
  }
}

double energy_2d(const Vec2& x, const Vec2& u, double s, double g) {
  return 0.5 * (u.squaredNorm() + s * s) + g * x.y();
}

double energy_3d(const Vec3& x, const Vec3& u, const Mat3& S, double g) {
  return 0.5 * (u.squaredNorm() + half_trace_norm2(S)) + g * x.z();
}

MatX embed_spin_2d(double s) {
  MatX S(2, 2);
  S << 0.0, -s, s, 0.0;
  return S;
}

}  // namespace

TangentBasis tangent_basis(const Vec3& nu) {
  const Vec3 n = -nu;
  const Vec3 ref = std::abs(n.z()) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
  const Vec3 t2 = (ref - ref.dot(n) * n).normalized();
  return {t2.cross(n), t2};
}

Decomposition2D decompose_2d(const Vec2& u, double s, const Vec2& nu) {
  return {u.dot(nu), u.dot(quarter_turn(nu)), s};
}

Decomposition3D decompose_3d(const Vec3& u, const Mat3& S, const Vec3& nu, const TangentBasis& b) {
  const Vec3 w = S * nu;
  return {-vee(S).dot(nu), u.dot(nu), {u.dot(b.t1), u.dot(b.t2)}, {w.dot(b.t1), w.dot(b.t2)}};
}

std::pair<Mat3, Vec3> recompose_3d(const Decomposition3D& d, const Vec3& nu, const TangentBasis& b) {
  const Vec3 u = d.u_hat * nu + d.u_bar.x() * b.t1 + d.u_bar.y() * b.t2;
  const Vec3 w = d.W.x() * b.t1 + d.W.y() * b.t2;
  Mat3 S = d.s_bar * (b.t2 * b.t1.transpose() - b.t1 * b.t2.transpose());
  S += w * nu.transpose() - nu * w.transpose();
  return {S, u};
}

Decomposition2D collide_components_2d(const Decomposition2D& d, const InertiaParams& inertia) {
  const double c = inertia.c_beta();
  const double sb = inertia.s_beta();
  return {-d.u_hat, c * d.u_bar + sb * d.s, sb * d.u_bar - c * d.s};
}

Decomposition3D collide_components_3d(const Decomposition3D& d, const InertiaParams& inertia) {
  const double c = inertia.c_beta();
  const double sb = inertia.s_beta();
  return {d.s_bar, -d.u_hat, c * d.u_bar + sb * d.W, sb * d.u_bar - c * d.W};
}

NoSlipState2D collide_2d(const NoSlipState2D& state, const Vec2& nu, const InertiaParams& inertia) {
  const Decomposition2D d = decompose_2d(state.u, state.s, nu);
  require_transversal(d.u_hat);
  const Decomposition2D o = collide_components_2d(d, inertia);
  return {state.x, o.u_hat * nu + o.u_bar * quarter_turn(nu), o.s};
}

NoSlipState3D collide_3d(const NoSlipState3D& state, const Vec3& nu, const InertiaParams& inertia) {
  const TangentBasis b = tangent_basis(nu);
  const Decomposition3D d = decompose_3d(state.u, state.S, nu, b);
  require_transversal(d.u_hat);
  const auto [S, u] = recompose_3d(collide_components_3d(d, inertia), nu, b);
  return {state.x, u, S};
}

std::pair<MatX, VecX> collide_general(const MatX& S, const VecX& u, const VecX& nu, const InertiaParams& inertia) {
  const Eigen::Index n = u.size();
  if (n < 2 || nu.size() != n || S.rows() != n || S.cols() != n)
    fail(ErrorKind::Domain, "collide_general: inconsistent dimensions");
  if (std::abs(nu.norm() - 1.0) > 1e-12) fail(ErrorKind::Domain, "collide_general: normal is not a unit vector");
  const double c = inertia.c_beta();
  const double sb = inertia.s_beta();
  const MatX P = MatX::Identity(n, n) - nu * nu.transpose();
  const double u_hat = u.dot(nu);
  const VecX u_bar = P * u;
  const VecX W = S * nu;
  MatX S_out = P * S * P + wedge(nu, sb * u_bar - c * W);
  VecX u_out = -u_hat * nu + c * u_bar + sb * W;
  return {std::move(S_out), std::move(u_out)};
}

double kinetic_norm2_2d(const NoSlipState2D& state) { return state.u.squaredNorm() + state.s * state.s; }

// --- domains ----------------------------------------------------------------

Domain3D Domain3D::cylinder(CrossSection section) {
  Domain3D d;
  d.kind_ = Kind::Cylinder;
  d.section_ = std::move(section);
  return d;
}

Domain3D Domain3D::sphere(double radius) {
  if (!std::isfinite(radius) || radius <= 0.0) fail(ErrorKind::Domain, "sphere radius must be positive");
  Domain3D d;
  d.kind_ = Kind::Sphere;
  d.radius_ = radius;
  return d;
}

const CrossSection& Domain3D::section() const {
  if (!section_) fail(ErrorKind::Domain, "domain is not a cylinder");
  return *section_;
}

Vec3 Domain3D::inward_normal(const Vec3& a) const {
  if (kind_ == Kind::Sphere) return -a.normalized();
  const BoundaryFrame2D f = boundary_data(*section_, a.head<2>());
  return {f.nu.x(), f.nu.y(), 0.0};
}

bool Domain3D::contains(const Vec3& x, double tol) const {
  if (kind_ == Kind::Sphere) return x.norm() <= radius_ + tol;
  return section_->contains(x.head<2>(), tol);
}

std::optional<FlightHit2D> flight_2d(const CrossSection& section, const Vec2& x, const Vec2& u, double g,
                                     double t_max) {
  const auto hit = section.first_exit(x, u, Vec2(0.0, -g), t_max);
  if (!hit) return std::nullopt;
  return FlightHit2D{hit->t, hit->where.point, hit->velocity, -hit->where.e1, hit->corner};
}

std::optional<FlightHit3D> flight_3d(const Domain3D& domain, const Vec3& x, const Vec3& u, double g,
                                     double t_max) {
  if (domain.kind() == Domain3D::Kind::Cylinder) {
    const auto hit = domain.section().first_exit(x.head<2>(), u.head<2>(), t_max);
    if (!hit) return std::nullopt;
    const double t = hit->t;
    const Vec3 p(hit->where.point.x(), hit->where.point.y(), x.z() + u.z() * t - 0.5 * g * t * t);
    const Vec3 v(u.x(), u.y(), u.z() - g * t);
    const Vec3 nu(-hit->where.e1.x(), -hit->where.e1.y(), 0.0);
    return FlightHit3D{t, p, v, nu, hit->corner};
  }
  const double R = domain.radius();
  const Vec3 a(0.0, 0.0, -g);
  const double coeffs[] = {x.squaredNorm() - R * R, 2.0 * x.dot(u), u.squaredNorm() + x.dot(a), u.dot(a),
                           0.25 * a.squaredNorm()};
  for (double t : poly_roots_in(coeffs, 0.0, t_max)) {
    if (t <= 0.0) continue;
    const Vec3 p = x + t * u + 0.5 * t * t * a;
    const Vec3 v = u + t * a;
    if (v.dot(p) <= 0.0) continue;
    const Vec3 q = R * p.normalized();
    return FlightHit3D{t, q, v, -q / R, false};
  }
  return std::nullopt;
}

// --- trajectories -------------------------------------------------------------

std::string to_string(Termination termination) {
  switch (termination) {
    case Termination::Completed: return "completed";
    case Termination::Horizon: return "horizon";
    case Termination::Corner: return "corner";
    case Termination::Grazing: return "grazing";
    case Termination::Timeout: return "timeout";
  }
  return "unknown";
}

NoSlipTrajectory billiard_trajectory_2d(const CrossSection& section, const InertiaParams& inertia, double g,
                                        const NoSlipState2D& initial, const NoSlipRun& run) {
  NoSlipTrajectory traj;
  traj.dim = 2;
  traj.g = g;
  NoSlipEvent row0;
  row0.x = initial.x;
  row0.u = initial.u;
  row0.S = embed_spin_2d(initial.s);
  row0.energy = energy_2d(initial.x, initial.u, initial.s, g);
  traj.events.push_back(row0);

  NoSlipState2D state = initial;
  double t = 0.0;
  for (int k = 1; k <= run.n_events; ++k) {
    const auto hit = flight_2d(section, state.x, state.u, g, run.flight_max);
    if (!hit) {
      traj.termination = Termination::Timeout;
      traj.message = "no boundary event within flight_max";
      return traj;
    }
    if (t + hit->t > run.horizon) {
      traj.termination = Termination::Horizon;
      return traj;
    }
    if (hit->corner) {
      traj.termination = Termination::Corner;
      traj.message = "trajectory reached a corner";
      return traj;
    }
    NoSlipState2D out;
    try {
      out = collide_2d({hit->x, hit->u, state.s}, hit->nu, inertia);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Grazing) throw;
      traj.termination = Termination::Grazing;
      traj.message = e.what();
      return traj;
    }
    t += hit->t;
    state = out;
    const Decomposition2D d = decompose_2d(out.u, out.s, hit->nu);
    NoSlipEvent row;
    row.t = t;
    row.index = k;
    row.x = out.x;
    row.u = out.u;
    row.S = embed_spin_2d(out.s);
    row.u_hat = d.u_hat;
    row.u_bar = std::abs(d.u_bar);
    row.w = std::abs(out.s);
    row.energy = energy_2d(out.x, out.u, out.s, g);
    traj.events.push_back(row);
  }
  return traj;
}

NoSlipTrajectory billiard_trajectory_3d(const Domain3D& domain, const InertiaParams& inertia, double g,
                                        const NoSlipState3D& initial, const NoSlipRun& run) {
  if (skew_defect(initial.S) > 1e-12) fail(ErrorKind::Domain, "initial spin is not skew-symmetric");
  NoSlipTrajectory traj;
  traj.dim = 3;
  traj.g = g;
  NoSlipEvent row0;
  row0.x = initial.x;
  row0.u = initial.u;
  row0.S = initial.S;
  row0.energy = energy_3d(initial.x, initial.u, initial.S, g);
  traj.events.push_back(row0);

  NoSlipState3D state = initial;
  double t = 0.0;
  for (int k = 1; k <= run.n_events; ++k) {
    const auto hit = flight_3d(domain, state.x, state.u, g, run.flight_max);
    if (!hit) {
      traj.termination = Termination::Timeout;
      traj.message = "no boundary event within flight_max";
      return traj;
    }
    if (t + hit->t > run.horizon) {
      traj.termination = Termination::Horizon;
      return traj;
    }
    if (hit->corner) {
      traj.termination = Termination::Corner;
      traj.message = "trajectory reached a corner";
      return traj;
    }
    NoSlipState3D out;
    try {
      out = collide_3d({hit->x, hit->u, state.S}, hit->nu, inertia);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::Grazing) throw;
      traj.termination = Termination::Grazing;
      traj.message = e.what();
      return traj;
    }
    t += hit->t;
    state = out;
    const Decomposition3D d = decompose_3d(out.u, out.S, hit->nu, tangent_basis(hit->nu));
    NoSlipEvent row;
    row.t = t;
    row.index = k;
    row.x = out.x;
    row.u = out.u;
    row.S = out.S;
    row.u_hat = d.u_hat;
    row.u_bar = d.u_bar.norm();
    row.w = d.W.norm();
    row.s_bar = d.s_bar;
    row.energy = energy_3d(out.x, out.u, out.S, g);
    traj.events.push_back(row);
  }
  return traj;
}

std::pair<VecX, VecX> trajectory_state_at(const NoSlipTrajectory& traj, double t) {
  if (traj.events.empty()) fail(ErrorKind::Domain, "empty trajectory");
  auto it = std::upper_bound(traj.events.begin(), traj.events.end(), t,
                             [](double tt, const NoSlipEvent& e) { return tt < e.t; });
  if (it != traj.events.begin()) --it;
  const NoSlipEvent& e = *it;
  const double dt = t - e.t;
  VecX a = VecX::Zero(e.x.size());
  a[a.size() - 1] = -traj.g;
  return {e.x + dt * e.u + 0.5 * dt * dt * a, e.u + dt * a};
}

bool rolling_impact(const NoSlipState3D& state, const Vec3& contact, const Domain3D& domain,
                    const InertiaParams& inertia, double tol) {
  if (domain.kind() != Domain3D::Kind::Cylinder) fail(ErrorKind::Domain, "rolling impact is defined on cylinder walls");
  if (inertia.gamma() <= 0.0) fail(ErrorKind::Domain, "rolling impact needs gamma > 0");
  const Vec3 nu = domain.inward_normal(contact);
  const Vec3 tangent = tangent_basis(nu).t1;
  const Vec3 contact_velocity = state.u - state.S * nu / inertia.gamma();
  return std::abs(contact_velocity.dot(tangent)) < tol;
}

NoSlipState2D project_axis(const Domain3D& domain, const NoSlipState3D& state) {
  if (domain.kind() != Domain3D::Kind::Cylinder) fail(ErrorKind::Domain, "projection needs a cylinder domain");
  return {state.x.head<2>(), state.u.head<2>(), state.S(1, 0)};
}

double chord_distance(const Vec2& a, const Vec2& b, const Vec2& center) {
  const Vec2 d = b - a;
  const Vec2 p = a - center;
  return std::abs(p.x() * d.y() - p.y() * d.x()) / d.norm();
}

}  // namespace nhb
