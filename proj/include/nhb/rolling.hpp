#pragma once

// Nonholonomic rolling of a ball of radius r on the tube N_r around a
// cylinder P = C x R, and on the 2D tube around a vertical strip.
//
// Frame components. On the curved part the adapted frame is X1 = tau,
// X2 = e2(s), X3 = e3 and S_ij = X_j . (S X_i), so
//   v = v1 X1 + v2 X2 + v3 X3,   spin = (S12, S13, S23).
// On the flat parts the same names hold in the Cartesian frame (E1, E2, E3)
// of the hyperplane containing P. At the junctions phi = 0 (N+) and
// phi = pi (N-) the frame restricted to R^3 is (+-e1, e2, e3).

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "nhb/geometry.hpp"
#include "nhb/inertia.hpp"
#include "nhb/integrate.hpp"
#include "nhb/linalg.hpp"
#include "nhb/noslip.hpp"

namespace nhb {

using Vec9 = Eigen::Matrix<double, 9, 1>;

struct RollState {
  Region region = Region::Curved;
  int loop = 0;
  double s = 0.0;    // curved part only
  double phi = 0.0;  // curved part only
  double x3 = 0.0;
  Vec2 p = Vec2::Zero();  // flat parts: (x1, x2) of the center
  Vec3 v = Vec3::Zero();
  Vec3 spin = Vec3::Zero();  // (S12, S13, S23)
};

Energies energy_monitor(const RollState& state, double g);

/// Skew matrix M with M(j,i) = S_(i+1)(j+1) for i < j, i.e. spin = (M(1,0), M(2,0), M(2,1)).
Mat3 spin_matrix(const Vec3& spin);
Vec3 spin_components(const Mat3& M);

/// Frame (X1, X2, X3) restricted to R^3 at a junction, as matrix columns.
Mat3 junction_frame(const BoundaryPoint& where, Region side);

/// Flat state -> curved state sitting on the junction at `where`.
RollState enter_curved(const RollState& flat, const BoundaryPoint& where);
/// Curved state on a junction (phi = 0 or pi) -> flat state.
RollState leave_curved(const RollState& curved, const CrossSection& section);

/// Center of the ball in R^4.
Vec4 center(const TubeChart& chart, const RollState& state);

/// (s, phi, x3, v1, v2, v3, S12, S13, S23) for the curved part at curvature kappa.
Vec9 cylinder4d_field(const Vec9& y, double kappa, double eta, double r, double g);
/// Derivatives of a curved-part state; throws FocalPoint when 1 - r kappa sin(phi) <= 0.
Vec9 cylinder4d_rhs(const RollState& state, const InertiaParams& inertia, double g, const TubeChart& chart);

Vec9 pack(const RollState& state);
RollState unpack(const Vec9& y, int loop);

// --- linear rotation with constant forcing ------------------------------------

struct ForcedRotation {
  Vec2 x;
  double integral;  // integral of x[0] over [0, t]
};

/// Solution of X' = w J X - (g, 0) after time t.
ForcedRotation forced_rotation(const Vec2& x0, double w, double g, double t);

// --- 3D rolling on the tube around a vertical strip ----------------------------

struct KappaPiece {
  double length;
  double kappa;
};

/// Flat of length L, half-circle of radius r, flat, half-circle.
std::vector<KappaPiece> stadium_profile(double flat_length, double radius);
/// Circular cylinder of radius rho: constant kappa = -1/rho.
std::vector<KappaPiece> circle_profile(double radius);

/// y = (pos, height, v1, v2, s): pos' = v1, height' = v2,
/// v1' = 0, v2' = -eta v1 kappa s - g, s' = eta v1 kappa v2.
void cylinder3d_rhs(const VecX& y, VecX& dy, double eta, double g, double kappa);

struct StripSolution {
  double v2 = 0.0;
  double s = 0.0;
  double height = 0.0;
  double pos = 0.0;
};

/// Piecewise closed form along a cyclic kappa profile, starting at arclength pos0.
StripSolution strip_closed_form(const std::vector<KappaPiece>& profile, double eta, double u, double g, double v2_0,
                                double s0, double t, double pos0 = 0.0);

/// Adaptive integration of cylinder3d_rhs, restarted at every curvature jump.
StripSolution integrate_strip(const std::vector<KappaPiece>& profile, double eta, double u, double g, double v2_0,
                              double s0, double t, const IntegratorConfig& cfg, double pos0 = 0.0,
                              const std::function<void(double, const StripSolution&)>& sample = {},
                              double sample_dt = 0.0);

// --- edge passes -----------------------------------------------------------------

struct EdgeMap {
  double v_hat;  // outgoing normal speed, negative (away from the edge)
  VecX v_bar;
  VecX W;
  double T;
};

/// Exit of a pass around a straight edge, reinterpreted on the far side:
/// (v_hat, v_bar, W) -> (-v_hat, c v_bar + s W, s v_bar - c W) with c, s = cos, sin(pi eta).
EdgeMap edge_map_flat(const VecX& v_bar, const VecX& W, double v_n, const InertiaParams& inertia, double r);

/// The no-slip quantities (u_hat along the outward normal, u_bar, W, s_bar) read off a
/// junction state: u_hat = v.(+-X1), u_bar = (v2, v3), W = -(S12, S13), s_bar = S23,
/// all in the fixed frame (e1, e2, e3) of the boundary point.
struct EdgeView {
  double v_hat;
  Vec2 v_bar;
  Vec2 W;
  double s_bar;
};

EdgeView edge_view(const RollState& junction);
RollState junction_state(const EdgeView& view, Region side, int loop, double s, double x3);

struct EdgePass {
  RollState exit;
  double dwell = 0.0;
  double distance = 0.0;  // arclength along the rim between entry and exit
  bool friendly = false;  // came back to the side it entered from
  bool completed = false;
};

/// Integrate a curved-part state from a junction until it reaches a flat part.
EdgePass edge_pass(const TubeChart& chart, const InertiaParams& inertia, double g, const RollState& entry,
                   double max_time, const IntegratorConfig& cfg);

struct LimitRow {
  double r = 0.0;
  double deviation = 0.0;
  double dwell = 0.0;
  bool friendly = false;
};

/// Compare rim passes of shrinking balls against the no-slip map with the matched gamma.
/// `incoming` is a 3D no-slip state at a boundary point of the cylinder over `section`
/// (the state need not sit exactly on the wall; only the boundary point matters).
std::vector<LimitRow> noslip_limit_check(double eta, const CrossSection& section, int loop, double s,
                                         const Vec3& u, const Mat3& S, const std::vector<double>& radii,
                                         const IntegratorConfig& cfg, double g = 0.0);

// --- hybrid 4D simulation ----------------------------------------------------------

struct RollRun {
  double horizon = 10.0;
  double sample_dt = 0.0;  // 0 disables uniform sampling
  long max_transitions = 10'000'000;
  bool exact_straight_edges = true;  // closed form on kappa = 0 rims
  IntegratorConfig integrator;
};

struct RollSample {
  double t;
  RollState state;
};

struct RollTransition {
  double t;
  Region from;
  Region to;
  int loop;
  double s;
  Vec2 point;  // junction point on the boundary of C
};

struct RollTrajectory {
  std::vector<RollSample> samples;
  std::vector<RollTransition> transitions;
  RollState final_state;
  double t_final = 0.0;
  Termination termination = Termination::Horizon;
  std::string message;
};

RollTrajectory simulate_roll4d(const TubeChart& chart, const InertiaParams& inertia, double g,
                               const RollState& initial, const RollRun& run);

}  // namespace nhb
