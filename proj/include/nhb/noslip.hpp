#pragma once

// No-slip collision maps and billiard flows.
//
// Spin is stored as the scaled angular velocity S = r*gamma*U (entries have
// units of velocity); in 2D S = s J with J the positive quarter turn.
// Normals passed to collision maps point INTO the billiard region.
//
// Orientation note. In 2D the collision is decomposed along nu and tau = J nu,
// so that W = S nu = s tau and (u_hat, u_bar, s) transforms by
//   (u_hat, u_bar, s) -> (-u_hat, c u_bar + s_b s, s_b u_bar - c s).
// In 3D the tangent basis (t1, t2) of V_a satisfies t1 x t2 = -nu (the outward
// normal), and s_bar = omega . (-nu) where S = hat(omega).

#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "nhb/geometry.hpp"
#include "nhb/inertia.hpp"
#include "nhb/linalg.hpp"

namespace nhb {

constexpr double kGrazingTol = 1e-12;

struct NoSlipState2D {
  Vec2 x = Vec2::Zero();
  Vec2 u = Vec2::Zero();
  double s = 0.0;
};

struct NoSlipState3D {
  Vec3 x = Vec3::Zero();
  Vec3 u = Vec3::Zero();
  Mat3 S = Mat3::Zero();
};

struct Decomposition2D {
  double u_hat;  // u . nu
  double u_bar;  // u . (J nu)
  double s;
};

struct Decomposition3D {
  double s_bar;
  double u_hat;
  Vec2 u_bar;  // components along (t1, t2)
  Vec2 W;      // components of S nu along (t1, t2)
};

struct TangentBasis {
  Vec3 t1, t2;
};

/// Orthonormal basis of nu-perp with t1 x t2 = -nu; t2 = e3 when nu is horizontal.
TangentBasis tangent_basis(const Vec3& nu);

Decomposition2D decompose_2d(const Vec2& u, double s, const Vec2& nu);
Decomposition3D decompose_3d(const Vec3& u, const Mat3& S, const Vec3& nu, const TangentBasis& basis);
std::pair<Mat3, Vec3> recompose_3d(const Decomposition3D& d, const Vec3& nu, const TangentBasis& basis);

/// (u_hat, u_bar, s) -> (-u_hat, c u_bar + s_b s, s_b u_bar - c s).
Decomposition2D collide_components_2d(const Decomposition2D& d, const InertiaParams& inertia);
Decomposition3D collide_components_3d(const Decomposition3D& d, const InertiaParams& inertia);

/// Throws Grazing when |u . nu| < kGrazingTol.
NoSlipState2D collide_2d(const NoSlipState2D& state, const Vec2& nu, const InertiaParams& inertia);
NoSlipState3D collide_3d(const NoSlipState3D& state, const Vec3& nu, const InertiaParams& inertia);

/// C_a(S,u) for any n >= 2; throws Domain unless |nu| = 1 and S is n x n.
std::pair<MatX, VecX> collide_general(const MatX& S, const VecX& u, const VecX& nu, const InertiaParams& inertia);

/// Kinetic metric norm squared of (S,u) (twice the kinetic energy per unit mass).
double kinetic_norm2_2d(const NoSlipState2D& state);

// --- domains and flight -------------------------------------------------------

/// Region of admissible ball centers in R^3; gravity acts along -e3.
class Domain3D {
 public:
  enum class Kind { Cylinder, Sphere };

  static Domain3D cylinder(CrossSection section);
  static Domain3D sphere(double radius);

  Kind kind() const { return kind_; }
  const CrossSection& section() const;
  double radius() const { return radius_; }

  Vec3 inward_normal(const Vec3& a) const;
  bool contains(const Vec3& x, double tol = 0.0) const;

 private:
  Kind kind_ = Kind::Sphere;
  std::optional<CrossSection> section_;
  double radius_ = 0.0;
};

struct FlightHit2D {
  double t;
  Vec2 x;
  Vec2 u;
  Vec2 nu;
  bool corner;
};

struct FlightHit3D {
  double t;
  Vec3 x;
  Vec3 u;
  Vec3 nu;
  bool corner;
};

/// First boundary event of a flight with gravity g along -e2; nullopt when none within t_max.
std::optional<FlightHit2D> flight_2d(const CrossSection& section, const Vec2& x, const Vec2& u, double g,
                                     double t_max);
/// First boundary event of a flight with gravity g along -e3; nullopt when none within t_max.
std::optional<FlightHit3D> flight_3d(const Domain3D& domain, const Vec3& x, const Vec3& u, double g, double t_max);

// --- trajectories -------------------------------------------------------------

enum class Termination { Completed, Horizon, Corner, Grazing, Timeout };

std::string to_string(Termination termination);

struct NoSlipEvent {
  double t = 0.0;
  int index = 0;
  VecX x;  // position at the event (center of the ball)
  VecX u;  // outgoing velocity
  MatX S;  // outgoing spin
  double u_hat = 0.0;  // outgoing normal speed (0 on the initial row)
  double u_bar = 0.0;  // |u_bar|
  double w = 0.0;      // |W|
  double s_bar = 0.0;
  double energy = 0.0;  // kinetic energy per unit mass plus g * height
};

struct NoSlipTrajectory {
  int dim = 2;
  double g = 0.0;
  std::vector<NoSlipEvent> events;  // row 0 is the initial state
  Termination termination = Termination::Completed;
  std::string message;
};

struct NoSlipRun {
  int n_events = 100;
  double horizon = std::numeric_limits<double>::infinity();
  double flight_max = 1e6;
};

NoSlipTrajectory billiard_trajectory_2d(const CrossSection& section, const InertiaParams& inertia, double g,
                                        const NoSlipState2D& initial, const NoSlipRun& run);
NoSlipTrajectory billiard_trajectory_3d(const Domain3D& domain, const InertiaParams& inertia, double g,
                                        const NoSlipState3D& initial, const NoSlipRun& run);

/// Position and velocity at time t from a trajectory's event rows (piecewise parabolic).
std::pair<VecX, VecX> trajectory_state_at(const NoSlipTrajectory& traj, double t);

/// True when the ball's contact-point velocity has no component along the
/// cross-sectional tangent of a cylinder wall at `contact` (the ball center).
bool rolling_impact(const NoSlipState3D& state, const Vec3& contact, const Domain3D& domain,
                    const InertiaParams& inertia, double tol = 1e-10);

/// Cross-sectional state (Pi u, Pi S Pi) of a state in a cylinder domain.
NoSlipState2D project_axis(const Domain3D& domain, const NoSlipState3D& state);

/// Perpendicular distance from `center` to the line through a and b.
double chord_distance(const Vec2& a, const Vec2& b, const Vec2& center = Vec2::Zero());

}  // namespace nhb
