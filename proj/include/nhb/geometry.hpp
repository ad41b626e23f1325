#pragma once

// Planar cross-sections and the tube hypersurface built over them.
//
// Orientation convention (every downstream equation depends on it):
//   e2(s) = gamma'(s)           unit tangent of the arclength parametrization
//   e1(s) = -J e2(s)            unit normal pointing OUT of the region
//   d e1/ds = -kappa(s) e2(s)   so a disc of radius R has kappa = -1/R
// The billiard inward normal is nu = -e1.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nhb/linalg.hpp"

namespace nhb {

struct Segment {
  enum class Kind { Line, Arc };

  Kind kind = Kind::Line;
  // Line: origin + t*dir, t in [0,length] (t in R when unbounded).
  Vec2 origin = Vec2::Zero();
  Vec2 dir = Vec2::UnitY();
  bool unbounded = false;
  // Arc: center + radius*(cos th, sin th), th = theta0 + sense*t/radius.
  Vec2 center = Vec2::Zero();
  double radius = 0.0;
  double theta0 = 0.0;
  int sense = 1;

  double length = 0.0;

  static Segment line(const Vec2& from, const Vec2& to);
  static Segment infinite_line(const Vec2& origin, const Vec2& dir);
  /// `sweep` is signed: positive is counterclockwise.
  static Segment arc(const Vec2& center, double radius, double theta0, double sweep);

  Vec2 point(double t) const;
  Vec2 e2(double t) const;
  Vec2 e1(double t) const;
  double kappa() const;
  double angle(double t) const;
};

struct BoundaryLoop {
  std::vector<Segment> segments;
  std::vector<double> offsets;     // loop arclength at each segment start
  std::vector<bool> smooth_start;  // tangent continuous at the start of segment i
  double length = 0.0;
  bool closed = false;

  double wrap(double s) const;
  int segment_at(double s) const;
};

struct BoundaryPoint {
  int loop = 0;
  int segment = 0;
  double s = 0.0;  // loop arclength
  Vec2 point = Vec2::Zero();
  Vec2 e1 = Vec2::Zero();
  Vec2 e2 = Vec2::Zero();
  double kappa = 0.0;
};

struct BoundaryHit {
  double t = 0.0;
  BoundaryPoint where;
  Vec2 velocity = Vec2::Zero();  // velocity on arrival
  bool corner = false;
};

enum class SectionKind { Disc, Strip, Stadium, SinaiSquare, SinaiTorus, Polyline };

std::string to_string(SectionKind kind);

class CrossSection {
 public:
  static CrossSection disc(double radius);
  static CrossSection strip(double width);
  static CrossSection stadium(double straight_length, double radius);
  /// Square [-a,a]^2 with a circular scatterer of radius rho at the origin.
  static CrossSection sinai_square(double half_width, double scatterer_radius);
  /// Periodic square (a flat torus) with the scatterer removed.
  static CrossSection sinai_torus(double half_width, double scatterer_radius);
  /// Closed loops of consecutive line/arc pieces; the region lies on the -e1 side.
  static CrossSection polyline(std::vector<std::vector<Segment>> loops);

  SectionKind kind() const { return kind_; }
  const std::vector<BoundaryLoop>& loops() const { return loops_; }
  std::optional<double> period() const { return period_; }
  /// Shape parameters as given to the factory (R; L; straight,radius; a,rho).
  const std::vector<double>& parameters() const { return params_; }
  /// Length scale used to cap search steps.
  double scale() const { return scale_; }

  BoundaryPoint at(int loop, double s) const;
  double kappa(int loop, double s) const;
  Vec2 wrap(const Vec2& p) const;

  /// Positive inside the region.
  double signed_distance(const Vec2& p) const;
  bool contains(const Vec2& p, double tol = 0.0) const { return signed_distance(p) >= -tol; }
  BoundaryPoint nearest(const Vec2& p) const;

  /// First outward crossing of p + v t for t in (0, t_max].
  std::optional<BoundaryHit> first_exit(const Vec2& p, const Vec2& v, double t_max) const;
  /// First outward crossing of p + v t + a t^2/2 for t in (0, t_max].
  std::optional<BoundaryHit> first_exit(const Vec2& p, const Vec2& v, const Vec2& a, double t_max) const;

  /// Tolerance (absolute arclength) for declaring a hit at a non-smooth join.
  static constexpr double kCornerTol = 1e-9;

 private:
  CrossSection() = default;
  void finalize();
  bool near_corner(int loop, int segment, double t) const;
  std::optional<BoundaryHit> first_exit_cell(const Vec2& p, const Vec2& v, const Vec2& a, double t_max) const;

  SectionKind kind_ = SectionKind::Disc;
  std::vector<BoundaryLoop> loops_;
  std::optional<double> period_;
  std::vector<double> params_;
  double scale_ = 1.0;
};

struct BoundaryFrame2D {
  Vec2 nu;       // unit inward normal
  Vec2 tangent;  // boundary tangent e2; the 2D collision decomposition uses J nu = -e2
  BoundaryPoint where;
};

/// Inward normal and tangent at a regular boundary point; throws Corner at joins
/// that are not tangent-continuous and Domain when `a` is off the boundary.
BoundaryFrame2D boundary_data(const CrossSection& section, const Vec2& a, double tol = 1e-9);

/// All real roots of sum_k c[k] t^k in [lo, hi], ascending.
std::vector<double> poly_roots_in(std::span<const double> coeffs, double lo, double hi);

// --- tube hypersurface N_r over a cylinder P = C x R in R^4 -----------------

enum class Region { FlatPlus, FlatMinus, Curved };

std::string to_string(Region region);
int region_code(Region region);

struct CurvatureFactors {
  double f_c;
  double f_s;
};

/// f_c = k cos(phi)/(1 - r k sin(phi)), f_s = k sin(phi)/(1 - r k sin(phi)).
CurvatureFactors curvature_factors(double kappa, double phi, double r);

struct ShapeEigen {
  double l1, l2, l3;  // along X1 = tau, X2 = e2, X3 = e3
};

ShapeEigen shape_eigen(Region region, double kappa, double phi, double r);

class TubeChart {
 public:
  TubeChart(CrossSection section, double r);

  const CrossSection& section() const { return section_; }
  double r() const { return r_; }

  /// a(s,phi,x3) = gamma(s) + r [sin(phi) e1 + cos(phi) e4] + x3 e3
  Vec4 embed(int loop, double s, double phi, double x3) const;
  Vec4 normal(int loop, double s, double phi) const;
  Vec4 tau(int loop, double s, double phi) const;
  Vec4 x2(int loop, double s) const;
  static Vec4 x3() { return Vec4::UnitZ(); }

  /// Unit normal obtained by projecting an ambient point onto P.
  Vec4 normal_from_projection(const Vec4& x) const;
  Region classify(const Vec4& x) const;

 private:
  CrossSection section_;
  double r_;
};

struct FrameResiduals {
  double bracket = 0.0;     // |[X1,X2] - f_c X2|
  double shape[3] = {0.0, 0.0, 0.0};  // |S X_i - lambda_i X_i|
  double connection = 0.0;  // |nabla_{X2} X1 + f_c X2|
  double normal = 0.0;      // |nu_chart - (a - pi_P(a))/r|
  double embed_s = 0.0;     // ||da/ds| - (1 - r k sin(phi))|
  double embed_phi = 0.0;   // ||da/dphi| - r|
  double embed_x3 = 0.0;    // ||da/dx3| - 1|

  double max() const;
};

/// Finite-difference verification of the frame calculus at a chart point.
/// Uses second-order one-sided stencils at phi = 0, pi and at segment ends.
FrameResiduals frame_check(const TubeChart& chart, int loop, double s, double phi, double x3, double h);

}  // namespace nhb
