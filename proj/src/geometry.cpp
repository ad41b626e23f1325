#include "nhb/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "nhb/errors.hpp"

namespace nhb {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

void require_positive(double x, const char* what) {
  if (!std::isfinite(x) || x <= 0.0) {
    std::ostringstream os;
    os << what << " must be positive and finite, got " << x;
    fail(ErrorKind::Domain, os.str());
  }
}

BoundaryLoop loop_of(std::vector<Segment> segs) {
  BoundaryLoop l;
  l.segments = std::move(segs);
  return l;
}

double horner(std::span<const double> c, double x) {
  double acc = 0.0;
  for (auto it = c.rbegin(); it != c.rend(); ++it) acc = acc * x + *it;
  return acc;
}

double bisect(std::span<const double> c, double x0, double x1, double f0) {
  for (int i = 0; i < 400; ++i) {
    const double mid = 0.5 * (x0 + x1);
    if (mid <= x0 || mid >= x1) break;
    const double fm = horner(c, mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (f0 < 0.0)) {
      x0 = mid;
      f0 = fm;
    } else {
      x1 = mid;
    }
  }
  return 0.5 * (x0 + x1);
}

// Arc parameter of a point, wrapped to [0, 2 pi radius).
double arc_param(const Segment& seg, const Vec2& q) {
  const Vec2 d = q - seg.center;
  const double th = std::atan2(d.y(), d.x());
  double t = seg.sense * (th - seg.theta0) * seg.radius;
  const double full = kTwoPi * seg.radius;
  t = std::fmod(t, full);
  if (t < 0.0) t += full;
  return t;
}

// Parameter of the point of `seg` closest to p.
double closest_param(const Segment& seg, const Vec2& p) {
  if (seg.kind == Segment::Kind::Line) {
    const double t = (p - seg.origin).dot(seg.dir);
    return seg.unbounded ? t : std::clamp(t, 0.0, seg.length);
  }
  if ((p - seg.center).norm() == 0.0) return 0.0;
  const double t = arc_param(seg, p);
  if (t <= seg.length) return t;
  const double d0 = (seg.point(0.0) - p).norm();
  const double d1 = (seg.point(seg.length) - p).norm();
  return d0 <= d1 ? 0.0 : seg.length;
}

// Motion x(t) = p + v t + a t^2/2 against one segment: candidate times and parameters.
struct Crossing {
  double t;
  double param;
};

std::vector<Crossing> crossings(const Segment& seg, const Vec2& p, const Vec2& v, const Vec2& a,
                                double t_max) {
  std::vector<double> coeffs;
  if (seg.kind == Segment::Kind::Line) {
    const Vec2 n = seg.e1(0.0);
    coeffs = {n.dot(p - seg.origin), n.dot(v), 0.5 * n.dot(a)};
  } else {
    const Vec2 d = p - seg.center;
    coeffs = {d.squaredNorm() - seg.radius * seg.radius, 2.0 * d.dot(v), v.squaredNorm() + d.dot(a),
              v.dot(a), 0.25 * a.squaredNorm()};
  }
  std::vector<Crossing> out;
  for (double t : poly_roots_in(coeffs, 0.0, t_max)) {
    if (t <= 0.0) continue;
    const Vec2 q = p + t * v + 0.5 * t * t * a;
    double param;
    if (seg.kind == Segment::Kind::Line) {
      param = (q - seg.origin).dot(seg.dir);
    } else {
      param = arc_param(seg, q);
      const double full = kTwoPi * seg.radius;
      if (param > seg.length && full - param <= CrossSection::kCornerTol) param -= full;
    }
    if (!seg.unbounded &&
        (param < -CrossSection::kCornerTol || param > seg.length + CrossSection::kCornerTol))
      continue;
    out.push_back({t, param});
  }
  return out;
}

}  // namespace

// --- Segment ----------------------------------------------------------------

Segment Segment::line(const Vec2& from, const Vec2& to) {
  const double len = (to - from).norm();
  require_positive(len, "segment length");
  Segment s;
  s.kind = Kind::Line;
  s.origin = from;
  s.dir = (to - from) / len;
  s.length = len;
  return s;
}

Segment Segment::infinite_line(const Vec2& origin, const Vec2& dir) {
  require_positive(dir.norm(), "line direction norm");
  Segment s;
  s.kind = Kind::Line;
  s.origin = origin;
  s.dir = dir.normalized();
  s.unbounded = true;
  s.length = kInf;
  return s;
}

Segment Segment::arc(const Vec2& center, double radius, double theta0, double sweep) {
  require_positive(radius, "arc radius");
  if (!std::isfinite(sweep) || sweep == 0.0 || std::abs(sweep) > kTwoPi)
    fail(ErrorKind::Domain, "arc sweep must be nonzero with magnitude at most 2 pi");
  Segment s;
  s.kind = Kind::Arc;
  s.center = center;
  s.radius = radius;
  s.theta0 = theta0;
  s.sense = sweep > 0.0 ? 1 : -1;
  s.length = radius * std::abs(sweep);
  return s;
}

double Segment::angle(double t) const { return theta0 + sense * t / radius; }

Vec2 Segment::point(double t) const {
  if (kind == Kind::Line) return origin + t * dir;
  const double th = angle(t);
  return center + radius * Vec2(std::cos(th), std::sin(th));
}

Vec2 Segment::e2(double t) const {
  if (kind == Kind::Line) return dir;
  const double th = angle(t);
  return sense * Vec2(-std::sin(th), std::cos(th));
}

Vec2 Segment::e1(double t) const {
  if (kind == Kind::Line) return {dir.y(), -dir.x()};
  const double th = angle(t);
  return sense * Vec2(std::cos(th), std::sin(th));
}

double Segment::kappa() const { return kind == Kind::Line ? 0.0 : -sense / radius; }

// --- BoundaryLoop -----------------------------------------------------------

double BoundaryLoop::wrap(double s) const {
  if (!closed || !std::isfinite(length)) return s;
  double w = std::fmod(s, length);
  if (w < 0.0) w += length;
  return w;
}

int BoundaryLoop::segment_at(double s) const {
  const auto it = std::upper_bound(offsets.begin(), offsets.end(), s);
  const int i = static_cast<int>(it - offsets.begin()) - 1;
  return std::clamp(i, 0, static_cast<int>(segments.size()) - 1);
}

// --- CrossSection -----------------------------------------------------------

std::string to_string(SectionKind kind) {
  switch (kind) {
    case SectionKind::Disc: return "disc";
    case SectionKind::Strip: return "strip";
    case SectionKind::Stadium: return "stadium";
    case SectionKind::SinaiSquare: return "sinai_square";
    case SectionKind::SinaiTorus: return "sinai_torus";
    case SectionKind::Polyline: return "polyline";
  }
  return "unknown";
}

void CrossSection::finalize() {
  constexpr double kJoinTol = 1e-9;
  Eigen::AlignedBox2d box;
  bool bounded = true;
  for (auto& loop : loops_) {
    if (loop.segments.empty()) fail(ErrorKind::Domain, "boundary loop without segments");
    const std::size_t n = loop.segments.size();
    loop.offsets.assign(n, 0.0);
    loop.smooth_start.assign(n, false);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const Segment& seg = loop.segments[i];
      loop.offsets[i] = acc;
      acc += seg.length;
      if (seg.unbounded) {
        bounded = false;
        if (n != 1) fail(ErrorKind::Domain, "an unbounded line must form its own loop");
        continue;
      }
      box.extend(seg.point(0.0));
      box.extend(seg.point(seg.length));
      if (seg.kind == Segment::Kind::Arc) {
        box.extend(seg.center + seg.radius * Vec2::Ones());
        box.extend(seg.center - seg.radius * Vec2::Ones());
      }
      if (i > 0) {
        const Segment& prev = loop.segments[i - 1];
        if ((prev.point(prev.length) - seg.point(0.0)).norm() > kJoinTol)
          fail(ErrorKind::Domain, "consecutive boundary segments do not join");
      }
    }
    loop.length = acc;
    const Segment& first = loop.segments.front();
    const Segment& last = loop.segments.back();
    loop.closed = !first.unbounded && (last.point(last.length) - first.point(0.0)).norm() <= kJoinTol;
    if (!first.unbounded && !loop.closed) fail(ErrorKind::Domain, "bounded boundary loops must close");
    for (std::size_t i = 0; i < n; ++i) {
      if (loop.segments[i].unbounded) continue;
      const Segment& prev = loop.segments[(i + n - 1) % n];
      const Segment& cur = loop.segments[i];
      const Vec2 a = prev.e2(prev.length);
      const Vec2 b = cur.e2(0.0);
      loop.smooth_start[i] = a.dot(b) > 0.0 && std::abs(a.x() * b.y() - a.y() * b.x()) < kJoinTol;
    }
  }
  if (bounded) {
    scale_ = box.diagonal().norm();
  } else if (!params_.empty()) {
    scale_ = params_.front();
  }
}

CrossSection CrossSection::disc(double radius) {
  require_positive(radius, "disc radius");
  CrossSection cs;
  cs.kind_ = SectionKind::Disc;
  cs.params_ = {radius};
  cs.loops_.push_back(loop_of({Segment::arc(Vec2::Zero(), radius, 0.0, kTwoPi)}));
  cs.finalize();
  return cs;
}

CrossSection CrossSection::strip(double width) {
  require_positive(width, "strip width");
  CrossSection cs;
  cs.kind_ = SectionKind::Strip;
  cs.params_ = {width};
  cs.loops_.push_back(loop_of({Segment::infinite_line({0.5 * width, 0.0}, {0.0, 1.0})}));
  cs.loops_.push_back(loop_of({Segment::infinite_line({-0.5 * width, 0.0}, {0.0, -1.0})}));
  cs.finalize();
  return cs;
}

CrossSection CrossSection::stadium(double straight_length, double radius) {
  require_positive(radius, "stadium radius");
  if (!std::isfinite(straight_length) || straight_length < 0.0)
    fail(ErrorKind::Domain, "stadium straight length must be >= 0");
  CrossSection cs;
  cs.kind_ = SectionKind::Stadium;
  cs.params_ = {straight_length, radius};
  const double h = 0.5 * straight_length;
  const double pi = std::numbers::pi;
  std::vector<Segment> segs;
  if (straight_length > 0.0) segs.push_back(Segment::line({-h, -radius}, {h, -radius}));
  segs.push_back(Segment::arc({h, 0.0}, radius, -0.5 * pi, pi));
  if (straight_length > 0.0) segs.push_back(Segment::line({h, radius}, {-h, radius}));
  segs.push_back(Segment::arc({-h, 0.0}, radius, 0.5 * pi, pi));
  cs.loops_.push_back(loop_of(std::move(segs)));
  cs.finalize();
  return cs;
}

CrossSection CrossSection::sinai_square(double half_width, double scatterer_radius) {
  require_positive(half_width, "square half width");
  require_positive(scatterer_radius, "scatterer radius");
  if (scatterer_radius >= half_width) fail(ErrorKind::Domain, "scatterer must fit inside the square");
  CrossSection cs;
  cs.kind_ = SectionKind::SinaiSquare;
  cs.params_ = {half_width, scatterer_radius};
  const double a = half_width;
  cs.loops_.push_back(loop_of({Segment::line({-a, -a}, {a, -a}), Segment::line({a, -a}, {a, a}),
                               Segment::line({a, a}, {-a, a}), Segment::line({-a, a}, {-a, -a})}));
  cs.loops_.push_back(loop_of({Segment::arc(Vec2::Zero(), scatterer_radius, 0.0, -kTwoPi)}));
  cs.finalize();
  return cs;
}

CrossSection CrossSection::sinai_torus(double half_width, double scatterer_radius) {
  require_positive(half_width, "torus half width");
  require_positive(scatterer_radius, "scatterer radius");
  if (scatterer_radius >= half_width) fail(ErrorKind::Domain, "scatterer must fit inside the torus cell");
  CrossSection cs;
  cs.kind_ = SectionKind::SinaiTorus;
  cs.params_ = {half_width, scatterer_radius};
  cs.period_ = half_width;
  cs.loops_.push_back(loop_of({Segment::arc(Vec2::Zero(), scatterer_radius, 0.0, -kTwoPi)}));
  cs.finalize();
  cs.scale_ = 2.0 * std::sqrt(2.0) * half_width;
  return cs;
}

CrossSection CrossSection::polyline(std::vector<std::vector<Segment>> loops) {
  if (loops.empty()) fail(ErrorKind::Domain, "polyline cross-section needs at least one loop");
  CrossSection cs;
  cs.kind_ = SectionKind::Polyline;
  for (auto& l : loops) cs.loops_.push_back(loop_of(std::move(l)));
  cs.finalize();
  return cs;
}

BoundaryPoint CrossSection::at(int loop, double s) const {
  if (loop < 0 || loop >= static_cast<int>(loops_.size())) fail(ErrorKind::Domain, "boundary loop index out of range");
  const BoundaryLoop& l = loops_[loop];
  BoundaryPoint bp;
  bp.loop = loop;
  bp.s = l.wrap(s);
  bp.segment = l.segment_at(bp.s);
  const Segment& seg = l.segments[bp.segment];
  const double t = bp.s - l.offsets[bp.segment];
  bp.point = seg.point(t);
  bp.e1 = seg.e1(t);
  bp.e2 = seg.e2(t);
  bp.kappa = seg.kappa();
  return bp;
}

double CrossSection::kappa(int loop, double s) const { return at(loop, s).kappa; }

Vec2 CrossSection::wrap(const Vec2& p) const {
  if (!period_) return p;
  const double a = *period_;
  Vec2 q = p;
  for (int i = 0; i < 2; ++i) q[i] -= 2.0 * a * std::floor((q[i] + a) / (2.0 * a));
  return q;
}

BoundaryPoint CrossSection::nearest(const Vec2& p_in) const {
  const Vec2 p = wrap(p_in);
  const double eps = 1e-12 * std::max(1.0, scale_);
  double best = kInf;
  double best_normal = -1.0;
  BoundaryPoint out;
  for (int li = 0; li < static_cast<int>(loops_.size()); ++li) {
    const BoundaryLoop& l = loops_[li];
    for (int si = 0; si < static_cast<int>(l.segments.size()); ++si) {
      const Segment& seg = l.segments[si];
      const double t = closest_param(seg, p);
      const Vec2 q = seg.point(t);
      const double d = (p - q).norm();
      const double normal = std::abs((p - q).dot(seg.e1(t)));
      if (d < best - eps || (d <= best + eps && normal > best_normal)) {
        best = std::min(best, d);
        best_normal = normal;
        out.loop = li;
        out.segment = si;
        out.s = l.offsets[si] + t;
        out.point = q;
        out.e1 = seg.e1(t);
        out.e2 = seg.e2(t);
        out.kappa = seg.kappa();
      }
    }
  }
  return out;
}

double CrossSection::signed_distance(const Vec2& p_in) const {
  const Vec2 p = wrap(p_in);
  const BoundaryPoint q = nearest(p);
  const double d = (p - q.point).norm();
  return (p - q.point).dot(q.e1) > 0.0 ? -d : d;
}

bool CrossSection::near_corner(int loop, int segment, double t) const {
  const BoundaryLoop& l = loops_[loop];
  const Segment& seg = l.segments[segment];
  if (seg.unbounded) return false;
  const int n = static_cast<int>(l.segments.size());
  if (t <= kCornerTol && !l.smooth_start[segment]) return true;
  if (t >= seg.length - kCornerTol) {
    if (!l.closed && segment == n - 1) return true;
    if (!l.smooth_start[(segment + 1) % n]) return true;
  }
  return false;
}

std::optional<BoundaryHit> CrossSection::first_exit_cell(const Vec2& p, const Vec2& v, const Vec2& a,
                                                         double t_max) const {
  std::optional<BoundaryHit> best;
  for (int li = 0; li < static_cast<int>(loops_.size()); ++li) {
    const BoundaryLoop& l = loops_[li];
    for (int si = 0; si < static_cast<int>(l.segments.size()); ++si) {
      const Segment& seg = l.segments[si];
      for (const Crossing& c : crossings(seg, p, v, a, t_max)) {
        if (best && c.t >= best->t) continue;
        const double t = seg.unbounded ? c.param : std::clamp(c.param, 0.0, seg.length);
        const Vec2 vel = v + c.t * a;
        if (vel.dot(seg.e1(t)) <= 0.0) continue;
        BoundaryHit h;
        h.t = c.t;
        h.velocity = vel;
        h.where.loop = li;
        h.where.segment = si;
        h.where.s = l.offsets[si] + t;
        h.where.point = seg.point(t);
        h.where.e1 = seg.e1(t);
        h.where.e2 = seg.e2(t);
        h.where.kappa = seg.kappa();
        h.corner = near_corner(li, si, t);
        best = h;
      }
    }
  }
  return best;
}

std::optional<BoundaryHit> CrossSection::first_exit(const Vec2& p, const Vec2& v, double t_max) const {
  return first_exit(p, v, Vec2::Zero(), t_max);
}

std::optional<BoundaryHit> CrossSection::first_exit(const Vec2& p, const Vec2& v, const Vec2& a,
                                                    double t_max) const {
  if (!period_) return first_exit_cell(p, v, a, t_max);
  if (a.squaredNorm() != 0.0) fail(ErrorKind::Domain, "accelerated flight on a periodic cross-section");
  const double half = *period_;
  Vec2 pos = wrap(p);
  double elapsed = 0.0;
  while (elapsed < t_max) {
    double t_wall = kInf;
    int axis = -1;
    for (int i = 0; i < 2; ++i) {
      if (v[i] == 0.0) continue;
      const double ti = ((v[i] > 0.0 ? half : -half) - pos[i]) / v[i];
      if (ti < t_wall) {
        t_wall = std::max(ti, 0.0);
        axis = i;
      }
    }
    const double remaining = t_max - elapsed;
    auto hit = first_exit_cell(pos, v, Vec2::Zero(), std::min(t_wall, remaining));
    if (hit) {
      hit->t += elapsed;
      return hit;
    }
    if (axis < 0 || t_wall >= remaining) return std::nullopt;
    pos += t_wall * v;
    pos[axis] = v[axis] > 0.0 ? -half : half;
    elapsed += t_wall;
  }
  return std::nullopt;
}

BoundaryFrame2D boundary_data(const CrossSection& section, const Vec2& a, double tol) {
  const BoundaryPoint q = section.nearest(a);
  const double off = (section.wrap(a) - q.point).norm();
  if (off > tol * std::max(1.0, section.scale())) {
    std::ostringstream os;
    os << "point (" << a.x() << ", " << a.y() << ") is " << off << " away from the boundary";
    fail(ErrorKind::Domain, os.str());
  }
  const BoundaryLoop& l = section.loops()[q.loop];
  const Segment& seg = l.segments[q.segment];
  const double t = q.s - l.offsets[q.segment];
  const int n = static_cast<int>(l.segments.size());
  const bool corner = !seg.unbounded &&
                      ((t <= CrossSection::kCornerTol && !l.smooth_start[q.segment]) ||
                       (t >= seg.length - CrossSection::kCornerTol && !l.smooth_start[(q.segment + 1) % n]));
  if (corner) fail(ErrorKind::Corner, "boundary point is a corner");
  return {-q.e1, q.e2, q};
}

std::vector<double> poly_roots_in(std::span<const double> coeffs, double lo, double hi) {
  std::size_t n = coeffs.size();
  while (n > 0 && coeffs[n - 1] == 0.0) --n;
  const std::span<const double> c = coeffs.first(n);
  if (n <= 1 || !(lo <= hi)) return {};
  if (n == 2) {
    const double r = -c[0] / c[1];
    if (r >= lo && r <= hi) return {r};
    return {};
  }
  std::vector<double> d(n - 1);
  for (std::size_t k = 1; k < n; ++k) d[k - 1] = static_cast<double>(k) * c[k];
  std::vector<double> pts{lo};
  for (double x : poly_roots_in(d, lo, hi))
    if (x > pts.back()) pts.push_back(x);
  if (hi > pts.back()) pts.push_back(hi);

  std::vector<double> roots;
  auto push = [&](double x) {
    if (roots.empty() || x > roots.back()) roots.push_back(x);
  };
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const double f0 = horner(c, pts[i]);
    const double f1 = horner(c, pts[i + 1]);
    if (f0 == 0.0) {
      push(pts[i]);
    } else if ((f0 < 0.0) != (f1 < 0.0) && f1 != 0.0) {
      push(bisect(c, pts[i], pts[i + 1], f0));
    }
  }
  if (horner(c, pts.back()) == 0.0) push(pts.back());
  return roots;
}

// --- tube hypersurface ------------------------------------------------------

std::string to_string(Region region) {
  switch (region) {
    case Region::FlatPlus: return "flat+";
    case Region::FlatMinus: return "flat-";
    case Region::Curved: return "curved";
  }
  return "unknown";
}

int region_code(Region region) {
  switch (region) {
    case Region::FlatPlus: return 1;
    case Region::FlatMinus: return -1;
    case Region::Curved: return 0;
  }
  return 0;
}

CurvatureFactors curvature_factors(double kappa, double phi, double r) {
  const double den = 1.0 - r * kappa * std::sin(phi);
  if (!(den > 0.0)) {
    std::ostringstream os;
    os << "focal point: 1 - r*kappa*sin(phi) = " << den;
    fail(ErrorKind::FocalPoint, os.str());
  }
  return {kappa * std::cos(phi) / den, kappa * std::sin(phi) / den};
}

ShapeEigen shape_eigen(Region region, double kappa, double phi, double r) {
  if (region != Region::Curved) return {0.0, 0.0, 0.0};
  require_positive(r, "ball radius");
  return {-1.0 / r, curvature_factors(kappa, phi, r).f_s, 0.0};
}

TubeChart::TubeChart(CrossSection section, double r) : section_(std::move(section)), r_(r) {
  require_positive(r, "ball radius");
  for (const auto& loop : section_.loops()) {
    for (const auto& seg : loop.segments) {
      if (seg.kappa() > 0.0 && r * seg.kappa() >= 1.0) {
        std::ostringstream os;
        os << "focal point: ball radius " << r << " is not below the boundary radius of curvature "
           << 1.0 / seg.kappa();
        fail(ErrorKind::FocalPoint, os.str());
      }
    }
  }
}

namespace {

Vec4 lift(const Vec2& p) { return {p.x(), p.y(), 0.0, 0.0}; }

}  // namespace

Vec4 TubeChart::embed(int loop, double s, double phi, double x3) const {
  const BoundaryPoint bp = section_.at(loop, s);
  return lift(bp.point) + r_ * normal(loop, s, phi) + x3 * Vec4::UnitZ();
}

Vec4 TubeChart::normal(int loop, double s, double phi) const {
  const BoundaryPoint bp = section_.at(loop, s);
  return std::sin(phi) * lift(bp.e1) + std::cos(phi) * Vec4::UnitW();
}

Vec4 TubeChart::tau(int loop, double s, double phi) const {
  const BoundaryPoint bp = section_.at(loop, s);
  return std::cos(phi) * lift(bp.e1) - std::sin(phi) * Vec4::UnitW();
}

Vec4 TubeChart::x2(int loop, double s) const { return lift(section_.at(loop, s).e2); }

Vec4 TubeChart::normal_from_projection(const Vec4& x) const {
  const Vec2 y(x.x(), x.y());
  Vec4 foot(x.x(), x.y(), x.z(), 0.0);
  if (!section_.contains(y)) {
    const Vec2 q = section_.nearest(y).point;
    const Vec2 shift = y - section_.wrap(y);
    foot.head<2>() = q + shift;
  }
  const Vec4 d = x - foot;
  return d / d.norm();
}

Region TubeChart::classify(const Vec4& x) const {
  if (section_.contains({x.x(), x.y()})) return x.w() >= 0.0 ? Region::FlatPlus : Region::FlatMinus;
  return Region::Curved;
}

double FrameResiduals::max() const {
  return std::max({bracket, shape[0], shape[1], shape[2], connection, normal, embed_s, embed_phi, embed_x3});
}

namespace {

// Central difference, or a second-order one-sided stencil when x +- h leaves [lo, hi].
template <class F>
Vec4 diff(F f, double x, double h, double lo, double hi) {
  if (x - h >= lo && x + h <= hi) return (f(x + h) - f(x - h)) / (2.0 * h);
  if (x - h < lo) return (-3.0 * f(x) + 4.0 * f(x + h) - f(x + 2.0 * h)) / (2.0 * h);
  return (3.0 * f(x) - 4.0 * f(x - h) + f(x - 2.0 * h)) / (2.0 * h);
}

}  // namespace

FrameResiduals frame_check(const TubeChart& chart, int loop, double s, double phi, double x3, double h) {
  require_positive(h, "finite-difference step");
  if (phi < 0.0 || phi > std::numbers::pi) fail(ErrorKind::Domain, "phi must lie in [0, pi]");
  const double r = chart.r();
  const BoundaryPoint bp = chart.section().at(loop, s);
  const BoundaryLoop& l = chart.section().loops()[loop];
  const Segment& seg = l.segments[bp.segment];
  const double s_lo = seg.unbounded ? -kInf : l.offsets[bp.segment];
  const double s_hi = seg.unbounded ? kInf : l.offsets[bp.segment] + seg.length;
  // Stay on the segment containing s so that kappa is constant across the stencil.
  auto on_seg = [&](double ss) {
    const double t = ss - l.offsets[bp.segment];
    return std::pair<Vec2, Vec2>{seg.point(t), seg.e1(t)};
  };
  auto embed_s = [&](double ss) {
    auto [p, e1] = on_seg(ss);
    return Vec4(lift(p) + r * (std::sin(phi) * lift(e1) + std::cos(phi) * Vec4::UnitW()) + x3 * Vec4::UnitZ());
  };
  auto tau_s = [&](double ss) {
    auto [p, e1] = on_seg(ss);
    return Vec4(std::cos(phi) * lift(e1) - std::sin(phi) * Vec4::UnitW());
  };
  auto nu_s = [&](double ss) {
    auto [p, e1] = on_seg(ss);
    return Vec4(std::sin(phi) * lift(e1) + std::cos(phi) * Vec4::UnitW());
  };
  auto x2_s = [&](double ss) {
    const double t = ss - l.offsets[bp.segment];
    return lift(seg.e2(t));
  };
  const double pi = std::numbers::pi;
  auto nu_phi = [&](double p) { return chart.normal(loop, s, p); };
  auto embed_phi = [&](double p) { return chart.embed(loop, s, p, x3); };
  auto embed_x3 = [&](double z) { return chart.embed(loop, s, phi, z); };

  const CurvatureFactors f = curvature_factors(bp.kappa, phi, r);
  const ShapeEigen lam = shape_eigen(Region::Curved, bp.kappa, phi, r);
  const double hs = 1.0 / (1.0 - r * bp.kappa * std::sin(phi));
  const Vec4 X1 = chart.tau(loop, s, phi);
  const Vec4 X2 = chart.x2(loop, s);
  const Vec4 X3 = TubeChart::x3();

  FrameResiduals out;
  // [X1,X2] = D_{X1} X2 - D_{X2} X1; X2 does not depend on phi.
  const Vec4 d_x2_tau = hs * diff(tau_s, s, h, s_lo, s_hi);
  const Vec4 d_x1_x2 = diff([&](double) { return x2_s(s); }, phi, h, 0.0, pi) / r;
  out.bracket = ((d_x1_x2 - d_x2_tau) - f.f_c * X2).norm();

  const Vec4 s_x1 = -diff(nu_phi, phi, h, 0.0, pi) / r;
  const Vec4 s_x2 = -hs * diff(nu_s, s, h, s_lo, s_hi);
  const Vec4 s_x3 = Vec4::Zero();  // nu does not depend on x3
  out.shape[0] = (s_x1 - lam.l1 * X1).norm();
  out.shape[1] = (s_x2 - lam.l2 * X2).norm();
  out.shape[2] = (s_x3 - lam.l3 * X3).norm();

  const Vec4 nu = chart.normal(loop, s, phi);
  const Vec4 tangential = d_x2_tau - d_x2_tau.dot(nu) * nu;
  out.connection = (tangential + f.f_c * X2).norm();

  out.normal = (chart.normal_from_projection(chart.embed(loop, s, phi, x3)) - nu).norm();

  out.embed_s = std::abs(diff(embed_s, s, h, s_lo, s_hi).norm() - (1.0 - r * bp.kappa * std::sin(phi)));
  out.embed_phi = std::abs(diff(embed_phi, phi, h, 0.0, pi).norm() - r);
  out.embed_x3 = std::abs(diff(embed_x3, x3, h, -kInf, kInf).norm() - 1.0);
  return out;
}

}  // namespace nhb
