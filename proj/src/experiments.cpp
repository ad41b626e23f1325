#include "nhb/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <numeric>

#include "nhb/errors.hpp"

namespace nhb {

namespace {

// Runs f(i) for i in [0, n) on separate tasks; results are stored by index.
template <typename T, typename F>
std::vector<T> parallel_map(std::size_t n, F f) {
  std::vector<std::future<T>> futs;
  futs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) futs.push_back(std::async(std::launch::async, f, i));
  std::vector<T> out;
  out.reserve(n);
  for (auto& fu : futs) out.push_back(fu.get());
  return out;
}

void require_positive(double x, const char* what) {
  if (!(x > 0.0) || !std::isfinite(x)) fail(ErrorKind::Domain, std::string(what) + " must be positive");
}

HeightSeries height_series(const RollTrajectory& tr, double parameter, double dt) {
  HeightSeries hs;
  hs.parameter = parameter;
  hs.t.reserve(tr.samples.size());
  hs.x3.reserve(tr.samples.size());
  for (const auto& s : tr.samples) {
    hs.t.push_back(s.t);
    hs.x3.push_back(s.state.x3);
  }
  hs.transitions = static_cast<long>(tr.transitions.size());
  hs.report = detect_bounded(hs.x3, dt);
  return hs;
}

double range_of(std::span<const double> x) {
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  return *hi - *lo;
}

}  // namespace

std::string to_string(Boundedness b) {
  switch (b) {
    case Boundedness::Bounded: return "bounded";
    case Boundedness::Unbounded: return "unbounded";
    case Boundedness::Inconclusive: return "inconclusive";
  }
  return "?";
}

std::string to_string(EdgeExit e) {
  switch (e) {
    case EdgeExit::Through: return "through";
    case EdgeExit::Friendly: return "friendly";
    case EdgeExit::Stuck: return "stuck";
    case EdgeExit::Outside: return "outside";
  }
  return "?";
}

BoundedReport detect_bounded(std::span<const double> x, double dt, double tol) {
  BoundedReport rep;
  const std::size_t n = x.size();
  if (n < 8 || !(dt > 0.0) || !std::all_of(x.begin(), x.end(), [](double v) { return std::isfinite(v); }))
    return rep;
  rep.env_min.resize(n);
  rep.env_max.resize(n);
  double lo = x[0], hi = x[0];
  for (std::size_t i = 0; i < n; ++i) {
    lo = std::min(lo, x[i]);
    hi = std::max(hi, x[i]);
    rep.env_min[i] = lo;
    rep.env_max[i] = hi;
  }
  rep.min = lo;
  rep.max = hi;
  const std::size_t half = n / 2;
  rep.range_first = range_of(x.subspan(0, half));
  rep.range_second = range_of(x.subspan(half));
  rep.status = rep.range_second <= rep.range_first * (1.0 + tol) ? Boundedness::Bounded : Boundedness::Unbounded;

  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
  std::vector<double> ups;
  for (std::size_t i = 1; i < n; ++i) {
    const double a = x[i - 1] - mean, b = x[i] - mean;
    if (a < 0.0 && b >= 0.0) ups.push_back(dt * (static_cast<double>(i - 1) + a / (a - b)));
  }
  if (ups.size() >= 2) rep.period = (ups.back() - ups.front()) / static_cast<double>(ups.size() - 1);
  return rep;
}

CausticClusters caustic_clusters(std::span<const double> distances, double merge_tol) {
  CausticClusters cc;
  if (distances.empty()) return cc;
  std::vector<double> d(distances.begin(), distances.end());
  std::sort(d.begin(), d.end());
  const std::size_t n = d.size();
  auto stats = [&](std::size_t a, std::size_t b) {
    double m = 0.0;
    for (std::size_t i = a; i < b; ++i) m += d[i];
    m /= static_cast<double>(b - a);
    double ss = 0.0;
    for (std::size_t i = a; i < b; ++i) ss += (d[i] - m) * (d[i] - m);
    return std::pair{m, ss};
  };
  std::size_t best = 0;
  double best_ss = stats(0, n).second;
  for (std::size_t k = 1; k < n; ++k) {
    const double ss = stats(0, k).second + stats(k, n).second;
    if (ss < best_ss) {
      best_ss = ss;
      best = k;
    }
  }
  auto add = [&](std::size_t a, std::size_t b) {
    cc.centers.push_back(stats(a, b).first);
    cc.spreads.push_back(d[b - 1] - d[a]);
    cc.sizes.push_back(static_cast<int>(b - a));
  };
  if (best > 0 && std::abs(stats(0, best).first - stats(best, n).first) > merge_tol) {
    add(0, best);
    add(best, n);
  } else {
    add(0, n);
  }
  cc.count = static_cast<int>(cc.centers.size());
  return cc;
}

std::vector<double> chord_distances(const NoSlipTrajectory& traj, const Vec2& center) {
  std::vector<double> out;
  for (std::size_t k = 1; k < traj.events.size(); ++k) {
    const Vec2 a = traj.events[k - 1].x.head<2>();
    const Vec2 b = traj.events[k].x.head<2>();
    if ((b - a).norm() > 0.0) out.push_back(chord_distance(a, b, center));
  }
  return out;
}

// --- two plates --------------------------------------------------------------------

RollState two_plates_initial(const TwoPlatesSpec& spec) {
  require_positive(spec.L, "plate separation L");
  const CrossSection strip = CrossSection::strip(spec.L);
  const BoundaryPoint left = strip.at(1, 0.0);
  const Mat3 Q = junction_frame(left, Region::FlatPlus);
  RollState st;
  st.region = Region::FlatPlus;
  st.p = Vec2::Zero();
  st.x3 = spec.x3;
  st.v = Q * Vec3(spec.v1, spec.v2, spec.v3);
  st.spin = spin_components(Q * spin_matrix(Vec3(spec.S12, spec.S13, spec.S23)) * Q.transpose());
  return st;
}

std::vector<HeightSeries> run_two_plates_height(const TwoPlatesSpec& spec) {
  require_positive(spec.r, "ball radius r");
  require_positive(spec.sample_dt, "sample_dt");
  const TubeChart chart(CrossSection::strip(spec.L), spec.r);
  const RollState init = two_plates_initial(spec);
  return parallel_map<HeightSeries>(spec.etas.size(), [&](std::size_t i) {
    RollRun run;
    run.horizon = spec.horizon;
    run.sample_dt = spec.sample_dt;
    run.integrator = spec.integrator;
    const auto tr = simulate_roll4d(chart, InertiaParams::from_eta(spec.etas[i]), spec.g, init, run);
    return height_series(tr, spec.etas[i], spec.sample_dt);
  });
}

RadiusLimitResult run_radius_limit(const RadiusLimitSpec& spec) {
  TwoPlatesSpec base = spec.base;
  base.etas = {spec.eta};
  std::vector<HeightSeries> series = parallel_map<HeightSeries>(spec.radii.size(), [&](std::size_t i) {
    TwoPlatesSpec s = base;
    s.r = spec.radii[i];
    HeightSeries hs = run_two_plates_height(s).front();
    hs.parameter = spec.radii[i];
    return hs;
  });
  RadiusLimitResult res;
  res.series = std::move(series);
  res.monotone = true;
  for (std::size_t k = 1; k < res.series.size(); ++k) {
    const auto& a = res.series[k - 1].x3;
    const auto& b = res.series[k].x3;
    const std::size_t m = std::min(a.size(), b.size());
    double sup = 0.0;
    for (std::size_t i = 0; i < m; ++i) sup = std::max(sup, std::abs(a[i] - b[i]));
    if (!res.sup_diffs.empty() && !(sup < res.sup_diffs.back())) res.monotone = false;
    res.sup_diffs.push_back(sup);
  }

  // The same start as a 2D no-slip billiard in the (x1, x3) plane.
  const RollState init = two_plates_initial(base);
  NoSlipState2D ns;
  ns.x = {init.p.x(), init.x3};
  ns.u = {init.v[0], init.v[2]};
  ns.s = init.spin[1];
  NoSlipRun run;
  run.n_events = 100'000'000;
  run.horizon = base.horizon;
  const auto traj = billiard_trajectory_2d(CrossSection::strip(base.L), InertiaParams::from_gamma(match_inertia(spec.eta)),
                                           base.g, ns, run);
  if (!res.series.empty()) {
    const auto& finest = res.series.back();
    for (std::size_t i = 0; i < finest.t.size(); ++i) {
      const double x3 = trajectory_state_at(traj, finest.t[i]).first[1];
      res.noslip_x3.push_back(x3);
      res.noslip_sup_diff = std::max(res.noslip_sup_diff, std::abs(x3 - finest.x3[i]));
    }
  }
  return res;
}

// --- edge portrait --------------------------------------------------------------------

EdgePortrait run_edge_portrait(const EdgePortraitSpec& spec) {
  require_positive(spec.R, "cross-section radius R");
  require_positive(spec.r, "ball radius r");
  require_positive(spec.speed, "speed");
  if (spec.grid < 2) fail(ErrorKind::Domain, "portrait grid needs at least 2 points per axis");
  const TubeChart chart(CrossSection::disc(spec.R), spec.r);
  const InertiaParams in = InertiaParams::from_eta(spec.eta);
  const int n = spec.grid;
  const double rho = spec.speed;
  auto coord = [&](int k) { return rho * (-1.0 + 2.0 * k / (n - 1)); };

  auto rows = parallel_map<std::vector<PortraitCell>>(static_cast<std::size_t>(n), [&](std::size_t i) {
    std::vector<PortraitCell> row;
    for (int j = 0; j < n; ++j) {
      PortraitCell c;
      c.S12 = coord(static_cast<int>(i));
      c.v2 = coord(j);
      const double q = rho * rho - c.v2 * c.v2 - c.S12 * c.S12;
      if (q <= 1e-12 * rho * rho) {
        row.push_back(c);
        continue;
      }
      RollState entry;
      entry.region = Region::Curved;
      entry.phi = 0.0;
      entry.v = {std::sqrt(q), c.v2, 0.0};
      entry.spin = {c.S12, 0.0, 0.0};
      const EdgePass pass = edge_pass(chart, in, 0.0, entry, spec.max_time, spec.integrator);
      c.dwell = pass.dwell;
      c.distance = pass.distance;
      c.exit = !pass.completed ? EdgeExit::Stuck : pass.friendly ? EdgeExit::Friendly : EdgeExit::Through;
      row.push_back(c);
    }
    return row;
  });
  EdgePortrait p;
  p.grid = n;
  for (auto& row : rows) p.cells.insert(p.cells.end(), row.begin(), row.end());
  return p;
}

// --- caustics and height ----------------------------------------------------------------

RollState caustic_initial(const CausticSpec& spec) {
  require_positive(spec.R, "cross-section radius R");
  RollState st;
  st.region = Region::FlatPlus;
  st.p = {spec.R, 0.0};
  st.v = spec.v_init;
  st.spin = {spec.S21, spec.S31, spec.S32};
  return st;
}

CausticResult run_caustic_and_height(const CausticSpec& spec) {
  require_positive(spec.r, "ball radius r");
  require_positive(spec.sample_dt, "sample_dt");
  const TubeChart chart(CrossSection::disc(spec.R), spec.r);
  RollRun run;
  run.horizon = spec.horizon;
  run.sample_dt = spec.sample_dt;
  run.integrator = spec.integrator;
  const RollState init = caustic_initial(spec);
  CausticResult res;
  res.trajectory = simulate_roll4d(chart, InertiaParams::from_eta(spec.eta), spec.g, init, run);
  for (const auto& s : res.trajectory.samples) {
    res.t.push_back(s.t);
    res.x3.push_back(s.state.x3);
    res.planar.push_back(center(chart, s.state).head<2>());
  }
  // Flat legs run from a transition onto a flat part (or the start) to the next one off it.
  Vec2 start = init.p;
  bool on_flat = true;
  for (const auto& tr : res.trajectory.transitions) {
    if (tr.to == Region::Curved && on_flat) {
      if ((tr.point - start).norm() > 1e-12) res.chords.push_back(chord_distance(start, tr.point));
      on_flat = false;
    } else if (tr.from == Region::Curved) {
      start = tr.point;
      on_flat = true;
    }
  }
  res.clusters = caustic_clusters(res.chords, spec.merge_tol * spec.R);
  res.report = detect_bounded(res.x3, spec.sample_dt);
  return res;
}

CausticClusters noslip_disc_caustics(double gamma, const NoSlipState2D& start, int collisions, double merge_tol,
                                     std::vector<double>* distances) {
  NoSlipRun run;
  run.n_events = collisions;
  const auto traj = billiard_trajectory_2d(CrossSection::disc(1.0), InertiaParams::from_gamma(gamma), 0.0, start, run);
  std::vector<double> d = chord_distances(traj);
  if (distances) *distances = d;
  return caustic_clusters(d, merge_tol);
}

// --- zig-zag fall -----------------------------------------------------------------------

NoSlipState3D zigzag_initial(const ZigzagSpec& spec, double scale) {
  require_positive(spec.R, "cylinder radius R");
  const Vec3 nu(-1.0, 0.0, 0.0);
  const TangentBasis b = tangent_basis(nu);
  Decomposition3D d;
  d.u_hat = spec.normal * scale;
  d.u_bar = {spec.tangential, 0.0};
  d.s_bar = spec.spin;
  d.W = spec.rolling_start ? Vec2(spec.gamma * spec.tangential, 0.0) : Vec2::Zero();
  const auto [S, u] = recompose_3d(d, nu, b);
  NoSlipState3D st;
  st.x = {spec.R, 0.0, 0.0};
  st.u = u;
  st.S = S;
  return st;
}

std::vector<ZigzagRun> run_zigzag_fall(const ZigzagSpec& spec) {
  require_positive(spec.sample_dt, "sample_dt");
  require_positive(spec.horizon, "horizon");
  const Domain3D dom = Domain3D::cylinder(CrossSection::disc(spec.R));
  const InertiaParams in = InertiaParams::from_gamma(spec.gamma);
  return parallel_map<ZigzagRun>(spec.scales.size(), [&](std::size_t i) {
    ZigzagRun zr;
    zr.scale = spec.scales[i];
    const NoSlipState3D init = zigzag_initial(spec, zr.scale);
    if (spec.gamma > 0.0) zr.rolling_impact = rolling_impact(init, init.x, dom, in, 1e-10);
    NoSlipRun run;
    run.n_events = 100'000'000;
    run.horizon = spec.horizon;
    const auto traj = billiard_trajectory_3d(dom, in, spec.g, init, run);
    zr.collisions = static_cast<long>(traj.events.size()) - 1;
    zr.termination = traj.termination;
    const double t_end = traj.termination == Termination::Horizon || traj.termination == Termination::Completed
                             ? spec.horizon
                             : traj.events.back().t;
    const long n = static_cast<long>(std::floor(t_end / spec.sample_dt + 1e-9));
    for (long k = 0; k <= n; ++k) {
      const double t = k * spec.sample_dt;
      zr.t.push_back(t);
      zr.x3.push_back(trajectory_state_at(traj, t).first[2]);
    }
    if (zr.t.size() >= 3) {
      const double T = zr.t.back();
      zr.descent_rate = -(zr.x3.back() - zr.x3.front()) / T;
      Eigen::MatrixXd A(zr.t.size(), 3);
      Eigen::VectorXd y(zr.t.size());
      for (std::size_t k = 0; k < zr.t.size(); ++k) {
        A(k, 0) = 1.0;
        A(k, 1) = zr.t[k];
        A(k, 2) = zr.t[k] * zr.t[k];
        y[k] = zr.x3[k];
      }
      const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
      zr.amplitude = std::sqrt((A * c - y).squaredNorm() / static_cast<double>(zr.t.size()));
    }
    return zr;
  });
}

// --- tables -----------------------------------------------------------------------------

Table height_table(const std::vector<HeightSeries>& series, const std::string& parameter) {
  Table t;
  t.columns = {parameter, "t", "x3"};
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.t.size(); ++i) t.rows.push_back({s.parameter, s.t[i], s.x3[i]});
  return t;
}

Table portrait_table(const EdgePortrait& p) {
  Table t;
  t.columns = {"v2", "S12", "dwell", "distance", "exit"};
  for (const auto& c : p.cells)
    t.rows.push_back({c.v2, c.S12, c.dwell, c.distance, static_cast<double>(static_cast<int>(c.exit))});
  return t;
}

Table caustic_table(const CausticResult& c) {
  Table t;
  t.columns = {"t", "x3", "x1", "x2", "region"};
  const auto& smp = c.trajectory.samples;
  for (std::size_t i = 0; i < smp.size(); ++i)
    t.rows.push_back({smp[i].t, smp[i].state.x3, c.planar[i].x(), c.planar[i].y(),
                      static_cast<double>(region_code(smp[i].state.region))});
  return t;
}

Table zigzag_table(const std::vector<ZigzagRun>& runs) {
  Table t;
  t.columns = {"scale", "t", "x3"};
  for (const auto& r : runs)
    for (std::size_t i = 0; i < r.t.size(); ++i) t.rows.push_back({r.scale, r.t[i], r.x3[i]});
  return t;
}

}  // namespace nhb
