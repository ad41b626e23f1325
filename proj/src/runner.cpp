#include <algorithm>
#include <cmath>

#include "json.hpp"
#include "nhb/errors.hpp"
#include "nhb/io.hpp"

namespace nhb {

using nlohmann::json;

namespace {

int termination_code(Termination t) {
  switch (t) {
    case Termination::Corner:
    case Termination::Grazing: return exit_code(ErrorKind::Corner);
    case Termination::Timeout: return exit_code(ErrorKind::Timeout);
    default: return 0;
  }
}

json report_json(const BoundedReport& r) {
  json j = {{"status", to_string(r.status)}, {"range_first", r.range_first}, {"range_second", r.range_second},
            {"min", r.min}, {"max", r.max}};
  j["period"] = r.period ? json(*r.period) : json(nullptr);
  return j;
}

json clusters_json(const CausticClusters& c) {
  return {{"count", c.count}, {"centers", c.centers}, {"spreads", c.spreads}, {"sizes", c.sizes}};
}

std::vector<KappaPiece> roll3d_profile(const RunConfig& cfg) {
  const auto& g = cfg.geometry;
  if (g.kind == "strip") return stadium_profile(g.width, g.ball_radius);
  return circle_profile(g.radius + g.ball_radius);
}

double kappa_at(const std::vector<KappaPiece>& profile, double pos) {
  double total = 0.0;
  for (const auto& p : profile) total += p.length;
  double x = std::fmod(pos, total);
  if (x < 0.0) x += total;
  for (const auto& p : profile) {
    if (x < p.length) return p.kappa;
    x -= p.length;
  }
  return profile.back().kappa;
}

std::vector<Roll3DSample> roll3d_samples(const RunConfig& cfg) {
  const auto profile = roll3d_profile(cfg);
  const auto& in = cfg.roll3d;
  const double dt = cfg.run.sample_dt;
  const long n = static_cast<long>(std::floor(cfg.run.horizon / dt + 1e-9));
  StripSolution st{in.v2, in.s, in.height, in.pos};
  std::vector<Roll3DSample> out;
  out.push_back({0.0, st, kappa_at(profile, st.pos)});
  for (long k = 1; k <= n; ++k) {
    const StripSolution step = strip_closed_form(profile, cfg.inertia.eta(), in.u, cfg.g, st.v2, st.s, dt, st.pos);
    st = {step.v2, step.s, st.height + step.height, step.pos};
    out.push_back({k * dt, st, kappa_at(profile, st.pos)});
  }
  return out;
}

NoSlipState2D noslip2d_initial(const RunConfig& cfg) {
  const auto& in = cfg.noslip;
  return {Vec2(in.x[0], in.x[1]), Vec2(in.u[0], in.u[1]), in.spin[0]};
}

NoSlipState3D noslip3d_initial(const RunConfig& cfg) {
  const auto& in = cfg.noslip;
  NoSlipState3D st;
  st.x = {in.x[0], in.x[1], in.x[2]};
  st.u = {in.u[0], in.u[1], in.u[2]};
  st.S = Mat3::Zero();
  st.S(0, 1) = in.spin[0];
  st.S(0, 2) = in.spin[1];
  st.S(1, 2) = in.spin[2];
  st.S -= Mat3(st.S.transpose());
  return st;
}

Domain3D domain3d(const RunConfig& cfg) {
  if (cfg.geometry.kind == "sphere") return Domain3D::sphere(cfg.geometry.radius);
  return Domain3D::cylinder(make_section(cfg.geometry));
}

NoSlipTrajectory run_noslip(const RunConfig& cfg, int n_events) {
  NoSlipRun run;
  run.n_events = n_events;
  run.horizon = cfg.run.horizon;
  run.flight_max = cfg.run.flight_max;
  if (cfg.geometry.dim == 2) {
    const NoSlipState2D st = noslip2d_initial(cfg);
    const CrossSection section = make_section(cfg.geometry);
    if (!section.contains(st.x, 1e-12)) fail(ErrorKind::Domain, "initial position outside the billiard table");
    return billiard_trajectory_2d(section, cfg.inertia, cfg.g, st, run);
  }
  const NoSlipState3D st = noslip3d_initial(cfg);
  const Domain3D dom = domain3d(cfg);
  if (!dom.contains(st.x, 1e-12)) fail(ErrorKind::Domain, "initial position outside the billiard domain");
  return billiard_trajectory_3d(dom, cfg.inertia, cfg.g, st, run);
}

RollRun roll_run(const RunConfig& cfg) {
  RollRun run;
  run.horizon = cfg.run.horizon;
  run.sample_dt = cfg.run.sample_dt;
  run.max_transitions = cfg.run.max_transitions;
  run.exact_straight_edges = cfg.run.exact_straight_edges;
  run.integrator = cfg.integrator;
  return run;
}

struct Written {
  Table table;
  json summary;
  int code = 0;
};

Written run_experiment(const ExperimentConfig& e) {
  Written w;
  switch (e.kind) {
    case ExperimentKind::TwoPlates: {
      const auto series = run_two_plates_height(e.two_plates);
      w.table = height_table(series, "eta");
      json rows = json::array();
      for (const auto& s : series)
        rows.push_back({{"eta", s.parameter}, {"transitions", s.transitions}, {"report", report_json(s.report)}});
      w.summary["series"] = rows;
      break;
    }
    case ExperimentKind::RadiusLimit: {
      const auto res = run_radius_limit(e.radius_limit);
      w.table = height_table(res.series, "r");
      // The no-slip strip limit is stored as r = 0.
      const auto& last = res.series.back();
      for (std::size_t i = 0; i < res.noslip_x3.size() && i < last.t.size(); ++i)
        w.table.rows.push_back({0.0, last.t[i], res.noslip_x3[i]});
      w.summary = {{"sup_diffs", res.sup_diffs}, {"monotone", res.monotone}, {"noslip_sup_diff", res.noslip_sup_diff}};
      break;
    }
    case ExperimentKind::EdgePortrait: {
      const auto p = run_edge_portrait(e.portrait);
      w.table = portrait_table(p);
      int counts[4] = {0, 0, 0, 0};
      for (const auto& c : p.cells) ++counts[static_cast<int>(c.exit)];
      w.summary = {{"through", counts[0]}, {"friendly", counts[1]}, {"stuck", counts[2]}, {"outside", counts[3]},
                   {"exit_codes", "0 through, 1 friendly, 2 stuck, 3 outside the sphere"}};
      break;
    }
    case ExperimentKind::Caustic: {
      const auto c = run_caustic_and_height(e.caustic);
      w.table = caustic_table(c);
      w.summary = {{"clusters", clusters_json(c.clusters)},
                   {"height", report_json(c.report)},
                   {"chords", c.chords.size()},
                   {"termination", to_string(c.trajectory.termination)}};
      w.code = termination_code(c.trajectory.termination);
      break;
    }
    case ExperimentKind::Zigzag: {
      const auto runs = run_zigzag_fall(e.zigzag);
      w.table = zigzag_table(runs);
      json rows = json::array();
      for (const auto& r : runs) {
        rows.push_back({{"scale", r.scale},
                        {"descent_rate", r.descent_rate},
                        {"amplitude", r.amplitude},
                        {"rolling_impact", r.rolling_impact},
                        {"collisions", r.collisions},
                        {"termination", to_string(r.termination)}});
        w.code = std::max(w.code, termination_code(r.termination));
      }
      w.summary["runs"] = rows;
      break;
    }
  }
  return w;
}

double max_abs_diff(const VecX& a, const VecX& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

RunOutcome run_config(const RunConfig& cfg) {
  Written w;
  switch (cfg.mode) {
    case Mode::NoSlip: {
      const auto traj = run_noslip(cfg, cfg.run.n_events);
      w.table = noslip_trace_table(traj);
      double drift = 0.0;
      for (const auto& e : traj.events) drift = std::max(drift, std::abs(e.energy - traj.events[0].energy));
      w.summary = {{"termination", to_string(traj.termination)}, {"message", traj.message}, {"g", traj.g},
                   {"events", traj.events.size() - 1}, {"energy_drift", drift}};
      w.code = termination_code(traj.termination);
      break;
    }
    case Mode::Roll3D: {
      const auto samples = roll3d_samples(cfg);
      w.table = roll3d_trace_table(samples, cfg.g);
      std::vector<double> h;
      for (const auto& s : samples) h.push_back(s.state.height);
      w.summary = {{"height", report_json(detect_bounded(h, cfg.run.sample_dt))}};
      break;
    }
    case Mode::Roll4D: {
      const TubeChart chart(make_section(cfg.geometry), cfg.geometry.ball_radius);
      const auto traj = simulate_roll4d(chart, cfg.inertia, cfg.g, cfg.roll4d, roll_run(cfg));
      w.table = roll4d_trace_table(traj, cfg.g);
      std::vector<double> x3;
      for (const auto& s : traj.samples) x3.push_back(s.state.x3);
      w.summary = {{"termination", to_string(traj.termination)}, {"message", traj.message},
                   {"transitions", traj.transitions.size()}, {"t_final", traj.t_final},
                   {"height", report_json(detect_bounded(x3, cfg.run.sample_dt))}};
      w.code = termination_code(traj.termination);
      break;
    }
    case Mode::Experiment:
      w = run_experiment(*cfg.experiment);
      break;
  }
  RunOutcome out;
  out.summary = w.summary.dump();
  out.exit_code = w.code;
  const std::filesystem::path base = std::filesystem::path(cfg.out_dir) / output_stem(cfg);
  const std::filesystem::path csv = base.string() + ".csv";
  write_csv(csv, w.table, serialize_config(cfg, false), out.summary);
  out.files.push_back(csv);
  if (cfg.svg) {
    const std::filesystem::path svg = base.string() + ".svg";
    CsvDocument doc;
    doc.table = w.table;
    write_text(svg, svg_auto(doc, output_stem(cfg)));
    out.files.push_back(svg);
  }
  return out;
}

std::vector<CheckLine> run_checks(const RunConfig& cfg) {
  std::vector<CheckLine> lines;
  auto add = [&](const std::string& name, double value, double tol) {
    lines.push_back({name, value, tol, std::isfinite(value) && value <= tol});
  };

  switch (cfg.mode) {
    case Mode::NoSlip: {
      const int n = cfg.geometry.dim;
      const auto traj = run_noslip(cfg, cfg.run.n_events);
      const auto& ev = traj.events;
      VecX down = VecX::Zero(n);
      down[n - 1] = -1.0;
      double inv = 0.0, energy = 0.0, scale = 1.0;
      for (std::size_t k = 1; k < ev.size(); ++k) {
        const VecX u_in = ev[k - 1].u + cfg.g * (ev[k].t - ev[k - 1].t) * down;
        VecX nu(n);
        if (n == 2) {
          nu = boundary_data(make_section(cfg.geometry), ev[k].x.head<2>()).nu;
        } else {
          nu = domain3d(cfg).inward_normal(ev[k].x.head<3>());
        }
        const auto [S, u] = collide_general(ev[k].S, ev[k].u, nu, cfg.inertia);
        inv = std::max({inv, max_abs_diff(u, u_in), (S - ev[k - 1].S).cwiseAbs().maxCoeff()});
        energy = std::max(energy, std::abs(ev[k].energy - ev[0].energy));
        scale = std::max(scale, 0.5 * (ev[k].u.squaredNorm() + 0.5 * ev[k].S.squaredNorm()));
      }
      add("collision involution (incoming state recovered)", inv, 1e-10);
      add("energy drift over events", energy, 1e-12 * scale);

      // Reverse the incoming state at event m and retrace m - 1 events.
      const int m = std::min<int>(20, static_cast<int>(ev.size()) - 1);
      double rev = 0.0;
      if (m >= 2) {
        RunConfig back = cfg;
        const VecX u_in = ev[m - 1].u + cfg.g * (ev[m].t - ev[m - 1].t) * down;
        const MatX& S_in = ev[m - 1].S;
        back.noslip.x.assign(ev[m].x.data(), ev[m].x.data() + n);
        back.noslip.u.clear();
        for (int i = 0; i < n; ++i) back.noslip.u.push_back(-u_in[i]);
        if (n == 2) {
          back.noslip.spin = {-S_in(1, 0)};
        } else {
          back.noslip.spin = {-S_in(0, 1), -S_in(0, 2), -S_in(1, 2)};
        }
        back.run.horizon = std::numeric_limits<double>::infinity();
        const auto tr = run_noslip(back, m - 1);
        for (int j = 1; j < static_cast<int>(tr.events.size()); ++j)
          rev = std::max(rev, max_abs_diff(tr.events[j].x, ev[m - j].x));
        if (static_cast<int>(tr.events.size()) != m) rev = INFINITY;
      }
      add("time reversal (event positions, " + std::to_string(m) + " events)", rev, 1e-8);
      break;
    }
    case Mode::Roll3D: {
      const auto profile = roll3d_profile(cfg);
      const auto& in = cfg.roll3d;
      const double T = cfg.run.horizon;
      const double eta = cfg.inertia.eta();
      const auto exact = strip_closed_form(profile, eta, in.u, cfg.g, in.v2, in.s, T, in.pos);
      const auto num = integrate_strip(profile, eta, in.u, cfg.g, in.v2, in.s, T, cfg.integrator, in.pos);
      add("closed form vs integration (v2, s, height)",
          std::max({std::abs(exact.v2 - num.v2), std::abs(exact.s - num.s), std::abs(exact.height - num.height)}),
          1e-8 * std::max(1.0, T / 10.0));
      const auto samples = roll3d_samples(cfg);
      double drift = 0.0;
      auto energy = [&](const StripSolution& s) { return 0.5 * (s.v2 * s.v2 + s.s * s.s) + cfg.g * s.height; };
      const double e0 = energy(samples[0].state);
      for (const auto& s : samples) drift = std::max(drift, std::abs(energy(s.state) - e0));
      add("energy drift", drift, 1e-10 * std::max(1.0, std::abs(e0)) * std::max(1.0, T / 10.0));
      const auto back = strip_closed_form(profile, eta, -in.u, cfg.g, -exact.v2, -exact.s, T, exact.pos);
      add("time reversal", std::max({std::abs(back.v2 + in.v2), std::abs(back.s + in.s),
                                     std::abs(back.pos - in.pos), std::abs(back.height + exact.height)}),
          1e-9 * std::max(1.0, T / 10.0));
      break;
    }
    case Mode::Roll4D: {
      const TubeChart chart(make_section(cfg.geometry), cfg.geometry.ball_radius);
      RollRun run = roll_run(cfg);
      const auto fwd = simulate_roll4d(chart, cfg.inertia, cfg.g, cfg.roll4d, run);
      const double T = cfg.run.horizon;
      const double e0 = energy_monitor(cfg.roll4d, cfg.g).with_gravity;
      double drift = 0.0;
      for (const auto& s : fwd.samples)
        drift = std::max(drift, std::abs(energy_monitor(s.state, cfg.g).with_gravity - e0));
      add("energy drift (E + g x3)", drift, 1e-9 * std::max(1.0, std::abs(e0)) * std::max(1.0, T / 10.0));
      RollState rev = fwd.final_state;
      rev.v = -rev.v;
      rev.spin = -rev.spin;
      run.sample_dt = 0.0;
      run.horizon = fwd.t_final;
      const auto bwd = simulate_roll4d(chart, cfg.inertia, cfg.g, rev, run);
      const RollState& end = bwd.final_state;
      double err = (center(chart, end) - center(chart, cfg.roll4d)).norm();
      if (end.region == cfg.roll4d.region) {
        err = std::max({err, (end.v + cfg.roll4d.v).cwiseAbs().maxCoeff(),
                        (end.spin + cfg.roll4d.spin).cwiseAbs().maxCoeff()});
      }
      add("time reversal", err, 1e-7 * std::max(1.0, T / 10.0));
      break;
    }
    case Mode::Experiment:
      fail(ErrorKind::Domain, "check runs on simulation configs (noslip, roll3d, roll4d)");
  }
  return lines;
}

}  // namespace nhb
