#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "nhb/errors.hpp"
#include "nhb/io.hpp"

namespace nhb {

using nlohmann::json;

namespace {

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
  fail(ErrorKind::Parse, (path.empty() ? std::string("config") : path) + ": " + what);
}

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Strict view of a JSON object: every key must be claimed before finish().
class Obj {
 public:
  Obj(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) parse_fail(path_, "expected an object");
  }

  bool has(const std::string& k) const { return j_.contains(k); }
  const std::string& path() const { return path_; }

  const json& raw(const std::string& k) {
    used_.insert(k);
    return j_.at(k);
  }

  double num(const std::string& k, double def) { return has(k) ? number(raw(k), join(path_, k)) : def; }
  double num(const std::string& k) {
    require(k);
    return number(raw(k), join(path_, k));
  }

  long integer(const std::string& k, long def) {
    if (!has(k)) return def;
    const double x = number(raw(k), join(path_, k));
    if (x != std::floor(x) || std::abs(x) > 9e15) parse_fail(join(path_, k), "expected an integer");
    return static_cast<long>(x);
  }

  bool boolean(const std::string& k, bool def) {
    if (!has(k)) return def;
    const json& v = raw(k);
    if (!v.is_boolean()) parse_fail(join(path_, k), "expected true or false");
    return v.get<bool>();
  }

  std::string str(const std::string& k, const std::string& def) {
    if (!has(k)) return def;
    const json& v = raw(k);
    if (!v.is_string()) parse_fail(join(path_, k), "expected a string");
    return v.get<std::string>();
  }
  std::string str(const std::string& k) {
    require(k);
    return str(k, "");
  }

  std::vector<double> list(const std::string& k, std::vector<double> def) {
    if (!has(k)) return def;
    return numbers(raw(k), join(path_, k));
  }
  std::vector<double> list(const std::string& k) {
    require(k);
    return numbers(raw(k), join(path_, k));
  }

  Obj sub(const std::string& k) {
    require(k);
    return Obj(raw(k), join(path_, k));
  }

  void require(const std::string& k) const {
    if (!has(k)) parse_fail(join(path_, k), "missing required key");
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!used_.count(it.key())) parse_fail(join(path_, it.key()), "unknown key");
  }

  static double number(const json& v, const std::string& path) {
    if (!v.is_number()) parse_fail(path, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) parse_fail(path, "must be finite");
    return x;
  }

  static std::vector<double> numbers(const json& v, const std::string& path) {
    if (!v.is_array()) parse_fail(path, "expected an array of numbers");
    std::vector<double> out;
    for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void need(bool ok, const std::string& path, const std::string& what) {
  if (!ok) parse_fail(path, what);
}

Vec3 vec3(const std::vector<double>& v, const std::string& path) {
  need(v.size() == 3, path, "expected 3 entries");
  return {v[0], v[1], v[2]};
}

// --- per-mode key sets ---------------------------------------------------------------

std::vector<std::string> geometry_keys(const std::string& kind) {
  if (kind == "disc" || kind == "sphere") return {"radius"};
  if (kind == "strip") return {"width"};
  if (kind == "stadium") return {"length", "radius"};
  if (kind == "sinai_square" || kind == "sinai_torus") return {"half_width", "scatterer_radius"};
  return {};
}

double& geometry_field(GeometryConfig& g, const std::string& key) {
  if (key == "radius") return g.radius;
  if (key == "width") return g.width;
  if (key == "length") return g.length;
  if (key == "half_width") return g.half_width;
  return g.scatterer_radius;
}

double geometry_field(const GeometryConfig& g, const std::string& key) {
  return geometry_field(const_cast<GeometryConfig&>(g), key);
}

GeometryConfig parse_geometry(Obj o, Mode mode) {
  GeometryConfig g;
  g.kind = o.str("kind");
  const auto keys = geometry_keys(g.kind);
  need(!keys.empty(), join(o.path(), "kind"), "unknown geometry kind '" + g.kind + "'");
  for (const auto& k : keys) geometry_field(g, k) = o.num(k);
  if (mode == Mode::NoSlip) {
    g.dim = static_cast<int>(o.integer("dim", 2));
    need(g.dim == 2 || g.dim == 3, join(o.path(), "dim"), "must be 2 or 3");
    need(g.kind != "sphere" || g.dim == 3, join(o.path(), "kind"), "sphere needs dim = 3");
  } else {
    g.dim = 2;
    need(g.kind != "sphere", join(o.path(), "kind"), "sphere is only available for noslip");
    g.ball_radius = o.num("ball_radius");
    need(g.ball_radius > 0.0, join(o.path(), "ball_radius"), "must be positive");
    if (mode == Mode::Roll3D)
      need(g.kind == "strip" || g.kind == "disc", join(o.path(), "kind"), "roll3d supports strip and disc");
  }
  o.finish();
  try {
    if (g.kind != "sphere") (void)make_section(g);
    else need(g.radius > 0.0, join(o.path(), "radius"), "must be positive");
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw;
    parse_fail(o.path(), e.what());
  }
  return g;
}

json geometry_json(const GeometryConfig& g, Mode mode) {
  json j;
  j["kind"] = g.kind;
  for (const auto& k : geometry_keys(g.kind)) j[k] = geometry_field(g, k);
  if (mode == Mode::NoSlip) j["dim"] = g.dim;
  else j["ball_radius"] = g.ball_radius;
  return j;
}

void parse_inertia(Obj o, RunConfig& cfg) {
  int given = 0;
  for (const char* k : {"gamma", "beta", "eta"}) given += o.has(k);
  if (given == 0) parse_fail(o.path(), "one of gamma, beta, eta is required");
  if (given > 1) parse_fail(o.path(), "conflicting inertia: give exactly one of gamma, beta, eta");
  try {
    if (o.has("gamma")) {
      cfg.inertia_source = InertiaSource::Gamma;
      cfg.inertia_value = o.num("gamma");
      cfg.inertia = InertiaParams::from_gamma(cfg.inertia_value);
    } else if (o.has("beta")) {
      cfg.inertia_source = InertiaSource::Beta;
      cfg.inertia_value = o.num("beta");
      cfg.inertia = InertiaParams::from_beta(cfg.inertia_value);
    } else {
      cfg.inertia_source = InertiaSource::Eta;
      cfg.inertia_value = o.num("eta");
      cfg.inertia = InertiaParams::from_eta(cfg.inertia_value);
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw;
    parse_fail(o.path(), e.what());
  }
  // Derived values written by serialize_config; accepted when consistent.
  if (o.has("derived")) {
    Obj d = o.sub("derived");
    const double want[] = {cfg.inertia.gamma(), cfg.inertia.beta(), cfg.inertia.eta(), cfg.inertia.c_beta(),
                           cfg.inertia.s_beta()};
    const char* names[] = {"gamma", "beta", "eta", "c_beta", "s_beta"};
    for (int i = 0; i < 5; ++i) {
      if (!d.has(names[i])) continue;
      const double got = d.num(names[i]);
      if (std::abs(got - want[i]) > 1e-12 * std::max(1.0, std::abs(want[i])))
        parse_fail(join(d.path(), names[i]), "inconsistent with the given inertia value");
    }
    d.finish();
  }
  o.finish();
}

json inertia_json(const RunConfig& cfg) {
  json j;
  const char* key = cfg.inertia_source == InertiaSource::Gamma ? "gamma"
                    : cfg.inertia_source == InertiaSource::Beta ? "beta"
                                                                 : "eta";
  j[key] = cfg.inertia_value;
  j["derived"] = {{"gamma", cfg.inertia.gamma()},   {"beta", cfg.inertia.beta()},
                  {"eta", cfg.inertia.eta()},       {"c_beta", cfg.inertia.c_beta()},
                  {"s_beta", cfg.inertia.s_beta()}};
  return j;
}

IntegratorConfig parse_integrator(Obj o) {
  IntegratorConfig c;
  c.rel_tol = o.num("rel_tol", c.rel_tol);
  c.abs_tol = o.num("abs_tol", c.abs_tol);
  c.max_step = o.num("max_step", c.max_step);
  c.initial_step = o.num("initial_step", c.initial_step);
  c.fixed_step = o.num("fixed_step", c.fixed_step);
  c.event_tol = o.num("event_tol", c.event_tol);
  c.max_events = static_cast<int>(o.integer("max_events", c.max_events));
  c.max_time = o.num("max_time", c.max_time);
  c.max_steps = o.integer("max_steps", c.max_steps);
  o.finish();
  try {
    c.validate();
  } catch (const Error& e) {
    parse_fail(o.path(), e.what());
  }
  return c;
}

json integrator_json(const IntegratorConfig& c) {
  json j = {{"rel_tol", c.rel_tol},     {"abs_tol", c.abs_tol},       {"initial_step", c.initial_step},
            {"fixed_step", c.fixed_step}, {"event_tol", c.event_tol}, {"max_events", c.max_events},
            {"max_steps", c.max_steps}};
  if (std::isfinite(c.max_step)) j["max_step"] = c.max_step;
  if (std::isfinite(c.max_time)) j["max_time"] = c.max_time;
  return j;
}

RunBlock parse_run(Obj o, Mode mode) {
  RunBlock r;
  if (mode == Mode::NoSlip) {
    r.horizon = std::numeric_limits<double>::infinity();
    r.n_events = static_cast<int>(o.integer("n_events", r.n_events));
    need(r.n_events >= 0, join(o.path(), "n_events"), "must be non-negative");
    r.horizon = o.num("horizon", r.horizon);
    r.flight_max = o.num("flight_max", r.flight_max);
    need(r.flight_max > 0.0, join(o.path(), "flight_max"), "must be positive");
  } else {
    r.horizon = o.num("horizon", r.horizon);
    r.sample_dt = o.num("sample_dt", r.sample_dt);
    need(r.sample_dt > 0.0, join(o.path(), "sample_dt"), "must be positive");
    if (mode == Mode::Roll4D) {
      r.max_transitions = o.integer("max_transitions", r.max_transitions);
      r.exact_straight_edges = o.boolean("exact_straight_edges", r.exact_straight_edges);
    }
  }
  need(r.horizon >= 0.0, join(o.path(), "horizon"), "must be non-negative");
  o.finish();
  return r;
}

json run_json(const RunBlock& r, Mode mode) {
  json j;
  if (mode == Mode::NoSlip) {
    j["n_events"] = r.n_events;
    if (std::isfinite(r.horizon)) j["horizon"] = r.horizon;
    j["flight_max"] = r.flight_max;
  } else {
    j["horizon"] = r.horizon;
    j["sample_dt"] = r.sample_dt;
    if (mode == Mode::Roll4D) {
      j["max_transitions"] = r.max_transitions;
      j["exact_straight_edges"] = r.exact_straight_edges;
    }
  }
  return j;
}

Region parse_region(const std::string& s, const std::string& path) {
  if (s == "curved") return Region::Curved;
  if (s == "flat+") return Region::FlatPlus;
  if (s == "flat-") return Region::FlatMinus;
  parse_fail(path, "region must be curved, flat+ or flat-");
}

void parse_initial(Obj o, RunConfig& cfg) {
  if (cfg.mode == Mode::NoSlip) {
    const int n = cfg.geometry.dim;
    cfg.noslip.x = o.list("x");
    cfg.noslip.u = o.list("u");
    cfg.noslip.spin = o.list("spin", std::vector<double>(n == 2 ? 1 : 3, 0.0));
    need(static_cast<int>(cfg.noslip.x.size()) == n, join(o.path(), "x"), "expected " + std::to_string(n) + " entries");
    need(static_cast<int>(cfg.noslip.u.size()) == n, join(o.path(), "u"), "expected " + std::to_string(n) + " entries");
    need(cfg.noslip.spin.size() == (n == 2 ? 1u : 3u), join(o.path(), "spin"),
         n == 2 ? "expected 1 entry" : "expected 3 entries (S12, S13, S23)");
  } else if (cfg.mode == Mode::Roll3D) {
    auto& r = cfg.roll3d;
    r.u = o.num("u");
    need(r.u != 0.0, join(o.path(), "u"), "must be nonzero");
    r.v2 = o.num("v2", r.v2);
    r.s = o.num("s", r.s);
    r.pos = o.num("pos", r.pos);
    r.height = o.num("height", r.height);
  } else {
    RollState& st = cfg.roll4d;
    st = RollState{};
    st.region = parse_region(o.str("region"), join(o.path(), "region"));
    if (st.region == Region::Curved) {
      st.loop = static_cast<int>(o.integer("loop", 0));
      st.s = o.num("s", 0.0);
      st.phi = o.num("phi", 0.0);
      need(st.phi >= 0.0 && st.phi <= 3.141592653589793, join(o.path(), "phi"), "must lie in [0, pi]");
      need(st.loop >= 0, join(o.path(), "loop"), "must be non-negative");
    } else {
      const auto p = o.list("p");
      need(p.size() == 2, join(o.path(), "p"), "expected 2 entries");
      st.p = {p[0], p[1]};
    }
    st.x3 = o.num("x3", 0.0);
    st.v = vec3(o.list("v"), join(o.path(), "v"));
    st.spin = vec3(o.list("spin", {0.0, 0.0, 0.0}), join(o.path(), "spin"));
  }
  o.finish();
}

json initial_json(const RunConfig& cfg) {
  json j;
  if (cfg.mode == Mode::NoSlip) {
    j = {{"x", cfg.noslip.x}, {"u", cfg.noslip.u}, {"spin", cfg.noslip.spin}};
  } else if (cfg.mode == Mode::Roll3D) {
    const auto& r = cfg.roll3d;
    j = {{"u", r.u}, {"v2", r.v2}, {"s", r.s}, {"pos", r.pos}, {"height", r.height}};
  } else {
    const RollState& st = cfg.roll4d;
    j["region"] = to_string(st.region);
    if (st.region == Region::Curved) {
      j["loop"] = st.loop;
      j["s"] = st.s;
      j["phi"] = st.phi;
    } else {
      j["p"] = {st.p.x(), st.p.y()};
    }
    j["x3"] = st.x3;
    j["v"] = {st.v.x(), st.v.y(), st.v.z()};
    j["spin"] = {st.spin.x(), st.spin.y(), st.spin.z()};
  }
  return j;
}

// --- experiments -----------------------------------------------------------------------

void parse_two_plates_fields(Obj& o, TwoPlatesSpec& s, bool with_sweep) {
  s.L = o.num("L", s.L);
  if (with_sweep) s.r = o.num("r", s.r);
  s.g = o.num("g", s.g);
  s.v1 = o.num("v1", s.v1);
  s.v2 = o.num("v2", s.v2);
  s.v3 = o.num("v3", s.v3);
  s.S12 = o.num("S12", s.S12);
  s.S13 = o.num("S13", s.S13);
  s.S23 = o.num("S23", s.S23);
  s.x3 = o.num("x3", s.x3);
  if (with_sweep) s.etas = o.list("etas", s.etas);
  s.horizon = o.num("horizon", s.horizon);
  s.sample_dt = o.num("sample_dt", s.sample_dt);
}

json two_plates_fields(const TwoPlatesSpec& s, bool with_sweep) {
  json j = {{"L", s.L},     {"g", s.g},     {"v1", s.v1}, {"v2", s.v2},           {"v3", s.v3},
            {"S12", s.S12}, {"S13", s.S13}, {"S23", s.S23}, {"x3", s.x3}, {"horizon", s.horizon},
            {"sample_dt", s.sample_dt}};
  if (with_sweep) {
    j["r"] = s.r;
    j["etas"] = s.etas;
  }
  return j;
}

ExperimentConfig parse_experiment(Obj o) {
  ExperimentConfig e;
  const std::string name = o.str("name");
  const auto kind = experiment_from_name(name);
  need(kind.has_value(), join(o.path(), "name"), "unknown experiment '" + name + "'");
  e.kind = *kind;
  switch (e.kind) {
    case ExperimentKind::TwoPlates:
      parse_two_plates_fields(o, e.two_plates, true);
      break;
    case ExperimentKind::RadiusLimit:
      parse_two_plates_fields(o, e.radius_limit.base, false);
      e.radius_limit.eta = o.num("eta", e.radius_limit.eta);
      e.radius_limit.radii = o.list("radii", e.radius_limit.radii);
      break;
    case ExperimentKind::EdgePortrait: {
      auto& s = e.portrait;
      s.R = o.num("R", s.R);
      s.r = o.num("r", s.r);
      s.eta = o.num("eta", s.eta);
      s.speed = o.num("speed", s.speed);
      s.grid = static_cast<int>(o.integer("grid", s.grid));
      s.max_time = o.num("max_time", s.max_time);
      break;
    }
    case ExperimentKind::Caustic: {
      auto& s = e.caustic;
      s.R = o.num("R", s.R);
      s.r = o.num("r", s.r);
      s.g = o.num("g", s.g);
      s.eta = o.num("eta", s.eta);
      s.v_init = vec3(o.list("v_init", {s.v_init.x(), s.v_init.y(), s.v_init.z()}), join(o.path(), "v_init"));
      s.S21 = o.num("S21", s.S21);
      s.S31 = o.num("S31", s.S31);
      s.S32 = o.num("S32", s.S32);
      s.horizon = o.num("horizon", s.horizon);
      s.sample_dt = o.num("sample_dt", s.sample_dt);
      s.merge_tol = o.num("merge_tol", s.merge_tol);
      break;
    }
    case ExperimentKind::Zigzag: {
      auto& s = e.zigzag;
      s.R = o.num("R", s.R);
      s.gamma = o.num("gamma", s.gamma);
      s.g = o.num("g", s.g);
      s.tangential = o.num("tangential", s.tangential);
      s.normal = o.num("normal", s.normal);
      s.scales = o.list("scales", s.scales);
      s.spin = o.num("spin", s.spin);
      s.rolling_start = o.boolean("rolling_start", s.rolling_start);
      s.horizon = o.num("horizon", s.horizon);
      s.sample_dt = o.num("sample_dt", s.sample_dt);
      break;
    }
  }
  o.finish();
  return e;
}

json experiment_json(const ExperimentConfig& e) {
  json j;
  switch (e.kind) {
    case ExperimentKind::TwoPlates:
      j = two_plates_fields(e.two_plates, true);
      break;
    case ExperimentKind::RadiusLimit:
      j = two_plates_fields(e.radius_limit.base, false);
      j["eta"] = e.radius_limit.eta;
      j["radii"] = e.radius_limit.radii;
      break;
    case ExperimentKind::EdgePortrait: {
      const auto& s = e.portrait;
      j = {{"R", s.R}, {"r", s.r}, {"eta", s.eta}, {"speed", s.speed}, {"grid", s.grid}, {"max_time", s.max_time}};
      break;
    }
    case ExperimentKind::Caustic: {
      const auto& s = e.caustic;
      j = {{"R", s.R},       {"r", s.r},       {"g", s.g},
           {"eta", s.eta},   {"v_init", {s.v_init.x(), s.v_init.y(), s.v_init.z()}},
           {"S21", s.S21},   {"S31", s.S31},   {"S32", s.S32},
           {"horizon", s.horizon}, {"sample_dt", s.sample_dt}, {"merge_tol", s.merge_tol}};
      break;
    }
    case ExperimentKind::Zigzag: {
      const auto& s = e.zigzag;
      j = {{"R", s.R},           {"gamma", s.gamma},   {"g", s.g},
           {"tangential", s.tangential}, {"normal", s.normal}, {"scales", s.scales},
           {"spin", s.spin},     {"rolling_start", s.rolling_start}, {"horizon", s.horizon},
           {"sample_dt", s.sample_dt}};
      break;
    }
  }
  j["name"] = to_string(e.kind);
  return j;
}

void apply_integrator(ExperimentConfig& e, const IntegratorConfig& c) {
  e.two_plates.integrator = c;
  e.radius_limit.base.integrator = c;
  e.portrait.integrator = c;
  e.caustic.integrator = c;
}

Mode parse_mode(const std::string& s, const std::string& path) {
  if (s == "noslip") return Mode::NoSlip;
  if (s == "roll3d") return Mode::Roll3D;
  if (s == "roll4d") return Mode::Roll4D;
  if (s == "experiment") return Mode::Experiment;
  parse_fail(path, "mode must be noslip, roll3d, roll4d or experiment");
}

}  // namespace

CrossSection make_section(const GeometryConfig& g) {
  if (g.kind == "disc") return CrossSection::disc(g.radius);
  if (g.kind == "strip") return CrossSection::strip(g.width);
  if (g.kind == "stadium") return CrossSection::stadium(g.length, g.radius);
  if (g.kind == "sinai_square") return CrossSection::sinai_square(g.half_width, g.scatterer_radius);
  if (g.kind == "sinai_torus") return CrossSection::sinai_torus(g.half_width, g.scatterer_radius);
  fail(ErrorKind::Domain, "geometry kind '" + g.kind + "' has no planar cross-section");
}

std::string to_string(Mode m) {
  switch (m) {
    case Mode::NoSlip: return "noslip";
    case Mode::Roll3D: return "roll3d";
    case Mode::Roll4D: return "roll4d";
    case Mode::Experiment: return "experiment";
  }
  return "unknown";
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::TwoPlates: return "two_plates";
    case ExperimentKind::RadiusLimit: return "radius_limit";
    case ExperimentKind::EdgePortrait: return "edge_portrait";
    case ExperimentKind::Caustic: return "caustic";
    case ExperimentKind::Zigzag: return "zigzag";
  }
  return "unknown";
}

std::optional<ExperimentKind> experiment_from_name(const std::string& name) {
  for (auto k : {ExperimentKind::TwoPlates, ExperimentKind::RadiusLimit, ExperimentKind::EdgePortrait,
                 ExperimentKind::Caustic, ExperimentKind::Zigzag})
    if (to_string(k) == name) return k;
  return std::nullopt;
}

RunConfig parse_config(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    fail(ErrorKind::Parse, std::string("config: malformed JSON: ") + e.what());
  }
  Obj o(root, "");
  RunConfig cfg;
  cfg.mode = parse_mode(o.str("mode"), "mode");

  if (o.has("integrator")) cfg.integrator = parse_integrator(o.sub("integrator"));
  if (cfg.mode == Mode::Experiment) {
    for (const char* k : {"geometry", "inertia", "g", "initial", "run"})
      need(!o.has(k), k, "not used in experiment mode; set it inside the experiment block");
    cfg.experiment = parse_experiment(o.sub("experiment"));
    apply_integrator(*cfg.experiment, cfg.integrator);
  } else {
    need(!o.has("experiment"), "experiment", "only used in experiment mode");
    cfg.geometry = parse_geometry(o.sub("geometry"), cfg.mode);
    parse_inertia(o.sub("inertia"), cfg);
    cfg.g = o.num("g", 0.0);
    need(cfg.g >= 0.0, "g", "must be non-negative");
    parse_initial(o.sub("initial"), cfg);
    if (o.has("run")) {
      cfg.run = parse_run(o.sub("run"), cfg.mode);
    } else {
      json empty = json::object();
      cfg.run = parse_run(Obj(empty, "run"), cfg.mode);
    }
    need(cfg.mode != Mode::NoSlip || !o.has("integrator"), "integrator", "not used in noslip mode");
  }
  if (o.has("output")) {
    Obj out = o.sub("output");
    cfg.out_dir = out.str("dir", cfg.out_dir);
    cfg.name = out.str("name", cfg.name);
    cfg.svg = out.boolean("svg", cfg.svg);
    need(cfg.name.find('/') == std::string::npos && cfg.name != "." && cfg.name != "..", "output.name",
         "must be a plain file stem");
    out.finish();
  }
  o.finish();
  return cfg;
}

std::string output_stem(const RunConfig& cfg) {
  if (!cfg.name.empty()) return cfg.name;
  return cfg.mode == Mode::Experiment ? to_string(cfg.experiment->kind) : to_string(cfg.mode);
}

std::string serialize_config(const RunConfig& cfg, bool with_output) {
  json j;
  j["mode"] = to_string(cfg.mode);
  if (cfg.mode == Mode::Experiment) {
    j["experiment"] = experiment_json(*cfg.experiment);
    j["integrator"] = integrator_json(cfg.integrator);
  } else {
    j["geometry"] = geometry_json(cfg.geometry, cfg.mode);
    j["inertia"] = inertia_json(cfg);
    j["g"] = cfg.g;
    j["initial"] = initial_json(cfg);
    j["run"] = run_json(cfg.run, cfg.mode);
    if (cfg.mode != Mode::NoSlip) j["integrator"] = integrator_json(cfg.integrator);
  }
  if (with_output) j["output"] = {{"dir", cfg.out_dir}, {"name", cfg.name}, {"svg", cfg.svg}};
  return j.dump();
}

RunConfig load_config(const std::filesystem::path& path) {
  const std::string text = read_text(path);
  if (!text.empty() && text[0] == '#') {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line) && !line.empty() && line[0] == '#')
      if (line.rfind("# config: ", 0) == 0) return parse_config(line.substr(10));
    fail(ErrorKind::Parse, path.string() + ": no embedded config line");
  }
  return parse_config(text);
}

void set_tolerances(RunConfig& cfg, double rel, double abs) {
  if (!(rel > 0.0) || !(abs > 0.0)) fail(ErrorKind::Parse, "--tol: tolerances must be positive");
  cfg.integrator.rel_tol = rel;
  cfg.integrator.abs_tol = abs;
  if (cfg.experiment) apply_integrator(*cfg.experiment, cfg.integrator);
}

}  // namespace nhb
