#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "nhb/errors.hpp"
#include "nhb/geometry.hpp"
#include "nhb/inertia.hpp"
#include "nhb/io.hpp"
#include "nhb/noslip.hpp"

namespace py = pybind11;
using namespace nhb;

PYBIND11_MODULE(_core, m) {
  m.doc() = "No-slip billiards and nonholonomic rolling";

  py::register_exception<Error>(m, "NhbError");

  m.def("beta_from_gamma", [](double g) {
    const auto b = beta_from_gamma(g);
    return py::make_tuple(b.c, b.s);
  });
  m.def("eta_from_gamma", &eta_from_gamma);
  m.def("gamma_from_eta", &gamma_from_eta);
  m.def("gamma_from_beta", &gamma_from_beta);
  m.def("match_inertia", &match_inertia);
  m.def("eta_matched_to", &eta_matched_to);

  py::class_<InertiaParams>(m, "InertiaParams")
      .def_static("from_gamma", &InertiaParams::from_gamma)
      .def_static("from_beta", &InertiaParams::from_beta)
      .def_static("from_eta", &InertiaParams::from_eta)
      .def_property_readonly("gamma", &InertiaParams::gamma)
      .def_property_readonly("beta", &InertiaParams::beta)
      .def_property_readonly("eta", &InertiaParams::eta)
      .def_property_readonly("c_beta", &InertiaParams::c_beta)
      .def_property_readonly("s_beta", &InertiaParams::s_beta);

  py::class_<CrossSection>(m, "CrossSection")
      .def_static("disc", &CrossSection::disc)
      .def_static("strip", &CrossSection::strip)
      .def_static("stadium", &CrossSection::stadium)
      .def_static("sinai_square", &CrossSection::sinai_square)
      .def_static("sinai_torus", &CrossSection::sinai_torus);

  m.def("collide_general", &collide_general, py::arg("S"), py::arg("u"), py::arg("nu"), py::arg("inertia"),
        "Post-collision (S, u) for an inward unit normal nu");
  m.def(
      "collide_2d",
      [](const Vec2& u, double s, const Vec2& nu, const InertiaParams& in) {
        const auto o = collide_2d({Vec2::Zero(), u, s}, nu, in);
        return py::make_tuple(o.u, o.s);
      },
      py::arg("u"), py::arg("s"), py::arg("nu"), py::arg("inertia"));

  m.def(
      "trajectory_2d",
      [](const CrossSection& section, const InertiaParams& in, double g, const Vec2& x, const Vec2& u, double s,
         int n_events, double horizon) {
        NoSlipRun run;
        run.n_events = n_events;
        run.horizon = horizon;
        const auto tr = billiard_trajectory_2d(section, in, g, {x, u, s}, run);
        py::list t, xs, us, ss;
        for (const auto& e : tr.events) {
          t.append(e.t);
          xs.append(VecX(e.x));
          us.append(VecX(e.u));
          ss.append(e.S(1, 0));
        }
        py::dict d;
        d["t"] = t;
        d["x"] = xs;
        d["u"] = us;
        d["s"] = ss;
        d["termination"] = to_string(tr.termination);
        return d;
      },
      py::arg("section"), py::arg("inertia"), py::arg("g"), py::arg("x"), py::arg("u"), py::arg("s"),
      py::arg("n_events") = 100, py::arg("horizon") = std::numeric_limits<double>::infinity());

  m.def(
      "run_config",
      [](const std::string& json, const std::string& out_dir) {
        RunConfig cfg = parse_config(json);
        if (!out_dir.empty()) cfg.out_dir = out_dir;
        const auto out = run_config(cfg);
        std::vector<std::string> files;
        for (const auto& f : out.files) files.push_back(f.string());
        return py::make_tuple(files, out.summary, out.exit_code);
      },
      py::arg("config_json"), py::arg("out_dir") = "", "Run a JSON config; returns (files, summary JSON, exit code)");
  m.def(
      "check_config",
      [](const std::string& json) {
        py::list lines;
        for (const auto& l : run_checks(parse_config(json))) lines.append(py::make_tuple(l.name, l.value, l.tol, l.pass));
        return lines;
      },
      py::arg("config_json"));
}
