// Command-line front end: simulate, experiment, check, plot.

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "nhb/errors.hpp"
#include "nhb/io.hpp"

namespace {

struct Globals {
  std::string out;
  std::string tol;
  bool seedless = false;
  bool svg = false;
};

// --out wins over NHB_OUT_DIR, which wins over the config's output.dir.
void apply_globals(nhb::RunConfig& cfg, const Globals& g) {
  if (const char* env = std::getenv("NHB_OUT_DIR"); env && *env) cfg.out_dir = env;
  if (!g.out.empty()) cfg.out_dir = g.out;
  if (g.svg) cfg.svg = true;
  if (!g.tol.empty()) {
    const auto comma = g.tol.find(',');
    if (comma == std::string::npos) nhb::fail(nhb::ErrorKind::Parse, "--tol expects REL,ABS");
    try {
      std::size_t a = 0, b = 0;
      const std::string rel = g.tol.substr(0, comma), abs = g.tol.substr(comma + 1);
      const double r = std::stod(rel, &a), t = std::stod(abs, &b);
      if (a != rel.size() || b != abs.size()) throw std::invalid_argument("trailing characters");
      nhb::set_tolerances(cfg, r, t);
    } catch (const std::logic_error&) {
      nhb::fail(nhb::ErrorKind::Parse, "--tol expects two numbers REL,ABS, got '" + g.tol + "'");
    }
  }
}

int report(const nhb::RunOutcome& out) {
  for (const auto& f : out.files) std::cout << "wrote " << f.string() << "\n";
  std::cout << "summary " << out.summary << "\n";
  return out.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"No-slip billiards and nonholonomic rolling simulator"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--out", g.out, "Output directory (overrides NHB_OUT_DIR and the config)");
  app.add_option("--tol", g.tol, "Integrator tolerances REL,ABS");
  app.add_flag("--seedless", g.seedless, "No randomness is used anywhere; accepted for scripts that pass it");
  app.add_flag("--svg", g.svg, "Also write an SVG plot next to the CSV");

  std::string config_path, csv_path, exp_name;
  auto* simulate = app.add_subcommand("simulate", "Run a noslip, roll3d, roll4d or experiment config");
  simulate->add_option("config", config_path, "JSON config, or a CSV written by this tool")->required();
  auto* noslip = app.add_subcommand("noslip", "Run a noslip config");
  noslip->add_option("config", config_path, "JSON config")->required();
  auto* experiment = app.add_subcommand("experiment", "Run a named experiment");
  experiment->add_option("name", exp_name, "two_plates, radius_limit, edge_portrait, caustic or zigzag")->required();
  experiment->add_option("config", config_path, "Experiment config (defaults when omitted)");
  auto* check = app.add_subcommand("check", "Run the invariant checks on a simulation config");
  check->add_option("config", config_path, "JSON config")->required();
  auto* plot = app.add_subcommand("plot", "Write a static SVG plot of a CSV");
  plot->add_option("csv", csv_path, "CSV written by this tool")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : nhb::exit_code(nhb::ErrorKind::Parse);
  }

  try {
    if (*simulate || *noslip) {
      nhb::RunConfig cfg = nhb::load_config(config_path);
      if (*noslip && cfg.mode != nhb::Mode::NoSlip)
        nhb::fail(nhb::ErrorKind::Parse, "noslip expects a config with mode \"noslip\"");
      apply_globals(cfg, g);
      return report(nhb::run_config(cfg));
    }
    if (*experiment) {
      const auto kind = nhb::experiment_from_name(exp_name);
      if (!kind) nhb::fail(nhb::ErrorKind::Parse, "unknown experiment '" + exp_name + "'");
      nhb::RunConfig cfg = config_path.empty()
                               ? nhb::parse_config(R"({"mode":"experiment","experiment":{"name":")" + exp_name + "\"}}")
                               : nhb::load_config(config_path);
      if (cfg.mode != nhb::Mode::Experiment || cfg.experiment->kind != *kind)
        nhb::fail(nhb::ErrorKind::Parse, config_path + ": not a '" + exp_name + "' experiment config");
      apply_globals(cfg, g);
      return report(nhb::run_config(cfg));
    }
    if (*check) {
      nhb::RunConfig cfg = nhb::load_config(config_path);
      apply_globals(cfg, g);
      bool ok = true;
      for (const auto& line : nhb::run_checks(cfg)) {
        std::printf("%s  %-52s %.3e <= %.1e\n", line.pass ? "PASS" : "FAIL", line.name.c_str(), line.value, line.tol);
        ok = ok && line.pass;
      }
      return ok ? 0 : 1;
    }
    if (*plot) {
      const nhb::CsvDocument doc = nhb::read_csv(csv_path);
      std::filesystem::path target = std::filesystem::path(csv_path).replace_extension(".svg");
      const char* env = std::getenv("NHB_OUT_DIR");
      const std::string dir = !g.out.empty() ? g.out : (env && *env ? std::string(env) : std::string());
      if (!dir.empty()) target = std::filesystem::path(dir) / target.filename();
      nhb::write_text(target, nhb::svg_auto(doc, std::filesystem::path(csv_path).stem().string()));
      std::cout << "wrote " << target.string() << "\n";
      return 0;
    }
  } catch (const nhb::Error& e) {
    std::cerr << "error (" << nhb::to_string(e.kind()) << "): " << e.what() << "\n";
    return nhb::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
