#pragma once

// Run configuration, CSV traces and SVG plots.
//
// Configurations are JSON documents. Every CSV starts with comment lines
// "# config: <resolved config JSON>" (and optionally "# summary: <JSON>")
// followed by a header row and data rows with 17 significant digits.

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "nhb/experiments.hpp"
#include "nhb/inertia.hpp"
#include "nhb/integrate.hpp"
#include "nhb/noslip.hpp"
#include "nhb/rolling.hpp"

namespace nhb {

enum class Mode { NoSlip, Roll3D, Roll4D, Experiment };
enum class InertiaSource { Gamma, Beta, Eta };
enum class ExperimentKind { TwoPlates, RadiusLimit, EdgePortrait, Caustic, Zigzag };

std::string to_string(Mode m);
std::string to_string(ExperimentKind k);
std::optional<ExperimentKind> experiment_from_name(const std::string& name);

struct GeometryConfig {
  std::string kind = "disc";  // disc, strip, stadium, sinai_square, sinai_torus, sphere
  int dim = 2;                // noslip only
  double radius = 1.0;        // disc, sphere, stadium arcs
  double width = 1.0;         // strip
  double length = 1.0;        // stadium straight part
  double half_width = 1.0;    // sinai
  double scatterer_radius = 0.25;
  double ball_radius = 0.1;   // roll3d, roll4d

  friend bool operator==(const GeometryConfig&, const GeometryConfig&) = default;
};

struct NoSlipInitial {
  std::vector<double> x;
  std::vector<double> u;
  std::vector<double> spin;  // 2D: {s}; 3D: upper triangle (S12, S13, S23)

  friend bool operator==(const NoSlipInitial&, const NoSlipInitial&) = default;
};

struct Roll3DInitial {
  double u = 1.0;  // speed along the cross-section, conserved
  double v2 = 0.0;
  double s = 0.0;
  double pos = 0.0;
  double height = 0.0;

  friend bool operator==(const Roll3DInitial&, const Roll3DInitial&) = default;
};

struct RunBlock {
  int n_events = 100;
  double horizon = 10.0;
  double sample_dt = 0.01;
  long max_transitions = 10'000'000;
  bool exact_straight_edges = true;
  double flight_max = 1e6;

  friend bool operator==(const RunBlock&, const RunBlock&) = default;
};

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::TwoPlates;
  TwoPlatesSpec two_plates;
  RadiusLimitSpec radius_limit;
  EdgePortraitSpec portrait;
  CausticSpec caustic;
  ZigzagSpec zigzag;
};

struct RunConfig {
  Mode mode = Mode::NoSlip;
  GeometryConfig geometry;
  InertiaParams inertia;
  InertiaSource inertia_source = InertiaSource::Gamma;
  double inertia_value = 0.0;  // as given
  double g = 0.0;
  NoSlipInitial noslip;
  Roll3DInitial roll3d;
  RollState roll4d;
  IntegratorConfig integrator;
  RunBlock run;
  std::optional<ExperimentConfig> experiment;
  std::string out_dir = ".";
  std::string name;  // file stem; empty selects the mode or experiment name
  bool svg = false;
};

CrossSection make_section(const GeometryConfig& g);

/// Validates and resolves defaults; throws Parse with the offending key path.
RunConfig parse_config(const std::string& text);
/// Resolved configuration as compact JSON; parse_config(serialize_config(c)) reproduces c.
/// Trace headers leave out the output block so that a run reproduces bit-identically elsewhere.
std::string serialize_config(const RunConfig& cfg, bool with_output = true);
std::string output_stem(const RunConfig& cfg);
/// Reads a JSON config, or the embedded config of a CSV written by this library.
RunConfig load_config(const std::filesystem::path& path);

/// Overrides experiment integrators as well as the top-level one.
void set_tolerances(RunConfig& cfg, double rel, double abs);

// --- CSV --------------------------------------------------------------------------

struct CsvDocument {
  std::string config;   // JSON text of the "# config:" line, empty if absent
  std::string summary;  // JSON text of the "# summary:" line, empty if absent
  Table table;
};

std::string format_double(double x);
void write_csv(const std::filesystem::path& path, const Table& table, const std::string& config_json,
               const std::string& summary_json = {});
CsvDocument read_csv(const std::filesystem::path& path);

Table noslip_trace_table(const NoSlipTrajectory& traj);
NoSlipTrajectory noslip_trace_from_table(const Table& table, double g);

Table roll4d_trace_table(const RollTrajectory& traj, double g);
std::vector<RollSample> roll4d_samples_from_table(const Table& table);

struct Roll3DSample {
  double t;
  StripSolution state;
  double kappa;
};
Table roll3d_trace_table(const std::vector<Roll3DSample>& samples, double g);

void write_trace(const NoSlipTrajectory& traj, const std::string& config_json, const std::filesystem::path& path);
NoSlipTrajectory read_trace(const std::filesystem::path& path);

// --- SVG ---------------------------------------------------------------------------

/// Line plot of y against x, one polyline per distinct value of `group` (if given).
std::string svg_lines(const Table& table, const std::string& x, const std::string& y,
                      const std::string& group = {}, const std::string& title = {});
/// Heat map of `value` over a regular (x, y) grid.
std::string svg_heatmap(const Table& table, const std::string& x, const std::string& y, const std::string& value,
                        const std::string& title = {});
/// Picks a plot from the column names of a CSV written by this library.
std::string svg_auto(const CsvDocument& doc, const std::string& title = {});

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

// --- running configurations ------------------------------------------------------------

struct RunOutcome {
  std::vector<std::filesystem::path> files;
  std::string summary;  // JSON
  int exit_code = 0;    // nonzero for trajectories that stopped at a corner, grazing hit or timeout
};

/// Runs a configuration and writes its CSV (and SVG when requested) into out_dir.
RunOutcome run_config(const RunConfig& cfg);

struct CheckLine {
  std::string name;
  double value;
  double tol;
  bool pass;
};

/// Invariant checks for a simulation config: energy, reversibility, collision algebra.
std::vector<CheckLine> run_checks(const RunConfig& cfg);

}  // namespace nhb
