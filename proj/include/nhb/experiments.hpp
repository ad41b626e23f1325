#pragma once

// Reproducible experiment runners. Each returns its data and a flat table;
// writing files is left to the io layer.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nhb/integrate.hpp"
#include "nhb/noslip.hpp"
#include "nhb/rolling.hpp"

namespace nhb {

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// --- boundedness and caustics ---------------------------------------------------

enum class Boundedness { Bounded, Unbounded, Inconclusive };

std::string to_string(Boundedness b);

struct BoundedReport {
  Boundedness status = Boundedness::Inconclusive;
  std::optional<double> period;
  double range_first = 0.0;
  double range_second = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::vector<double> env_min;  // running minimum
  std::vector<double> env_max;  // running maximum
};

/// Uniformly sampled series with spacing dt. Bounded iff the range over the second
/// half does not exceed the range over the first half by more than a factor (1 + tol).
BoundedReport detect_bounded(std::span<const double> x, double dt, double tol = 0.05);

struct CausticClusters {
  int count = 0;
  std::vector<double> centers;
  std::vector<double> spreads;  // max - min within each cluster
  std::vector<int> sizes;
};

/// 1D two-means split; clusters whose centers differ by at most merge_tol are merged.
CausticClusters caustic_clusters(std::span<const double> distances, double merge_tol);

/// Distances from the axis of successive chords between collision points of a 2D trajectory.
std::vector<double> chord_distances(const NoSlipTrajectory& traj, const Vec2& center = Vec2::Zero());

// --- two plates --------------------------------------------------------------------

struct TwoPlatesSpec {
  double L = 1.0;
  double r = 0.5;
  double g = 5.0;
  double v1 = 1.0;
  double v2 = 0.0;
  double v3 = -1.0;
  double S12 = 0.0;
  double S13 = -0.5;
  double S23 = 0.0;
  double x3 = 0.0;
  std::vector<double> etas = {0.0, 0.3, 0.577, 0.9, 0.999};
  double horizon = 200.0;
  double sample_dt = 0.01;
  IntegratorConfig integrator;
};

/// Start on N+ midway between the plates, rolling toward the left plate; v and S are
/// frame components in the left plate's junction frame.
RollState two_plates_initial(const TwoPlatesSpec& spec);

struct HeightSeries {
  double parameter = 0.0;  // eta or r
  std::vector<double> t;
  std::vector<double> x3;
  BoundedReport report;
  long transitions = 0;
};

std::vector<HeightSeries> run_two_plates_height(const TwoPlatesSpec& spec);

// --- radius limit --------------------------------------------------------------------

struct RadiusLimitSpec {
  TwoPlatesSpec base = [] {
    TwoPlatesSpec s;
    s.g = 1.0;
    s.S13 = 0.0;
    s.horizon = 20.0;
    return s;
  }();
  double eta = 0.39;
  std::vector<double> radii = {0.4, 0.2, 0.1, 0.05};
};

struct RadiusLimitResult {
  std::vector<HeightSeries> series;
  std::vector<double> sup_diffs;  // between successive radii
  bool monotone = false;
  std::vector<double> noslip_x3;  // 2D no-slip strip with matched gamma on the same grid
  double noslip_sup_diff = 0.0;   // against the smallest radius
};

RadiusLimitResult run_radius_limit(const RadiusLimitSpec& spec);

// --- edge portrait --------------------------------------------------------------------

struct EdgePortraitSpec {
  double R = 1.0;
  double r = 1.0;
  double eta = 0.5;
  double speed = 1.0;  // radius of the (v1, v2, S12) sphere
  int grid = 41;
  double max_time = 200.0;
  IntegratorConfig integrator;
};

enum class EdgeExit { Through, Friendly, Stuck, Outside };

std::string to_string(EdgeExit e);

struct PortraitCell {
  double v2 = 0.0;
  double S12 = 0.0;
  double dwell = 0.0;
  double distance = 0.0;
  EdgeExit exit = EdgeExit::Outside;
};

struct EdgePortrait {
  int grid = 0;
  std::vector<PortraitCell> cells;  // row-major, S12 outer, v2 inner
};

EdgePortrait run_edge_portrait(const EdgePortraitSpec& spec);

// --- circular cylinder: caustics and height --------------------------------------------

struct CausticSpec {
  double R = 1.0;
  double r = 0.1;
  double g = 1.0;
  double eta = 0.39;
  Vec3 v_init = Vec3(-0.2, 1.0, 0.0);  // Cartesian, at the boundary point (R, 0) on N+
  // Taken as the frame components (S12, S13, S23) at the start.
  double S21 = -0.61;
  double S31 = 0.0;
  double S32 = 1.0;
  double horizon = 100.0;
  double sample_dt = 0.01;
  double merge_tol = 1e-3;  // times R
  IntegratorConfig integrator;
};

struct CausticResult {
  std::vector<double> t;
  std::vector<double> x3;
  std::vector<Vec2> planar;    // (x1, x2) of the center
  std::vector<double> chords;  // axis distance of each flat leg
  CausticClusters clusters;
  BoundedReport report;
  RollTrajectory trajectory;
};

RollState caustic_initial(const CausticSpec& spec);
CausticResult run_caustic_and_height(const CausticSpec& spec);

/// No-slip disc control: chord-distance clusters of an n-collision trajectory.
CausticClusters noslip_disc_caustics(double gamma, const NoSlipState2D& start, int collisions, double merge_tol,
                                     std::vector<double>* distances = nullptr);

// --- zig-zag fall -----------------------------------------------------------------------

struct ZigzagSpec {
  double R = 1.0;
  double gamma = 1.0 / 1.4142135623730951;
  double g = 1.0;
  double tangential = 1.0;                          // initial speed along e2 at the wall
  double normal = 0.4;                              // initial inward speed
  std::vector<double> scales = {1.0, 0.5, 0.25};    // applied to `normal`
  double spin = 0.0;                                // initial s_bar
  bool rolling_start = false;                       // pick W so the start satisfies rolling impact
  double horizon = 40.0;
  double sample_dt = 0.05;
};

struct ZigzagRun {
  double scale = 0.0;
  std::vector<double> t;
  std::vector<double> x3;
  double descent_rate = 0.0;  // -(x3(T) - x3(0)) / T
  double amplitude = 0.0;     // rms deviation from the quadratic fit
  bool rolling_impact = false;
  long collisions = 0;
  Termination termination = Termination::Completed;
};

NoSlipState3D zigzag_initial(const ZigzagSpec& spec, double scale);
std::vector<ZigzagRun> run_zigzag_fall(const ZigzagSpec& spec);

// --- tables -----------------------------------------------------------------------------

Table height_table(const std::vector<HeightSeries>& series, const std::string& parameter);
Table portrait_table(const EdgePortrait& p);
Table caustic_table(const CausticResult& c);
Table zigzag_table(const std::vector<ZigzagRun>& runs);

}  // namespace nhb
