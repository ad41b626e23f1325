#pragma once

// Adaptive Dormand-Prince 5(4) stepping with dense output and event location.

#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "nhb/linalg.hpp"

namespace nhb {

struct IntegratorConfig {
  double rel_tol = 1e-12;
  double abs_tol = 1e-14;
  double max_step = std::numeric_limits<double>::infinity();
  double initial_step = 0.0;  // 0 selects a step automatically
  double fixed_step = 0.0;    // > 0 disables adaptivity
  double event_tol = 1e-12;
  int max_events = 100000;
  double max_time = std::numeric_limits<double>::infinity();
  long max_steps = 50'000'000;

  void validate() const;
};

using Rhs = std::function<void(double t, const VecX& y, VecX& dy)>;

struct EventFn {
  std::function<double(double t, const VecX& y)> g;
  int direction = 0;  // +1 rising only, -1 falling only, 0 either
};

/// One accepted step with its continuous extension.
struct DenseStep {
  double t0 = 0.0;
  double h = 0.0;
  double t_valid = 0.0;  // end of the usable interval (an event may cut the step short)
  VecX r1, r2, r3, r4, r5;

  VecX operator()(double t) const;
};

struct IntegrationResult {
  enum class Status { Event, End };

  Status status = Status::End;
  int event = -1;
  double t = 0.0;
  VecX y;
  double bracket_lo = 0.0;  // final bracket around the event time
  double bracket_hi = 0.0;
  long steps = 0;
  long rejected = 0;
  double last_h = 0.0;
};

using StepObserver = std::function<void(const DenseStep&)>;

/// Integrate from (t0, y0) toward t_end, stopping at the first event.
/// Throws StepUnderflow when the step size collapses.
IntegrationResult integrate_to_event(const Rhs& rhs, double t0, const VecX& y0, double t_end,
                                     std::span<const EventFn> events, const IntegratorConfig& cfg,
                                     const StepObserver& observer = {});

/// Plain integration without events.
IntegrationResult integrate(const Rhs& rhs, double t0, const VecX& y0, double t_end, const IntegratorConfig& cfg,
                            const StepObserver& observer = {});

struct Energies {
  double e1 = 0.0;       // (v1^2 + v2^2 + S12^2)/2
  double e2 = 0.0;       // (v3^2 + S13^2 + S23^2)/2
  double total = 0.0;
  double with_gravity = 0.0;  // total + g x3
};

/// v = (v1,v2,v3), spin = (S12,S13,S23).
Energies energy_monitor(const Vec3& v, const Vec3& spin, double x3, double g);

}  // namespace nhb
