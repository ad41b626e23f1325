#pragma once

// Moment-of-inertia parametrizations of a rotationally symmetric ball.
//
//   gamma = sqrt(2*lambda)/r          mass-distribution parameter (canonical)
//   beta  = 2*atan(gamma)             characteristic collision angle,
//                                     cos(beta) = (1-g^2)/(1+g^2), sin(beta) = 2g/(1+g^2)
//   eta   = gamma/sqrt(1+gamma^2)     rolling deformation parameter, in [0,1)
//
// A no-slip ball in dimension n and a rolling ball in dimension n+1 are
// matched when beta_noslip = pi * eta_roll.

namespace nhb {

struct BetaPair {
  double c;  // cos(beta)
  double s;  // sin(beta)
};

BetaPair beta_from_gamma(double gamma);
double eta_from_gamma(double gamma);
double gamma_from_eta(double eta);
double gamma_from_beta(double beta);

/// gamma of the n-dimensional no-slip ball matched to a rolling ball with parameter eta_roll.
double match_inertia(double eta_roll);
/// Inverse of match_inertia.
double eta_matched_to(double gamma_noslip);

/// eta for a ball of dimension `dim` whose mass sits on a thin surface shell.
double thin_shell_eta(int dim);

class InertiaParams {
 public:
  InertiaParams() = default;

  static InertiaParams from_gamma(double gamma);
  static InertiaParams from_beta(double beta);
  static InertiaParams from_eta(double eta);

  double gamma() const { return gamma_; }
  double c_beta() const { return c_beta_; }
  double s_beta() const { return s_beta_; }
  double beta() const;
  double eta() const { return eta_; }

  /// True when eta exceeds the thin-shell value for a ball of dimension `dim`
  /// (mass extending beyond the contact radius, as in a yo-yo).
  bool exceeds_thin_shell(int dim) const;

  friend bool operator==(const InertiaParams&, const InertiaParams&) = default;

 private:
  explicit InertiaParams(double gamma);

  double gamma_ = 0.0;
  double c_beta_ = 1.0;
  double s_beta_ = 0.0;
  double eta_ = 0.0;
};

}  // namespace nhb
