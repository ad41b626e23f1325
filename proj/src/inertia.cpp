#include "nhb/inertia.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "nhb/errors.hpp"

namespace nhb {

namespace {

void require_gamma(double gamma) {
  if (!std::isfinite(gamma) || gamma < 0.0) {
    std::ostringstream os;
    os << "gamma must be finite and >= 0, got " << gamma;
    fail(ErrorKind::Domain, os.str());
  }
}

void require_eta(double eta) {
  if (!std::isfinite(eta) || eta < 0.0 || eta >= 1.0) {
    std::ostringstream os;
    os << "eta must lie in [0,1), got " << eta;
    fail(ErrorKind::Domain, os.str());
  }
}

}  // namespace

BetaPair beta_from_gamma(double gamma) {
  require_gamma(gamma);
  if (std::isinf(gamma)) return {-1.0, 0.0};
  const double g2 = gamma * gamma;
  const double d = 1.0 + g2;
  return {(1.0 - g2) / d, 2.0 * gamma / d};
}

double eta_from_gamma(double gamma) {
  require_gamma(gamma);
  return gamma / std::sqrt(1.0 + gamma * gamma);
}

double gamma_from_eta(double eta) {
  require_eta(eta);
  return eta / std::sqrt((1.0 - eta) * (1.0 + eta));
}

double gamma_from_beta(double beta) {
  if (!std::isfinite(beta) || beta < 0.0 || beta >= std::numbers::pi) {
    std::ostringstream os;
    os << "beta must lie in [0,pi), got " << beta;
    fail(ErrorKind::Domain, os.str());
  }
  return std::tan(0.5 * beta);
}

double match_inertia(double eta_roll) {
  require_eta(eta_roll);
  // cos(beta(gamma)) = cos(pi*eta) with beta = 2 atan(gamma)
  return std::tan(0.5 * std::numbers::pi * eta_roll);
}

double eta_matched_to(double gamma_noslip) {
  require_gamma(gamma_noslip);
  return 2.0 * std::atan(gamma_noslip) / std::numbers::pi;
}

double thin_shell_eta(int dim) {
  if (dim < 1) fail(ErrorKind::Domain, "dimension must be positive");
  return std::sqrt(2.0 / (2.0 + dim));
}

InertiaParams::InertiaParams(double gamma) : gamma_(gamma) {
  const BetaPair b = beta_from_gamma(gamma);
  c_beta_ = b.c;
  s_beta_ = b.s;
  eta_ = eta_from_gamma(gamma);
}

InertiaParams InertiaParams::from_gamma(double gamma) { return InertiaParams(gamma); }

InertiaParams InertiaParams::from_beta(double beta) { return InertiaParams(gamma_from_beta(beta)); }

InertiaParams InertiaParams::from_eta(double eta) {
  InertiaParams p(gamma_from_eta(eta));
  p.eta_ = eta;  // keep the caller's value exactly
  return p;
}

double InertiaParams::beta() const { return std::atan2(s_beta_, c_beta_); }

bool InertiaParams::exceeds_thin_shell(int dim) const { return eta_ > thin_shell_eta(dim); }

}  // namespace nhb
