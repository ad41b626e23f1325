"""No-slip billiards and nonholonomic rolling."""

from ._core import (
    CrossSection,
    InertiaParams,
    NhbError,
    beta_from_gamma,
    check_config,
    collide_2d,
    collide_general,
    eta_from_gamma,
    eta_matched_to,
    gamma_from_beta,
    gamma_from_eta,
    match_inertia,
    run_config,
    trajectory_2d,
)

__all__ = [
    "CrossSection",
    "InertiaParams",
    "NhbError",
    "beta_from_gamma",
    "check_config",
    "collide_2d",
    "collide_general",
    "eta_from_gamma",
    "eta_matched_to",
    "gamma_from_beta",
    "gamma_from_eta",
    "match_inertia",
    "run_config",
    "trajectory_2d",
]
