"""Mandelbrot multiplicative cascades on [0, 1): simulation and checks."""

from ._cascadelab import (
    CascadeError,
    ConfigError,
    c_alpha,
    front_tracking,
    kpz_dual,
    kpz_solve,
    leaf_weights,
    measure,
    phi,
    phi_tilde,
    q_beta,
    run_experiment,
    stable,
    subordinate,
    tau,
    tau_star,
    total_mass,
    verify,
)

__all__ = [
    "CascadeError",
    "ConfigError",
    "c_alpha",
    "front_tracking",
    "kpz_dual",
    "kpz_solve",
    "leaf_weights",
    "measure",
    "phi",
    "phi_tilde",
    "q_beta",
    "run_experiment",
    "stable",
    "subordinate",
    "tau",
    "tau_star",
    "total_mass",
    "verify",
]
