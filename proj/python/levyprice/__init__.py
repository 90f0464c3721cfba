"""European option pricing under alpha-stable log-price dynamics."""

from ._levyprice import (
    ConvergenceError,
    PriceResult,
    beta_to_theta,
    black_scholes,
    calibrate_csv,
    carr_wu_call,
    in_diamond,
    mc_price,
    mu_fmls,
    price,
    run_cli,
    sample_stable,
    stable_density,
    term_table,
    theta_to_beta,
)

__all__ = [
    "ConvergenceError",
    "PriceResult",
    "beta_to_theta",
    "black_scholes",
    "calibrate_csv",
    "carr_wu_call",
    "in_diamond",
    "mc_price",
    "mu_fmls",
    "price",
    "run_cli",
    "sample_stable",
    "stable_density",
    "term_table",
    "theta_to_beta",
]
