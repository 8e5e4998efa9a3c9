"""Python access to the needle decomposition library."""

from ._needle import (
    NeedleError,
    concavity_gap,
    lambda_of,
    model_profile,
    profile_identity_gap,
    quantify_cap,
    run_criterion,
    run_experiment,
    solve_eta_N,
    validate_exponents,
)

__all__ = [
    "NeedleError",
    "concavity_gap",
    "lambda_of",
    "model_profile",
    "profile_identity_gap",
    "quantify_cap",
    "run_criterion",
    "run_experiment",
    "solve_eta_N",
    "validate_exponents",
]
