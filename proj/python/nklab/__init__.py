"""Spectral laboratory for the nonlocal Korteweg system.

Thin wrapper over the C++ core: frequency thresholds of the linearized
system, hybrid Besov norms, the exact per-mode propagator, and the
Lagrangian capillary commutator.
"""

from nklab._core import (  # noqa: F401
    Field,
    Flow,
    ModeSymbol,
    PhysicalParams,
    besov_norm,
    bracket_chain_holds,
    capillary_commutator,
    capillary_op,
    capillary_symbol,
    compose,
    evolve_mode,
    field_from_samples,
    g_eps,
    gamma_pair,
    h_decay,
    hybrid_norm,
    medium_regime_m,
    mode_symbol,
    propagator_matrix,
    random_field,
    root_a,
    shear_flow,
    threshold_asymptote,
    threshold_report,
    threshold_x,
    threshold_y,
    tilde_norm,
    translation_flow,
    velocity_identity_residual,
)

__all__ = [
    "Field",
    "Flow",
    "ModeSymbol",
    "PhysicalParams",
    "besov_norm",
    "bracket_chain_holds",
    "capillary_commutator",
    "capillary_op",
    "capillary_symbol",
    "compose",
    "evolve_mode",
    "field_from_samples",
    "g_eps",
    "gamma_pair",
    "h_decay",
    "hybrid_norm",
    "medium_regime_m",
    "mode_symbol",
    "propagator_matrix",
    "random_field",
    "root_a",
    "shear_flow",
    "threshold_asymptote",
    "threshold_report",
    "threshold_x",
    "threshold_y",
    "tilde_norm",
    "translation_flow",
    "velocity_identity_residual",
]
