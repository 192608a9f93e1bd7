"""Exact spectra for the oscillator with algebraically decaying mass.

Layers: `exactalg` (rational polynomial arithmetic and root isolation),
`aim_core` (the iterative quantization engine), `fh_oscillator` (model,
closed-form spectrum, eigenfunctions), `sl_oracle` (finite-difference
cross-check), `cli` (command-line front end).
"""
from .aim_core import (
    AimSpectrumReport,
    AimState,
    DeltaPoly,
    aim_eigenvalues,
    aim_iterate,
    aim_seed,
    alpha_at,
    eigenfunction_via_alpha,
    quantization_delta,
)
from .exactalg import (
    BiPoly,
    RootInterval,
    ZeroPolynomial,
    isolate_real_roots,
    poly_arith,
    poly_diff_tau,
    poly_eval,
    refine_root,
)
from .fh_oscillator import (
    EigenFunction,
    ModelParams,
    SpectrumEntry,
    aim_inputs,
    bound_state_info,
    eigen_polynomial,
    normalization_constant,
    reduce_dimensionless,
    residual_check,
    spectrum_closed_dimensionless,
    spectrum_closed_physical,
    wavefunction_eval,
)
from .sl_oracle import (
    Grid,
    OracleResult,
    TridiagOp,
    converge_study,
    discretize,
    eigen_count_below,
    lowest_eigenvalues,
)

__all__ = [
    "AimSpectrumReport", "AimState", "BiPoly", "DeltaPoly", "EigenFunction",
    "Grid", "ModelParams", "OracleResult", "RootInterval", "SpectrumEntry",
    "TridiagOp", "ZeroPolynomial", "aim_eigenvalues", "aim_inputs",
    "aim_iterate", "aim_seed", "alpha_at", "bound_state_info",
    "converge_study", "discretize", "eigen_count_below",
    "eigen_polynomial", "eigenfunction_via_alpha", "isolate_real_roots",
    "lowest_eigenvalues", "normalization_constant", "poly_arith",
    "poly_diff_tau", "poly_eval", "quantization_delta",
    "reduce_dimensionless", "refine_root", "residual_check",
    "spectrum_closed_dimensionless", "spectrum_closed_physical",
    "wavefunction_eval",
]
