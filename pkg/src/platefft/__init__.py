"""Fourier-space homogenization of periodic plate-bending problems."""

from .fieldio import FieldFormatError, read_field, write_field
from .green import (
    FrequencyGrid,
    SkewPotential,
    SpectralField,
    build_skew_potential,
    dirac_sobolev_partial_sum,
    gamma_apply,
    gamma_symbol,
    green_evaluate,
    green_fourier_coefficient,
    l2_inner,
    reconstruct_from_skew,
    weyl_decompose,
)
from .homogenize import (
    BoundsReport,
    BracketVerdict,
    EffectiveTensor,
    NonConvergenceError,
    analytic_chessboard,
    analytic_laminate,
    bracket_check,
    effective_tensor,
    voigt_reuss_bounds,
)
from .mandel import SingularTensorError, StiffTensor4, SymTensor2, double_contract
from .microstructure import (
    CoefficientField,
    MicrostructureFormatError,
    PhaseTable,
    generate_chessboard,
    generate_inclusion,
    generate_laminate,
    load_microstructure,
    save_microstructure,
)
from .solver import (
    CellSolution,
    ConvergenceHistory,
    ReferenceMedium,
    SolverConfig,
    apriori_bound,
    estimate_spectral_radius,
    select_reference,
    series_factor,
    solve_cell,
    spectral_bound,
)

__version__ = "0.1.0"

__all__ = [
    "BoundsReport",
    "BracketVerdict",
    "CellSolution",
    "CoefficientField",
    "ConvergenceHistory",
    "EffectiveTensor",
    "FieldFormatError",
    "FrequencyGrid",
    "MicrostructureFormatError",
    "NonConvergenceError",
    "PhaseTable",
    "ReferenceMedium",
    "SingularTensorError",
    "SkewPotential",
    "SolverConfig",
    "SpectralField",
    "StiffTensor4",
    "SymTensor2",
    "analytic_chessboard",
    "analytic_laminate",
    "apriori_bound",
    "bracket_check",
    "build_skew_potential",
    "dirac_sobolev_partial_sum",
    "double_contract",
    "effective_tensor",
    "estimate_spectral_radius",
    "gamma_apply",
    "gamma_symbol",
    "generate_chessboard",
    "generate_inclusion",
    "generate_laminate",
    "green_evaluate",
    "green_fourier_coefficient",
    "l2_inner",
    "load_microstructure",
    "read_field",
    "reconstruct_from_skew",
    "save_microstructure",
    "select_reference",
    "series_factor",
    "solve_cell",
    "spectral_bound",
    "voigt_reuss_bounds",
    "weyl_decompose",
    "write_field",
]
