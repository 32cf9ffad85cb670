"""Stable differentiation of noisy sampled functions.

Three regularized solvers share one grid and norm convention:

* :func:`~stablediff.closedform.differentiate_first_method` -- closed-form
  solution of the regularized Volterra equation with an a-priori parameter.
* :func:`~stablediff.dsm.dsm_solve` -- iterative dynamical-systems scheme with
  discrepancy-principle stopping.
* :func:`~stablediff.vr.vr_discrepancy_search` -- Tikhonov baseline.
"""

from .closedform import (
    FirstMethodConfig,
    alpha_apriori,
    differentiate_first_method,
    halfline_solution,
)
from .dsm import DsmConfig, DsmResult, StopReason, dsm_solve, find_a0
from .errors import (
    DegenerateInputError,
    InvalidArgumentError,
    NoConvergenceError,
    NumericalFailureError,
)
from .methods import DerivativeEstimate, differentiate
from .operators import (
    DenseOperator,
    OperatorKind,
    adjoint,
    condition_number,
    green_kernel,
    green_matrix,
    op_norm,
    solve_shifted_spd,
    volterra_matrix,
)
from .signal import (
    DeterministicCosine,
    Grid,
    SampledSignal,
    ScaledGaussian,
    add_cosine_noise,
    add_scaled_gaussian_noise,
    apply_noise,
    l2_norm,
    make_grid,
    rel_error,
)
from .vr import VrLimits, VrResult, vr_discrepancy_search, vr_solve

__version__ = "0.1.0"

__all__ = [
    "DegenerateInputError",
    "DenseOperator",
    "DerivativeEstimate",
    "DeterministicCosine",
    "DsmConfig",
    "DsmResult",
    "FirstMethodConfig",
    "Grid",
    "InvalidArgumentError",
    "NoConvergenceError",
    "NumericalFailureError",
    "OperatorKind",
    "SampledSignal",
    "ScaledGaussian",
    "StopReason",
    "VrLimits",
    "VrResult",
    "add_cosine_noise",
    "add_scaled_gaussian_noise",
    "adjoint",
    "alpha_apriori",
    "apply_noise",
    "condition_number",
    "differentiate",
    "differentiate_first_method",
    "dsm_solve",
    "halfline_solution",
    "find_a0",
    "green_kernel",
    "green_matrix",
    "l2_norm",
    "make_grid",
    "op_norm",
    "rel_error",
    "solve_shifted_spd",
    "volterra_matrix",
    "vr_discrepancy_search",
    "vr_solve",
]
