"""
Optimal Gaussian and Gauss-Radau quadrature for even-degree spline spaces.

Rules are derived by merging small directly solved blocks and deforming the
knot vector towards the target while tracking nodes and weights. For two
uniform families a periodic asymptotic rule is available in closed form.
"""
from .asymptotic import (
    AsymptoticRule,
    boundary_depth,
    compose_finite,
    solve_asymptotic_4_0,
    solve_asymptotic_6_1,
)
from .blocks import (
    BlockSpec,
    DerivationError,
    gauss_block_6_1,
    radau_block_4_0,
    solve_block,
)
from .homotopy import HomotopyConfig, TraceError, derive_rule, knot_schedule, trace
from .quadrature import (
    QuadratureRule,
    ResidualReport,
    affine_map,
    apply,
    reflect_symmetric,
    residual_norm,
    residuals,
    verify,
)
from .rulefile import RuleFile, load, save
from .solver import ConvergenceError
from .spline import (
    GalerkinSpec,
    KnotVector,
    SplineSpace,
    basis_eval,
    basis_integral,
    dimension,
    galerkin_target,
    open_uniform,
    optimal_node_count,
)

__all__ = [
    "AsymptoticRule",
    "BlockSpec",
    "ConvergenceError",
    "DerivationError",
    "GalerkinSpec",
    "HomotopyConfig",
    "KnotVector",
    "QuadratureRule",
    "ResidualReport",
    "RuleFile",
    "SplineSpace",
    "TraceError",
    "affine_map",
    "apply",
    "basis_eval",
    "basis_integral",
    "boundary_depth",
    "compose_finite",
    "derive_rule",
    "dimension",
    "galerkin_target",
    "gauss_block_6_1",
    "knot_schedule",
    "load",
    "open_uniform",
    "optimal_node_count",
    "radau_block_4_0",
    "reflect_symmetric",
    "residual_norm",
    "residuals",
    "save",
    "solve_asymptotic_4_0",
    "solve_asymptotic_6_1",
    "solve_block",
    "trace",
    "verify",
]
